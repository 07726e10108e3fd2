#include "ecwm/respondent.hpp"

namespace ecwm {

std::string_view to_string(Answer a) {
  return a == Answer::Different ? "DIFFERENT" : "SAME";
}

std::optional<Answer> parse_answer(std::string_view s) {
  if (s == "DIFFERENT") return Answer::Different;
  if (s == "SAME") return Answer::Same;
  return std::nullopt;
}

}  // namespace ecwm
