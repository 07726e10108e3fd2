#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace ecwm {

// y = 1 is DIFFERENT, y = 2 is SAME throughout the library.
enum class Answer : int { Different = 1, Same = 2 };

std::string_view to_string(Answer a);
std::optional<Answer> parse_answer(std::string_view s);

// The control statement pair: statement A with known truth, and a
// quasi-randomized statement B whose `yes' probability is 0 or 1.
struct ControlItem {
  Answer answer = Answer::Same;
  bool a_true = true;
  double b_prob = 1.0;  // must be 0 or 1
};

// The answer a respondent who knows both truths gives to the control pair.
inline Answer correct_control_answer(bool a_true, bool b_yes) {
  return a_true == b_yes ? Answer::Same : Answer::Different;
}

struct Respondent {
  std::string id;
  Answer answer = Answer::Same;
  int subsample = 1;  // 1: the p arm, 2: the q arm
  std::optional<ControlItem> control;
  std::optional<double> time_minutes;
};

}  // namespace ecwm
