#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "ecwm/respondent.hpp"

namespace ecwm {

// Column names of the survey CSV.
namespace columns {
inline constexpr const char* kId = "respondent_id";
inline constexpr const char* kAnswer = "answer";
inline constexpr const char* kSubsample = "subsample";
inline constexpr const char* kControlAnswer = "control_answer";
inline constexpr const char* kControlATrue = "control_a_true";
inline constexpr const char* kControlBProb = "control_b_prob";
inline constexpr const char* kTime = "time_minutes";
}  // namespace columns

struct SurveyData {
  std::vector<Respondent> respondents;
  bool has_control = false;  // control columns present in the header
  bool has_time = false;
};

// Header row required. `answer` and `subsample` are mandatory (ConfigError
// naming the column otherwise); malformed cells raise DataError with the line
// number.
SurveyData read_survey_csv(std::istream& in);
SurveyData read_survey_csv(const std::string& path);

// Writes control and time columns when any respondent carries them.
void write_survey_csv(std::ostream& out, std::span<const Respondent> respondents);

// Flat `key = value` document: `#` starts a comment, values may be quoted.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& in);
  static KeyValueConfig load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  std::optional<std::string> get(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  // ConfigError for any key outside `known`.
  void require_known(const std::set<std::string>& known) const;
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

// Shortest decimal text that parses back to the same double.
std::string format_double(double x);

}  // namespace ecwm
