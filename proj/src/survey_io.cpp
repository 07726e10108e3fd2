#include "ecwm/survey_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "ecwm/errors.hpp"

namespace ecwm {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

// Splits one CSV line, honouring double-quoted fields with "" escapes.
std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(trim(cur));
  return fields;
}

std::optional<double> parse_number(const std::string& s) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) return std::nullopt;
  return v;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

[[noreturn]] void bad_cell(std::size_t line, const std::string& column, const std::string& value,
                           const std::string& expected) {
  throw data_error("line " + std::to_string(line) + ": column '" + column + "' has value '" + value + "', expected " +
                   expected);
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

SurveyData read_survey_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      header = split_csv(line);
      break;
    }
  }
  if (header.empty()) throw config_error("survey file is empty; a header row is required");
  if (!header.front().empty() && header.front().rfind("\xEF\xBB\xBF", 0) == 0) header.front().erase(0, 3);

  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (!col.emplace(header[i], i).second) throw config_error("duplicate column '" + header[i] + "'");
  }
  auto column = [&](const char* name) -> std::optional<std::size_t> {
    const auto it = col.find(name);
    if (it == col.end()) return std::nullopt;
    return it->second;
  };
  const auto c_answer = column(columns::kAnswer);
  const auto c_sub = column(columns::kSubsample);
  if (!c_answer) throw config_error(std::string("survey is missing required column '") + columns::kAnswer + "'");
  if (!c_sub) throw config_error(std::string("survey is missing required column '") + columns::kSubsample + "'");
  const auto c_id = column(columns::kId);
  const auto c_ctl = column(columns::kControlAnswer);
  const auto c_a = column(columns::kControlATrue);
  const auto c_b = column(columns::kControlBProb);
  const auto c_time = column(columns::kTime);

  SurveyData data;
  data.has_control = c_ctl.has_value();
  data.has_time = c_time.has_value();
  if (c_ctl && (!c_a || !c_b))
    throw config_error(std::string("control_answer requires columns '") + columns::kControlATrue + "' and '" +
                       columns::kControlBProb + "'");

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != header.size())
      throw data_error("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                       " fields, found " + std::to_string(f.size()));
    Respondent r;
    r.id = c_id ? f[*c_id] : std::to_string(data.respondents.size() + 1);

    const auto answer = parse_answer(f[*c_answer]);
    if (!answer) bad_cell(line_no, columns::kAnswer, f[*c_answer], "DIFFERENT or SAME");
    r.answer = *answer;

    const std::string& sub = f[*c_sub];
    if (sub == "1") {
      r.subsample = 1;
    } else if (sub == "2") {
      r.subsample = 2;
    } else {
      bad_cell(line_no, columns::kSubsample, sub, "1 or 2");
    }

    if (c_ctl && !f[*c_ctl].empty()) {
      ControlItem c;
      const auto ca = parse_answer(f[*c_ctl]);
      if (!ca) bad_cell(line_no, columns::kControlAnswer, f[*c_ctl], "DIFFERENT or SAME");
      c.answer = *ca;
      const std::string& a = f[*c_a];
      if (a == "1") {
        c.a_true = true;
      } else if (a == "0") {
        c.a_true = false;
      } else {
        bad_cell(line_no, columns::kControlATrue, a, "0 or 1");
      }
      const auto b = parse_number(f[*c_b]);
      if (!b) bad_cell(line_no, columns::kControlBProb, f[*c_b], "0 or 1");
      c.b_prob = *b;
      r.control = c;
    }

    if (c_time && !f[*c_time].empty()) {
      const auto t = parse_number(f[*c_time]);
      if (!t || !(*t > 0.0)) bad_cell(line_no, columns::kTime, f[*c_time], "a positive number of minutes");
      r.time_minutes = *t;
    }
    data.respondents.push_back(std::move(r));
  }
  return data;
}

SurveyData read_survey_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open survey file '" + path + "'");
  return read_survey_csv(in);
}

void write_survey_csv(std::ostream& out, std::span<const Respondent> respondents) {
  bool control = false;
  bool time = false;
  for (const auto& r : respondents) {
    control = control || r.control.has_value();
    time = time || r.time_minutes.has_value();
  }
  out << columns::kId << ',' << columns::kAnswer << ',' << columns::kSubsample;
  if (control) out << ',' << columns::kControlAnswer << ',' << columns::kControlATrue << ',' << columns::kControlBProb;
  if (time) out << ',' << columns::kTime;
  out << '\n';
  for (const auto& r : respondents) {
    out << csv_escape(r.id) << ',' << to_string(r.answer) << ',' << r.subsample;
    if (control) {
      if (r.control) {
        out << ',' << to_string(r.control->answer) << ',' << (r.control->a_true ? 1 : 0) << ','
            << format_double(r.control->b_prob);
      } else {
        out << ",,,";
      }
    }
    if (time) {
      out << ',';
      if (r.time_minutes) out << format_double(*r.time_minutes);
    }
    out << '\n';
  }
}

KeyValueConfig KeyValueConfig::parse(std::istream& in) {
  KeyValueConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    // Strip comments outside quotes.
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line.erase(i);
        break;
      }
    }
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos || t.front() == '[')
      throw config_error("config line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    if (key.empty()) throw config_error("config line " + std::to_string(line_no) + ": empty key");
    if (cfg.values_.count(key)) throw config_error("config key '" + key + "' given twice");
    cfg.values_[key] = value;
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file '" + path + "'");
  return parse(in);
}

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
  return get(key).value_or(fallback);
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  const auto d = parse_number(*v);
  if (!d) throw config_error("config key '" + key + "' must be a number, got '" + *v + "'");
  return *d;
}

long long KeyValueConfig::get_int(const std::string& key, long long fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  long long out = 0;
  const char* end = v->data() + v->size();
  const auto res = std::from_chars(v->data(), end, out);
  if (res.ec != std::errc() || res.ptr != end)
    throw config_error("config key '" + key + "' must be an integer, got '" + *v + "'");
  return out;
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "on" || *v == "1") return true;
  if (*v == "false" || *v == "off" || *v == "0") return false;
  throw config_error("config key '" + key + "' must be true or false, got '" + *v + "'");
}

void KeyValueConfig::require_known(const std::set<std::string>& known) const {
  for (const auto& [key, value] : values_) {
    if (!known.count(key)) throw config_error("unknown config key '" + key + "'");
  }
}

}  // namespace ecwm
