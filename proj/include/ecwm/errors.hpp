#pragma once

#include <stdexcept>
#include <string>

namespace ecwm {

// Broad failure classes. The CLI maps them onto process exit codes.
enum class ErrorKind {
  Domain,      // parameter outside its admissible region
  Design,      // survey design constants unusable (p = .5, control B not in {0,1})
  Data,        // input data insufficient or malformed
  Config,      // missing column, bad option
  Numerical,   // degenerate denominator, unreliable bootstrap
  Internal     // broken consistency identity
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error domain_error(const std::string& w) { return {ErrorKind::Domain, w}; }
inline Error design_error(const std::string& w) { return {ErrorKind::Design, w}; }
inline Error data_error(const std::string& w) { return {ErrorKind::Data, w}; }
inline Error config_error(const std::string& w) { return {ErrorKind::Config, w}; }
inline Error numerical_error(const std::string& w) { return {ErrorKind::Numerical, w}; }
inline Error internal_error(const std::string& w) { return {ErrorKind::Internal, w}; }

}  // namespace ecwm
