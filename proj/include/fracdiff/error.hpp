#pragma once

#include <stdexcept>
#include <string>

namespace fracdiff {

/// Broad failure classes. The CLI maps them onto exit codes.
enum class ErrorKind {
  Parameter,      // out-of-range argument
  Domain,         // evaluation outside a function's domain
  Index,          // invalid node / array index
  Input,          // malformed user data (fields, sources, trajectories)
  Unsupported,    // valid request outside the implemented scope
  Config,         // configuration file problems
  Admissibility,  // kernel or contour admissibility failure
  Numerical,      // resolvent / factorization breakdown
  OutOfRange,     // oracle outside its validated regime
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what, std::string stage = {})
      : std::runtime_error(what), kind_(kind), stage_(std::move(stage)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& stage() const noexcept { return stage_; }

  /// Copy of this error tagged with a pipeline stage (keeps the innermost tag).
  Error with_stage(const std::string& stage) const {
    return Error(kind_, what(), stage_.empty() ? stage : stage_);
  }

 private:
  ErrorKind kind_;
  std::string stage_;
};

inline Error parameter_error(const std::string& m) { return {ErrorKind::Parameter, m}; }
inline Error domain_error(const std::string& m) { return {ErrorKind::Domain, m}; }
inline Error index_error(const std::string& m) { return {ErrorKind::Index, m}; }
inline Error input_error(const std::string& m) { return {ErrorKind::Input, m}; }
inline Error unsupported_error(const std::string& m) { return {ErrorKind::Unsupported, m}; }
inline Error config_error(const std::string& m) { return {ErrorKind::Config, m}; }
inline Error admissibility_error(const std::string& m) { return {ErrorKind::Admissibility, m}; }
inline Error numerical_error(const std::string& m) { return {ErrorKind::Numerical, m}; }
inline Error out_of_range_error(const std::string& m) { return {ErrorKind::OutOfRange, m}; }

}  // namespace fracdiff
