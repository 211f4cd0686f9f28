#include "fracdiff/error.hpp"

namespace fracdiff {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Parameter: return "parameter";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Index: return "index";
    case ErrorKind::Input: return "input";
    case ErrorKind::Unsupported: return "unsupported";
    case ErrorKind::Config: return "config";
    case ErrorKind::Admissibility: return "admissibility";
    case ErrorKind::Numerical: return "numerical";
    case ErrorKind::OutOfRange: return "out-of-range";
  }
  return "unknown";
}

}  // namespace fracdiff
