#include "treebary/error.hpp"

namespace treebary {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Structural: return "structural error";
    case ErrorKind::Domain: return "domain error";
    case ErrorKind::Unsupported: return "unsupported";
    case ErrorKind::Parse: return "parse error";
    case ErrorKind::Inversion: return "inversion error";
    case ErrorKind::NotAMeasure: return "not-a-measure error";
    case ErrorKind::Numeric: return "numeric error";
    case ErrorKind::Internal: return "internal inconsistency";
  }
  return "error";
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Inversion:
    case ErrorKind::NotAMeasure:
    case ErrorKind::Numeric:
    case ErrorKind::Internal:
      return 4;
    default:
      return 3;
  }
}

}  // namespace treebary
