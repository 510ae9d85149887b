#include "lqs/error.hpp"

namespace lqs {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::NotGroupInvertible: return "not-group-invertible";
    case ErrorKind::InconsistentSystem: return "inconsistent-system";
    case ErrorKind::NotSemistable: return "not-semistable";
    case ErrorKind::LimitDoesNotExist: return "limit-does-not-exist";
    case ErrorKind::EigenFailure: return "eigen-failure";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

}  // namespace lqs
