#include "nozzle/error.hpp"

namespace nozzle {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
  case ErrorKind::InvalidParameter: return "invalid-parameter";
  case ErrorKind::InvalidInput: return "invalid-input";
  case ErrorKind::MeshingFailure: return "meshing-failure";
  case ErrorKind::NotFound: return "not-found";
  case ErrorKind::Unsupported: return "unsupported";
  case ErrorKind::SingularMatrix: return "singular-matrix";
  case ErrorKind::NonConvergence: return "non-convergence";
  case ErrorKind::Parse: return "parse-error";
  case ErrorKind::InsufficientData: return "insufficient-data";
  case ErrorKind::Io: return "io-error";
  case ErrorKind::Config: return "config-error";
  case ErrorKind::Dependency: return "dependency-error";
  }
  return "unknown";
}

} // namespace nozzle
