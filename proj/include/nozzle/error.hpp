#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nozzle {

enum class ErrorKind {
  InvalidParameter,
  InvalidInput,
  MeshingFailure,
  NotFound,
  Unsupported,
  SingularMatrix,
  NonConvergence,
  Parse,
  InsufficientData,
  Io,
  Config,
  Dependency,
};

std::string_view to_string(ErrorKind kind);

/// Base exception for every failure raised by the library. The kind lets
/// callers (the CLI in particular) map failures to exit categories.
class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string &what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string &what) {
  throw Error(kind, what);
}

inline void require(bool condition, ErrorKind kind, const std::string &what) {
  if (!condition)
    throw Error(kind, what);
}

} // namespace nozzle
