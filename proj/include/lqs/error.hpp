#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lqs {

enum class ErrorKind {
  InvalidArgument,
  NotGroupInvertible,
  InconsistentSystem,
  NotSemistable,
  LimitDoesNotExist,
  EigenFailure,
  Parse,
  Io,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the library carries a machine-readable kind so the
// command-line front end can emit structured error records.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace lqs
