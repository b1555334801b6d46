#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ppgbench {

enum class ErrorKind {
  Config,
  DegenerateSignal,
  Parse,
  Profile,
  Range,
  Format,
  Input,
  DegenerateOutput,
  InsufficientData,
  Band,
  Run,
  Write,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries a kind so callers (and the
/// bench harness' per-case status field) can tell configuration problems
/// apart from data problems without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace ppgbench
