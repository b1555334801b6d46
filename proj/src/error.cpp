#include "ppgbench/error.hpp"

namespace ppgbench {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Config: return "config";
    case ErrorKind::DegenerateSignal: return "degenerate-signal";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Profile: return "profile";
    case ErrorKind::Range: return "range";
    case ErrorKind::Format: return "format";
    case ErrorKind::Input: return "input";
    case ErrorKind::DegenerateOutput: return "degenerate-output";
    case ErrorKind::InsufficientData: return "insufficient-data";
    case ErrorKind::Band: return "band";
    case ErrorKind::Run: return "run";
    case ErrorKind::Write: return "write";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + " error: " + what), kind_(kind) {}

}  // namespace ppgbench
