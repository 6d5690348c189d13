#ifndef MACO_ERRORS_HPP
#define MACO_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace maco {

enum class ErrorKind {
  InvalidGraph,
  IsolatedNode,
  NotSymmetric,
  NoConvergence,
  TooSmall,
  IndexOutOfRange,
  Overflow,
  Degenerate,
  NonConvergent,
  UnreachableTarget,
  Disconnected,
  BadPartition,
  BadMap,
  ModeMismatch,
  SchemaMismatch,
  UnknownTable,
  Config,
  Io,
};

const char* to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries a kind so callers (and the CLI
/// exit-code mapping) can branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidGraph: return "InvalidGraph";
    case ErrorKind::IsolatedNode: return "IsolatedNode";
    case ErrorKind::NotSymmetric: return "NotSymmetric";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::TooSmall: return "TooSmall";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::Overflow: return "Overflow";
    case ErrorKind::Degenerate: return "Degenerate";
    case ErrorKind::NonConvergent: return "NonConvergent";
    case ErrorKind::UnreachableTarget: return "UnreachableTarget";
    case ErrorKind::Disconnected: return "Disconnected";
    case ErrorKind::BadPartition: return "BadPartition";
    case ErrorKind::BadMap: return "BadMap";
    case ErrorKind::ModeMismatch: return "ModeMismatch";
    case ErrorKind::SchemaMismatch: return "SchemaMismatch";
    case ErrorKind::UnknownTable: return "UnknownTable";
    case ErrorKind::Config: return "Config";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace maco

#endif  // MACO_ERRORS_HPP
