#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gazechain {

enum class ErrorKind {
  Parameter,
  Serialization,
  Configuration,
  Funds,
  Ordering,
  Integrity,
  NotFound,
  NotYetFinal,
  State,
  Authorization,
  Delivery,
  Parse,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Parameter: return "parameter";
    case ErrorKind::Serialization: return "serialization";
    case ErrorKind::Configuration: return "configuration";
    case ErrorKind::Funds: return "funds";
    case ErrorKind::Ordering: return "ordering";
    case ErrorKind::Integrity: return "integrity";
    case ErrorKind::NotFound: return "not-found";
    case ErrorKind::NotYetFinal: return "not-yet-final";
    case ErrorKind::State: return "state";
    case ErrorKind::Authorization: return "authorization";
    case ErrorKind::Delivery: return "delivery";
    case ErrorKind::Parse: return "parse";
  }
  return "unknown";
}

/// Every failure in the library is reported as an Error tagged with its kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + " error: " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace gazechain
