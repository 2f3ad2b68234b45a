#pragma once

#include <stdexcept>
#include <string>

namespace switchlab {

// Every failure surfaced by the library carries one of these kinds so the
// CLI can map it to a stable process exit code without string matching.
enum class error_kind {
  config,       // malformed or out-of-range configuration
  budget,       // an enumeration / bit-size budget would be exceeded
  tries,        // a rejection-sampling try cap was exhausted
  data,         // structurally invalid runtime input (bundle, event, ...)
  verification, // a checked property failed to hold
  internal      // broken internal invariant; always a bug
};

class error : public std::runtime_error {
public:
  error(error_kind kind, std::string message)
      : std::runtime_error(std::move(message)), kind_(kind) {}

  error_kind kind() const noexcept { return kind_; }

private:
  error_kind kind_;
};

[[noreturn]] inline void fail(error_kind kind, const std::string& message) {
  throw error(kind, message);
}

inline const char* to_string(error_kind k) {
  switch (k) {
    case error_kind::config: return "config";
    case error_kind::budget: return "budget";
    case error_kind::tries: return "tries";
    case error_kind::data: return "data";
    case error_kind::verification: return "verification";
    case error_kind::internal: return "internal";
  }
  return "unknown";
}

} // namespace switchlab
