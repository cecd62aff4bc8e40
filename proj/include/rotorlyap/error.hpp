#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rotorlyap {

enum class Errc {
  Parse,
  Ordering,
  Duplicate,
  Gap,
  Range,
  Coverage,
  Topology,
  Setup,
  Config,
  Io,
  NoDisturbance,
  DegenerateEvent,
  Lookup,
  SingularInit,
  Input,
  RefusedPair,
  Timeout,
  NoAssessablePair,
};

std::string_view to_string(Errc code);

/// Single exception type for the library; `code()` tells callers which
/// contract was violated.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace rotorlyap
