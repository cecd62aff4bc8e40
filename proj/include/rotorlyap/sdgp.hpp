#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rotorlyap/ingest.hpp"

namespace rotorlyap {

struct SdgpConfig {
  double sigma = 0.7;  // severity ratio threshold, in (0, 1]
  void validate() const;
};

struct GeneratorPair {
  int severe = 0;
  int least = 0;
  friend bool operator==(const GeneratorPair&, const GeneratorPair&) = default;
};

struct SdgpSelection {
  std::vector<GeneratorPair> pairs;  // severe ids ascending, shared least id
  int least = 0;
  std::optional<std::string> warning;
};

/// Severely disturbed generator pairs from the clearing-instant speeds
/// (sample 0). Throws Error{NoDisturbance} if every speed is zero and
/// Error{DegenerateEvent} if no severe machine remains after excluding the
/// least disturbed one.
SdgpSelection identify_sdgp(const AlignedDataset& data, const SdgpConfig& config = {});

/// Relative angle/speed of a pair, oriented so that the initial relative
/// speed is non-negative.
struct SdgpTrace {
  GeneratorPair pair;
  bool sign_flipped = false;
  std::vector<double> rel_angle;
  std::vector<double> rel_speed;
  double v0 = 0.0;
  double dt = 1.0 / 120.0;
};

SdgpTrace build_pair_trace(const AlignedDataset& data, const GeneratorPair& pair);

}  // namespace rotorlyap
