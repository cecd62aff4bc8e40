#include "rotorlyap/sdgp.hpp"

#include <algorithm>
#include <cmath>

#include "rotorlyap/error.hpp"
#include "rotorlyap/format.hpp"

namespace rotorlyap {

void SdgpConfig::validate() const {
  if (!(sigma > 0.0 && sigma <= 1.0)) throw Error(Errc::Config, "sigma must lie in (0, 1]");
}

SdgpSelection identify_sdgp(const AlignedDataset& data, const SdgpConfig& config) {
  config.validate();
  const std::size_t ng = data.generator_count();
  if (ng < 2) throw Error(Errc::Input, "SDGP identification needs at least two generators");
  if (data.length() == 0) throw Error(Errc::Input, "dataset has no samples");

  double peak = 0.0;
  std::size_t least = 0;
  for (std::size_t g = 0; g < ng; ++g) {
    const double mag = std::abs(data.speeds[g][0]);
    peak = std::max(peak, mag);
    const double best = std::abs(data.speeds[least][0]);
    if (mag < best || (mag == best && data.ids[g] < data.ids[least])) least = g;
  }
  if (peak == 0.0) throw Error(Errc::NoDisturbance, "all clearing-instant speed deviations are zero");

  SdgpSelection out;
  out.least = data.ids[least];
  std::vector<int> severe;
  for (std::size_t g = 0; g < ng; ++g) {
    if (g == least) continue;
    if (std::abs(data.speeds[g][0]) / peak > config.sigma) severe.push_back(data.ids[g]);
  }
  if (severe.empty()) throw Error(Errc::DegenerateEvent, "no severely disturbed generator besides the least disturbed one");
  std::sort(severe.begin(), severe.end());
  for (int id : severe) out.pairs.push_back({id, out.least});

  const double least_ratio = std::abs(data.speeds[least][0]) / peak;
  if (least_ratio > 0.5) {
    out.warning = "least disturbed generator " + std::to_string(out.least) + " has |w|/w* = " +
                  format_number(least_ratio) + " (> 0.5); machines may be accelerating together";
  }
  return out;
}

SdgpTrace build_pair_trace(const AlignedDataset& data, const GeneratorPair& pair) {
  const std::size_t s = data.index_of(pair.severe);
  const std::size_t l = data.index_of(pair.least);
  SdgpTrace tr;
  tr.pair = pair;
  tr.dt = data.dt();
  const std::size_t n = data.length();
  tr.rel_angle.resize(n);
  tr.rel_speed.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    tr.rel_angle[i] = data.angles[s][i] - data.angles[l][i];
    tr.rel_speed[i] = data.speeds[s][i] - data.speeds[l][i];
  }
  if (n > 0 && tr.rel_speed[0] < 0.0) {
    tr.sign_flipped = true;
    for (auto& v : tr.rel_angle) v = -v;
    for (auto& v : tr.rel_speed) v = -v;
  }
  tr.v0 = n > 0 ? tr.rel_speed[0] : 0.0;
  return tr;
}

}  // namespace rotorlyap
