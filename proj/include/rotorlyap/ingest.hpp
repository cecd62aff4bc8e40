#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rotorlyap/trace.hpp"

namespace rotorlyap {

inline constexpr const char* kTraceCsvHeader = "t,gen_id,delta_rad,omega_rad_per_s";

struct ParseOptions {
  /// Subtracted from every speed sample; set to the nominal speed (rad/s)
  /// when the source reports absolute rotor speed.
  double speed_offset = 0.0;
};

/// Reads the trace CSV. Rows may interleave generators but must be time
/// ordered per generator. Slightly jittered timestamps are interpolated onto
/// the nominal grid; gaps wider than two sample periods are rejected.
std::vector<GeneratorTrace> parse_traces(std::istream& in, const ParseOptions& options = {});
std::vector<GeneratorTrace> load_traces(const std::string& path, const ParseOptions& options = {});

/// Writes rows ordered by time then by position in `traces`, using shortest
/// round-trip number formatting and LF line endings.
void write_traces(std::ostream& out, std::span<const GeneratorTrace> traces);
void save_traces(const std::string& path, std::span<const GeneratorTrace> traces);

struct EventMeta {
  double fault_time = 0.0;
  double clear_time = 0.0;
  std::optional<std::string> label;

  /// Throws Error{Config} unless clear_time > fault_time >= 0.
  void validate() const;
};

EventMeta parse_event_meta(std::istream& in);
EventMeta load_event_meta(const std::string& path);
void write_event_meta(std::ostream& out, const EventMeta& meta);
void save_event_meta(const std::string& path, const EventMeta& meta);

/// Linear interpolation onto t0 + k / rate for k = 0 .. floor(span * rate).
GeneratorTrace resample(const GeneratorTrace& trace, double rate_hz);

/// Linear interpolation onto `count` grid instants (start_index + k) / rate.
/// Throws Error{Range} if any instant lies outside the trace.
GeneratorTrace resample_onto(const GeneratorTrace& trace, std::int64_t start_index, int rate_hz, std::size_t count);

/// All machines on one grid at `rate_hz`, index 0 being the first grid point
/// at or after the clearing instant.
struct AlignedDataset {
  std::vector<int> ids;
  std::vector<std::vector<double>> angles;
  std::vector<std::vector<double>> speeds;
  std::int64_t start_index = 0;  // absolute grid index of sample 0
  int rate_hz = 120;
  EventMeta meta;

  std::size_t generator_count() const { return ids.size(); }
  std::size_t length() const { return angles.empty() ? 0 : angles.front().size(); }
  double dt() const { return 1.0 / rate_hz; }
  /// Absolute timestamp of sample i.
  double time(std::size_t i) const { return static_cast<double>(start_index + static_cast<std::int64_t>(i)) / rate_hz; }
  /// Throws Error{Lookup} for unknown ids.
  std::size_t index_of(int id) const;
  std::vector<GeneratorTrace> to_traces() const;
};

struct AlignOptions {
  int rate_hz = 120;
  double min_horizon = 0.5;  // s of post-clearing coverage required
};

/// Throws Error{Coverage} naming every generator that does not cover
/// [t_c, t_c + min_horizon].
AlignedDataset align(std::span<const GeneratorTrace> traces, const EventMeta& meta, const AlignOptions& options = {});

}  // namespace rotorlyap
