#include "rotorlyap/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <type_traits>

#include "json.hpp"

#include "rotorlyap/error.hpp"
#include "rotorlyap/format.hpp"

namespace rotorlyap {

namespace {

struct RawRows {
  int id = 0;
  std::vector<double> times;
  std::vector<double> angles;
  std::vector<double> speeds;
};

std::string at_line(std::size_t line_no) { return "line " + std::to_string(line_no) + ": "; }

template <typename T>
T parse_field(std::string_view field, std::size_t line_no, const char* what) {
  T value{};
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw Error(Errc::Parse, at_line(line_no) + "malformed " + std::string(what) + " '" + std::string(field) + "'");
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(value)) throw Error(Errc::Parse, at_line(line_no) + "non-finite " + std::string(what));
  }
  return value;
}

// Position of `t` in units of samples, snapped to the nearest integer when
// within round-off of it.
double sample_position(const GeneratorTrace& trace, double t) {
  const double pos = (t - trace.t0) / trace.dt;
  const double nearest = std::round(pos);
  return std::abs(pos - nearest) <= 1e-7 ? nearest : pos;
}

double interpolate(const std::vector<double>& series, double pos) {
  const auto i = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(i);
  if (frac == 0.0) return series[i];
  return series[i] + frac * (series[i + 1] - series[i]);
}

GeneratorTrace sample_at(const GeneratorTrace& trace, const std::vector<double>& grid, double t0, double dt) {
  GeneratorTrace out;
  out.id = trace.id;
  out.t0 = t0;
  out.dt = dt;
  out.angles.reserve(grid.size());
  out.speeds.reserve(grid.size());
  const double last = static_cast<double>(trace.size() - 1);
  for (double t : grid) {
    const double pos = sample_position(trace, t);
    if (pos < 0.0 || pos > last) {
      throw Error(Errc::Range, "trace " + std::to_string(trace.id) + ": resampling instant " + format_number(t) +
                                   " s lies outside [" + format_number(trace.t0) + ", " +
                                   format_number(trace.end_time()) + "]");
    }
    out.angles.push_back(interpolate(trace.angles, pos));
    out.speeds.push_back(interpolate(trace.speeds, pos));
  }
  return out;
}

GeneratorTrace to_uniform(RawRows&& rows) {
  const std::size_t n = rows.times.size();
  if (n < 2) throw Error(Errc::Input, "generator " + std::to_string(rows.id) + " has fewer than 2 samples");

  std::vector<double> diffs(n - 1);
  for (std::size_t k = 1; k < n; ++k) diffs[k - 1] = rows.times[k] - rows.times[k - 1];
  std::vector<double> sorted(diffs);
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2), sorted.end());
  double dt = sorted[sorted.size() / 2];
  if (!(dt > 0.0)) throw Error(Errc::Input, "generator " + std::to_string(rows.id) + " has no time step");
  // Refine with a least-squares fit of time against the nominal sample index;
  // the median alone is biased by jitter.
  {
    double sk = 0.0, st = 0.0, skk = 0.0, skt = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double idx = std::round((rows.times[k] - rows.times.front()) / dt);
      const double t = rows.times[k] - rows.times.front();
      sk += idx;
      st += t;
      skk += idx * idx;
      skt += idx * t;
    }
    const double nn = static_cast<double>(n);
    const double denom = nn * skk - sk * sk;
    if (denom > 0.0) {
      const double fitted = (nn * skt - sk * st) / denom;
      if (fitted > 0.0) dt = fitted;
    }
  }
  // Snap to an integer rate when that grid explains every timestamp to within a quarter period.
  const double rounded = std::round(1.0 / dt);
  if (rounded >= 1.0) {
    const double grid = 1.0 / rounded;
    bool fits = true;
    for (std::size_t k = 0; k < n && fits; ++k) {
      const double offset = (rows.times[k] - rows.times.front()) / grid;
      fits = std::abs(offset - std::round(offset)) <= 0.25;
    }
    if (fits) dt = grid;
  }

  for (std::size_t k = 0; k < diffs.size(); ++k) {
    if (diffs[k] > 2.0 * dt * (1.0 + 1e-9)) {
      throw Error(Errc::Gap, "generator " + std::to_string(rows.id) + ": gap of " + format_number(diffs[k]) +
                                 " s after t=" + format_number(rows.times[k]) + " exceeds two sample periods");
    }
  }

  GeneratorTrace trace;
  trace.id = rows.id;
  trace.t0 = rows.times.front();
  trace.dt = dt;
  bool uniform = true;
  for (std::size_t k = 0; k < n && uniform; ++k) {
    uniform = std::abs(rows.times[k] - trace.time(k)) <= 1e-6 * dt;
  }
  if (uniform) {
    trace.angles = std::move(rows.angles);
    trace.speeds = std::move(rows.speeds);
    return trace;
  }

  // Jittered timestamps: piecewise-linear interpolation onto the nominal grid.
  const auto count = static_cast<std::size_t>(std::floor((rows.times.back() - trace.t0) / dt + 1e-6)) + 1;
  std::size_t seg = 0;
  for (std::size_t k = 0; k < count; ++k) {
    const double t = std::min(trace.time(k), rows.times.back());
    while (seg + 2 < n && rows.times[seg + 1] <= t) ++seg;
    const double span = rows.times[seg + 1] - rows.times[seg];
    const double frac = std::clamp((t - rows.times[seg]) / span, 0.0, 1.0);
    trace.angles.push_back(rows.angles[seg] + frac * (rows.angles[seg + 1] - rows.angles[seg]));
    trace.speeds.push_back(rows.speeds[seg] + frac * (rows.speeds[seg + 1] - rows.speeds[seg]));
  }
  return trace;
}

}  // namespace

std::vector<GeneratorTrace> parse_traces(std::istream& in, const ParseOptions& options) {
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::Parse, "line 1: empty trace file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTraceCsvHeader) {
    throw Error(Errc::Parse, at_line(1) + "expected header '" + std::string(kTraceCsvHeader) + "'");
  }

  std::vector<RawRows> rows;
  std::map<int, std::size_t> slot;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    std::vector<std::string_view> fields;
    const std::string_view view(line);
    for (std::size_t start = 0;;) {
      const std::size_t comma = view.find(',', start);
      fields.push_back(view.substr(start, comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (fields.size() != 4) throw Error(Errc::Parse, at_line(line_no) + "expected 4 comma-separated fields");

    const double t = parse_field<double>(fields[0], line_no, "time");
    const int id = parse_field<int>(fields[1], line_no, "gen_id");
    const double angle = parse_field<double>(fields[2], line_no, "delta_rad");
    const double speed = parse_field<double>(fields[3], line_no, "omega_rad_per_s");

    auto [it, inserted] = slot.try_emplace(id, rows.size());
    if (inserted) rows.push_back(RawRows{id, {}, {}, {}});
    RawRows& r = rows[it->second];
    if (!r.times.empty()) {
      if (t == r.times.back()) {
        throw Error(Errc::Duplicate, at_line(line_no) + "duplicate row for gen_id " + std::to_string(id) +
                                         " at t=" + std::string(fields[0]));
      }
      if (t < r.times.back()) {
        throw Error(Errc::Ordering, at_line(line_no) + "timestamp goes backwards for gen_id " + std::to_string(id));
      }
    }
    r.times.push_back(t);
    r.angles.push_back(angle);
    r.speeds.push_back(speed - options.speed_offset);
  }
  if (rows.empty()) throw Error(Errc::Parse, "trace file has no data rows");

  std::vector<GeneratorTrace> traces;
  traces.reserve(rows.size());
  for (auto& r : rows) traces.push_back(to_uniform(std::move(r)));
  return traces;
}

std::vector<GeneratorTrace> load_traces(const std::string& path, const ParseOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open trace file '" + path + "'");
  return parse_traces(in, options);
}

void write_traces(std::ostream& out, std::span<const GeneratorTrace> traces) {
  struct Row {
    double t;
    std::size_t trace;
    std::size_t k;
  };
  std::vector<Row> rows;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    for (std::size_t k = 0; k < traces[i].size(); ++k) rows.push_back({traces[i].time(k), i, k});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.t < b.t; });

  std::string buffer = kTraceCsvHeader;
  buffer += '\n';
  for (const Row& r : rows) {
    const GeneratorTrace& tr = traces[r.trace];
    buffer += format_number(r.t);
    buffer += ',';
    buffer += std::to_string(tr.id);
    buffer += ',';
    buffer += format_number(tr.angles[r.k]);
    buffer += ',';
    buffer += format_number(tr.speeds[r.k]);
    buffer += '\n';
  }
  out << buffer;
}

void save_traces(const std::string& path, std::span<const GeneratorTrace> traces) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot write trace file '" + path + "'");
  write_traces(out, traces);
  if (!out) throw Error(Errc::Io, "failed writing '" + path + "'");
}

void EventMeta::validate() const {
  if (!std::isfinite(fault_time) || !std::isfinite(clear_time) || fault_time < 0.0) {
    throw Error(Errc::Config, "event metadata needs finite fault_time >= 0 and clear_time");
  }
  if (!(clear_time > fault_time)) throw Error(Errc::Config, "event metadata: clear_time must be after fault_time");
}

EventMeta parse_event_meta(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::Parse, std::string("event metadata: ") + e.what());
  }
  EventMeta meta;
  try {
    meta.fault_time = j.at("fault_time").get<double>();
    meta.clear_time = j.at("clear_time").get<double>();
    if (j.contains("label") && !j["label"].is_null()) meta.label = j["label"].get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::Parse, std::string("event metadata: ") + e.what());
  }
  meta.validate();
  return meta;
}

EventMeta load_event_meta(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open event metadata '" + path + "'");
  return parse_event_meta(in);
}

void write_event_meta(std::ostream& out, const EventMeta& meta) {
  nlohmann::ordered_json j;
  j["fault_time"] = meta.fault_time;
  j["clear_time"] = meta.clear_time;
  if (meta.label) j["label"] = *meta.label;
  out << j.dump(2) << '\n';
}

void save_event_meta(const std::string& path, const EventMeta& meta) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot write event metadata '" + path + "'");
  write_event_meta(out, meta);
}

GeneratorTrace resample(const GeneratorTrace& trace, double rate_hz) {
  trace.validate();
  if (!(rate_hz > 0.0)) throw Error(Errc::Range, "resampling rate must be positive");
  const double dt = 1.0 / rate_hz;
  const auto count = static_cast<std::size_t>(std::floor((trace.end_time() - trace.t0) * rate_hz + 1e-9)) + 1;
  std::vector<double> grid(count);
  for (std::size_t k = 0; k < count; ++k) grid[k] = trace.t0 + static_cast<double>(k) * dt;
  return sample_at(trace, grid, trace.t0, dt);
}

GeneratorTrace resample_onto(const GeneratorTrace& trace, std::int64_t start_index, int rate_hz, std::size_t count) {
  trace.validate();
  if (rate_hz <= 0) throw Error(Errc::Range, "resampling rate must be positive");
  std::vector<double> grid(count);
  for (std::size_t k = 0; k < count; ++k) {
    grid[k] = static_cast<double>(start_index + static_cast<std::int64_t>(k)) / rate_hz;
  }
  return sample_at(trace, grid, static_cast<double>(start_index) / rate_hz, 1.0 / rate_hz);
}

std::size_t AlignedDataset::index_of(int id) const {
  auto it = std::find(ids.begin(), ids.end(), id);
  if (it == ids.end()) throw Error(Errc::Lookup, "generator " + std::to_string(id) + " not in dataset");
  return static_cast<std::size_t>(it - ids.begin());
}

std::vector<GeneratorTrace> AlignedDataset::to_traces() const {
  std::vector<GeneratorTrace> out;
  for (std::size_t g = 0; g < ids.size(); ++g) {
    out.push_back(GeneratorTrace{ids[g], time(0), dt(), angles[g], speeds[g]});
  }
  return out;
}

AlignedDataset align(std::span<const GeneratorTrace> traces, const EventMeta& meta, const AlignOptions& options) {
  meta.validate();
  if (options.rate_hz <= 0) throw Error(Errc::Config, "assessment rate must be positive");
  if (traces.empty()) throw Error(Errc::Input, "no traces to align");

  const int rate = options.rate_hz;
  const auto start = static_cast<std::int64_t>(std::ceil(meta.clear_time * rate - 1e-9));
  const double t_start = static_cast<double>(start) / rate;
  const double needed_end = meta.clear_time + options.min_horizon;

  std::vector<int> offenders;
  std::size_t length = 0;
  bool first = true;
  for (const auto& tr : traces) {
    tr.validate();
    const bool covers = tr.t0 <= t_start + 1e-9 && tr.end_time() + 1e-9 >= needed_end;
    if (!covers) {
      offenders.push_back(tr.id);
      continue;
    }
    const auto n = static_cast<std::size_t>(std::floor(tr.end_time() * rate - static_cast<double>(start) + 1e-6)) + 1;
    length = first ? n : std::min(length, n);
    first = false;
  }
  if (!offenders.empty()) {
    std::string list;
    for (int id : offenders) list += (list.empty() ? "" : ", ") + std::to_string(id);
    throw Error(Errc::Coverage, "generators [" + list + "] do not cover [" + format_number(meta.clear_time) + ", " +
                                    format_number(needed_end) + "] s");
  }

  AlignedDataset data;
  data.start_index = start;
  data.rate_hz = rate;
  data.meta = meta;
  for (const auto& tr : traces) {
    GeneratorTrace r = resample_onto(tr, start, rate, length);
    data.ids.push_back(tr.id);
    data.angles.push_back(std::move(r.angles));
    data.speeds.push_back(std::move(r.speeds));
  }
  return data;
}

}  // namespace rotorlyap
