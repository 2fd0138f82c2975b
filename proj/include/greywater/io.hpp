#pragma once

// Flat-file formats: scenario text, pH calibration CSV, trace CSV, and the
// plain-text metrics summary.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "greywater/calib.hpp"
#include "greywater/error.hpp"
#include "greywater/scenario.hpp"

namespace greywater {

inline constexpr std::string_view kTraceHeader =
  "time_s,true_ntu,true_ph,turb_v,ph_v,echo_s,meas_ntu,meas_ph,valve,to_tank_l,to_drain_l,tank_level_l";

namespace detail {

inline std::string_view trim(std::string_view s) noexcept
{
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split_fields(std::string_view line)
{
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) {
      break;
    }
    start = comma + 1;
  }
  return out;
}

inline double parse_double(std::string_view text, std::size_t line, std::string_view what)
{
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc{} || ptr != end || !std::isfinite(value)) {
    throw ParseError("invalid " + std::string(what) + " '" + std::string(text) + "'", line);
  }
  return value;
}

inline std::uint64_t parse_u64(std::string_view text, std::size_t line, std::string_view what)
{
  std::uint64_t value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc{} || ptr != end) {
    throw ParseError("invalid " + std::string(what) + " '" + std::string(text) + "'", line);
  }
  return value;
}

/// Shortest decimal text that reads back to the same double.
inline void put_exact(std::ostream& os, double value)
{
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  os.write(buf, ptr - buf);
}

inline std::string read_file(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError("cannot open '" + path + "'");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template<typename LineFn>
void for_each_line(std::string_view text, LineFn&& fn)
{
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      nl = text.size();
    }
    ++line_no;
    fn(text.substr(start, nl - start), line_no);
    start = nl + 1;
  }
}

}  // namespace detail

/// Parses a `key=value` override as given to `--set`.
[[nodiscard]] inline Setting parse_setting(std::string_view text)
{
  const auto eq = text.find('=');
  if (eq == std::string_view::npos) {
    throw ParseError("expected key=value, got '" + std::string(text) + "'");
  }
  Setting s{ std::string(detail::trim(text.substr(0, eq))), 0.0 };
  s.value = detail::parse_double(detail::trim(text.substr(eq + 1)), 0, s.key);
  SimulationSetup probe;
  apply_setting(probe, s);  // rejects unknown keys
  return s;
}

/// Scenario file grammar, one directive per line:
///
///   seed,<integer>
///   config,<key>,<value>
///   segment,<name>,<turbidity_ntu>,<ph>,<volume_l>,<flow_lpm>
///   flush,<time_s>
///
/// Blank lines and lines starting with '#' are ignored.
[[nodiscard]] inline Scenario parse_scenario(std::string_view text)
{
  Scenario sc;
  SimulationSetup probe;
  detail::for_each_line(text, [&](std::string_view raw, std::size_t line) {
    const auto body = detail::trim(raw);
    if (body.empty() || body.front() == '#') {
      return;
    }
    const auto f = detail::split_fields(body);
    const auto expect = [&](std::size_t n) {
      if (f.size() != n) {
        throw ParseError("'" + std::string(f[0]) + "' expects " + std::to_string(n - 1) +
                           " fields, got " + std::to_string(f.size() - 1),
                         line);
      }
    };
    if (f[0] == "seed") {
      expect(2);
      sc.seed = detail::parse_u64(f[1], line, "seed");
    } else if (f[0] == "config") {
      expect(3);
      Setting s{ std::string(f[1]), detail::parse_double(f[2], line, f[1]) };
      try {
        apply_setting(probe, s);
      } catch (const ParseError& e) {
        throw ParseError(e.what(), line);
      }
      sc.config_overrides.push_back(std::move(s));
    } else if (f[0] == "segment") {
      expect(6);
      if (f[1].empty()) {
        throw ParseError("segment name is empty", line);
      }
      Segment seg;
      seg.substance.name = std::string(f[1]);
      seg.substance.turbidity = { detail::parse_double(f[2], line, "turbidity") };
      seg.substance.ph = { detail::parse_double(f[3], line, "pH") };
      seg.volume = detail::parse_double(f[4], line, "volume");
      seg.flow = detail::parse_double(f[5], line, "flow");
      try {
        seg.substance.fluid().validate();
      } catch (const RangeError& e) {
        throw ParseError(e.what(), line);
      }
      if (!(seg.volume > 0.0) || !(seg.flow > 0.0)) {
        throw ParseError("segment volume and flow must be positive", line);
      }
      sc.segments.push_back(std::move(seg));
    } else if (f[0] == "flush") {
      expect(2);
      const double t = detail::parse_double(f[1], line, "flush time");
      if (t < 0.0) {
        throw ParseError("flush time must be non-negative", line);
      }
      sc.flush_schedule.push_back(t);
    } else {
      throw ParseError("unknown directive '" + std::string(f[0]) + "'", line);
    }
  });
  if (sc.segments.empty()) {
    throw ParseError("scenario has no segments");
  }
  return sc;
}

[[nodiscard]] inline Scenario load_scenario(const std::string& path)
{
  return parse_scenario(detail::read_file(path));
}

/// `voltage,ph` CSV with a header line.
[[nodiscard]] inline std::vector<CalibrationPoint> parse_calibration_csv(std::string_view text)
{
  std::vector<CalibrationPoint> points;
  bool header_seen = false;
  detail::for_each_line(text, [&](std::string_view raw, std::size_t line) {
    const auto body = detail::trim(raw);
    if (body.empty()) {
      return;
    }
    if (!header_seen) {
      if (body != "voltage,ph") {
        throw ParseError("expected header 'voltage,ph'", line);
      }
      header_seen = true;
      return;
    }
    const auto f = detail::split_fields(body);
    if (f.size() != 2) {
      throw ParseError("expected 2 fields", line);
    }
    points.push_back({ detail::parse_double(f[0], line, "voltage"), detail::parse_double(f[1], line, "pH") });
  });
  if (!header_seen) {
    throw ParseError("calibration file is empty");
  }
  return points;
}

inline void write_trace(std::ostream& os, const std::vector<TraceRecord>& trace)
{
  os << kTraceHeader << '\n';
  for (const auto& r : trace) {
    detail::put_exact(os, r.time);
    os << ',';
    detail::put_exact(os, r.true_fluid.turbidity.value);
    os << ',';
    detail::put_exact(os, r.true_fluid.ph.value);
    os << ',';
    detail::put_exact(os, r.frame.turbidity_voltage);
    os << ',';
    detail::put_exact(os, r.frame.ph_voltage);
    os << ',';
    detail::put_exact(os, r.frame.echo_time);
    os << ',';
    if (r.measured.turbidity) {
      detail::put_exact(os, r.measured.turbidity->value);
    }
    os << ',';
    if (r.measured.ph) {
      detail::put_exact(os, r.measured.ph->value);
    }
    os << ',' << to_string(r.valve) << ',';
    detail::put_exact(os, r.to_tank);
    os << ',';
    detail::put_exact(os, r.to_drain);
    os << ',';
    detail::put_exact(os, r.tank_level);
    os << '\n';
  }
}

/// Reads a trace written by write_trace. Tank fill is not stored, so
/// QualityReading::tank_fill is left at zero.
[[nodiscard]] inline std::vector<TraceRecord> parse_trace(std::string_view text)
{
  std::vector<TraceRecord> trace;
  bool header_seen = false;
  detail::for_each_line(text, [&](std::string_view raw, std::size_t line) {
    const auto body = detail::trim(raw);
    if (body.empty()) {
      return;
    }
    if (!header_seen) {
      if (body != kTraceHeader) {
        throw ParseError("unexpected trace header", line);
      }
      header_seen = true;
      return;
    }
    const auto f = detail::split_fields(body);
    if (f.size() != 12) {
      throw ParseError("expected 12 fields, got " + std::to_string(f.size()), line);
    }
    TraceRecord r;
    r.time = detail::parse_double(f[0], line, "time_s");
    r.true_fluid.turbidity = { detail::parse_double(f[1], line, "true_ntu") };
    r.true_fluid.ph = { detail::parse_double(f[2], line, "true_ph") };
    r.frame.timestamp = r.time;
    r.frame.turbidity_voltage = detail::parse_double(f[3], line, "turb_v");
    r.frame.ph_voltage = detail::parse_double(f[4], line, "ph_v");
    r.frame.echo_time = detail::parse_double(f[5], line, "echo_s");
    if (!f[6].empty()) {
      r.measured.turbidity = TurbidityNtu{ detail::parse_double(f[6], line, "meas_ntu") };
    }
    if (!f[7].empty()) {
      r.measured.ph = PhValue{ detail::parse_double(f[7], line, "meas_ph") };
    }
    if (f[8] == "open") {
      r.valve = ValveCommand::open;
    } else if (f[8] == "closed") {
      r.valve = ValveCommand::closed;
    } else {
      throw ParseError("valve must be open or closed", line);
    }
    r.to_tank = detail::parse_double(f[9], line, "to_tank_l");
    r.to_drain = detail::parse_double(f[10], line, "to_drain_l");
    r.tank_level = detail::parse_double(f[11], line, "tank_level_l");
    if (r.to_tank < 0.0 || r.to_drain < 0.0) {
      throw ParseError("negative routed volume", line);
    }
    if (!trace.empty() && !(r.time > trace.back().time)) {
      throw ParseError("time_s must be strictly increasing", line);
    }
    trace.push_back(r);
  });
  if (!header_seen) {
    throw ParseError("trace file is empty");
  }
  if (trace.empty()) {
    throw ParseError("trace has no records");
  }
  // Every record is newline-terminated; a missing final newline means the
  // file was cut short, possibly mid-number.
  if (text.back() != '\n') {
    throw ParseError("truncated final record", trace.size() + 1);
  }
  return trace;
}

[[nodiscard]] inline std::vector<TraceRecord> load_trace(const std::string& path)
{
  return parse_trace(detail::read_file(path));
}

namespace detail {

inline std::string fixed(double value, int decimals)
{
  std::ostringstream ss;
  ss.setf(std::ios::fixed);
  ss.precision(decimals);
  // Avoid printing "-0.000".
  ss << (value == 0.0 ? 0.0 : value);
  return ss.str();
}

}  // namespace detail

/// Human-readable metrics. Litres and seconds use 3 decimals.
[[nodiscard]] inline std::string format_summary(const RunMetrics& m)
{
  std::ostringstream os;
  const auto& c = m.confusion;
  const auto& t = m.trial_confusion;
  os << "steps: " << m.steps << " (counted: " << m.counted_steps << ")\n";
  os << "confusion (steady-state steps):\n";
  os << "  clean_open: " << c.clean_open << '\n';
  os << "  clean_closed: " << c.clean_closed << '\n';
  os << "  waste_open: " << c.waste_open << '\n';
  os << "  waste_closed: " << c.waste_closed << '\n';
  os << "trials:\n";
  os << "  clean_open: " << t.clean_open << '/' << t.clean_total() << '\n';
  os << "  clean_closed: " << t.clean_closed << '/' << t.clean_total() << '\n';
  os << "  waste_open: " << t.waste_open << '/' << t.waste_total() << '\n';
  os << "  waste_closed: " << t.waste_closed << '/' << t.waste_total() << '\n';
  os << "inflow_l: " << detail::fixed(m.total_inflow, 3) << '\n';
  os << "clean_inflow_l: " << detail::fixed(m.clean_inflow, 3) << '\n';
  os << "recovered_l: " << detail::fixed(m.recovered_volume, 3) << '\n';
  os << "misrouted_clean_l: " << detail::fixed(m.misrouted_clean, 3) << '\n';
  os << "misrouted_waste_l: " << detail::fixed(m.misrouted_waste, 3) << '\n';
  os << "max_detection_latency_s: " << detail::fixed(m.max_detection_latency, 3) << '\n';
  return os.str();
}

}  // namespace greywater
