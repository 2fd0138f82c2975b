#pragma once

// Closed-loop simulation: sink inflow -> pipe -> simulated sensors ->
// controller -> valve -> tank/drain, plus the metrics computed from the
// resulting trace.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "greywater/calib.hpp"
#include "greywater/control.hpp"
#include "greywater/error.hpp"
#include "greywater/hydro.hpp"
#include "greywater/sensemodel.hpp"

namespace greywater {

struct Substance
{
  std::string name;
  TurbidityNtu turbidity{};
  PhValue ph{ kNeutralPh };

  [[nodiscard]] FluidState fluid() const { return { turbidity, ph }; }
};

struct Segment
{
  Substance substance;
  double volume = 0.0;  // L
  double flow = 0.0;    // L/min
};

/// A `key=value` override, as read from a scenario file or the command line.
struct Setting
{
  std::string key;
  double value = 0.0;
};

struct Scenario
{
  std::vector<Segment> segments;
  std::uint64_t seed = 0;
  std::vector<Setting> config_overrides;
  std::vector<double> flush_schedule;  // s

  void validate() const
  {
    if (segments.empty()) {
      throw ParseError("scenario has no segments");
    }
    for (const auto& seg : segments) {
      if (seg.substance.name.empty()) {
        throw ParseError("segment with empty substance name");
      }
      seg.substance.fluid().validate();
      if (!(seg.volume > 0.0) || !std::isfinite(seg.volume)) {
        throw RangeError("segment volume", seg.volume);
      }
      if (!(seg.flow > 0.0) || !std::isfinite(seg.flow)) {
        throw RangeError("segment flow", seg.flow);
      }
    }
    for (double t : flush_schedule) {
      if (!(t >= 0.0) || !std::isfinite(t)) {
        throw RangeError("flush time", t);
      }
    }
  }
};

/// Every tunable knob of one simulated installation.
struct SimulationSetup
{
  ControllerConfig controller{};
  Calibration calibration{};
  PipeModel pipe{};
  TankModel tank{};
  NoiseModel noise{};
  PhLagModel ph_lag{};

  /// Sensor-perfect variant used by the reproduction tests.
  [[nodiscard]] static SimulationSetup noiseless()
  {
    SimulationSetup setup;
    setup.noise.turbidity_sigma = 0.0;
    setup.noise.ph_sigma = 0.0;
    return setup;
  }
};

inline constexpr std::array<const char*, 12> kSettingKeys{
  "turbidity_max",  "ph_min",        "ph_max",          "tank_full_fraction",
  "tank_reactivate_fraction", "sample_period", "leak_fraction", "pipe_volume",
  "mixing_volume",  "turbidity_sigma", "ph_sigma",      "recovery_volume",
};

/// Applies one override. Unknown keys are a ParseError; range checking is left
/// to the model validators so a whole set can be applied before checking.
inline void apply_setting(SimulationSetup& setup, const Setting& setting)
{
  const auto& k = setting.key;
  const double v = setting.value;
  if (k == "turbidity_max") {
    setup.controller.turbidity_max = v;
  } else if (k == "ph_min") {
    setup.controller.ph_min = v;
  } else if (k == "ph_max") {
    setup.controller.ph_max = v;
  } else if (k == "tank_full_fraction") {
    setup.controller.tank_full_fraction = v;
  } else if (k == "tank_reactivate_fraction") {
    setup.controller.tank_reactivate_fraction = v;
  } else if (k == "sample_period") {
    setup.controller.sample_period = v;
  } else if (k == "leak_fraction") {
    setup.tank.leak_fraction = v;
  } else if (k == "pipe_volume") {
    setup.pipe.volume = v;
  } else if (k == "mixing_volume") {
    setup.pipe.mixing_volume = v;
  } else if (k == "turbidity_sigma") {
    setup.noise.turbidity_sigma = v;
  } else if (k == "ph_sigma") {
    setup.noise.ph_sigma = v;
  } else if (k == "recovery_volume") {
    setup.ph_lag.volume_constant = v;
  } else {
    throw ParseError("unknown config key '" + k + "'");
  }
}

inline void apply_settings(SimulationSetup& setup, const std::vector<Setting>& settings)
{
  for (const auto& s : settings) {
    apply_setting(setup, s);
  }
}

struct TraceRecord
{
  double time = 0.0;  // end of the sample period, s
  FluidState true_fluid{};
  SensorFrame frame{};
  QualityReading measured{};
  ValveCommand valve = ValveCommand::closed;
  double to_tank = 0.0;
  double to_drain = 0.0;
  double tank_level = 0.0;

  [[nodiscard]] double inflow() const noexcept { return to_tank + to_drain; }
};

struct ConfusionCounts
{
  std::size_t clean_open = 0;
  std::size_t clean_closed = 0;
  std::size_t waste_open = 0;
  std::size_t waste_closed = 0;

  void add(WaterClass truth, ValveCommand valve) noexcept
  {
    const bool open = valve == ValveCommand::open;
    if (truth == WaterClass::clean) {
      ++(open ? clean_open : clean_closed);
    } else {
      ++(open ? waste_open : waste_closed);
    }
  }

  [[nodiscard]] std::size_t clean_total() const noexcept { return clean_open + clean_closed; }
  [[nodiscard]] std::size_t waste_total() const noexcept { return waste_open + waste_closed; }
  [[nodiscard]] std::size_t total() const noexcept { return clean_total() + waste_total(); }

  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

/// One steady plateau of a single liquid at the sensor, between transition
/// windows. Its outcome is the valve position at the last steady step.
struct Trial
{
  double start_time = 0.0;
  double end_time = 0.0;
  FluidState fluid{};
  WaterClass truth = WaterClass::clean;
  ValveCommand outcome = ValveCommand::closed;
  std::size_t steps = 0;
  std::optional<double> min_measured_ntu;
  std::optional<double> max_measured_ntu;
  std::optional<double> last_measured_ph;
};

struct RunMetrics
{
  ConfusionCounts confusion;         // per steady-state step
  ConfusionCounts trial_confusion;   // per trial
  std::vector<Trial> trials;
  std::size_t steps = 0;
  std::size_t counted_steps = 0;
  double total_inflow = 0.0;
  double clean_inflow = 0.0;
  double recovered_volume = 0.0;
  double misrouted_clean = 0.0;
  double misrouted_waste = 0.0;
  double max_detection_latency = 0.0;
};

struct RunResult
{
  std::vector<TraceRecord> trace;
  RunMetrics metrics;
};

namespace detail {

inline bool both_sensors_read(const TraceRecord& r) noexcept
{
  return r.measured.turbidity.has_value() && r.measured.ph.has_value();
}

}  // namespace detail

/// Aggregates a trace into confusion counts, volumes and detection latency.
///
/// Steps up to and including the first loop that read both quality sensors
/// (startup lockout) and steps inside a transition window are left out of the
/// confusion counts but still count toward volumes. A transition window opens
/// on the first step where the liquid at the sensor differs from the step
/// before and closes two sample periods after the last such step.
[[nodiscard]] inline RunMetrics compute_metrics(const std::vector<TraceRecord>& trace,
                                                const ControllerConfig& config)
{
  if (trace.empty()) {
    throw ParseError("trace is empty");
  }
  config.validate();

  RunMetrics m;
  m.steps = trace.size();

  const auto truth_of = [&](const TraceRecord& r) {
    return classify_ground_truth(r.true_fluid.turbidity, r.true_fluid.ph, config);
  };

  std::size_t startup_end = trace.size();  // first index outside the lockout
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (detail::both_sensors_read(trace[i])) {
      startup_end = i + 1;
      break;
    }
  }

  const double window = 2.0 * config.sample_period + 1e-9;
  std::optional<double> last_change;
  std::optional<Trial> open_trial;

  const auto close_trial = [&] {
    if (open_trial) {
      m.trial_confusion.add(open_trial->truth, open_trial->outcome);
      m.trials.push_back(*open_trial);
      open_trial.reset();
    }
  };

  for (std::size_t i = 0; i < trace.size(); ++i) {
    const TraceRecord& r = trace[i];
    const WaterClass truth = truth_of(r);

    const double inflow = r.inflow();
    m.total_inflow += inflow;
    if (truth == WaterClass::clean) {
      m.clean_inflow += inflow;
      m.recovered_volume += r.to_tank;
      m.misrouted_clean += r.to_drain;
    } else {
      m.misrouted_waste += r.to_tank;
    }

    if (i > 0 && !(r.true_fluid == trace[i - 1].true_fluid)) {
      last_change = r.time;
    }
    const bool in_transition = last_change && r.time - *last_change <= window;
    const bool counted = i >= startup_end && !in_transition;
    if (!counted) {
      close_trial();
      continue;
    }

    ++m.counted_steps;
    m.confusion.add(truth, r.valve);
    if (!open_trial) {
      open_trial = Trial{};
      open_trial->start_time = r.time;
      open_trial->fluid = r.true_fluid;
      open_trial->truth = truth;
    }
    Trial& t = *open_trial;
    t.end_time = r.time;
    t.outcome = r.valve;
    ++t.steps;
    if (r.measured.turbidity) {
      const double ntu = r.measured.turbidity->value;
      t.min_measured_ntu = std::min(t.min_measured_ntu.value_or(ntu), ntu);
      t.max_measured_ntu = std::max(t.max_measured_ntu.value_or(ntu), ntu);
    }
    if (r.measured.ph) {
      t.last_measured_ph = r.measured.ph->value;
    }
  }
  close_trial();

  // Detection latency: from the start of the sample period in which waste
  // reached the sensor until the end of the first period with the valve closed.
  for (std::size_t i = 1; i < trace.size(); ++i) {
    if (truth_of(trace[i]) != WaterClass::waste || truth_of(trace[i - 1]) != WaterClass::clean) {
      continue;
    }
    std::size_t j = i;
    while (j + 1 < trace.size() && trace[j].valve != ValveCommand::closed) {
      ++j;
    }
    m.max_detection_latency = std::max(m.max_detection_latency, trace[j].time - trace[i - 1].time);
  }
  return m;
}

/// Runs a scenario against a fully resolved setup. The scenario's own
/// config_overrides are not applied here; see apply_settings.
[[nodiscard]] inline RunResult run_scenario(const Scenario& scenario, const SimulationSetup& setup)
{
  scenario.validate();
  setup.controller.validate();
  setup.calibration.tank.validate();
  setup.pipe.validate();
  setup.tank.validate();
  setup.noise.validate();

  const double dt = setup.controller.sample_period;
  constexpr double kVolumeEps = 1e-12;

  Pipe pipe(setup.pipe, scenario.segments.front().substance.fluid());
  PhLagModel lag = setup.ph_lag;
  lag.last_reading = scenario.segments.front().substance.ph.value;
  NoiseModel noise = setup.noise;
  noise.reseed(scenario.seed);
  Controller controller(setup.controller, setup.calibration);
  TankModel tank = setup.tank;

  std::vector<double> flushes = scenario.flush_schedule;
  std::sort(flushes.begin(), flushes.end());
  std::size_t next_flush = 0;

  RunResult result;
  std::size_t seg_index = 0;
  double seg_remaining = scenario.segments.front().volume;

  for (std::size_t step = 0; seg_index < scenario.segments.size(); ++step) {
    try {
      double elapsed = 0.0;
      double inflow = 0.0;
      FluidState at_sensor = pipe.at_sensor();

      while (elapsed < dt && seg_index < scenario.segments.size()) {
        const Segment& seg = scenario.segments[seg_index];
        const double time_left = dt - elapsed;
        const double possible = seg.flow * time_left / 60.0;
        double sub_dt = time_left;
        double volume = possible;
        bool finished = false;
        if (possible >= seg_remaining - kVolumeEps) {
          volume = seg_remaining;
          sub_dt = std::min(time_left, seg_remaining / seg.flow * 60.0);
          finished = true;
        }
        if (sub_dt > 0.0) {
          at_sensor = pipe.step(seg.substance.fluid(), seg.flow, sub_dt);
        }
        elapsed += sub_dt;
        if (!finished || dt - elapsed < 1e-12) {
          elapsed = dt;
        }
        inflow += volume;
        if (finished) {
          ++seg_index;
          if (seg_index < scenario.segments.size()) {
            seg_remaining = scenario.segments[seg_index].volume;
          }
        } else {
          seg_remaining -= volume;
        }
      }

      const double step_start = static_cast<double>(step) * dt;
      const double time = elapsed >= dt ? static_cast<double>(step + 1) * dt : step_start + elapsed;
      const double mean_flow = inflow / (time - step_start) * 60.0;

      const auto lagged = ph_lag_step(lag, at_sensor.ph, inflow);
      lag = lagged.model;

      SensorFrame clean_frame;
      clean_frame.timestamp = time;
      clean_frame.turbidity_voltage =
        voltage_of_turbidity(at_sensor.turbidity, setup.calibration.turbidity).value;
      clean_frame.ph_voltage =
        voltage_of_ph({ std::clamp(lagged.measured.value, kMinPh, kMaxPh) }, setup.calibration.ph).value;
      clean_frame.echo_time = echo_time_for_fill(tank.fill_fraction(), setup.calibration.tank);
      const SensorFrame frame = apply_noise(noise, clean_frame, mean_flow, setup.calibration);

      const StepResult decision =
        controller.step({ frame.turbidity_voltage }, { frame.ph_voltage }, frame.echo_time);

      bool flush = false;
      while (next_flush < flushes.size() && flushes[next_flush] < time) {
        flush = true;
        ++next_flush;
      }
      const TankStepResult routed = route_volume(tank, decision.command, inflow, flush);
      tank = routed.tank;

      TraceRecord rec;
      rec.time = time;
      rec.true_fluid = at_sensor;
      rec.frame = frame;
      rec.measured = decision.reading;
      rec.valve = decision.command;
      rec.to_tank = routed.routed.to_tank;
      rec.to_drain = routed.routed.to_drain;
      rec.tank_level = tank.level;
      result.trace.push_back(rec);
    } catch (const SimulationError&) {
      throw;
    } catch (const std::exception& e) {
      throw SimulationError(step, e.what());
    }
  }

  result.metrics = compute_metrics(result.trace, setup.controller);
  return result;
}

}  // namespace greywater
