#pragma once

#include <optional>
#include <utility>

#include "greywater/calib.hpp"

namespace greywater {

enum class ValveCommand
{
  closed,
  open,
};

[[nodiscard]] constexpr const char* to_string(ValveCommand valve) noexcept
{
  return valve == ValveCommand::open ? "open" : "closed";
}

struct ControllerConfig
{
  double turbidity_max = 50.0;  // NTU
  double ph_min = 6.0;
  double ph_max = 8.0;
  double tank_full_fraction = 0.95;
  double tank_reactivate_fraction = 0.90;
  double sample_period = 0.2;  // s

  void validate() const
  {
    if (!(turbidity_max > 0.0 && turbidity_max <= kMaxNtu)) {
      throw RangeError("turbidity_max", turbidity_max);
    }
    if (!(ph_min >= kMinPh && ph_min < ph_max)) {
      throw RangeError("ph_min", ph_min);
    }
    if (!(ph_max <= kMaxPh)) {
      throw RangeError("ph_max", ph_max);
    }
    if (!(tank_reactivate_fraction > 0.0 && tank_reactivate_fraction < tank_full_fraction)) {
      throw RangeError("tank_reactivate_fraction", tank_reactivate_fraction);
    }
    if (!(tank_full_fraction <= 1.0)) {
      throw RangeError("tank_full_fraction", tank_full_fraction);
    }
    if (!(sample_period > 0.0) || !std::isfinite(sample_period)) {
      throw RangeError("sample_period", sample_period);
    }
  }
};

/// Loop state carried between controller steps.
///
/// A default-constructed state is a freshly powered controller: valve closed
/// and the startup lockout armed.
struct ControllerState
{
  ValveCommand valve = ValveCommand::closed;
  bool first_reading_complete = false;
  bool tank_locked = false;
};

/// What the controller measured in one loop. A sensor that was not read is
/// empty: both while the tank is locked, pH alone when turbidity is already
/// over the limit.
struct QualityReading
{
  std::optional<TurbidityNtu> turbidity;
  std::optional<PhValue> ph;
  double tank_fill = 0.0;
};

struct StepResult
{
  ValveCommand command;
  QualityReading reading;
  ControllerState state;
};

/// One pass of the control loop.
///
/// Order matters and mirrors the firmware: tank level first, then turbidity,
/// then pH only if turbidity passed. The valve may open only once both quality
/// sensors have produced a reading on an earlier loop.
[[nodiscard]] inline StepResult controller_step(Voltage turbidity_v,
                                                Voltage ph_v,
                                                double echo_time,
                                                const ControllerConfig& config,
                                                const ControllerState& state,
                                                const Calibration& calibration)
{
  detail::require_sensor_voltage(turbidity_v, "turbidity voltage");
  detail::require_sensor_voltage(ph_v, "pH voltage");

  StepResult out{ ValveCommand::closed, {}, state };
  out.reading.tank_fill = tank_fill_fraction(echo_time, calibration.tank);

  if (state.tank_locked) {
    out.state.tank_locked = !(out.reading.tank_fill < config.tank_reactivate_fraction);
  } else if (out.reading.tank_fill >= config.tank_full_fraction) {
    out.state.tank_locked = true;
  }
  if (out.state.tank_locked) {
    out.state.valve = ValveCommand::closed;
    return out;
  }

  const TurbidityNtu ntu = turbidity_ntu(turbidity_v, calibration.turbidity);
  out.reading.turbidity = ntu;
  if (ntu.value > config.turbidity_max) {
    out.state.valve = ValveCommand::closed;
    return out;
  }

  const PhValue ph = ph_value(ph_v, calibration.ph);
  out.reading.ph = ph;
  const bool ph_ok = ph.value >= config.ph_min && ph.value <= config.ph_max;

  // The lockout is judged on the state entering this loop, so the loop that
  // completes the first reading still emits Closed.
  if (ph_ok && state.first_reading_complete) {
    out.command = ValveCommand::open;
  }
  out.state.first_reading_complete = true;
  out.state.valve = out.command;
  return out;
}

/// Stateful wrapper around controller_step for callers that step one loop at
/// a time. Must be stepped sequentially.
class Controller
{
public:
  Controller(ControllerConfig config, Calibration calibration)
    : config_(config)
    , calibration_(std::move(calibration))
  {
    config_.validate();
    calibration_.tank.validate();
  }

  StepResult step(Voltage turbidity_v, Voltage ph_v, double echo_time)
  {
    auto result = controller_step(turbidity_v, ph_v, echo_time, config_, state_, calibration_);
    state_ = result.state;
    return result;
  }

  [[nodiscard]] const ControllerState& state() const noexcept { return state_; }
  [[nodiscard]] const ControllerConfig& config() const noexcept { return config_; }
  [[nodiscard]] const Calibration& calibration() const noexcept { return calibration_; }

private:
  ControllerConfig config_;
  Calibration calibration_;
  ControllerState state_{};
};

enum class WaterClass
{
  clean,
  waste,
};

/// Reference label for a liquid given its true properties.
[[nodiscard]] inline WaterClass classify_ground_truth(TurbidityNtu turbidity,
                                                     PhValue ph,
                                                     const ControllerConfig& config) noexcept
{
  const bool clean = turbidity.value <= config.turbidity_max && ph.value >= config.ph_min &&
                     ph.value <= config.ph_max;
  return clean ? WaterClass::clean : WaterClass::waste;
}

}  // namespace greywater
