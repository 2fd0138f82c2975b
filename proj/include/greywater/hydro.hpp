#pragma once

// Plug-flow pipe between the sink and the sensors, and the toilet tank fed
// through the solenoid valve.

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "greywater/calib.hpp"
#include "greywater/control.hpp"

namespace greywater {

struct FluidState
{
  TurbidityNtu turbidity{};
  PhValue ph{ kNeutralPh };

  friend bool operator==(const FluidState& lhs, const FluidState& rhs) noexcept
  {
    return lhs.turbidity.value == rhs.turbidity.value && lhs.ph.value == rhs.ph.value;
  }

  void validate() const
  {
    if (!(turbidity.value >= 0.0 && turbidity.value <= kMaxNtu)) {
      throw RangeError("turbidity", turbidity.value);
    }
    if (!(ph.value >= kMinPh && ph.value <= kMaxPh)) {
      throw RangeError("pH", ph.value);
    }
  }
};

/// Linear blend: weight 0 gives `from`, weight 1 gives `to`.
[[nodiscard]] inline FluidState blend(const FluidState& from, const FluidState& to, double weight) noexcept
{
  if (weight <= 0.0) {
    return from;
  }
  if (weight >= 1.0) {
    return to;
  }
  return { { from.turbidity.value + (to.turbidity.value - from.turbidity.value) * weight },
           { from.ph.value + (to.ph.value - from.ph.value) * weight } };
}

struct PipeModel
{
  double volume = 0.25;         // L, inlet to sensor
  double mixing_volume = 0.05;  // L, residue crossfade at each boundary

  void validate() const
  {
    if (!(volume > 0.0) || !std::isfinite(volume)) {
      throw RangeError("pipe volume", volume);
    }
    if (!(mixing_volume >= 0.0 && mixing_volume < volume)) {
      throw RangeError("pipe mixing volume", mixing_volume);
    }
  }

  /// Transport delay in seconds at the given flow (L/min).
  [[nodiscard]] double delay(double flow) const { return volume / flow * 60.0; }
};

/// Plug-flow pipe state.
///
/// Positions are measured in litres of cumulative inflow. The parcel at the
/// sensor entered the pipe when the inflow counter read `throughput - volume`.
/// Each time the inlet liquid changes a boundary is recorded; the sensor sees
/// the liquid in front of the boundary fade into the new one over
/// `mixing_volume` once the boundary reaches it.
class Pipe
{
public:
  Pipe(PipeModel model, const FluidState& initial)
    : model_(model)
  {
    model_.validate();
    initial.validate();
    boundaries_.push_back({ -std::numeric_limits<double>::infinity(), initial, initial });
  }

  /// Advances the pipe by dt seconds at `flow` L/min with `inlet` entering,
  /// and returns the liquid now at the sensor.
  FluidState step(const FluidState& inlet, double flow, double dt)
  {
    if (!(flow >= 0.0)) {
      throw RangeError("flow", flow);
    }
    if (!(dt > 0.0)) {
      throw RangeError("time step", dt);
    }
    const double inflow = flow * dt / 60.0;
    if (inflow > 0.0 && !(inlet == boundaries_.back().fluid)) {
      inlet.validate();
      boundaries_.push_back({ throughput_, fluid_at(throughput_), inlet });
    }
    throughput_ += inflow;
    while (boundaries_.size() >= 2 && boundaries_[1].position <= sensor_position()) {
      boundaries_.pop_front();
    }
    return at_sensor();
  }

  [[nodiscard]] FluidState at_sensor() const { return fluid_at(sensor_position()); }

  [[nodiscard]] double throughput() const noexcept { return throughput_; }
  [[nodiscard]] double sensor_position() const noexcept { return throughput_ - model_.volume; }
  [[nodiscard]] const PipeModel& model() const noexcept { return model_; }

private:
  struct Boundary
  {
    double position;
    FluidState entry;  // what the sensor shows just before this boundary arrives
    FluidState fluid;
  };

  [[nodiscard]] FluidState fluid_at(double position) const
  {
    auto it = std::find_if(boundaries_.rbegin(), boundaries_.rend(),
                           [&](const Boundary& b) { return b.position <= position; });
    if (it == boundaries_.rend()) {
      return boundaries_.front().entry;
    }
    if (model_.mixing_volume <= 0.0 || std::isinf(it->position)) {
      return it->fluid;
    }
    return blend(it->entry, it->fluid, (position - it->position) / model_.mixing_volume);
  }

  PipeModel model_;
  std::deque<Boundary> boundaries_;
  double throughput_ = 0.0;
};

inline constexpr double kFlushVolume = 10.0;  // L

struct TankModel
{
  double capacity = 10.0;  // L
  double level = 0.0;      // L
  double leak_fraction = 0.0;

  void validate() const
  {
    if (!(capacity > 0.0) || !std::isfinite(capacity)) {
      throw RangeError("tank capacity", capacity);
    }
    if (!(level >= 0.0 && level <= capacity)) {
      throw RangeError("tank level", level);
    }
    if (!(leak_fraction >= 0.0 && leak_fraction < 1.0)) {
      throw RangeError("leak_fraction", leak_fraction);
    }
  }

  [[nodiscard]] double fill_fraction() const noexcept { return level / capacity; }
};

struct RoutedVolume
{
  double to_tank = 0.0;
  double to_drain = 0.0;
};

struct TankStepResult
{
  TankModel tank;
  RoutedVolume routed;
};

/// Routes `inflow` litres through the valve. A flush request empties up to
/// one flush volume before the new water arrives.
[[nodiscard]] inline TankStepResult route_volume(const TankModel& tank,
                                                 ValveCommand valve,
                                                 double inflow,
                                                 bool flush_request)
{
  if (!(inflow >= 0.0)) {
    throw RangeError("inflow", inflow);
  }
  TankStepResult out{ tank, {} };
  if (flush_request) {
    out.tank.level -= std::min(out.tank.level, kFlushVolume);
  }
  if (valve == ValveCommand::open) {
    const double room = std::max(0.0, out.tank.capacity - out.tank.level);
    out.routed.to_tank = std::min(inflow * (1.0 - out.tank.leak_fraction), room);
  }
  out.routed.to_drain = inflow - out.routed.to_tank;
  out.tank.level = std::min(out.tank.capacity, out.tank.level + out.routed.to_tank);
  return out;
}

[[nodiscard]] inline TankStepResult tank_step(const TankModel& tank,
                                              ValveCommand valve,
                                              double flow,
                                              double dt,
                                              bool flush_request)
{
  if (!(flow >= 0.0)) {
    throw RangeError("flow", flow);
  }
  if (!(dt > 0.0)) {
    throw RangeError("time step", dt);
  }
  return route_volume(tank, valve, flow * dt / 60.0, flush_request);
}

}  // namespace greywater
