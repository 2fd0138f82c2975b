#pragma once

// Simulated sensors. Turns the true liquid at the sensor into the raw frame
// the firmware would sample: inverse calibration, pH electrode lag, noise.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

#include "greywater/calib.hpp"

namespace greywater {

struct SensorFrame
{
  double timestamp = 0.0;  // s
  double turbidity_voltage = 0.0;
  double ph_voltage = 0.0;
  double echo_time = 0.0;  // s
};

/// Voltage the turbidity sensor outputs for a liquid of the given turbidity.
/// Solves the calibration quadratic on its descending branch.
[[nodiscard]] inline Voltage voltage_of_turbidity(TurbidityNtu y, const QuadraticCurve& curve)
{
  if (!(y.value >= 0.0 && y.value <= kMaxNtu)) {
    throw RangeError("turbidity", y.value);
  }
  const double a = curve.a();
  const double b = curve.b();
  const double discriminant = b * b - 4.0 * a * (curve.c() - y.value);
  return { (-b - std::sqrt(discriminant)) / (2.0 * a) };
}

[[nodiscard]] inline Voltage voltage_of_ph(PhValue p, const LinearCurve& curve)
{
  if (curve.slope == 0.0) {
    throw FitError("pH curve with zero slope cannot be inverted");
  }
  const double v = (p.value - curve.intercept) / curve.slope;
  if (!std::isfinite(v) || v < kMinSensorVolts || v > kMaxSensorVolts) {
    throw RangeError("pH voltage", v);
  }
  return { v };
}

/// pH electrode memory, expressed in litres flushed past the electrode.
///
/// After an acidic or basic exposure the electrode creeps back toward neutral
/// slowly (volume_constant) for as long as the reading is further from 7 than
/// the liquid is. Only a near-neutral liquid (within rinse_tolerance of 7)
/// drags the reading slowly across neutral. Any other movement is fast
/// (excursion_volume_constant). Set both constants equal for a plain
/// first-order lag.
struct PhLagModel
{
  double volume_constant = 0.8;             // L
  double excursion_volume_constant = 0.005; // L
  double rinse_tolerance = 0.5;             // pH
  double last_reading = kNeutralPh;
};

struct PhLagResult
{
  PhValue measured;
  PhLagModel model;
};

[[nodiscard]] inline PhLagResult ph_lag_step(const PhLagModel& model, PhValue true_ph, double volume_since_last)
{
  if (!(volume_since_last >= 0.0)) {
    throw RangeError("flushed volume", volume_since_last);
  }
  if (!(model.volume_constant > 0.0) || !(model.excursion_volume_constant > 0.0)) {
    throw RangeError("pH lag volume constant", std::min(model.volume_constant, model.excursion_volume_constant));
  }
  const auto relax = [&](double from, double volume, double k) {
    return true_ph.value + (from - true_ph.value) * std::exp(-volume / k);
  };
  // Slow while the reading is further from neutral than the truth, fast
  // otherwise. A reading on the far side of neutral switches at the mirror
  // image of the truth.
  const double r = model.last_reading;
  const double t = true_ph.value;
  double measured = 0.0;
  if (std::abs(r - kNeutralPh) <= std::abs(t - kNeutralPh) ||
      ((r - kNeutralPh) * (t - kNeutralPh) < 0.0 && std::abs(t - kNeutralPh) > model.rinse_tolerance)) {
    measured = relax(r, volume_since_last, model.excursion_volume_constant);
  } else if ((r - kNeutralPh) * (t - kNeutralPh) >= 0.0) {
    measured = relax(r, volume_since_last, model.volume_constant);
  } else {
    const double mirror = 2.0 * kNeutralPh - t;
    const double to_mirror = model.volume_constant * std::log((r - t) / (mirror - t));
    measured = volume_since_last <= to_mirror
                 ? relax(r, volume_since_last, model.volume_constant)
                 : relax(mirror, volume_since_last - to_mirror, model.excursion_volume_constant);
  }
  PhLagResult out{ { measured }, model };
  out.model.last_reading = measured;
  return out;
}

/// Seeded Gaussian measurement noise.
///
/// Sigmas are in physical units and are converted to volts with the sensor
/// sensitivity: turbidity at the clean-water end of the curve, pH from the
/// line slope. Above flow_regular_max both sigmas are multiplied by
/// irregular_multiplier.
class NoiseModel
{
public:
  double turbidity_sigma = 5.0;  // NTU
  double ph_sigma = 0.05;        // pH
  double flow_regular_max = 10.0;  // L/min
  double irregular_multiplier = 20.0;
  // Constant pH electrode offset after a long idle period. Off by default.
  double ph_offset_volts = 0.0;

  NoiseModel() { reseed(0); }
  explicit NoiseModel(std::uint64_t seed) { reseed(seed); }

  void reseed(std::uint64_t seed)
  {
    seed_ = seed;
    engine_.seed(seed);
    normal_.reset();
  }

  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }

  void validate() const
  {
    if (!(turbidity_sigma >= 0.0) || !(ph_sigma >= 0.0)) {
      throw RangeError("noise sigma", std::min(turbidity_sigma, ph_sigma));
    }
    if (!(irregular_multiplier >= 1.0)) {
      throw RangeError("irregular_multiplier", irregular_multiplier);
    }
  }

  [[nodiscard]] double turbidity_sigma_volts(const Calibration& cal) const
  {
    const auto& curve = cal.turbidity;
    return turbidity_sigma / std::abs(curve.derivative(curve.zero_voltage()));
  }

  [[nodiscard]] double ph_sigma_volts(const Calibration& cal) const
  {
    return cal.ph.slope == 0.0 ? 0.0 : ph_sigma / std::abs(cal.ph.slope);
  }

  /// Draws one standard-normal sample.
  double draw() { return normal_(engine_); }

private:
  std::uint64_t seed_ = 0;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{ 0.0, 1.0 };
};

[[nodiscard]] inline SensorFrame apply_noise(NoiseModel& model,
                                             const SensorFrame& clean_frame,
                                             double flow,
                                             const Calibration& calibration)
{
  if (!(flow >= 0.0)) {
    throw RangeError("flow", flow);
  }
  const double scale = flow > model.flow_regular_max ? model.irregular_multiplier : 1.0;
  const double turb_sigma = model.turbidity_sigma_volts(calibration) * scale;
  const double ph_sigma = model.ph_sigma_volts(calibration) * scale;

  SensorFrame out = clean_frame;
  // Always draw both samples so the stream position does not depend on the
  // sigmas.
  const double turb_noise = model.draw();
  const double ph_noise = model.draw();
  if (turb_sigma > 0.0) {
    out.turbidity_voltage += turb_sigma * turb_noise;
  }
  if (ph_sigma > 0.0) {
    out.ph_voltage += ph_sigma * ph_noise;
  }
  out.ph_voltage += model.ph_offset_volts;
  out.turbidity_voltage = std::clamp(out.turbidity_voltage, kMinSensorVolts, kMaxSensorVolts);
  out.ph_voltage = std::clamp(out.ph_voltage, kMinSensorVolts, kMaxSensorVolts);
  return out;
}

}  // namespace greywater
