#pragma once

// Sensor transfer functions: turbidity volts -> NTU, pH volts -> pH,
// ultrasonic echo time -> tank fill fraction. Everything here is a pure
// function of its arguments.

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "greywater/error.hpp"

namespace greywater {

struct Voltage
{
  double value = 0.0;
};

struct TurbidityNtu
{
  double value = 0.0;
};

struct PhValue
{
  double value = 0.0;
};

inline constexpr double kMinSensorVolts = 0.0;
inline constexpr double kMaxSensorVolts = 5.0;
inline constexpr double kMaxNtu = 3000.0;
inline constexpr double kMinPh = 0.0;
inline constexpr double kMaxPh = 14.0;
inline constexpr double kNeutralPh = 7.0;

namespace detail {

inline void require_sensor_voltage(Voltage v, const char* what)
{
  if (!std::isfinite(v.value) || v.value < kMinSensorVolts || v.value > kMaxSensorVolts) {
    throw RangeError(what, v.value);
  }
}

}  // namespace detail

/// Turbidity transfer curve Y = a V^2 + b V + c, a downward parabola.
///
/// Readings at or below the vertex report the cap (3000 NTU); readings at or
/// beyond the larger root report 0 NTU. Between the two the polynomial is used
/// as is, so the curve is strictly decreasing there. With the default
/// coefficients the polynomial peaks at ~3004.7 NTU, so values just above the
/// vertex slightly exceed the cap.
class QuadraticCurve
{
public:
  QuadraticCurve(double a, double b, double c)
    : a_(a)
    , b_(b)
    , c_(c)
  {
    const double discriminant = b * b - 4.0 * a * c;
    if (!(a < 0.0) || !std::isfinite(b) || !std::isfinite(c) || !(discriminant > 0.0)) {
      throw FitError("turbidity curve must be a downward parabola with two real roots");
    }
    cap_voltage_ = -b / (2.0 * a);
    // a < 0, so the minus branch gives the larger root.
    zero_voltage_ = (-b - std::sqrt(discriminant)) / (2.0 * a);
  }

  [[nodiscard]] double a() const noexcept { return a_; }
  [[nodiscard]] double b() const noexcept { return b_; }
  [[nodiscard]] double c() const noexcept { return c_; }
  [[nodiscard]] double cap_voltage() const noexcept { return cap_voltage_; }
  [[nodiscard]] double zero_voltage() const noexcept { return zero_voltage_; }

  [[nodiscard]] double evaluate(double v) const noexcept { return (a_ * v + b_) * v + c_; }
  [[nodiscard]] double derivative(double v) const noexcept { return 2.0 * a_ * v + b_; }

private:
  double a_;
  double b_;
  double c_;
  double cap_voltage_;
  double zero_voltage_;
};

/// The turbidity curve borrowed from a reference sensor.
[[nodiscard]] inline QuadraticCurve default_turbidity_curve()
{
  return QuadraticCurve{ -1120.4, 5742.3, -4352.9 };
}

struct LinearCurve
{
  double slope = 1.0;
  double intercept = 0.0;

  [[nodiscard]] double evaluate(double v) const noexcept { return slope * v + intercept; }
};

struct CalibrationPoint
{
  double voltage;
  double ph;
};

/// Voltage/pH pairs measured on reference liquids (hydraulic fluid, bleach,
/// degreaser, water, milk, coffee, beer, cola).
inline constexpr std::array<CalibrationPoint, 8> kReferencePhPoints{ {
  { 2.64, 13.0 },
  { 2.80, 12.0 },
  { 2.93, 11.0 },
  { 3.62, 7.0 },
  { 3.72, 6.7 },
  { 3.84, 5.5 },
  { 4.07, 4.5 },
  { 4.42, 2.5 },
} };

struct TankGeometry
{
  double sensor_to_bottom = 0.40;  // m
  double full_distance = 0.05;     // m, sensor to surface when full
  double speed_of_sound = 343.0;   // m/s

  void validate() const
  {
    if (!(full_distance > 0.0) || !(full_distance < sensor_to_bottom)) {
      throw RangeError("tank full_distance", full_distance);
    }
    if (!(speed_of_sound > 0.0) || !std::isfinite(speed_of_sound)) {
      throw RangeError("speed of sound", speed_of_sound);
    }
  }
};

/// Converts a turbidity sensor voltage to NTU.
[[nodiscard]] inline TurbidityNtu turbidity_ntu(Voltage v, const QuadraticCurve& curve)
{
  detail::require_sensor_voltage(v, "turbidity voltage");
  if (v.value <= curve.cap_voltage()) {
    return { kMaxNtu };
  }
  if (v.value >= curve.zero_voltage()) {
    return { 0.0 };
  }
  return { curve.evaluate(v.value) };
}

/// Ordinary least-squares line through (voltage, pH) points.
///
/// Needs at least two points with distinct voltages. Sums are taken about the
/// means, which keeps the fit exact under shifts of either axis.
[[nodiscard]] inline LinearCurve fit_ph_line(std::span<const CalibrationPoint> points)
{
  if (points.size() < 2) {
    throw FitError("pH fit needs at least 2 points, got " + std::to_string(points.size()));
  }
  double mean_v = 0.0;
  double mean_p = 0.0;
  for (const auto& pt : points) {
    if (!std::isfinite(pt.voltage) || !std::isfinite(pt.ph)) {
      throw FitError("pH fit point is not finite");
    }
    mean_v += pt.voltage;
    mean_p += pt.ph;
  }
  const auto n = static_cast<double>(points.size());
  mean_v /= n;
  mean_p /= n;

  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto& pt : points) {
    const double dv = pt.voltage - mean_v;
    sxx += dv * dv;
    sxy += dv * (pt.ph - mean_p);
  }
  if (!(sxx > 0.0)) {
    throw FitError("pH fit needs at least 2 distinct voltages");
  }
  const double slope = sxy / sxx;
  return { slope, mean_p - slope * mean_v };
}

[[nodiscard]] inline double max_abs_residual(std::span<const CalibrationPoint> points,
                                             const LinearCurve& line)
{
  double worst = 0.0;
  for (const auto& pt : points) {
    worst = std::max(worst, std::abs(pt.ph - line.evaluate(pt.voltage)));
  }
  return worst;
}

[[nodiscard]] inline LinearCurve default_ph_curve()
{
  return fit_ph_line(kReferencePhPoints);
}

/// Converts a pH electrode voltage to pH, clamped to [0, 14].
[[nodiscard]] inline PhValue ph_value(Voltage v, const LinearCurve& curve)
{
  detail::require_sensor_voltage(v, "pH voltage");
  return { std::clamp(curve.evaluate(v.value), kMinPh, kMaxPh) };
}

[[nodiscard]] inline double echo_distance(double echo_time, const TankGeometry& geom)
{
  return geom.speed_of_sound * echo_time / 2.0;
}

/// Fraction of the usable tank height that is filled, in [0, 1].
[[nodiscard]] inline double tank_fill_fraction(double echo_time, const TankGeometry& geom)
{
  if (!(echo_time >= 0.0) || !std::isfinite(echo_time)) {
    throw RangeError("echo time", echo_time);
  }
  const double distance = echo_distance(echo_time, geom);
  const double fill =
    (geom.sensor_to_bottom - distance) / (geom.sensor_to_bottom - geom.full_distance);
  return std::clamp(fill, 0.0, 1.0);
}

/// Round-trip echo time for a given fill fraction. Inverse of
/// tank_fill_fraction on [0, 1].
[[nodiscard]] inline double echo_time_for_fill(double fill, const TankGeometry& geom)
{
  const double distance =
    geom.sensor_to_bottom - std::clamp(fill, 0.0, 1.0) * (geom.sensor_to_bottom - geom.full_distance);
  return 2.0 * distance / geom.speed_of_sound;
}

/// Everything the controller and sensor model need to move between volts and
/// physical units.
struct Calibration
{
  QuadraticCurve turbidity = default_turbidity_curve();
  LinearCurve ph = default_ph_curve();
  TankGeometry tank{};
};

}  // namespace greywater
