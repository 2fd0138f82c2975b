#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "greywater/calib.hpp"
#include "oracles.hpp"

namespace greywater {
namespace {

TEST(TurbidityCurve, DerivedVertexAndRoot)
{
  const auto curve = default_turbidity_curve();
  // -b/(2a) and the larger quadratic-formula root, computed offline.
  EXPECT_NEAR(curve.cap_voltage(), 2.5626115672973935, 1e-12);
  EXPECT_NEAR(curve.zero_voltage(), 4.2002463660981055, 1e-12);
  EXPECT_LT(curve.cap_voltage(), curve.zero_voltage());
}

TEST(TurbidityCurve, RejectsUpwardParabola)
{
  EXPECT_THROW(QuadraticCurve(1.0, 0.0, -1.0), FitError);
  EXPECT_THROW(QuadraticCurve(-1.0, 0.0, -1.0), FitError);  // no real roots
}

TEST(TurbidityNtu, Examples)
{
  const auto curve = default_turbidity_curve();
  EXPECT_NEAR(turbidity_ntu({ 3.0 }, curve).value, 2790.4, 1e-9);
  EXPECT_EQ(turbidity_ntu({ 2.0 }, curve).value, 3000.0);
  EXPECT_EQ(turbidity_ntu({ 4.9 }, curve).value, 0.0);
  EXPECT_EQ(turbidity_ntu({ 0.0 }, curve).value, 3000.0);
  EXPECT_EQ(turbidity_ntu({ 5.0 }, curve).value, 0.0);
  EXPECT_EQ(turbidity_ntu({ curve.cap_voltage() }, curve).value, 3000.0);
  EXPECT_EQ(turbidity_ntu({ curve.zero_voltage() }, curve).value, 0.0);
}

TEST(TurbidityNtu, OutOfRangeVoltageIsRejected)
{
  const auto curve = default_turbidity_curve();
  EXPECT_THROW((void)turbidity_ntu({ -0.01 }, curve), RangeError);
  EXPECT_THROW((void)turbidity_ntu({ 5.01 }, curve), RangeError);
  EXPECT_THROW((void)turbidity_ntu({ std::nan("") }, curve), RangeError);
  try {
    (void)turbidity_ntu({ 7.5 }, curve);
    FAIL();
  } catch (const RangeError& e) {
    EXPECT_EQ(e.value(), 7.5);
  }
}

TEST(TurbidityNtu, MatchesPolynomialAndIsMonotone)
{
  const auto curve = default_turbidity_curve();
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> volts(0.0, 5.0);
  for (int i = 0; i < 5000; ++i) {
    const double v = volts(rng);
    const double y = turbidity_ntu({ v }, curve).value;
    EXPECT_GE(y, 0.0);
    if (v <= curve.cap_voltage()) {
      EXPECT_EQ(y, 3000.0);
    } else if (v >= curve.zero_voltage()) {
      EXPECT_EQ(y, 0.0);
    } else {
      EXPECT_NEAR(y, oracle::turbidity_polynomial(v), 1e-9);
    }
  }
  double prev = turbidity_ntu({ curve.cap_voltage() + 1e-6 }, curve).value;
  for (double v = curve.cap_voltage() + 1e-3; v < curve.zero_voltage(); v += 1e-3) {
    const double y = turbidity_ntu({ v }, curve).value;
    EXPECT_LT(y, prev) << "at " << v;
    prev = y;
  }
}

TEST(PhFit, ReferenceTableMatchesOracle)
{
  const auto line = fit_ph_line(kReferencePhPoints);
  const auto expected = oracle::normal_equation_fit(kReferencePhPoints);
  EXPECT_NEAR(line.slope, expected.slope, 1e-12);
  EXPECT_NEAR(line.intercept, expected.intercept, 1e-10);
  // Frozen from an offline least-squares solve.
  EXPECT_NEAR(line.slope, -5.892561983471074, 1e-9);
  EXPECT_NEAR(line.intercept, 28.428429752066105, 1e-9);
  EXPECT_NEAR(max_abs_residual(kReferencePhPoints, line), 0.30099173553718117, 1e-9);
  EXPECT_LE(max_abs_residual(kReferencePhPoints, line), 0.5);
}

TEST(PhFit, TrivialLines)
{
  const std::vector<CalibrationPoint> diag{ { 0, 0 }, { 1, 1 } };
  const auto a = fit_ph_line(diag);
  EXPECT_NEAR(a.slope, 1.0, 1e-15);
  EXPECT_NEAR(a.intercept, 0.0, 1e-15);

  const std::vector<CalibrationPoint> flat{ { 1, 5 }, { 3, 5 } };
  const auto b = fit_ph_line(flat);
  EXPECT_EQ(b.slope, 0.0);
  EXPECT_EQ(b.intercept, 5.0);
}

TEST(PhFit, Errors)
{
  const std::vector<CalibrationPoint> one{ { 1, 5 } };
  EXPECT_THROW((void)fit_ph_line(one), FitError);
  EXPECT_THROW((void)fit_ph_line(std::vector<CalibrationPoint>{}), FitError);
  const std::vector<CalibrationPoint> same_v{ { 2, 5 }, { 2, 7 }, { 2, 9 } };
  EXPECT_THROW((void)fit_ph_line(same_v), FitError);
}

TEST(PhFit, TranslationAndScaleEquivariance)
{
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> volts(0.5, 4.5);
  std::uniform_real_distribution<double> ph(0.0, 14.0);
  std::uniform_real_distribution<double> shift(-3.0, 3.0);
  std::uniform_real_distribution<double> scale(0.2, 5.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<CalibrationPoint> pts(2 + trial % 10);
    for (auto& p : pts) {
      p = { volts(rng), ph(rng) };
    }
    const auto base = fit_ph_line(pts);

    const double delta = shift(rng);
    auto shifted = pts;
    for (auto& p : shifted) {
      p.ph += delta;
    }
    const auto s = fit_ph_line(shifted);
    EXPECT_NEAR(s.slope, base.slope, 1e-9);
    EXPECT_NEAR(s.intercept, base.intercept + delta, 1e-9);

    const double k = scale(rng);
    auto scaled = pts;
    for (auto& p : scaled) {
      p.voltage *= k;
    }
    const auto z = fit_ph_line(scaled);
    EXPECT_NEAR(z.slope, base.slope / k, 1e-9 * (1.0 + std::abs(base.slope)));
  }
}

TEST(PhValue, Examples)
{
  const auto line = default_ph_curve();
  EXPECT_NEAR(ph_value({ 3.62 }, line).value, 7.0973553719008144, 1e-9);
  EXPECT_NEAR(ph_value({ 3.62 }, line).value, 7.17, 0.3);
  EXPECT_NEAR(ph_value({ 4.42 }, line).value, 2.3833057851239587, 1e-9);
  EXPECT_EQ(ph_value({ 3.0 }, LinearCurve{ 1.0, 0.0 }).value, 3.0);
}

TEST(PhValue, ClampsAndRejects)
{
  const auto line = default_ph_curve();
  EXPECT_EQ(ph_value({ 0.0 }, line).value, 14.0);
  EXPECT_EQ(ph_value({ 5.0 }, line).value, 0.0);
  EXPECT_THROW((void)ph_value({ 5.5 }, line), RangeError);
  EXPECT_THROW((void)ph_value({ -1.0 }, line), RangeError);
}

TEST(TankFill, Boundaries)
{
  const TankGeometry geom;
  const double c = geom.speed_of_sound;
  EXPECT_NEAR(tank_fill_fraction(2.0 * geom.sensor_to_bottom / c, geom), 0.0, 1e-12);
  EXPECT_NEAR(tank_fill_fraction(2.0 * geom.full_distance / c, geom), 1.0, 1e-12);
  EXPECT_NEAR(echo_distance(1e-3, geom), 0.1715, 1e-12);
  EXPECT_EQ(tank_fill_fraction(0.0, geom), 1.0);
  EXPECT_EQ(tank_fill_fraction(1.0, geom), 0.0);
  EXPECT_THROW((void)tank_fill_fraction(-1e-6, geom), RangeError);
}

TEST(TankFill, MonotoneAndBounded)
{
  const TankGeometry geom;
  double prev = 1.0;
  for (double t = 0.0; t < 0.005; t += 1e-5) {
    const double f = tank_fill_fraction(t, geom);
    EXPECT_GE(f, 0.0);
    EXPECT_LE(f, 1.0);
    EXPECT_LE(f, prev);
    prev = f;
  }
  for (double fill = 0.0; fill <= 1.0; fill += 0.05) {
    EXPECT_NEAR(tank_fill_fraction(echo_time_for_fill(fill, geom), geom), fill, 1e-12);
  }
}

TEST(TankGeometry, Validation)
{
  TankGeometry g;
  g.full_distance = g.sensor_to_bottom;
  EXPECT_THROW(g.validate(), RangeError);
  g = TankGeometry{};
  g.speed_of_sound = 0.0;
  EXPECT_THROW(g.validate(), RangeError);
}

}  // namespace
}  // namespace greywater
