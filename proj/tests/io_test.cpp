#include <gtest/gtest.h>

#include <sstream>
#include <string>

#include "greywater/io.hpp"

namespace greywater {
namespace {

// Line number carried by the ParseError thrown for `text`, or 0 if none.
std::size_t error_line(const std::string& text)
{
  try {
    (void)parse_scenario(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

TEST(ParseScenario, AllDirectives)
{
  const auto sc = parse_scenario(
    "# comment\n\nseed,12\nconfig,pipe_volume,0.3\n"
    "segment,drinking water,0,7.17,1.0,6\n  segment , red wine , 3000 , 3.5 , 0.5 , 7.5 \nflush,30\n");
  EXPECT_EQ(sc.seed, 12u);
  ASSERT_EQ(sc.config_overrides.size(), 1u);
  EXPECT_EQ(sc.config_overrides[0].key, "pipe_volume");
  EXPECT_EQ(sc.config_overrides[0].value, 0.3);
  ASSERT_EQ(sc.segments.size(), 2u);
  EXPECT_EQ(sc.segments[1].substance.name, "red wine");
  EXPECT_EQ(sc.segments[1].substance.turbidity.value, 3000.0);
  EXPECT_EQ(sc.segments[1].flow, 7.5);
  ASSERT_EQ(sc.flush_schedule.size(), 1u);
  EXPECT_EQ(sc.flush_schedule[0], 30.0);
}

TEST(ParseScenario, ErrorsCarryLineNumbers)
{
  const std::string ok = "segment,water,0,7,1,6\n";
  EXPECT_EQ(error_line(ok + "segment,wine,3000,3.5,1\n"), 2u);
  EXPECT_EQ(error_line(ok + "\n# x\nsegment,wine,abc,3.5,1,6\n"), 4u);
  EXPECT_EQ(error_line(ok + "segment,wine,3000,3.5,-1,6\n"), 2u);
  EXPECT_EQ(error_line(ok + "segment,wine,4000,3.5,1,6\n"), 2u);
  EXPECT_EQ(error_line(ok + "segment,,0,7,1,6\n"), 2u);
  EXPECT_EQ(error_line("config,valve_speed,3\n" + ok), 1u);
  EXPECT_EQ(error_line(ok + "flush,-2\n"), 2u);
  EXPECT_EQ(error_line(ok + "rinse,2\n"), 2u);
  EXPECT_EQ(error_line("seed,-4\n" + ok), 1u);
  EXPECT_THROW((void)parse_scenario("# nothing\n"), ParseError);
  try {
    (void)parse_scenario(ok + "segment,wine,3000,3.5,1\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(ParseSetting, KeyValue)
{
  const auto s = parse_setting("ph_min=5.5");
  EXPECT_EQ(s.key, "ph_min");
  EXPECT_EQ(s.value, 5.5);
  EXPECT_THROW((void)parse_setting("ph_min"), ParseError);
  EXPECT_THROW((void)parse_setting("ph_min=x"), ParseError);
  EXPECT_THROW((void)parse_setting("colour=1"), ParseError);
}

TEST(CalibrationCsv, ParseAndReject)
{
  const auto pts = parse_calibration_csv("voltage,ph\n3.0,9.0\n4.0,3.0\n");
  ASSERT_EQ(pts.size(), 2u);
  EXPECT_EQ(pts[1].voltage, 4.0);
  EXPECT_EQ(pts[1].ph, 3.0);
  EXPECT_THROW((void)parse_calibration_csv("v,p\n3,9\n"), ParseError);
  EXPECT_THROW((void)parse_calibration_csv("voltage,ph\n3,9,1\n"), ParseError);
  EXPECT_THROW((void)parse_calibration_csv(""), ParseError);
}

std::vector<TraceRecord> sample_trace()
{
  std::vector<TraceRecord> trace(3);
  for (std::size_t i = 0; i < trace.size(); ++i) {
    auto& r = trace[i];
    r.time = 0.2 * static_cast<double>(i + 1);
    r.true_fluid = { { 1.0 / 3.0 }, { 7.17 } };
    r.frame = { r.time, 4.123456789012345, 3.6 + 1e-13, 0.0021 };
    r.measured.turbidity = TurbidityNtu{ 0.1 + 0.2 };
    if (i > 0) {
      r.measured.ph = PhValue{ 7.0 / 3.0 };
    }
    r.measured.tank_fill = 0.1 * static_cast<double>(i);
    r.valve = i == 0 ? ValveCommand::closed : ValveCommand::open;
    (i == 0 ? r.to_drain : r.to_tank) = 0.02;
    r.tank_level = 0.02 * static_cast<double>(i);
  }
  trace[2].measured.turbidity.reset();
  return trace;
}

TEST(Trace, RoundTripIsExact)
{
  const auto trace = sample_trace();
  std::ostringstream os;
  write_trace(os, trace);
  const auto text = os.str();
  EXPECT_EQ(text.substr(0, kTraceHeader.size()), kTraceHeader);
  const auto back = parse_trace(text);
  ASSERT_EQ(back.size(), trace.size());
  for (std::size_t i = 0; i < trace.size(); ++i) {
    EXPECT_EQ(back[i].time, trace[i].time);
    EXPECT_EQ(back[i].true_fluid, trace[i].true_fluid);
    EXPECT_EQ(back[i].frame.turbidity_voltage, trace[i].frame.turbidity_voltage);
    EXPECT_EQ(back[i].frame.ph_voltage, trace[i].frame.ph_voltage);
    EXPECT_EQ(back[i].measured.turbidity.has_value(), trace[i].measured.turbidity.has_value());
    EXPECT_EQ(back[i].measured.ph.has_value(), trace[i].measured.ph.has_value());
    if (trace[i].measured.ph) {
      EXPECT_EQ(back[i].measured.ph->value, trace[i].measured.ph->value);
    }
    EXPECT_EQ(back[i].valve, trace[i].valve);
    EXPECT_EQ(back[i].to_tank, trace[i].to_tank);
    EXPECT_EQ(back[i].tank_level, trace[i].tank_level);
  }
  std::ostringstream again;
  write_trace(again, back);
  EXPECT_EQ(again.str(), text);
}

TEST(Trace, RejectsMalformedInput)
{
  std::ostringstream os;
  write_trace(os, sample_trace());
  const std::string text = os.str();
  const std::string header = std::string(kTraceHeader) + "\n";
  EXPECT_THROW((void)parse_trace(""), ParseError);
  EXPECT_THROW((void)parse_trace(header), ParseError);
  EXPECT_THROW((void)parse_trace("time,x\n"), ParseError);
  // Truncated last line, with and without losing whole fields.
  EXPECT_THROW((void)parse_trace(text.substr(0, text.size() - 12)), ParseError);
  EXPECT_THROW((void)parse_trace(text.substr(0, text.size() - 2)), ParseError);
  EXPECT_THROW((void)parse_trace(header + "0.2,0,7,4,3.6,0.002,0,7,ajar,0.02,0,0\n"), ParseError);
  EXPECT_THROW((void)parse_trace(header + "0.2,0,7,4,3.6,0.002,0,7,open,-0.02,0,0\n"), ParseError);
  EXPECT_THROW((void)parse_trace(header + "0.2,0,7,4,3.6,0.002,0,7,open,0.02,0,0\n"
                                          "0.2,0,7,4,3.6,0.002,0,7,open,0.02,0,0\n"),
               ParseError);
  try {
    (void)parse_trace(header + "0.2,0,7,4,3.6,0.002,0,7,open,0.02,0,0\n0.4,0,7\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(Summary, ListsTrialCounts)
{
  RunMetrics m;
  m.steps = 10;
  m.counted_steps = 8;
  m.trial_confusion.waste_closed = 10;
  m.recovered_volume = 1.23456;
  const auto s = format_summary(m);
  EXPECT_NE(s.find("steps: 10 (counted: 8)"), std::string::npos);
  EXPECT_NE(s.find("waste_closed: 10/10"), std::string::npos);
  EXPECT_NE(s.find("recovered_l: 1.235"), std::string::npos);
}

}  // namespace
}  // namespace greywater
