#pragma once

// Command implementations for the `greywater` tool. Kept separate from main()
// so the tests can drive them with their own streams.

#include <CLI11.hpp>

#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "greywater/greywater.hpp"

namespace greywater::cli {

enum ExitStatus : int
{
  kSuccess = 0,
  kValidationFailure = 1,
  kInputError = 2,
};

struct SimulateOptions
{
  std::string scenario_path;
  std::optional<std::string> trace_path;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> settings;
};

namespace detail {

inline std::vector<Setting> parse_settings(const std::vector<std::string>& raw)
{
  std::vector<Setting> out;
  out.reserve(raw.size());
  for (const auto& s : raw) {
    out.push_back(parse_setting(s));
  }
  return out;
}

}  // namespace detail

/// Builds the setup in precedence order: defaults, then scenario `config`
/// lines, then command-line `--set` flags.
[[nodiscard]] inline SimulationSetup resolve_setup(const std::vector<Setting>& scenario_settings,
                                                   const std::vector<Setting>& cli_settings)
{
  SimulationSetup setup;
  apply_settings(setup, scenario_settings);
  apply_settings(setup, cli_settings);
  return setup;
}

inline int cmd_simulate(const SimulateOptions& opts, std::ostream& out, std::ostream& err)
{
  try {
    Scenario scenario = load_scenario(opts.scenario_path);
    if (opts.seed) {
      scenario.seed = *opts.seed;
    }
    const auto setup = resolve_setup(scenario.config_overrides, detail::parse_settings(opts.settings));
    const RunResult run = run_scenario(scenario, setup);
    if (opts.trace_path) {
      std::ofstream trace_out(*opts.trace_path, std::ios::binary | std::ios::trunc);
      if (!trace_out) {
        err << "error: cannot write trace '" << *opts.trace_path << "'\n";
        return kInputError;
      }
      write_trace(trace_out, run.trace);
    }
    out << format_summary(run.metrics);
    return kSuccess;
  } catch (const ParseError& e) {
    err << "error: " << opts.scenario_path << ": " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return kInputError;
}

inline int cmd_fit_ph(const std::string& csv_path, std::ostream& out, std::ostream& err)
{
  try {
    const auto points = parse_calibration_csv(greywater::detail::read_file(csv_path));
    const LinearCurve line = fit_ph_line(points);
    out << "slope: " << greywater::detail::fixed(line.slope, 4) << '\n';
    out << "intercept: " << greywater::detail::fixed(line.intercept, 4) << '\n';
    out << "max_residual: " << greywater::detail::fixed(max_abs_residual(points, line), 4) << '\n';
    return kSuccess;
  } catch (const std::exception& e) {
    err << "error: " << csv_path << ": " << e.what() << '\n';
  }
  return kInputError;
}

/// `kind` is ntu, ph or tank. `curve` optionally replaces the built-in curve:
/// a,b,c for ntu; slope,intercept for ph; sensor_to_bottom,full_distance[,speed]
/// for tank.
inline int cmd_convert(const std::string& kind,
                       double value,
                       const std::vector<double>& curve,
                       std::ostream& out,
                       std::ostream& err)
{
  try {
    if (kind == "ntu") {
      QuadraticCurve quad = default_turbidity_curve();
      if (!curve.empty()) {
        if (curve.size() != 3) {
          throw ParseError("ntu curve needs a,b,c");
        }
        quad = QuadraticCurve(curve[0], curve[1], curve[2]);
      }
      out << greywater::detail::fixed(turbidity_ntu({ value }, quad).value, 1) << '\n';
    } else if (kind == "ph") {
      LinearCurve line = default_ph_curve();
      if (!curve.empty()) {
        if (curve.size() != 2) {
          throw ParseError("ph curve needs slope,intercept");
        }
        line = { curve[0], curve[1] };
      }
      out << greywater::detail::fixed(ph_value({ value }, line).value, 2) << '\n';
    } else if (kind == "tank") {
      TankGeometry geom;
      if (!curve.empty()) {
        if (curve.size() != 2 && curve.size() != 3) {
          throw ParseError("tank curve needs sensor_to_bottom,full_distance[,speed_of_sound]");
        }
        geom.sensor_to_bottom = curve[0];
        geom.full_distance = curve[1];
        if (curve.size() == 3) {
          geom.speed_of_sound = curve[2];
        }
      }
      geom.validate();
      out << greywater::detail::fixed(tank_fill_fraction(value, geom), 3) << '\n';
    } else {
      throw ParseError("unknown conversion '" + kind + "' (expected ntu, ph or tank)");
    }
    return kSuccess;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return kInputError;
}

inline int cmd_report(const std::string& trace_path,
                      const std::vector<std::string>& settings,
                      std::ostream& out,
                      std::ostream& err)
{
  try {
    const auto trace = load_trace(trace_path);
    const auto setup = resolve_setup({}, detail::parse_settings(settings));
    out << format_summary(compute_metrics(trace, setup.controller));
    return kSuccess;
  } catch (const std::exception& e) {
    err << "error: " << trace_path << ": " << e.what() << '\n';
  }
  return kInputError;
}

/// Parses argv and dispatches. Returns the process exit status.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
  CLI::App app{ "Greywater diversion controller simulator" };
  app.require_subcommand(1);

  std::string keys;
  for (const char* k : kSettingKeys) {
    keys += keys.empty() ? "" : ", ";
    keys += k;
  }
  const std::string set_help =
    "Override a setting (key=value). Keys: " + keys +
    ". Flags override scenario `config` lines, which override built-in defaults.";

  SimulateOptions sim;
  std::string trace_path;
  std::uint64_t seed = 0;
  auto* simulate = app.add_subcommand("simulate", "Run a scenario and print run metrics");
  simulate->add_option("scenario", sim.scenario_path, "Scenario file")->required();
  auto* trace_opt = simulate->add_option("--trace", trace_path, "Write the per-step trace CSV here");
  auto* seed_opt = simulate->add_option("--seed", seed, "Override the scenario seed");
  simulate->add_option("--set", sim.settings, set_help);

  std::string csv_path;
  auto* fit = app.add_subcommand("fit-ph", "Least-squares pH line from a voltage,ph CSV");
  fit->add_option("csv", csv_path, "Calibration points")->required();

  std::string kind;
  double value = 0.0;
  std::vector<double> curve;
  auto* convert = app.add_subcommand("convert", "Convert a raw reading to a physical value");
  convert->add_option("kind", kind, "ntu (volts), ph (volts) or tank (echo seconds)")
    ->required()
    ->check(CLI::IsMember({ "ntu", "ph", "tank" }));
  convert->add_option("value", value, "Raw reading")->required();
  convert->add_option("--curve", curve, "Curve parameters, comma separated")->delimiter(',');

  std::string report_path;
  std::vector<std::string> report_settings;
  auto* report = app.add_subcommand("report", "Recompute run metrics from a trace CSV");
  report->add_option("trace", report_path, "Trace CSV")->required();
  report->add_option("--set", report_settings, set_help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }

  if (*simulate) {
    if (*trace_opt) {
      sim.trace_path = trace_path;
    }
    if (*seed_opt) {
      sim.seed = seed;
    }
    return cmd_simulate(sim, out, err);
  }
  if (*fit) {
    return cmd_fit_ph(csv_path, out, err);
  }
  if (*convert) {
    return cmd_convert(kind, value, curve, out, err);
  }
  return cmd_report(report_path, report_settings, out, err);
}

}  // namespace greywater::cli
