#include "exo/cli.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "exo/errors.hpp"
#include "exo/report.hpp"

namespace exo {

namespace fs = std::filesystem;

void write_file_atomic(const fs::path& path, const std::string& contents) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ParseError(fmt::format("cannot write '{}'", tmp.string()));
    out << contents;
    out.flush();
    if (!out) throw ParseError(fmt::format("failed writing '{}'", tmp.string()));
  }
  fs::rename(tmp, path);
}

namespace {

constexpr int kProfileSteps = 10;
constexpr int kCurveSamples = 181;
constexpr double kDefaultTail = 5.0;  // s simulated past the last trace event

struct Common {
  std::string config_path;
  std::string out_path;
  std::string format = "text";
};

ReportFormat parse_format(const std::string& f) {
  return f == "json" ? ReportFormat::structured : ReportFormat::text;
}

std::string read_all(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(fmt::format("cannot read '{}'", path.string()));
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

SimResult simulate(const DesignConfig& cfg, const SimTrace& trace, std::optional<double> duration_s,
                   std::optional<double> step_s) {
  SimOptions opts;
  opts.sweep = cfg.sweep;
  opts.sample_step = step_s ? seconds_to_ticks(*step_s) : cfg.simulation.sample_step;
  if (duration_s)
    opts.duration = seconds_to_ticks(*duration_s);
  else if (cfg.simulation.duration)
    opts.duration = *cfg.simulation.duration;
  else
    opts.duration = trace.end_time() + seconds_to_ticks(kDefaultTail);
  return run_simulation(cfg.geometry, cfg.load, cfg.pneumatics.cylinder(), cfg.control, trace, opts);
}

std::string trajectory_csv(const SimTrajectory& t) {
  std::ostringstream s;
  write_trajectory_csv(s, t);
  return s.str();
}

std::string profile_csv(const ProfileSection& p) {
  std::string out = "elbow_angle_deg,piston_force_n,transfer_angle_deg\n";
  for (const auto& r : p.rows)
    out += fmt::format("{:.6f},{:.6f},{:.6f}\n", r.elbow_angle_deg, r.piston_force_n, r.transfer_angle_deg);
  return out;
}

std::string force_curve_csv(const DesignConfig& cfg) {
  const double available = available_force(cfg.pneumatics.cylinder(), ActingSide::rod);
  std::string out = "elbow_angle_deg,forearm_angle_deg,f1_n,f2_n,piston_force_n,available_rod_force_n\n";
  const auto rows = torque_profile(cfg.geometry, cfg.load, cfg.sweep, kCurveSamples);
  for (const auto& r : rows) {
    const ForceChain c = required_piston_force_at(cfg.geometry, cfg.load, r.elbow_angle);
    out += fmt::format("{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f}\n", rad_to_deg(r.elbow_angle),
                       rad_to_deg(cfg.geometry.forearm_angle_at(r.elbow_angle)), c.f1, c.f2, c.f_piston, available);
  }
  return out;
}

Report new_report(const DesignConfig& cfg, const std::string& trace_bytes = {}) {
  Report r;
  r.input_digest = digest(cfg.effective.dump() + "\n" + trace_bytes);
  return r;
}

void emit(const Report& report, const Common& c, std::ostream& out) {
  const std::string doc = render_report(report, parse_format(c.format));
  if (c.out_path.empty())
    out << doc;
  else
    write_file_atomic(c.out_path, doc);
}

int exit_code(const Report& report) { return report.pass() ? kExitPass : kExitFail; }

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pneumatic exoskeleton arm sizing, structural checks and command-chain simulation", "exo"};
  app.require_subcommand(1);

  auto add_common = [](CLI::App* sub, Common& c, const char* out_help) {
    sub->add_option("-c,--config", c.config_path, "design config (JSON)")->required();
    sub->add_option("-o,--out", c.out_path, out_help);
    sub->add_option("--format", c.format, "report format")->check(CLI::IsMember({"text", "json"}));
  };

  Common size_opts;
  auto* size = app.add_subcommand("size", "force chain, bore and stroke sizing");
  add_common(size, size_opts, "report file (default: stdout)");

  Common sim_opts;
  std::string trace_path;
  std::optional<double> duration_s;
  std::optional<double> step_s;
  std::string summary_path;
  auto* sim = app.add_subcommand("simulate", "run the command-chain simulation on a trace");
  add_common(sim, sim_opts, "trajectory CSV (default: trajectory.csv)");
  sim->add_option("-t,--trace", trace_path, "input trace CSV")->required();
  sim->add_option("--duration", duration_s, "simulated time in seconds");
  sim->add_option("--step", step_s, "sample step in seconds");
  sim->add_option("--summary", summary_path, "also write the summary report here");

  Common analyze_opts;
  bool show_reference = false;
  auto* analyze = app.add_subcommand("analyze", "analytical stress and factor-of-safety checks");
  add_common(analyze, analyze_opts, "report file (default: stdout)");
  analyze->add_flag("--show-reference", show_reference, "include the reference FEA summary");

  Common report_opts;
  std::string report_trace;
  auto* full = app.add_subcommand("report", "sizing, simulation, structural and profile in one document");
  add_common(full, report_opts, "output directory (default: exo_report)");
  full->add_option("-t,--trace", report_trace, "input trace CSV");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitPass : kExitUsage;
  }

  try {
    if (*size) {
      const DesignConfig cfg = load_config(size_opts.config_path);
      Report r = new_report(cfg);
      add_sizing(r, cfg);
      emit(r, size_opts, out);
      return exit_code(r);
    }

    if (*sim) {
      const DesignConfig cfg = load_config(sim_opts.config_path);
      const std::string trace_bytes = read_all(trace_path);
      std::istringstream trace_in(trace_bytes);
      const SimTrace trace = parse_trace_csv(trace_in);
      const SimResult result = simulate(cfg, trace, duration_s, step_s);
      Report r = new_report(cfg, trace_bytes);
      add_simulation(r, cfg, result);
      write_file_atomic(sim_opts.out_path.empty() ? "trajectory.csv" : sim_opts.out_path,
                        trajectory_csv(result.trajectory));
      const std::string doc = render_report(r, parse_format(sim_opts.format));
      out << doc;
      if (!summary_path.empty()) write_file_atomic(summary_path, render_report(r, ReportFormat::structured));
      return exit_code(r);
    }

    if (*analyze) {
      const DesignConfig cfg = load_config(analyze_opts.config_path);
      Report r = new_report(cfg);
      add_structural(r, cfg);
      if (show_reference) add_reference(r);
      emit(r, analyze_opts, out);
      return exit_code(r);
    }

    if (*full) {
      const DesignConfig cfg = load_config(report_opts.config_path);
      const fs::path dir = report_opts.out_path.empty() ? fs::path("exo_report") : fs::path(report_opts.out_path);
      std::string trace_bytes;
      std::optional<SimResult> result;
      if (!report_trace.empty()) {
        trace_bytes = read_all(report_trace);
        std::istringstream trace_in(trace_bytes);
        result = simulate(cfg, parse_trace_csv(trace_in), std::nullopt, std::nullopt);
      }
      Report r = new_report(cfg, trace_bytes);
      add_sizing(r, cfg);
      if (result) add_simulation(r, cfg, *result);
      else r.warnings.push_back("simulation: no trace given, section skipped");
      add_structural(r, cfg);
      add_profile(r, cfg, kProfileSteps);

      fs::create_directories(dir);
      write_file_atomic(dir / "report.txt", render_report(r, ReportFormat::text));
      write_file_atomic(dir / "report.json", render_report(r, ReportFormat::structured));
      write_file_atomic(dir / "torque_profile.csv", profile_csv(*r.profile));
      write_file_atomic(dir / "force_vs_angle.csv", force_curve_csv(cfg));
      if (result) write_file_atomic(dir / "trajectory.csv", trajectory_csv(result->trajectory));
      out << render_report(r, parse_format(report_opts.format));
      return exit_code(r);
    }
  } catch (const std::exception& e) {
    err << "exo: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace exo
