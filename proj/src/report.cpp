#include "exo/report.hpp"

#include <algorithm>
#include <cstdint>

#include <fmt/format.h>

#include "exo/errors.hpp"

namespace nlohmann {

template <typename T>
struct adl_serializer<std::optional<T>> {
  static void to_json(json& j, const std::optional<T>& v) {
    if (v)
      j = *v;
    else
      j = nullptr;
  }
  static void from_json(const json& j, std::optional<T>& v) {
    if (j.is_null())
      v.reset();
    else
      v = j.get<T>();
  }
};

}  // namespace nlohmann

namespace exo {

using json = nlohmann::json;

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(Verdict, check, pass, detail)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(SizingSection, f0_n, f1_n, f2_n, piston_force_n, min_bore_mm,
                                   selected_bore_mm, stroke_mm, available_force_n, margin, pressure_pa,
                                   rod_diameter_mm, initial_transfer_angle_deg, degenerate, errors)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(LiftEnergy, start_s, duration_s, piston_work_j, potential_energy_j)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(SimulationSection, duration_s, sample_step_s, samples, lifts,
                                   lift_durations_s, peak_required_force_n, min_force_margin,
                                   transfer_angle_violations, max_transfer_angle_deg, stalls, detections,
                                   accepted_toggles, rejected_events, energy)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ComponentSection, component, peak_von_mises_pa, deflection_m,
                                   factor_of_safety, stress_ratio, deflection_ratio, reference_stress_max_pa,
                                   reference_deformation_max_m, errors)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(StructuralSection, material, yield_strength_pa, required_fos, components)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ProfilePoint, elbow_angle_deg, piston_force_n, transfer_angle_deg)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ProfileSection, rows, max_force_n, max_force_angle_deg)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ReferenceRow, component, deformation_max_m, deformation_min_m, strain_max,
                                   strain_min, stress_max_pa, stress_min_pa)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(Report, tool_version, input_digest, sizing, simulation, structural, profile,
                                   reference, verdicts, warnings)

bool Report::pass() const noexcept { return failures() == 0; }

int Report::failures() const noexcept {
  return static_cast<int>(std::count_if(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return !v.pass; }));
}

std::string digest(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

namespace {

std::optional<double> scaled(const std::optional<double>& v, double factor) {
  if (!v) return std::nullopt;
  return *v * factor;
}

std::string opt(const std::optional<double>& v, const char* spec) {
  return v ? fmt::format(fmt::runtime(spec), *v) : std::string("na");
}

}  // namespace

void add_sizing(Report& report, const DesignConfig& config) {
  const SizingReport s = sizing_report(config.geometry, config.load, config.pneumatics.pressure,
                                       config.pneumatics.rod_diameter, config.pneumatics.catalog, config.sweep);
  SizingSection out;
  out.f0_n = s.chain.f0;
  out.f1_n = s.chain.f1;
  out.f2_n = s.chain.f2;
  out.piston_force_n = s.chain.f_piston;
  out.min_bore_mm = scaled(s.min_bore, 1e3);
  out.selected_bore_mm = scaled(s.selected_bore, 1e3);
  out.stroke_mm = scaled(s.stroke, 1e3);
  out.available_force_n = s.available_force;
  out.margin = s.margin;
  out.pressure_pa = s.pressure;
  out.rod_diameter_mm = m_to_mm(s.rod_diameter);
  out.degenerate = s.degenerate;
  out.errors = s.errors;

  const TransferAngleCheck angle = check_transfer_angle(config.geometry, config.geometry.initial_elbow_angle());
  out.initial_transfer_angle_deg = rad_to_deg(angle.angle);

  std::string detail;
  if (!s.errors.empty())
    detail = s.errors.front();
  else if (s.degenerate)
    detail = "no load to lift";
  else
    detail = fmt::format("available {:.2f} N / required {:.2f} N = {:.3f} (need >= 1)", *s.available_force,
                         s.chain.f_piston, *s.margin);
  report.verdicts.push_back({"sizing.force_margin", s.pass(), detail});
  report.verdicts.push_back({"sizing.transfer_angle", angle.pass,
                             fmt::format("initial {:.2f} deg, margin {:.2f} deg to the 135 deg cap",
                                         rad_to_deg(angle.angle), angle.margin_deg)});
  if (s.degenerate) report.warnings.push_back("sizing: zero required force, bore sizing is degenerate");
  report.sizing = out;
}

void add_simulation(Report& report, const DesignConfig& config, const SimResult& result) {
  const SimSummary& s = result.summary;
  SimulationSection out;
  const auto& rows = result.trajectory.rows;
  out.samples = static_cast<int>(rows.size());
  out.duration_s = rows.empty() ? 0.0 : ticks_to_seconds(rows.back().time);
  out.sample_step_s = ticks_to_seconds(result.trajectory.sample_step);
  out.lifts = s.lifts;
  out.lift_durations_s = s.lift_durations;
  out.peak_required_force_n = s.peak_required_force;
  out.min_force_margin = s.min_force_margin;
  out.transfer_angle_violations = s.transfer_angle_violations;
  out.max_transfer_angle_deg = s.max_transfer_angle_deg;
  out.stalls = s.stalls;
  out.detections = s.detections;
  out.accepted_toggles = s.accepted_toggles;
  out.rejected_events = s.rejected_events;

  bool energy_ok = true;
  for (const LiftRecord& lift : result.lifts) {
    const Ticks end = seconds_to_ticks(lift.end_s) + result.trajectory.sample_step;
    const EnergyAudit audit = energy_audit(result.trajectory.window(lift.start, end), config.geometry, config.load);
    out.energy.push_back({ticks_to_seconds(lift.start), lift.duration_s, audit.piston_work, audit.potential_energy});
    energy_ok = energy_ok && audit.piston_work >= audit.potential_energy;
  }

  report.verdicts.push_back({"simulation.stall", s.stalls == 0, fmt::format("{} stall onset(s)", s.stalls)});
  report.verdicts.push_back(
      {"simulation.force_margin", !s.min_force_margin || *s.min_force_margin >= 1.0,
       fmt::format("minimum available/required {} (need >= 1)", opt(s.min_force_margin, "{:.3f}"))});
  report.verdicts.push_back({"simulation.transfer_angle", s.transfer_angle_violations == 0,
                             fmt::format("max {:.2f} deg, {} sample(s) past 135 deg", s.max_transfer_angle_deg,
                                         s.transfer_angle_violations)});
  report.verdicts.push_back({"simulation.energy_audit", energy_ok,
                             fmt::format("piston work >= potential energy gained on {} lift(s)", out.energy.size())});
  if (s.detections == 0 && s.accepted_toggles == 0) report.warnings.push_back("simulation: trace never actuated the valve");
  report.simulation = out;
}

void add_structural(Report& report, const DesignConfig& config) {
  const StructuralReport r = structural_report(config.structural.cases, config.structural.material, table1());
  StructuralSection out;
  out.material = r.material;
  out.yield_strength_pa = config.structural.material.yield_strength;
  for (const ComponentReport& c : r.components) {
    ComponentSection cs;
    cs.component = to_string(c.component);
    cs.peak_von_mises_pa = c.peak_von_mises;
    cs.deflection_m = c.deflection;
    cs.factor_of_safety = c.factor_of_safety;
    cs.stress_ratio = c.stress_ratio;
    cs.deflection_ratio = c.deflection_ratio;
    const Table1Row& ref = table1().row(c.component);
    cs.reference_stress_max_pa = ref.stress_max;
    cs.reference_deformation_max_m = ref.deformation_max;
    cs.errors = c.errors;
    out.components.push_back(cs);

    std::string detail = !c.errors.empty() ? c.errors.front()
                         : c.factor_of_safety
                             ? fmt::format("FoS {:.2f} (need >= {:.0f})", *c.factor_of_safety, kRequiredFactorOfSafety)
                             : std::string("unloaded");
    report.verdicts.push_back({"structural." + cs.component + ".fos", c.pass, detail});
  }
  report.structural = out;
}

void add_profile(Report& report, const DesignConfig& config, int steps) {
  const auto rows = torque_profile(config.geometry, config.load, config.sweep, steps);
  ProfileSection out;
  double worst_angle = 0.0;
  for (const ProfileRow& r : rows) {
    out.rows.push_back({rad_to_deg(r.elbow_angle), r.piston_force, rad_to_deg(r.transfer_angle)});
    if (r.piston_force > out.max_force_n) {
      out.max_force_n = r.piston_force;
      out.max_force_angle_deg = rad_to_deg(r.elbow_angle);
    }
    worst_angle = std::max(worst_angle, rad_to_deg(r.transfer_angle));
  }
  report.verdicts.push_back({"profile.transfer_angle", worst_angle <= kTransferAngleCapDeg + 1e-9,
                             fmt::format("max {:.2f} deg over the sweep", worst_angle)});
  report.profile = out;
}

void add_reference(Report& report) {
  std::vector<ReferenceRow> rows;
  for (const Table1Row& r : table1().rows)
    rows.push_back({to_string(r.component), r.deformation_max, r.deformation_min, r.strain_max, r.strain_min,
                    r.stress_max, r.stress_min});
  report.reference = rows;
}

json to_json(const Report& report) {
  json j;
  nlohmann::to_json(j, report);
  return j;
}

Report parse_structured_report(const std::string& text) {
  try {
    return json::parse(text).get<Report>();
  } catch (const json::exception& e) {
    throw ParseError(fmt::format("report is not a valid structured document: {}", e.what()));
  }
}

namespace {

std::string render_text(const Report& r) {
  std::string out;
  auto line = [&out](const std::string& s) {
    out += s;
    out += '\n';
  };
  line(fmt::format("exoskeleton actuation report (tool {}, input {})", r.tool_version, r.input_digest));

  if (r.sizing) {
    const auto& s = *r.sizing;
    line("");
    line("== sizing ==");
    line(fmt::format("  load F0                 {:10.2f} N", s.f0_n));
    line(fmt::format("  perpendicular F1        {:10.2f} N", s.f1_n));
    line(fmt::format("  lever force F2          {:10.2f} N", s.f2_n));
    line(fmt::format("  piston force F          {:10.2f} N", s.piston_force_n));
    line(fmt::format("  supply pressure         {:10.0f} Pa", s.pressure_pa));
    line(fmt::format("  rod diameter            {:10.2f} mm", s.rod_diameter_mm));
    line(fmt::format("  minimum bore            {:>10} mm", opt(s.min_bore_mm, "{:.2f}")));
    line(fmt::format("  selected bore           {:>10} mm", opt(s.selected_bore_mm, "{:.1f}")));
    line(fmt::format("  stroke                  {:>10} mm", opt(s.stroke_mm, "{:.2f}")));
    line(fmt::format("  available rod force     {:>10} N", opt(s.available_force_n, "{:.2f}")));
    line(fmt::format("  force margin            {:>10}", opt(s.margin, "{:.3f}")));
    line(fmt::format("  initial transfer angle  {:10.2f} deg", s.initial_transfer_angle_deg));
    for (const auto& e : s.errors) line("  error: " + e);
  }

  if (r.simulation) {
    const auto& s = *r.simulation;
    line("");
    line("== simulation ==");
    line(fmt::format("  duration                {:10.3f} s ({} samples at {:.4f} s)", s.duration_s, s.samples,
                     s.sample_step_s));
    line(fmt::format("  detections              {:10d}", s.detections));
    line(fmt::format("  accepted toggles        {:10d}", s.accepted_toggles));
    line(fmt::format("  rejected events         {:10d}", s.rejected_events));
    line(fmt::format("  complete lifts          {:10d}", s.lifts));
    for (std::size_t i = 0; i < s.energy.size(); ++i) {
      const auto& e = s.energy[i];
      line(fmt::format("    lift {} at {:.3f} s: {:.3f} s, piston work {:.3f} J, potential energy {:.3f} J", i + 1,
                       e.start_s, e.duration_s, e.piston_work_j, e.potential_energy_j));
    }
    line(fmt::format("  peak required force     {:10.2f} N", s.peak_required_force_n));
    line(fmt::format("  minimum force margin    {:>10}", opt(s.min_force_margin, "{:.3f}")));
    line(fmt::format("  max transfer angle      {:10.2f} deg", s.max_transfer_angle_deg));
    line(fmt::format("  transfer violations     {:10d}", s.transfer_angle_violations));
    line(fmt::format("  stalls                  {:10d}", s.stalls));
  }

  if (r.structural) {
    const auto& s = *r.structural;
    line("");
    line(fmt::format("== structural ({}, yield {:.3g} Pa, required FoS {:.0f}) ==", s.material, s.yield_strength_pa,
                     s.required_fos));
    line(fmt::format("  {:<14} {:>12} {:>12} {:>8} {:>12} {:>12}", "component", "vonMises Pa", "deflect m", "FoS",
                     "ref vM Pa", "vM/ref"));
    for (const auto& c : s.components) {
      line(fmt::format("  {:<14} {:>12} {:>12} {:>8} {:>12.3e} {:>12}", c.component,
                       opt(c.peak_von_mises_pa, "{:.3e}"), opt(c.deflection_m, "{:.3e}"),
                       opt(c.factor_of_safety, "{:.2f}"), c.reference_stress_max_pa, opt(c.stress_ratio, "{:.3f}")));
      for (const auto& e : c.errors) line("    error: " + e);
    }
    line("  (vM/ref compares against the reference FEA maximum; informational only)");
  }

  if (r.profile) {
    const auto& p = *r.profile;
    line("");
    line("== force profile ==");
    line(fmt::format("  {:>10} {:>12} {:>12}", "elbow deg", "force N", "transfer deg"));
    for (const auto& row : p.rows)
      line(fmt::format("  {:10.3f} {:12.2f} {:12.3f}", row.elbow_angle_deg, row.piston_force_n,
                       row.transfer_angle_deg));
    line(fmt::format("  maximum {:.2f} N at {:.3f} deg", p.max_force_n, p.max_force_angle_deg));
  }

  if (r.reference) {
    line("");
    line("== reference FEA summary ==");
    line(fmt::format("  {:<14} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10}", "component", "def max", "def min",
                     "strain max", "strain min", "vM max", "vM min"));
    for (const auto& row : *r.reference)
      line(fmt::format("  {:<14} {:>10.3g} {:>10.3g} {:>10.3g} {:>10.3g} {:>10.3g} {:>10.5g}", row.component,
                       row.deformation_max_m, row.deformation_min_m, row.strain_max, row.strain_min,
                       row.stress_max_pa, row.stress_min_pa));
  }

  line("");
  line("== checks ==");
  for (const auto& v : r.verdicts)
    line(fmt::format("  [{}] {:<34} {}", v.pass ? "PASS" : "FAIL", v.check, v.detail));
  for (const auto& w : r.warnings) line("  warning: " + w);
  line(fmt::format("result: {} of {} check(s) passed", r.verdicts.size() - r.failures(), r.verdicts.size()));
  return out;
}

}  // namespace

std::string render_report(const Report& report, ReportFormat format) {
  if (format == ReportFormat::structured) return to_json(report).dump(2) + "\n";
  return render_text(report);
}

}  // namespace exo
