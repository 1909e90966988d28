#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "exo/config.hpp"

namespace exo {

inline constexpr const char* kToolVersion = "1.0.0";

struct Verdict {
  std::string check;   // dotted name, e.g. "structural.wrist_support.fos"
  bool pass = false;
  std::string detail;

  bool operator==(const Verdict&) const = default;
};

struct SizingSection {
  double f0_n = 0, f1_n = 0, f2_n = 0, piston_force_n = 0;
  std::optional<double> min_bore_mm, selected_bore_mm, stroke_mm, available_force_n, margin;
  double pressure_pa = 0;
  double rod_diameter_mm = 0;
  double initial_transfer_angle_deg = 0;
  bool degenerate = false;
  std::vector<std::string> errors;

  bool operator==(const SizingSection&) const = default;
};

struct LiftEnergy {
  double start_s = 0, duration_s = 0, piston_work_j = 0, potential_energy_j = 0;
  bool operator==(const LiftEnergy&) const = default;
};

struct SimulationSection {
  double duration_s = 0, sample_step_s = 0;
  int samples = 0;
  int lifts = 0;
  std::vector<double> lift_durations_s;
  double peak_required_force_n = 0;
  std::optional<double> min_force_margin;
  int transfer_angle_violations = 0;
  double max_transfer_angle_deg = 0;
  int stalls = 0, detections = 0, accepted_toggles = 0, rejected_events = 0;
  std::vector<LiftEnergy> energy;

  bool operator==(const SimulationSection&) const = default;
};

struct ComponentSection {
  std::string component;
  std::optional<double> peak_von_mises_pa, deflection_m, factor_of_safety;
  std::optional<double> stress_ratio, deflection_ratio;
  double reference_stress_max_pa = 0, reference_deformation_max_m = 0;
  std::vector<std::string> errors;

  bool operator==(const ComponentSection&) const = default;
};

struct StructuralSection {
  std::string material;
  double yield_strength_pa = 0;
  double required_fos = kRequiredFactorOfSafety;
  std::vector<ComponentSection> components;

  bool operator==(const StructuralSection&) const = default;
};

struct ProfilePoint {
  double elbow_angle_deg = 0, piston_force_n = 0, transfer_angle_deg = 0;
  bool operator==(const ProfilePoint&) const = default;
};

struct ProfileSection {
  std::vector<ProfilePoint> rows;
  double max_force_n = 0;
  double max_force_angle_deg = 0;

  bool operator==(const ProfileSection&) const = default;
};

struct ReferenceRow {
  std::string component;
  double deformation_max_m, deformation_min_m, strain_max, strain_min, stress_max_pa, stress_min_pa;
  bool operator==(const ReferenceRow&) const = default;
};

struct Report {
  std::string tool_version = kToolVersion;
  std::string input_digest;
  std::optional<SizingSection> sizing;
  std::optional<SimulationSection> simulation;
  std::optional<StructuralSection> structural;
  std::optional<ProfileSection> profile;
  std::optional<std::vector<ReferenceRow>> reference;
  std::vector<Verdict> verdicts;
  std::vector<std::string> warnings;

  bool pass() const noexcept;
  int failures() const noexcept;
  bool operator==(const Report&) const = default;
};

// 64-bit FNV-1a, hex encoded.
std::string digest(const std::string& bytes);

// Section builders append their verdicts and warnings to `report`.
void add_sizing(Report& report, const DesignConfig& config);
void add_simulation(Report& report, const DesignConfig& config, const SimResult& result);
void add_structural(Report& report, const DesignConfig& config);
void add_profile(Report& report, const DesignConfig& config, int steps);
void add_reference(Report& report);

enum class ReportFormat { text, structured };

std::string render_report(const Report& report, ReportFormat format);
Report parse_structured_report(const std::string& text);

nlohmann::json to_json(const Report& report);

}  // namespace exo
