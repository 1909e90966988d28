#pragma once

// Design configuration: one JSON document with units in the key names.
// Every key is optional; omitted keys take the reference design point
// (10 kg per arm, 6 bar, 10 mm rod, AB 0.15 m, AC 0.33 m, AD 0.15 m,
// 30° forearm, 120° transfer, 45° mount). Unknown keys are rejected.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "exo/arm_statics.hpp"
#include "exo/control_sim.hpp"
#include "exo/pneumatic_sizing.hpp"
#include "exo/structural_checks.hpp"

namespace exo {

struct PneumaticsConfig {
  double pressure = 6e5;       // Pa
  double rod_diameter = 0.010; // m
  double bore = 0.030;         // m, the installed cylinder used by the simulator
  double stroke = 0.150;       // m
  BoreCatalog catalog = BoreCatalog::standard();

  CylinderSpec cylinder() const;
};

struct SimulationConfig {
  Ticks sample_step = std::chrono::milliseconds(10);
  std::optional<Ticks> duration;  // default: last trace event + 5 s
};

struct StructuralConfig {
  MaterialSpec material;
  std::vector<StructuralLoadCase> cases = default_structural_cases();
};

struct DesignConfig {
  ArmGeometry geometry;
  SweepRange sweep;
  LoadCase load;
  PneumaticsConfig pneumatics;
  ControlConfig control;
  SimulationConfig simulation;
  StructuralConfig structural;
  // Effective document after defaults were applied; used for the report digest.
  nlohmann::json effective;
};

// Environment variable naming a directory with bore_catalog.txt / materials.txt.
inline constexpr const char* kDataDirEnv = "EXO_DATA_DIR";

// `base_dir` resolves relative file references inside the document.
// Throws ParseError, ValidationError, UnknownKeyError.
DesignConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
DesignConfig load_config(const std::filesystem::path& path);

nlohmann::json default_config_document();

}  // namespace exo
