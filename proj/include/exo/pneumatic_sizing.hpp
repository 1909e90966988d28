#pragma once

#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "exo/arm_statics.hpp"

namespace exo {

enum class ActingSide { cap, rod };

std::string to_string(ActingSide side);

// Double-acting cylinder. Lengths in meters, pressure in pascals (gauge).
struct CylinderSpec {
  double bore = 0.030;
  double rod_diameter = 0.010;
  double stroke = 0.150;
  double supply_pressure = 6e5;
  // The design lifts on retraction, so the rod-side annulus does the work.
  ActingSide acting_side = ActingSide::rod;

  void validate() const;

  double cap_area() const noexcept;
  double rod_area() const noexcept;  // annulus
  double area(ActingSide side) const noexcept {
    return side == ActingSide::cap ? cap_area() : rod_area();
  }
};

// Commercially available bores, strictly increasing, meters.
class BoreCatalog {
 public:
  explicit BoreCatalog(std::vector<double> bores);

  // 10, 16, 20, 25, 30, 32, 40, 50, 63 mm.
  static BoreCatalog standard();
  // One bore in millimeters per line; '#' starts a comment. Throws ParseError.
  static BoreCatalog parse(std::istream& in);
  static BoreCatalog from_file(const std::string& path);

  const std::vector<double>& bores() const noexcept { return bores_; }

 private:
  std::vector<double> bores_;
};

double min_bore(double force, double pressure, double rod_diameter);
double select_standard_bore(double min_bore, const BoreCatalog& catalog);
double available_force(const CylinderSpec& spec, ActingSide side);
double stroke_required(const ArmGeometry& geometry, const SweepRange& sweep);

struct SizingReport {
  ForceChain chain;
  std::optional<double> min_bore;       // m
  std::optional<double> selected_bore;  // m
  std::optional<double> stroke;         // m
  std::optional<double> available_force;  // N, rod side at the selected bore
  std::optional<double> margin;           // available / required
  double pressure = 0.0;
  double rod_diameter = 0.0;
  bool degenerate = false;  // zero required force, nothing to size
  std::vector<std::string> errors;

  // No sub-errors and margin >= 1 (a degenerate zero-load sizing passes).
  bool pass() const noexcept;
};

// Never throws for sub-operation failures; they are collected in `errors`.
SizingReport sizing_report(const ArmGeometry& geometry, const LoadCase& load, double pressure,
                           double rod_diameter, const BoreCatalog& catalog,
                           const SweepRange& sweep);

}  // namespace exo
