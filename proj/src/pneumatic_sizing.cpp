#include "exo/pneumatic_sizing.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "exo/errors.hpp"

namespace exo {

std::string to_string(ActingSide side) { return side == ActingSide::cap ? "cap" : "rod"; }

void CylinderSpec::validate() const {
  if (!(rod_diameter > 0.0)) throw DimensionError("rod diameter must be positive");
  if (!(bore > rod_diameter)) throw DimensionError("bore must exceed rod diameter");
  if (!(stroke > 0.0)) throw DimensionError("stroke must be positive");
  if (!(supply_pressure > 0.0)) throw DomainError("supply pressure must be positive");
}

double CylinderSpec::cap_area() const noexcept { return kPi / 4.0 * bore * bore; }

double CylinderSpec::rod_area() const noexcept {
  return kPi / 4.0 * (bore * bore - rod_diameter * rod_diameter);
}

BoreCatalog::BoreCatalog(std::vector<double> bores) : bores_(std::move(bores)) {
  if (bores_.empty()) throw DomainError("bore catalog is empty");
  for (std::size_t i = 0; i < bores_.size(); ++i) {
    if (!(bores_[i] > 0.0) || !std::isfinite(bores_[i]))
      throw DomainError(fmt::format("catalog bore #{} is not positive", i + 1));
    if (i > 0 && !(bores_[i] > bores_[i - 1]))
      throw DomainError("catalog bores must be strictly increasing");
  }
}

BoreCatalog BoreCatalog::standard() {
  std::vector<double> mm{10, 16, 20, 25, 30, 32, 40, 50, 63};
  for (double& b : mm) b = mm_to_m(b);
  return BoreCatalog(std::move(mm));
}

BoreCatalog BoreCatalog::parse(std::istream& in) {
  std::vector<double> bores;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    double mm = 0.0;
    if (!(fields >> mm)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      throw ParseError(fmt::format("bore catalog line {}: expected a number in mm", line_no));
    }
    std::string rest;
    if (fields >> rest) throw ParseError(fmt::format("bore catalog line {}: trailing text", line_no));
    bores.push_back(mm_to_m(mm));
  }
  try {
    return BoreCatalog(std::move(bores));
  } catch (const DomainError& e) {
    throw ParseError(std::string("bore catalog: ") + e.what());
  }
}

BoreCatalog BoreCatalog::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(fmt::format("cannot read bore catalog '{}'", path));
  return parse(in);
}

double min_bore(double force, double pressure, double rod_diameter) {
  if (!(force > 0.0)) throw DomainError("force must be positive to size a bore");
  if (!(pressure > 0.0)) throw DomainError("pressure must be positive");
  if (!(rod_diameter >= 0.0)) throw DomainError("rod diameter must be nonnegative");
  // F = P * (pi/4) * (D^2 - d^2), solved for D.
  return std::sqrt(4.0 * force / (kPi * pressure) + rod_diameter * rod_diameter);
}

double select_standard_bore(double min_bore, const BoreCatalog& catalog) {
  const auto& bores = catalog.bores();
  auto it = std::lower_bound(bores.begin(), bores.end(), min_bore);
  if (it == bores.end())
    throw NoStandardSize(fmt::format("no catalog bore >= {:.2f} mm (largest is {:.1f} mm)",
                                     m_to_mm(min_bore), m_to_mm(bores.back())));
  return *it;
}

double available_force(const CylinderSpec& spec, ActingSide side) {
  if (!(spec.bore > 0.0) || !(spec.rod_diameter >= 0.0) || !(spec.bore > spec.rod_diameter))
    throw DimensionError("cylinder requires bore > rod diameter >= 0");
  if (!(spec.supply_pressure >= 0.0)) throw DomainError("pressure must be nonnegative");
  return spec.supply_pressure * spec.area(side);
}

double stroke_required(const ArmGeometry& geometry, const SweepRange& sweep) {
  sweep.validate();
  if (sweep.min == sweep.max) return 0.0;
  return piston_length(geometry, sweep.max) - piston_length(geometry, sweep.min);
}

bool SizingReport::pass() const noexcept {
  if (!errors.empty()) return false;
  if (degenerate) return true;
  return margin.has_value() && *margin >= 1.0;
}

SizingReport sizing_report(const ArmGeometry& geometry, const LoadCase& load, double pressure,
                           double rod_diameter, const BoreCatalog& catalog,
                           const SweepRange& sweep) {
  SizingReport report;
  report.pressure = pressure;
  report.rod_diameter = rod_diameter;

  try {
    report.chain = required_piston_force(geometry, load);
  } catch (const Error& e) {
    report.errors.push_back(std::string("force chain: ") + e.what());
  }

  try {
    report.stroke = stroke_required(geometry, sweep);
  } catch (const Error& e) {
    report.errors.push_back(std::string("stroke: ") + e.what());
  }

  if (!report.errors.empty()) return report;

  if (report.chain.f_piston == 0.0) {
    report.degenerate = true;
    return report;
  }

  try {
    report.min_bore = min_bore(report.chain.f_piston, pressure, rod_diameter);
    report.selected_bore = select_standard_bore(*report.min_bore, catalog);
    CylinderSpec chosen;
    chosen.bore = *report.selected_bore;
    chosen.rod_diameter = rod_diameter;
    chosen.supply_pressure = pressure;
    report.available_force = available_force(chosen, ActingSide::rod);
    report.margin = *report.available_force / report.chain.f_piston;
  } catch (const Error& e) {
    report.errors.push_back(std::string("bore: ") + e.what());
  }
  return report;
}

}  // namespace exo
