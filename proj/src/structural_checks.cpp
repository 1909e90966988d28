#include "exo/structural_checks.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "exo/errors.hpp"
#include "exo/units.hpp"

namespace exo {

std::string to_string(SectionShape shape) {
  switch (shape) {
    case SectionShape::solid_rectangle: return "solid_rectangle";
    case SectionShape::box: return "box";
    case SectionShape::l_section: return "l_section";
  }
  return "?";
}

SectionShape section_shape_from_string(const std::string& name) {
  if (name == "solid_rectangle") return SectionShape::solid_rectangle;
  if (name == "box") return SectionShape::box;
  if (name == "l_section") return SectionShape::l_section;
  throw DomainError(fmt::format("unknown section shape '{}'", name));
}

SectionProperties section_properties(const SectionDescription& d) {
  if (!(d.width > 0.0) || !(d.height > 0.0) || !std::isfinite(d.width) || !std::isfinite(d.height))
    throw DimensionError("section width and height must be positive");

  SectionProperties p;
  p.description = d;
  const double b = d.width;
  const double h = d.height;

  if (d.shape == SectionShape::solid_rectangle) {
    p.area = b * h;
    p.second_moment = b * h * h * h / 12.0;
    p.extreme_fiber = h / 2.0;
    return p;
  }

  const double t = d.thickness;
  if (!(t > 0.0)) throw DimensionError("wall thickness must be positive");
  if (!(t < b / 2.0) || !(t < h / 2.0))
    throw DimensionError(fmt::format("wall thickness {} mm must be below half of each outer dimension",
                                     m_to_mm(t)));

  if (d.shape == SectionShape::box) {
    const double bi = b - 2.0 * t;
    const double hi = h - 2.0 * t;
    p.area = b * h - bi * hi;
    p.second_moment = (b * h * h * h - bi * hi * hi * hi) / 12.0;
    p.extreme_fiber = h / 2.0;
    return p;
  }

  // L-section: horizontal flange b x t along the bottom, vertical web t x (h - t) above it.
  const double flange_area = b * t;
  const double web_height = h - t;
  const double web_area = t * web_height;
  const double flange_y = t / 2.0;
  const double web_y = t + web_height / 2.0;
  p.area = flange_area + web_area;
  const double centroid = (flange_area * flange_y + web_area * web_y) / p.area;
  p.second_moment = b * t * t * t / 12.0 + flange_area * (centroid - flange_y) * (centroid - flange_y) +
                    t * web_height * web_height * web_height / 12.0 +
                    web_area * (web_y - centroid) * (web_y - centroid);
  p.extreme_fiber = std::max(centroid, h - centroid);
  return p;
}

void MaterialSpec::validate() const {
  if (name.empty()) throw DomainError("material name is empty");
  if (!(yield_strength > 0.0) || !(elastic_modulus > 0.0))
    throw DomainError(fmt::format("material '{}' needs positive yield strength and modulus", name));
}

std::vector<MaterialSpec> parse_materials(std::istream& in) {
  std::vector<MaterialSpec> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    MaterialSpec m;
    if (!(fields >> m.name)) continue;
    if (!(fields >> m.yield_strength >> m.elastic_modulus))
      throw ParseError(fmt::format("materials line {}: expected 'name yield_Pa modulus_Pa'", line_no));
    std::string rest;
    if (fields >> rest) throw ParseError(fmt::format("materials line {}: trailing text", line_no));
    try {
      m.validate();
    } catch (const DomainError& e) {
      throw ParseError(fmt::format("materials line {}: {}", line_no, e.what()));
    }
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<MaterialSpec> default_materials() {
  return {MaterialSpec{"Al6061-T6", 2.76e8, 6.9e10}, MaterialSpec{"Al6061-O", 5.5e7, 6.9e10}};
}

namespace {

double transverse(double load, double angle_from_vertical_deg) {
  const double w = load * std::cos(deg_to_rad(angle_from_vertical_deg));
  // cos(90°) is ~6e-17, not zero; a purely axial load must not bend the member.
  return std::abs(w) < 1e-12 * std::abs(load) ? 0.0 : w;
}

void require_member(double arm_length, const SectionProperties& section, double modulus) {
  if (!(arm_length > 0.0)) throw DimensionError("arm length must be positive");
  if (!(section.second_moment > 0.0) || !(section.area > 0.0))
    throw DimensionError("section properties must be positive");
  if (!(modulus > 0.0)) throw DimensionError("elastic modulus must be positive");
}

}  // namespace

BendingResult cantilever_bending(double load, double angle_from_vertical_deg, double arm_length,
                                 const SectionProperties& section, double modulus) {
  require_member(arm_length, section, modulus);
  const double w = transverse(load, angle_from_vertical_deg);
  BendingResult r;
  r.stress = std::abs(w) * arm_length * section.extreme_fiber / section.second_moment;
  r.deflection = std::abs(w) * arm_length * arm_length * arm_length / (3.0 * modulus * section.second_moment);
  return r;
}

CantileverResult cantilever_superposed(const std::vector<PointLoad>& loads, double arm_length,
                                       const SectionProperties& section, double modulus) {
  require_member(arm_length, section, modulus);
  double root_moment = 0.0;
  double root_shear = 0.0;
  double tip_deflection = 0.0;
  for (const PointLoad& p : loads) {
    if (!(p.magnitude >= 0.0)) throw DimensionError("load magnitude must be nonnegative");
    if (!(p.position > 0.0) || p.position > arm_length * (1.0 + 1e-12))
      throw DimensionError(fmt::format("load position {} m outside the member (0, {}] m", p.position,
                                       arm_length));
    const double w = transverse(p.magnitude, p.angle_from_vertical_deg);
    const double a = p.position;
    root_moment += w * a;
    root_shear += w;
    // Tip deflection of a cantilever loaded at a: W a^2 (3L - a) / (6 E I).
    tip_deflection += w * a * a * (3.0 * arm_length - a) / (6.0 * modulus * section.second_moment);
  }
  CantileverResult r;
  r.bending_stress = std::abs(root_moment) * section.extreme_fiber / section.second_moment;
  r.shear_stress = std::abs(root_shear) / section.area;
  r.deflection = std::abs(tip_deflection);
  return r;
}

PinResult pin_shear_bearing(double load, double plate_thickness, double hole_diameter,
                            int shear_planes) {
  if (!(plate_thickness > 0.0) || !(hole_diameter > 0.0))
    throw DimensionError("plate thickness and hole diameter must be positive");
  if (shear_planes != 1 && shear_planes != 2) throw DimensionError("shear planes must be 1 or 2");
  if (!(load >= 0.0)) throw DimensionError("load must be nonnegative");
  PinResult r;
  r.shear = load / (shear_planes * kPi / 4.0 * hole_diameter * hole_diameter);
  r.bearing = load / (hole_diameter * plate_thickness);
  return r;
}

double von_mises(double normal_stress, double shear_stress) {
  return std::sqrt(normal_stress * normal_stress + 3.0 * shear_stress * shear_stress);
}

std::optional<double> factor_of_safety(double von_mises_stress, const MaterialSpec& material) {
  if (von_mises_stress == 0.0) return std::nullopt;
  if (!(von_mises_stress > 0.0)) throw DomainError("stress must be nonnegative");
  return material.yield_strength / von_mises_stress;
}

std::string to_string(Component component) {
  switch (component) {
    case Component::back_support: return "back_support";
    case Component::wrist_support: return "wrist_support";
    case Component::u_section: return "u_section";
  }
  return "?";
}

Component component_from_string(const std::string& name) {
  for (Component c : kComponents)
    if (to_string(c) == name) return c;
  throw DomainError(fmt::format("unknown component '{}'", name));
}

std::string to_string(SupportCondition support) {
  switch (support) {
    case SupportCondition::fixed_edge: return "fixed_edge";
    case SupportCondition::fixed_hinge_ends: return "fixed_hinge_ends";
    case SupportCondition::fixed_back_face: return "fixed_back_face";
  }
  return "?";
}

std::vector<StructuralLoadCase> default_structural_cases() {
  std::vector<StructuralLoadCase> cases;

  // Cylinder hinge bracket on the back frame: bent 3 mm sheet, ribs fixed.
  cases.push_back({Component::back_support,
                   SupportCondition::fixed_edge,
                   {PointLoad{98.1, 45.0, 0.05}},
                   CantileverModel{{SectionShape::l_section, 0.030, 0.030, 0.003}, 0.05}});

  // Wrist support: 12x12x2 box, cylinder reaction at the rod-end hinge plus 15 kg at the wrist end.
  cases.push_back({Component::wrist_support,
                   SupportCondition::fixed_hinge_ends,
                   {PointLoad{98.1, 45.0, 0.15}, PointLoad{147.2, 0.0, 0.25}},
                   CantileverModel{{SectionShape::box, 0.012, 0.012, 0.002}, 0.25}});

  // U-section clevis: opposing loads at both holes shear the pin.
  cases.push_back({Component::u_section,
                   SupportCondition::fixed_back_face,
                   {PointLoad{98.1, 45.0, 0.0}},
                   PinJointModel{0.003, 0.006, 2}});
  return cases;
}

const Table1Row& Table1Reference::row(Component component) const {
  for (const auto& r : rows)
    if (r.component == component) return r;
  throw DomainError("component missing from reference table");
}

const Table1Reference& table1() {
  static const Table1Reference ref{{{
      {Component::back_support, 1.52e-5, 0.0, 5.76e-5, 1.05e-26, 3.90e6, 3.36e-16},
      {Component::wrist_support, 1.04e-3, 0.0, 6.95e-4, 5.73e-7, 4.91e7, 2601.3},
      {Component::u_section, 1.72e-6, 0.0, 2.71e-4, 7.97e-8, 1.93e7, 5025.7},
  }}};
  return ref;
}

bool StructuralReport::pass() const noexcept {
  return std::all_of(components.begin(), components.end(),
                     [](const ComponentReport& c) { return c.pass; });
}

namespace {

ComponentReport evaluate(const StructuralLoadCase& lc, const MaterialSpec& material,
                         const Table1Reference& reference) {
  ComponentReport out;
  out.component = lc.component;
  try {
    if (lc.loads.empty()) throw DomainError("load case has no loads");
    double peak = 0.0;
    if (const auto* beam = std::get_if<CantileverModel>(&lc.model)) {
      const SectionProperties section = section_properties(beam->section);
      const CantileverResult r =
          cantilever_superposed(lc.loads, beam->arm_length, section, material.elastic_modulus);
      peak = von_mises(r.bending_stress, r.shear_stress);
      out.deflection = r.deflection;
    } else {
      const auto& pin = std::get<PinJointModel>(lc.model);
      double total = 0.0;
      for (const PointLoad& p : lc.loads) total += p.magnitude;
      const PinResult r = pin_shear_bearing(total, pin.plate_thickness, pin.hole_diameter, pin.shear_planes);
      // Bearing acts on the plate and shear on the pin; the worse of the two governs.
      peak = std::max(von_mises(r.bearing, 0.0), von_mises(0.0, r.shear));
    }
    out.peak_von_mises = peak;
    out.factor_of_safety = factor_of_safety(peak, material);
    out.pass = !out.factor_of_safety || *out.factor_of_safety >= kRequiredFactorOfSafety;

    const Table1Row& ref = reference.row(lc.component);
    if (peak > 0.0) out.stress_ratio = peak / ref.stress_max;
    if (out.deflection && *out.deflection > 0.0) out.deflection_ratio = *out.deflection / ref.deformation_max;
  } catch (const Error& e) {
    out.errors.push_back(e.what());
    out.pass = false;
  }
  return out;
}

}  // namespace

StructuralReport structural_report(const std::vector<StructuralLoadCase>& cases,
                                   const MaterialSpec& material, const Table1Reference& reference) {
  material.validate();
  std::set<Component> seen;
  for (const auto& lc : cases)
    if (!seen.insert(lc.component).second)
      throw DomainError(fmt::format("duplicate load case for {}", to_string(lc.component)));

  StructuralReport report;
  report.material = material.name;
  for (const auto& lc : cases) report.components.push_back(evaluate(lc, material, reference));
  return report;
}

}  // namespace exo
