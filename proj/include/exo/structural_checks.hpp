#pragma once

// Closed-form stress checks for the frame members that carry cylinder
// reactions. These stand in for a finite-element run: beam bending for the
// cantilevered brackets, pin shear and plate bearing for the clevis, von
// Mises combination and yield-based factor of safety. Results are compared
// (informationally) against the reference FEA summary in Table1Reference.

#include <array>
#include <istream>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace exo {

enum class SectionShape { solid_rectangle, box, l_section };

std::string to_string(SectionShape shape);
SectionShape section_shape_from_string(const std::string& name);

// Outer width/height and wall thickness in meters. Thickness is unused for
// solid rectangles. For the L-section the horizontal leg has length `width`
// and the vertical leg `height`; bending is about the horizontal centroidal axis.
struct SectionDescription {
  SectionShape shape = SectionShape::box;
  double width = 0.012;
  double height = 0.012;
  double thickness = 0.002;
};

struct SectionProperties {
  SectionDescription description;
  double area = 0.0;            // m^2
  double second_moment = 0.0;   // m^4
  double extreme_fiber = 0.0;   // m
};

// Throws DimensionError.
SectionProperties section_properties(const SectionDescription& description);

struct MaterialSpec {
  std::string name = "Al6061-T6";
  double yield_strength = 2.76e8;   // Pa
  double elastic_modulus = 6.9e10;  // Pa

  void validate() const;
};

// Material data file: `name yield_Pa modulus_Pa` per line, '#' comments.
std::vector<MaterialSpec> parse_materials(std::istream& in);
std::vector<MaterialSpec> default_materials();

struct BendingResult {
  double stress = 0.0;      // Pa, root extreme fiber
  double deflection = 0.0;  // m, at the tip
};

// Single tip load. `angle_from_vertical_deg` rotates the load toward the
// member axis; only the transverse component load*cos(angle) bends it.
BendingResult cantilever_bending(double load, double angle_from_vertical_deg, double arm_length,
                                 const SectionProperties& section, double modulus);

struct PointLoad {
  double magnitude = 0.0;           // N
  double angle_from_vertical_deg = 0.0;
  double position = 0.0;            // m from the fixed end (cantilevers only)
};

struct CantileverResult {
  double bending_stress = 0.0;  // Pa
  double shear_stress = 0.0;    // Pa, average V/A at the root
  double deflection = 0.0;      // m, at the free end
};

// Linear superposition of transverse point loads on a cantilever of length `arm_length`.
CantileverResult cantilever_superposed(const std::vector<PointLoad>& loads, double arm_length,
                                       const SectionProperties& section, double modulus);

struct PinResult {
  double shear = 0.0;    // Pa, on the pin
  double bearing = 0.0;  // Pa, on the plate
};

PinResult pin_shear_bearing(double load, double plate_thickness, double hole_diameter,
                            int shear_planes);

double von_mises(double normal_stress, double shear_stress);

// nullopt when the stress is zero (infinite factor of safety).
std::optional<double> factor_of_safety(double von_mises_stress, const MaterialSpec& material);

enum class Component { back_support, wrist_support, u_section };
inline constexpr std::array kComponents{Component::back_support, Component::wrist_support,
                                        Component::u_section};

std::string to_string(Component component);
Component component_from_string(const std::string& name);

enum class SupportCondition { fixed_edge, fixed_hinge_ends, fixed_back_face };
std::string to_string(SupportCondition support);

struct CantileverModel {
  SectionDescription section;
  double arm_length = 0.0;  // m
};

struct PinJointModel {
  double plate_thickness = 0.003;  // m
  double hole_diameter = 0.006;    // m
  int shear_planes = 2;
};

struct StructuralLoadCase {
  Component component = Component::back_support;
  SupportCondition support = SupportCondition::fixed_edge;
  std::vector<PointLoad> loads;
  std::variant<CantileverModel, PinJointModel> model;
};

// Three components with sections drawn from 3 mm sheet and 12x12x2 box stock.
std::vector<StructuralLoadCase> default_structural_cases();

struct Table1Row {
  Component component;
  double deformation_max, deformation_min;  // m
  double strain_max, strain_min;            // m/m
  double stress_max, stress_min;            // Pa
};

struct Table1Reference {
  std::array<Table1Row, 3> rows;
  const Table1Row& row(Component component) const;
};

// Values exactly as printed in the reference FEA summary.
const Table1Reference& table1();

inline constexpr double kRequiredFactorOfSafety = 5.0;

struct ComponentReport {
  Component component = Component::back_support;
  std::optional<double> peak_von_mises;  // Pa
  std::optional<double> deflection;      // m, cantilevers only
  std::optional<double> factor_of_safety;
  bool pass = false;  // FoS >= 5, or no stress at all
  // analytical / FEA, informational only
  std::optional<double> stress_ratio;
  std::optional<double> deflection_ratio;
  std::vector<std::string> errors;
};

struct StructuralReport {
  std::string material;
  std::vector<ComponentReport> components;

  bool pass() const noexcept;
};

StructuralReport structural_report(const std::vector<StructuralLoadCase>& cases,
                                   const MaterialSpec& material, const Table1Reference& reference);

}  // namespace exo
