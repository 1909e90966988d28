#pragma once

// Planar quasi-static model of one exoskeleton arm.
//
// Points: A elbow pivot, B rod attachment on the forearm, C load point (hand),
// D cylinder base mount on the upper-arm/back link. The elbow angle used
// throughout is the included angle BAD; the cylinder length is |BD|.
// Angles are radians inside this module.

#include <vector>

#include "exo/units.hpp"

namespace exo {

struct ArmGeometry {
  double ab = 0.15;  // m, A -> B
  double ac = 0.33;  // m, A -> C
  double ad = 0.15;  // m, A -> D
  // Inclination of AC below horizontal at lift start. 84.95 / 98.1 = cos 30°.
  double initial_forearm_angle = deg_to_rad(30.0);
  double initial_transfer_angle = deg_to_rad(120.0);
  // Between the cylinder axis and the force perpendicular to AC at B.
  double mount_angle = deg_to_rad(45.0);
  // Fixed angle BAC added to BAD to give the transfer angle DAC.
  double forearm_offset = 0.0;

  // Throws GeometryError / DomainError.
  void validate() const;

  double initial_elbow_angle() const noexcept { return initial_transfer_angle - forearm_offset; }

  // Forearm inclination below horizontal when the elbow is at `elbow_angle`.
  double forearm_angle_at(double elbow_angle) const noexcept {
    return initial_forearm_angle + (elbow_angle - initial_elbow_angle());
  }

  // Height of C relative to A (negative below the pivot).
  double load_height_at(double elbow_angle) const;
};

struct LoadCase {
  double mass_per_arm = 10.0;  // kg
  double gravity = 9.81;       // m/s^2

  double total_added_capacity() const noexcept { return 2.0 * mass_per_arm; }
  double weight() const noexcept { return mass_per_arm * gravity; }
  void validate() const;
};

struct ForceChain {
  double f0 = 0.0;        // vertical load at C
  double f1 = 0.0;        // component of f0 perpendicular to AC
  double f2 = 0.0;        // perpendicular force at B; the reaction F2' has the same magnitude
  double f_piston = 0.0;  // cylinder axial force

  double f2_prime() const noexcept { return f2; }
};

// Closed elbow-angle interval, radians.
struct SweepRange {
  double min = deg_to_rad(42.93);
  double max = deg_to_rad(120.0);

  void validate() const;
};

double perpendicular_load(double f0, double forearm_angle);
double lever_force(double f1, double ab, double ac);
double piston_force(double f2_prime, double mount_angle);

ForceChain required_piston_force(const ArmGeometry& geometry, const LoadCase& load);
// Same chain with the forearm advanced to the given elbow angle.
ForceChain required_piston_force_at(const ArmGeometry& geometry, const LoadCase& load,
                                    double elbow_angle);

double piston_length(const ArmGeometry& geometry, double elbow_angle);
double elbow_angle_from_piston(const ArmGeometry& geometry, double length);

struct TransferAngleCheck {
  double angle = 0.0;      // rad
  double margin_deg = 0.0; // 135° - angle, negative past the cap
  bool pass = false;
};

inline constexpr double kTransferAngleCapDeg = 135.0;

double transfer_angle_at(const ArmGeometry& geometry, double elbow_angle) noexcept;
TransferAngleCheck check_transfer_angle(const ArmGeometry& geometry, double elbow_angle);

struct ProfileRow {
  double elbow_angle = 0.0;     // rad
  double piston_force = 0.0;    // N
  double transfer_angle = 0.0;  // rad
};

// Rows ascend from sweep.min to sweep.max. A degenerate sweep (min == max)
// may use a single step.
std::vector<ProfileRow> torque_profile(const ArmGeometry& geometry, const LoadCase& load,
                                       const SweepRange& sweep, int steps);

}  // namespace exo
