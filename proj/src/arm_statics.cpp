#include "exo/arm_statics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <fmt/format.h>

#include "exo/errors.hpp"

namespace exo {

namespace {

constexpr double kHalfPi = kPi / 2.0;

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw DomainError(fmt::format("{} must be finite", what));
}

}  // namespace

void ArmGeometry::validate() const {
  require_finite(ab, "ab");
  require_finite(ac, "ac");
  require_finite(ad, "ad");
  if (!(ab > 0.0)) throw GeometryError(fmt::format("ab must be positive (got {})", ab));
  if (!(ab <= ac)) throw GeometryError(fmt::format("ab must not exceed ac ({} > {})", ab, ac));
  if (!(ad > 0.0)) throw GeometryError(fmt::format("ad must be positive (got {})", ad));
  if (!(initial_transfer_angle > 0.0) ||
      rad_to_deg(initial_transfer_angle) > kTransferAngleCapDeg + 1e-9)
    throw DomainError("initial transfer angle must lie in (0°, 135°]");
  if (!(mount_angle >= 0.0 && mount_angle < kHalfPi))
    throw DomainError("mount angle must lie in [0°, 90°)");
  if (!(std::abs(initial_forearm_angle) < kHalfPi))
    throw DomainError("initial forearm angle must lie in (-90°, 90°)");
  const double elbow = initial_elbow_angle();
  if (!(elbow > 0.0 && elbow < kPi))
    throw GeometryError("initial elbow angle (transfer angle minus forearm offset) must lie in (0°, 180°)");
}

double ArmGeometry::load_height_at(double elbow_angle) const {
  return -ac * std::sin(forearm_angle_at(elbow_angle));
}

void LoadCase::validate() const {
  if (!(mass_per_arm >= 0.0) || !std::isfinite(mass_per_arm))
    throw DomainError("mass per arm must be a finite value >= 0");
  if (!(gravity > 0.0) || !std::isfinite(gravity)) throw DomainError("gravity must be positive");
}

void SweepRange::validate() const {
  if (!(min > 0.0 && max < kPi && min <= max))
    throw DomainError(fmt::format("sweep [{:.4f}°, {:.4f}°] must satisfy 0° < min <= max < 180°",
                                  rad_to_deg(min), rad_to_deg(max)));
}

double perpendicular_load(double f0, double forearm_angle) {
  if (!(f0 >= 0.0)) throw DomainError("load must be nonnegative");
  if (!(std::abs(forearm_angle) < kHalfPi))
    throw DomainError(fmt::format("forearm angle {:.4f}° outside (-90°, 90°)", rad_to_deg(forearm_angle)));
  return f0 * std::cos(forearm_angle);
}

double lever_force(double f1, double ab, double ac) {
  if (!(f1 >= 0.0)) throw DomainError("perpendicular load must be nonnegative");
  if (!(ab > 0.0) || !(ab <= ac))
    throw GeometryError(fmt::format("lever requires 0 < ab <= ac (ab={}, ac={})", ab, ac));
  // Moment balance about A: f2 * ab = f1 * ac.
  return f1 * (ac / ab);
}

double piston_force(double f2_prime, double mount_angle) {
  if (!(f2_prime >= 0.0)) throw DomainError("force must be nonnegative");
  if (!(mount_angle >= 0.0 && mount_angle < kHalfPi))
    throw DomainError(fmt::format("mount angle {:.4f}° outside [0°, 90°)", rad_to_deg(mount_angle)));
  return f2_prime / std::cos(mount_angle);
}

ForceChain required_piston_force_at(const ArmGeometry& geometry, const LoadCase& load,
                                    double elbow_angle) {
  ForceChain chain;
  chain.f0 = load.weight();
  chain.f1 = perpendicular_load(chain.f0, geometry.forearm_angle_at(elbow_angle));
  chain.f2 = lever_force(chain.f1, geometry.ab, geometry.ac);
  chain.f_piston = piston_force(chain.f2_prime(), geometry.mount_angle);
  return chain;
}

ForceChain required_piston_force(const ArmGeometry& geometry, const LoadCase& load) {
  geometry.validate();
  load.validate();
  return required_piston_force_at(geometry, load, geometry.initial_elbow_angle());
}

double piston_length(const ArmGeometry& geometry, double elbow_angle) {
  if (!(geometry.ab > 0.0) || !(geometry.ad > 0.0))
    throw GeometryError("link lengths ab and ad must be positive");
  if (!(elbow_angle > 0.0 && elbow_angle < kPi))
    throw DomainError(fmt::format("elbow angle {:.4f}° outside (0°, 180°)", rad_to_deg(elbow_angle)));
  const double ab = geometry.ab;
  const double ad = geometry.ad;
  return std::sqrt(ab * ab + ad * ad - 2.0 * ab * ad * std::cos(elbow_angle));
}

double elbow_angle_from_piston(const ArmGeometry& geometry, double length) {
  const double ab = geometry.ab;
  const double ad = geometry.ad;
  if (!(ab > 0.0) || !(ad > 0.0)) throw GeometryError("link lengths ab and ad must be positive");
  const double lo = std::abs(ab - ad);
  const double hi = ab + ad;
  if (!(length >= lo && length <= hi))
    throw RangeError(fmt::format("piston length {} m outside reachable [{}, {}] m", length, lo, hi));
  const double c = (ab * ab + ad * ad - length * length) / (2.0 * ab * ad);
  return std::acos(std::clamp(c, -1.0, 1.0));
}

double transfer_angle_at(const ArmGeometry& geometry, double elbow_angle) noexcept {
  return geometry.forearm_offset + elbow_angle;
}

TransferAngleCheck check_transfer_angle(const ArmGeometry& geometry, double elbow_angle) {
  TransferAngleCheck out;
  out.angle = transfer_angle_at(geometry, elbow_angle);
  out.margin_deg = kTransferAngleCapDeg - rad_to_deg(out.angle);
  // Boundary inclusive; tolerance absorbs the degree/radian round trip.
  out.pass = out.margin_deg >= -1e-9;
  return out;
}

std::vector<ProfileRow> torque_profile(const ArmGeometry& geometry, const LoadCase& load,
                                       const SweepRange& sweep, int steps) {
  geometry.validate();
  load.validate();
  sweep.validate();
  const bool degenerate = sweep.min == sweep.max;
  if (steps < (degenerate ? 1 : 2))
    throw DomainError(fmt::format("torque profile needs at least 2 steps (got {})", steps));

  std::vector<ProfileRow> rows;
  rows.reserve(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) {
    const double t = steps == 1 ? 0.0 : static_cast<double>(i) / (steps - 1);
    const double angle = i == steps - 1 ? sweep.max : sweep.min + t * (sweep.max - sweep.min);
    rows.push_back({angle, required_piston_force_at(geometry, load, angle).f_piston,
                    transfer_angle_at(geometry, angle)});
  }
  return rows;
}

}  // namespace exo
