#pragma once

#include <numbers>

namespace exo {

inline constexpr double kPi = std::numbers::pi;

constexpr double deg_to_rad(double deg) noexcept { return deg * kPi / 180.0; }
constexpr double rad_to_deg(double rad) noexcept { return rad * 180.0 / kPi; }

constexpr double mm_to_m(double mm) noexcept { return mm * 1e-3; }
constexpr double m_to_mm(double m) noexcept { return m * 1e3; }

}  // namespace exo
