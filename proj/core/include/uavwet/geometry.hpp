#pragma once

#include <cmath>
#include <stdexcept>

namespace uavwet {

// 3-D point in meters. Devices sit on the ground (z = 0), UAVs fly at the
// fixed altitude z = h_fix.
struct Position3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

inline double distance(const Position3& a, const Position3& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

inline double horizontal_distance(const Position3& a, const Position3& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

// Elevation angle from a UAV at altitude h_fix to a ground device at slant
// distance d, in degrees. The LoS-probability constants (a, b) are calibrated
// for degree-valued angles.
inline double elevation_deg(double d, double h_fix) {
  if (!(d >= h_fix) || !(h_fix > 0.0)) {
    throw std::domain_error("elevation_deg: requires d >= h_fix > 0");
  }
  return std::asin(h_fix / d) * 180.0 / M_PI;
}

}  // namespace uavwet
