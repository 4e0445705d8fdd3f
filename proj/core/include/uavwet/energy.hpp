#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "uavwet/channel.hpp"
#include "uavwet/geometry.hpp"

namespace uavwet {

// Rotary-wing propulsion model constants. The induced-velocity parameter
// v_induced_hover and the drag/solidity pair enter the velocity-dependent
// power exactly as in the three-term rotor model.
struct PropulsionParams {
  double p_blade = 79.86;        // blade-profile power at hover, W
  double p_induced = 88.63;      // induced power at hover, W
  double v_tip = 120.0;          // rotor tip speed, m/s
  double v_induced_hover = 4.03; // mean induced velocity at hover, m/s
  double drag_ratio = 0.6;       // fuselage drag ratio
  double solidity = 0.05;        // rotor solidity
  double air_density = 1.225;    // kg/m^3
  double rotor_area = 0.503;     // rotor disc area, m^2
};

// Propulsion power at horizontal speed V: blade profile + parasite + induced.
inline double propulsion_power(double v, const PropulsionParams& p) {
  const double v2 = v * v;
  const double blade = p.p_blade * (1.0 + 3.0 * v2 / (p.v_tip * p.v_tip));
  const double parasite =
      0.5 * p.solidity * p.air_density * p.drag_ratio * p.rotor_area * v2 * v;
  const double e02 = p.v_induced_hover * p.v_induced_hover;
  const double radical =
      std::sqrt(1.0 + v2 * v2 / (4.0 * e02 * e02)) - v2 / (2.0 * e02);
  const double induced = p.p_induced * std::sqrt(radical);
  return blade + parasite + induced;
}

// Non-linear rectenna harvester: dead below the sensitivity power, clamped
// above the saturation power, logistic transfer curve in between.
struct HarvesterParams {
  double p_sen = 1e-4;         // sensitivity power, W
  double p_sat = 5.0119e-3;    // saturation power, W
  double peak_efficiency = 0.55;
  double steepness = 5400.0;   // logistic steepness, 1/W
  double midpoint = 2.6e-3;    // logistic midpoint, W

  // Peak of the logistic chosen so curve(p_sat) = peak_efficiency * p_sat.
  double curve_peak() const {
    return peak_efficiency * p_sat *
           (1.0 + std::exp(-steepness * (p_sat - midpoint)));
  }

  double curve(double p) const {
    return curve_peak() / (1.0 + std::exp(-steepness * (p - midpoint)));
  }
};

// DC power out of the harvester for RF input power p_rf.
inline double harvest_dc_power(double p_rf, const HarvesterParams& h) {
  if (p_rf < h.p_sen) return 0.0;
  if (p_rf >= h.p_sat) return h.curve(h.p_sat);
  return h.curve(p_rf);
}

// UAV battery ledger in W*s. `reserve` is the residual-energy requirement for
// a safe return; it is not a hard floor, the hard floor is 0.
struct UavBattery {
  double level = 0.0;
  double capacity = 0.0;
  double reserve = 0.0;
};

inline UavBattery uav_battery_step(const UavBattery& b, double v, bool wet_on,
                                   double wet_power, const PropulsionParams& p,
                                   double slot_seconds) {
  UavBattery out = b;
  const double draw =
      propulsion_power(v, p) * slot_seconds +
      (wet_on ? wet_power * slot_seconds : 0.0);
  out.level = std::max(b.level - draw, 0.0);
  return out;
}

// Device battery ledger in W*s; accumulate-only, capped at capacity.
struct DeviceBattery {
  double level = 0.0;
  double capacity = 0.0;
  double threshold = 0.0;
};

inline DeviceBattery device_battery_step(const DeviceBattery& b, double e_har) {
  DeviceBattery out = b;
  out.level = std::min(b.level + e_har, b.capacity);
  return out;
}

// Harvested energy at one device for one slot. RF contributions from all
// transmitting UAVs sum at the rectenna before the non-linearity, so two
// UAVs each below sensitivity can jointly cross it.
inline double harvested_energy(
    const Position3& device,
    std::span<const std::pair<Position3, bool>> uavs, double wet_power,
    const ChannelParams& ch, const HarvesterParams& h, double slot_seconds) {
  double rf = 0.0;
  for (const auto& [pos, wet_on] : uavs) {
    if (!wet_on) continue;
    rf += wet_power * avg_channel_gain(pos, device, ch);
  }
  return harvest_dc_power(rf, h) * slot_seconds;
}

}  // namespace uavwet
