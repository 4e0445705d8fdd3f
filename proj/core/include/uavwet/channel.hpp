#pragma once

#include <cmath>

#include "uavwet/geometry.hpp"

namespace uavwet {

// Probabilistic LoS air-to-ground channel.
struct ChannelParams {
  double a = 12.08;        // environment constant of the LoS probability
  double b = 0.11;         // environment constant of the LoS probability
  double g0 = 3.0;         // linear power gain at the 1 m reference distance
  double alpha_los = 3.0;  // path-loss exponent, LoS
  double alpha_nlos = 5.0; // path-loss exponent, NLoS
  double h_fix = 5.0;      // UAV altitude, m
};

// LoS probability for an elevation angle beta in degrees.
inline double p_los(double beta_deg, const ChannelParams& p) {
  return 1.0 / (1.0 + p.a * std::exp(-p.b * beta_deg + p.a * p.b));
}

inline double p_nlos(double beta_deg, const ChannelParams& p) {
  return 1.0 - p_los(beta_deg, p);
}

// Average air-to-ground channel power gain between a UAV and a ground device:
// LoS/NLoS path-loss mixture weighted by the elevation-dependent LoS
// probability.
inline double avg_channel_gain(const Position3& uav, const Position3& dev,
                               const ChannelParams& p) {
  const double d = distance(uav, dev);
  const double beta = elevation_deg(d, p.h_fix);
  const double pl = p_los(beta, p);
  return pl * p.g0 * std::pow(d, -p.alpha_los) +
         (1.0 - pl) * p.g0 * std::pow(d, -p.alpha_nlos);
}

}  // namespace uavwet
