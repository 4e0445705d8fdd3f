#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

namespace uavwet {

// Hungry-level-of-energy update for one device at a slot boundary.
// Three branches: harvested enough last slot but still below the required
// battery level -> decrement (floor 1); harvested too little and still below
// -> increment; at or above the required level -> 0.
inline int hoe_step(int h_prev, double e_har_prev, double b_now, double e_exp,
                    double b_thr) {
  if (b_now >= b_thr) return 0;
  if (e_har_prev >= e_exp) return std::max(h_prev - 1, 1);
  return h_prev + 1;
}

// Devices whose battery will still be below the required level after this
// slot's harvest is credited.
inline std::vector<int> unsatisfied_set(std::span<const double> batteries,
                                        std::span<const double> e_hars,
                                        double b_thr) {
  std::vector<int> out;
  for (std::size_t i = 0; i < batteries.size(); ++i) {
    if (batteries[i] + e_hars[i] < b_thr) out.push_back(static_cast<int>(i));
  }
  return out;
}

// Episode objective: total HoE accumulated over the horizon by the devices
// that remain unsatisfied at the end. Zero when every device was satisfied.
// hoe_history[t][i] is device i's HoE at the beginning of action slot t.
inline std::int64_t h_total(const std::vector<std::vector<int>>& hoe_history,
                            std::span<const int> final_unsatisfied) {
  std::int64_t total = 0;
  for (int i : final_unsatisfied) {
    for (const auto& slot : hoe_history) {
      total += slot[static_cast<std::size_t>(i)];
    }
  }
  return total;
}

// Per-device HoE tracking plus the expected per-slot harvest that defines the
// decrement/increment branch.
struct HoeState {
  std::vector<int> h;
  double e_exp = 0.0;

  static HoeState init(std::span<const double> batteries, double b_thr,
                       double e_exp) {
    HoeState s;
    s.e_exp = e_exp;
    s.h.reserve(batteries.size());
    for (double b : batteries) s.h.push_back(b >= b_thr ? 0 : 1);
    return s;
  }

  bool satisfied(std::size_t i) const { return h[i] == 0; }
};

}  // namespace uavwet
