#pragma once

#include <cstdint>
#include <vector>

#include "uavwet/config.hpp"
#include "uavwet/energy.hpp"
#include "uavwet/geometry.hpp"
#include "uavwet/hoe.hpp"
#include "uavwet/rng.hpp"

namespace uavwet {

// Per-UAV action: speed, heading, WET flag.
struct AgentAction {
  double v = 0.0;    // m/s, clamped to [0, v_max] on application
  double phi = 0.0;  // rad, heading, interpreted mod 2*pi
  bool wet = false;
};

// Full simulation state at the start of a slot.
struct EnvState {
  int slot = 0;
  std::vector<Position3> uav_pos;
  std::vector<UavBattery> uav_batt;
  std::vector<DeviceBattery> dev_batt;
  HoeState hoe;
  std::uint64_t seed = 0;
};

// Dense row-major U x U similarity matrix: Gaussian kernel off the diagonal,
// node degree on it.
struct SimilarityMatrix {
  int n = 0;
  double varrho2 = 0.0;
  std::vector<double> z;  // row-major n*n

  double at(int r, int c) const { return z[static_cast<std::size_t>(r) * n + c]; }
};

struct ExecutedAction {
  double v = 0.0;    // executed speed after clamping, m/s
  double phi = 0.0;  // heading in [0, 2*pi)
  bool wet = false;  // WET flag after the battery-coverage rule
};

struct StepOutcome {
  std::vector<std::vector<double>> obs;  // next per-agent observations
  std::vector<double> rewards;           // r_u
  std::vector<double> reward_charge;     // r_{u,0}
  std::vector<double> reward_penalty;    // r_{u,1}
  std::vector<bool> pen_distance;        // PEN^0 per UAV
  std::vector<bool> pen_area;            // PEN^1 per UAV
  std::vector<double> harvested;         // E^har per device, W*s
  std::vector<double> wet_weight;        // N_u per UAV
  std::vector<ExecutedAction> executed;
  bool done = false;
};

// The constrained multi-agent MDP: state assembly, action application,
// reward/penalty computation, similarity matrix, episode lifecycle.
// One instance is single-threaded; run several instances (distinct seeds)
// for parallel rollouts.
class Env {
 public:
  Env(const WorldConfig& world, const Scenario& scenario);

  // Start a new episode: UAVs at uniform-random positions with full
  // batteries, device batteries uniform in the configured init range.
  // Deterministic given the seed.
  void reset(std::uint64_t seed);

  // Advance one slot. Effect order: candidate positions, penalty evaluation
  // on the candidates, area clamping, WET zeroing for UAVs that cannot cover
  // the slot's draw, harvest, battery ledgers, HoE update, rewards.
  StepOutcome step(const std::vector<AgentAction>& actions);

  std::vector<std::vector<double>> observations() const;
  SimilarityMatrix similarity() const;

  // N_u of the last step (all zeros before any step of the episode).
  const std::vector<double>& last_wet_weight() const { return last_n_u_; }

  const EnvState& state() const { return state_; }
  const WorldConfig& world() const { return world_; }
  const Scenario& scenario() const { return scenario_; }
  const std::vector<Position3>& device_positions() const { return devices_; }

  bool done() const { return state_.slot >= scenario_.horizon; }

  // HoE of every device at the beginning of each completed slot, one row per
  // slot; feeds the episode objective.
  const std::vector<std::vector<int>>& hoe_history() const {
    return hoe_history_;
  }

  // Devices still below the required level at the end of the last completed
  // slot.
  std::vector<int> final_unsatisfied() const;

  // Episode objective over the completed slots.
  std::int64_t episode_h_total() const;

  // Running value maintained slot by slot; equals episode_h_total() at every
  // point of the episode.
  std::int64_t incremental_h_total() const;

  int obs_dim() const { return scenario_.obs_dim(); }

 private:
  std::vector<double> observe(int u) const;

  WorldConfig world_;
  Scenario scenario_;
  std::vector<Position3> devices_;
  EnvState state_;
  std::vector<std::vector<int>> hoe_history_;
  std::vector<double> last_harvest_;
  std::vector<double> last_n_u_;
  // Incremental bookkeeping of the objective: per-device HoE sums so far.
  std::vector<std::int64_t> hoe_sum_;
  bool has_reset_ = false;
};

}  // namespace uavwet
