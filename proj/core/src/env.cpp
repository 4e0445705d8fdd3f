#include "uavwet/env.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "uavwet/errors.hpp"

namespace uavwet {

namespace {
double wrap_angle(double phi) {
  const double two_pi = 2.0 * M_PI;
  double w = std::fmod(phi, two_pi);
  if (w < 0.0) w += two_pi;
  return w;
}
}  // namespace

Env::Env(const WorldConfig& world, const Scenario& scenario)
    : world_(world), scenario_(scenario) {
  world_.validate();
  scenario_.validate();
  devices_.reserve(scenario_.num_devices);
  for (int i = 0; i < scenario_.num_devices; ++i) {
    devices_.push_back({scenario_.device_x[i], scenario_.device_y[i], 0.0});
  }
}

void Env::reset(std::uint64_t seed) {
  SeedStreams streams(seed);
  Rng rng = streams.stream("env");

  state_ = EnvState{};
  state_.seed = seed;
  state_.slot = 0;

  state_.uav_pos.resize(scenario_.num_uavs);
  state_.uav_batt.resize(scenario_.num_uavs);
  for (int u = 0; u < scenario_.num_uavs; ++u) {
    state_.uav_pos[u] = {rng.uniform(0.0, scenario_.area_w),
                         rng.uniform(0.0, scenario_.area_l),
                         world_.channel.h_fix};
    state_.uav_batt[u] = {world_.energy.uav_capacity,
                          world_.energy.uav_capacity,
                          world_.energy.uav_reserve};
  }

  state_.dev_batt.resize(scenario_.num_devices);
  std::vector<double> levels(scenario_.num_devices);
  for (int i = 0; i < scenario_.num_devices; ++i) {
    levels[i] = rng.uniform(world_.energy.dev_init_lo, world_.energy.dev_init_hi);
    state_.dev_batt[i] = {levels[i], world_.energy.dev_capacity,
                          world_.energy.dev_threshold};
  }

  const double e_exp =
      world_.energy.dev_threshold / static_cast<double>(scenario_.horizon);
  state_.hoe = HoeState::init(levels, world_.energy.dev_threshold, e_exp);

  hoe_history_.clear();
  hoe_sum_.assign(scenario_.num_devices, 0);
  last_harvest_.assign(scenario_.num_devices, 0.0);
  last_n_u_.assign(scenario_.num_uavs, 0.0);
  has_reset_ = true;
}

std::vector<double> Env::observe(int u) const {
  // Scaled per-agent state: (x, y, H_1..H_I, B_1..B_I, B_u). Positions by the
  // larger area extent, HoE by the horizon, batteries by their capacities.
  const double pos_scale = std::max(scenario_.area_w, scenario_.area_l);
  std::vector<double> o;
  o.reserve(obs_dim());
  o.push_back(state_.uav_pos[u].x / pos_scale);
  o.push_back(state_.uav_pos[u].y / pos_scale);
  for (int i = 0; i < scenario_.num_devices; ++i) {
    o.push_back(static_cast<double>(state_.hoe.h[i]) /
                static_cast<double>(scenario_.horizon));
  }
  for (int i = 0; i < scenario_.num_devices; ++i) {
    o.push_back(state_.dev_batt[i].level / state_.dev_batt[i].capacity);
  }
  o.push_back(state_.uav_batt[u].level / state_.uav_batt[u].capacity);
  return o;
}

std::vector<std::vector<double>> Env::observations() const {
  if (!has_reset_) throw StateError("observations() before reset()");
  std::vector<std::vector<double>> out;
  out.reserve(scenario_.num_uavs);
  for (int u = 0; u < scenario_.num_uavs; ++u) out.push_back(observe(u));
  return out;
}

SimilarityMatrix Env::similarity() const {
  if (!has_reset_) throw StateError("similarity() before reset()");
  const int n = scenario_.num_uavs;
  SimilarityMatrix m;
  m.n = n;
  m.varrho2 = world_.mdp.varrho2;
  m.z.assign(static_cast<std::size_t>(n) * n, 0.0);
  for (int u = 0; u < n; ++u) {
    double degree = 0.0;
    for (int v = 0; v < n; ++v) {
      if (v == u) continue;
      const double d = distance(state_.uav_pos[u], state_.uav_pos[v]);
      const double z = std::exp(-d * d / (2.0 * world_.mdp.varrho2));
      m.z[static_cast<std::size_t>(u) * n + v] = z;
      degree += z;
    }
    m.z[static_cast<std::size_t>(u) * n + u] = degree;
  }
  return m;
}

StepOutcome Env::step(const std::vector<AgentAction>& actions) {
  if (!has_reset_) throw StateError("step() before reset()");
  if (done()) throw StateError("step() on a finished episode");
  if (actions.size() != static_cast<std::size_t>(scenario_.num_uavs)) {
    throw StateError("step(): one action per UAV required");
  }

  const int nu = scenario_.num_uavs;
  const int ni = scenario_.num_devices;
  const double slot_s = world_.mdp.slot_seconds;

  StepOutcome out;
  out.pen_distance.assign(nu, false);
  out.pen_area.assign(nu, false);
  out.executed.resize(nu);

  // (1) Candidate positions under the velocity cap.
  std::vector<Position3> candidate(nu);
  for (int u = 0; u < nu; ++u) {
    const double v = std::clamp(actions[u].v, 0.0, world_.mdp.v_max);
    const double phi = wrap_angle(actions[u].phi);
    candidate[u] = {state_.uav_pos[u].x + v * std::cos(phi) * slot_s,
                    state_.uav_pos[u].y + v * std::sin(phi) * slot_s,
                    world_.channel.h_fix};
    out.executed[u].phi = phi;
  }

  // (2) Penalties on the pre-clamp candidates.
  for (int u = 0; u < nu; ++u) {
    out.pen_area[u] = candidate[u].x < 0.0 || candidate[u].x > scenario_.area_w ||
                      candidate[u].y < 0.0 || candidate[u].y > scenario_.area_l;
  }
  for (int u = 0; u < nu; ++u) {
    for (int v = u + 1; v < nu; ++v) {
      if (distance(candidate[u], candidate[v]) < world_.mdp.d_min) {
        out.pen_distance[u] = true;
        out.pen_distance[v] = true;
      }
    }
  }

  // Clamp to the area box after penalty evaluation.
  std::vector<Position3> next_pos(nu);
  std::vector<double> v_exec(nu);
  for (int u = 0; u < nu; ++u) {
    next_pos[u] = {std::clamp(candidate[u].x, 0.0, scenario_.area_w),
                   std::clamp(candidate[u].y, 0.0, scenario_.area_l),
                   world_.channel.h_fix};
    v_exec[u] = distance(next_pos[u], state_.uav_pos[u]) / slot_s;
    out.executed[u].v = v_exec[u];
  }

  // (3) Zero the WET flag of any UAV whose battery cannot cover this slot's
  // propulsion + WET draw.
  std::vector<bool> wet(nu);
  for (int u = 0; u < nu; ++u) {
    bool on = actions[u].wet;
    if (on) {
      const double draw = (propulsion_power(v_exec[u], world_.propulsion) +
                           world_.energy.wet_power) * slot_s;
      if (state_.uav_batt[u].level < draw) on = false;
    }
    wet[u] = on;
    out.executed[u].wet = on;
  }

  // (4) Harvest at the start-of-slot geometry, then both battery ledgers.
  // Per-device single-UAV DC contributions feed the effective WET weights.
  out.harvested.assign(ni, 0.0);
  std::vector<double> solo_dc(static_cast<std::size_t>(nu) * ni, 0.0);
  for (int i = 0; i < ni; ++i) {
    double rf = 0.0;
    for (int u = 0; u < nu; ++u) {
      if (!wet[u]) continue;
      const double g = avg_channel_gain(state_.uav_pos[u], devices_[i],
                                        world_.channel);
      const double p = world_.energy.wet_power * g;
      rf += p;
      solo_dc[static_cast<std::size_t>(u) * ni + i] =
          harvest_dc_power(p, world_.harvester) * slot_s;
    }
    out.harvested[i] = harvest_dc_power(rf, world_.harvester) * slot_s;
  }

  std::vector<double> dev_before(ni), dev_after(ni);
  for (int i = 0; i < ni; ++i) {
    dev_before[i] = state_.dev_batt[i].level;
    state_.dev_batt[i] = device_battery_step(state_.dev_batt[i], out.harvested[i]);
    dev_after[i] = state_.dev_batt[i].level;
  }
  for (int u = 0; u < nu; ++u) {
    state_.uav_batt[u] = uav_battery_step(state_.uav_batt[u], v_exec[u], wet[u],
                                          world_.energy.wet_power,
                                          world_.propulsion, slot_s);
  }

  // Effective WET weight: per-device share of the jointly harvested energy
  // attributed to each UAV via its stand-alone DC contribution.
  std::vector<double> w_u(nu, 0.0);
  for (int u = 0; u < nu; ++u) {
    for (int i = 0; i < ni; ++i) {
      if (out.harvested[i] <= 0.0) continue;
      w_u[u] += solo_dc[static_cast<std::size_t>(u) * ni + i] / out.harvested[i];
    }
  }
  const double w_sum = std::accumulate(w_u.begin(), w_u.end(), 0.0);
  out.wet_weight.assign(nu, 0.0);
  if (w_sum > 0.0) {
    for (int u = 0; u < nu; ++u) out.wet_weight[u] = w_u[u] / w_sum;
  }
  last_n_u_ = out.wet_weight;

  // Unsatisfied set at the end of this slot, and start-of-slot HoE.
  const std::vector<int> unsat =
      unsatisfied_set(dev_before, out.harvested, world_.energy.dev_threshold);
  const std::vector<int> hoe_now = state_.hoe.h;

  // (6) Rewards.
  out.rewards.assign(nu, 0.0);
  out.reward_charge.assign(nu, 0.0);
  out.reward_penalty.assign(nu, 0.0);

  const bool hoe_reward = world_.train.variant == Variant::Magrl ||
                          world_.train.variant == Variant::MagrlG;
  // Battery deltas enter the charging reward in their native device unit.
  const double unit = world_.mdp.reward_device_unit;
  double charge_fraction_scale = 0.0;
  if (hoe_reward) {
    double num_base = 0.0;
    std::int64_t hoe_sum = 0;
    for (int i : unsat) hoe_sum += hoe_now[i];
    for (int i : unsat) {
      num_base += (dev_after[i] - dev_before[i]) / unit * hoe_now[i];
    }
    const double denom =
        1.0 + static_cast<double>(unsat.size()) * static_cast<double>(hoe_sum);
    charge_fraction_scale = num_base / denom;
  } else {
    double num_base = 0.0;
    for (int i : unsat) num_base += (dev_after[i] - dev_before[i]) / unit;
    const double denom = 1.0 + static_cast<double>(unsat.size());
    charge_fraction_scale = num_base / denom;
  }

  int total_pen = 0;
  for (int u = 0; u < nu; ++u) {
    total_pen += (out.pen_distance[u] ? 1 : 0) + (out.pen_area[u] ? 1 : 0);
  }

  for (int u = 0; u < nu; ++u) {
    const double charge = out.wet_weight[u] * charge_fraction_scale +
                          world_.mdp.xi2 * (state_.uav_batt[u].level -
                                            world_.energy.uav_reserve);
    const double pen =
        world_.mdp.shared_penalty
            ? static_cast<double>(total_pen)
            : static_cast<double>((out.pen_distance[u] ? 1 : 0) +
                                  (out.pen_area[u] ? 1 : 0));
    out.reward_charge[u] = charge;
    out.reward_penalty[u] = pen;
    out.rewards[u] = world_.mdp.xi0 * charge - world_.mdp.xi1 * pen;
  }

  // (5) Record this slot's start-of-slot HoE, then advance the HoE state.
  hoe_history_.push_back(hoe_now);
  for (int i = 0; i < ni; ++i) {
    hoe_sum_[i] += hoe_now[i];
    state_.hoe.h[i] = hoe_step(hoe_now[i], out.harvested[i], dev_after[i],
                               state_.hoe.e_exp, world_.energy.dev_threshold);
  }

  last_harvest_ = out.harvested;
  for (int u = 0; u < nu; ++u) state_.uav_pos[u] = next_pos[u];
  state_.slot += 1;
  out.done = done();
  out.obs = observations();
  return out;
}

std::vector<int> Env::final_unsatisfied() const {
  std::vector<int> out;
  for (int i = 0; i < scenario_.num_devices; ++i) {
    if (state_.dev_batt[i].level < world_.energy.dev_threshold) out.push_back(i);
  }
  return out;
}

std::int64_t Env::episode_h_total() const {
  return h_total(hoe_history_, final_unsatisfied());
}

std::int64_t Env::incremental_h_total() const {
  std::int64_t total = 0;
  for (int i : final_unsatisfied()) total += hoe_sum_[i];
  return total;
}

}  // namespace uavwet
