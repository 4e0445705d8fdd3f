// Acceptance suite, fast criteria:
//   1. formula oracles at 1e-12 relative on 1000 random inputs each
//   2. environment invariants over 10^4 random-action steps, zero tolerance
//   3. finite-difference gradient checks of all eight losses at 1e-3 relative
//   6. bitwise-deterministic metric logs over 10 episodes
//
// Prints one PASS/FAIL line per criterion; exit code is the number of
// failures.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "uavwet/env.hpp"
#include "uavwet/magrl.hpp"
#include "uavwet/rng.hpp"

using namespace uavwet;
using namespace uavwet::ad;

namespace {

int failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("CRITERION %d %s  %s\n", criterion, pass ? "PASS" : "FAIL",
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

double rel_err(double got, double want) {
  const double denom = std::max({std::abs(got), std::abs(want), 1e-300});
  return std::abs(got - want) / denom;
}

// ---------------------------------------------------------------------------
// Criterion 1: independent straight-line re-implementations.

double oracle_channel_gain(double a, double b, double g0, double al, double an,
                           double h, double d) {
  const double beta = std::asin(h / d) * 180.0 / M_PI;
  const double p_los = 1.0 / (1.0 + a * std::exp(-b * beta + a * b));
  return p_los * g0 * std::pow(d, -al) + (1.0 - p_los) * g0 * std::pow(d, -an);
}

double oracle_propulsion(double v, double pa, double pb, double vtip, double e0,
                         double e1, double f0, double rho, double area) {
  const double blade = pa * (1.0 + 3.0 * v * v / (vtip * vtip));
  const double parasite = 0.5 * f0 * rho * e1 * area * v * v * v;
  const double e0sq = e0 * e0;
  const double induced =
      pb * std::sqrt(std::sqrt(1.0 + v * v * v * v / (4.0 * e0sq * e0sq)) -
                     v * v / (2.0 * e0sq));
  return blade + parasite + induced;
}

double oracle_harvest(double p, double p_sen, double p_sat, double eff,
                      double c, double p0) {
  const double fmax = eff * p_sat * (1.0 + std::exp(-c * (p_sat - p0)));
  auto f = [&](double x) { return fmax / (1.0 + std::exp(-c * (x - p0))); };
  if (p < p_sen) return 0.0;
  if (p >= p_sat) return f(p_sat);
  return f(p);
}

int oracle_hoe(int h_prev, double e_prev, double b_now, double e_exp, double thr) {
  if (b_now >= thr) return 0;
  if (e_prev >= e_exp) return h_prev - 1 > 1 ? h_prev - 1 : 1;
  return h_prev + 1;
}

void criterion_1() {
  const WorldConfig w = WorldConfig::defaults();
  Rng rng(20240601);
  double worst = 0.0;

  for (int i = 0; i < 1000; ++i) {
    const double d = rng.uniform(w.channel.h_fix, 400.0);
    const double theta = rng.uniform(0.0, 2.0 * M_PI);
    const double horiz = std::sqrt(std::max(d * d - w.channel.h_fix * w.channel.h_fix, 0.0));
    const Position3 uav{horiz * std::cos(theta), horiz * std::sin(theta), w.channel.h_fix};
    const double got = avg_channel_gain(uav, {0, 0, 0}, w.channel);
    const double want = oracle_channel_gain(
        w.channel.a, w.channel.b, w.channel.g0, w.channel.alpha_los,
        w.channel.alpha_nlos, w.channel.h_fix, distance(uav, {0, 0, 0}));
    worst = std::max(worst, rel_err(got, want));
  }

  for (int i = 0; i < 1000; ++i) {
    const double v = rng.uniform(0.0, 60.0);
    const double got = propulsion_power(v, w.propulsion);
    const double want = oracle_propulsion(
        v, w.propulsion.p_blade, w.propulsion.p_induced, w.propulsion.v_tip,
        w.propulsion.v_induced_hover, w.propulsion.drag_ratio,
        w.propulsion.solidity, w.propulsion.air_density, w.propulsion.rotor_area);
    worst = std::max(worst, rel_err(got, want));
  }

  for (int i = 0; i < 1000; ++i) {
    const double p = rng.uniform(0.0, 2.0 * w.harvester.p_sat);
    const double got = harvest_dc_power(p, w.harvester);
    const double want =
        oracle_harvest(p, w.harvester.p_sen, w.harvester.p_sat,
                       w.harvester.peak_efficiency, w.harvester.steepness,
                       w.harvester.midpoint);
    if (got == 0.0 && want == 0.0) continue;
    worst = std::max(worst, rel_err(got, want));
  }

  for (int i = 0; i < 1000; ++i) {
    const int h_prev = static_cast<int>(rng.uniform_index(64));
    const double e_prev = rng.uniform(0.0, 3e-4);
    const double b_now = rng.uniform(0.0, 0.02);
    const int got = hoe_step(h_prev, e_prev, b_now, 1e-4, w.energy.dev_threshold);
    const int want = oracle_hoe(h_prev, e_prev, b_now, 1e-4, w.energy.dev_threshold);
    if (got != want) worst = std::max(worst, 1.0);
  }

  {
    Scenario scn;
    scn.num_uavs = 4;
    scn.num_devices = 3;
    scn.area_w = scn.area_l = 300.0;
    scn.device_x = {50.0, 150.0, 250.0};
    scn.device_y = {50.0, 150.0, 250.0};
    Env env(w, scn);
    int compared = 0;
    for (std::uint64_t seed = 0; compared < 1000; ++seed) {
      env.reset(seed);
      const SimilarityMatrix z = env.similarity();
      for (int u = 0; u < scn.num_uavs; ++u) {
        double degree = 0.0;
        for (int v = 0; v < scn.num_uavs; ++v) {
          if (u == v) continue;
          const double d = distance(env.state().uav_pos[u], env.state().uav_pos[v]);
          const double want = std::exp(-d * d / (2.0 * w.mdp.varrho2));
          worst = std::max(worst, rel_err(z.at(u, v), want));
          degree += want;
          ++compared;
        }
        worst = std::max(worst, rel_err(z.at(u, u), degree));
      }
    }
  }

  char buf[96];
  std::snprintf(buf, sizeof(buf), "formula oracles, max relative error %.3e", worst);
  report(1, worst <= 1e-12, buf);
}

// ---------------------------------------------------------------------------
// Criterion 2: environment invariants under random actions.

void criterion_2() {
  WorldConfig w = WorldConfig::defaults();
  Scenario scn;
  scn.num_uavs = 2;
  scn.num_devices = 3;
  scn.area_w = scn.area_l = 200.0;
  scn.horizon = 100;
  scn.device_x = {50.0, 75.0, 145.0};
  scn.device_y = {140.0, 155.0, 60.0};

  Env env(w, scn);
  Rng rng(77121);
  long steps = 0, bad = 0;

  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    env.reset(seed);
    while (!env.done()) {
      const EnvState before = env.state();
      std::vector<AgentAction> acts(2);
      for (auto& a : acts) {
        a.v = rng.uniform(0.0, 25.0);
        a.phi = rng.uniform(-1.0, 8.0);
        a.wet = rng.uniform() < 0.6;
      }

      // Pre-clamp candidates under the velocity cap, recomputed here.
      std::vector<double> cx(2), cy(2);
      for (int u = 0; u < 2; ++u) {
        const double v = std::clamp(acts[u].v, 0.0, w.mdp.v_max);
        double phi = std::fmod(acts[u].phi, 2.0 * M_PI);
        if (phi < 0.0) phi += 2.0 * M_PI;
        cx[u] = before.uav_pos[u].x + v * std::cos(phi) * w.mdp.slot_seconds;
        cy[u] = before.uav_pos[u].y + v * std::sin(phi) * w.mdp.slot_seconds;
      }
      const bool expect_dist =
          std::hypot(cx[0] - cx[1], cy[0] - cy[1]) < w.mdp.d_min;
      std::vector<bool> expect_area(2);
      for (int u = 0; u < 2; ++u) {
        expect_area[u] = cx[u] < 0.0 || cx[u] > scn.area_w || cy[u] < 0.0 ||
                         cy[u] > scn.area_l;
      }

      const StepOutcome out = env.step(acts);
      const EnvState& after = env.state();
      ++steps;

      for (int u = 0; u < 2; ++u) {
        if (out.pen_distance[u] != expect_dist) ++bad;
        if (out.pen_area[u] != expect_area[u]) ++bad;
        if (after.uav_pos[u].x < 0.0 || after.uav_pos[u].x > scn.area_w ||
            after.uav_pos[u].y < 0.0 || after.uav_pos[u].y > scn.area_l) {
          ++bad;
        }
        // UAV battery ledger recomputed from the executed action.
        const double draw =
            (oracle_propulsion(out.executed[u].v, w.propulsion.p_blade,
                               w.propulsion.p_induced, w.propulsion.v_tip,
                               w.propulsion.v_induced_hover,
                               w.propulsion.drag_ratio, w.propulsion.solidity,
                               w.propulsion.air_density, w.propulsion.rotor_area) +
             (out.executed[u].wet ? w.energy.wet_power : 0.0)) *
            w.mdp.slot_seconds;
        const double expect_b = std::max(before.uav_batt[u].level - draw, 0.0);
        if (rel_err(after.uav_batt[u].level, expect_b) > 1e-12 &&
            std::abs(after.uav_batt[u].level - expect_b) > 1e-9) {
          ++bad;
        }
      }
      for (int i = 0; i < 3; ++i) {
        const double expect_b =
            std::min(before.dev_batt[i].level + out.harvested[i],
                     w.energy.dev_capacity);
        if (after.dev_batt[i].level != expect_b) ++bad;
        const int expect_h = oracle_hoe(before.hoe.h[i], out.harvested[i],
                                        after.dev_batt[i].level,
                                        before.hoe.e_exp, w.energy.dev_threshold);
        if (after.hoe.h[i] != expect_h) ++bad;
      }
    }
  }

  char buf[96];
  std::snprintf(buf, sizeof(buf), "%ld random steps, %ld invariant violations",
                steps, bad);
  report(2, steps >= 10000 && bad == 0, buf);
}

// ---------------------------------------------------------------------------
// Criterion 3: finite-difference gradient checks on small instances.

std::vector<Transition> synthetic_transitions(int n, int u_count, int m, Rng& rng) {
  std::vector<Transition> out;
  for (int k = 0; k < n; ++k) {
    Transition tx;
    tx.o = Mat(u_count, m);
    tx.o2 = Mat(u_count, m);
    tx.u = Mat(u_count, 3);
    tx.r = Mat(1, u_count);
    tx.z = Mat(u_count, u_count);
    tx.z2 = Mat(u_count, u_count);
    for (double& v : tx.o.v) v = rng.uniform(0.0, 1.0);
    for (double& v : tx.o2.v) v = rng.uniform(0.0, 1.0);
    for (double& v : tx.u.v) v = rng.uniform(-2.0, 2.0);
    for (double& v : tx.r.v) v = rng.uniform(-1.0, 1.0);
    for (int r = 0; r < u_count; ++r) {
      for (int c = 0; c < u_count; ++c) {
        tx.z(r, c) = r == c ? 0.7 : rng.uniform(0.1, 1.0);
        tx.z2(r, c) = r == c ? 0.6 : rng.uniform(0.1, 1.0);
      }
    }
    out.push_back(std::move(tx));
  }
  return out;
}

double fd_check(const std::function<double(bool)>& loss,
                const std::vector<Tensor*>& params, double h = 1e-5) {
  for (Tensor* p : params) p->zero_grad();
  loss(true);
  double worst = 0.0;
  for (Tensor* p : params) {
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double save = p->value.v[i];
      p->value.v[i] = save + h;
      const double up = loss(false);
      p->value.v[i] = save - h;
      const double dn = loss(false);
      p->value.v[i] = save;
      const double fd = (up - dn) / (2.0 * h);
      const double got = p->grad.v[i];
      const double denom = std::max({std::abs(fd), std::abs(got), 1e-7});
      worst = std::max(worst, std::abs(fd - got) / denom);
    }
  }
  return worst;
}

void criterion_3() {
  LoadedConfig cfg;
  cfg.world = WorldConfig::defaults();
  cfg.world.train.hidden_width = 8;
  cfg.world.train.global_hidden_width = 8;
  cfg.scenario = Scenario{};
  cfg.scenario.num_uavs = 2;
  cfg.scenario.num_devices = 2;
  cfg.scenario.area_w = cfg.scenario.area_l = 100.0;
  cfg.scenario.device_x = {30.0, 70.0};
  cfg.scenario.device_y = {30.0, 70.0};

  double worst = 0.0;
  std::vector<std::pair<std::string, double>> rows;

  for (bool correction : {false, true}) {
    cfg.world.train.squash_correction = correction;
    Trainer tr(cfg.world, cfg.scenario, 1234);
    Rng rng(99);
    std::vector<Transition> store = synthetic_transitions(8, 2, cfg.scenario.obs_dim(), rng);
    std::vector<const Transition*> ptrs;
    for (const auto& t : store) ptrs.push_back(&t);
    Rng noise(501);
    const Batch batch = tr.assemble_batch(ptrs, noise);
    const std::string tag = correction ? "(corrected)" : "";

    rows.emplace_back("local V " + tag,
                      fd_check([&](bool b) { return tr.loss_local_v(0, batch, b); },
                               tr.agent(0).v0.params()));
    rows.emplace_back("local Q0 " + tag,
                      fd_check([&](bool b) { return tr.loss_local_q(0, 0, batch, b); },
                               tr.agent(0).q0.params()));
    rows.emplace_back("local Q1 " + tag,
                      fd_check([&](bool b) { return tr.loss_local_q(0, 1, batch, b); },
                               tr.agent(0).q1.params()));
    rows.emplace_back("policy " + tag,
                      fd_check([&](bool b) { return tr.loss_policy(0, batch, b); },
                               tr.agent(0).policy.params()));
    rows.emplace_back("temperature " + tag,
                      fd_check([&](bool b) { return tr.loss_temperature(0, batch, b); },
                               {&tr.agent(0).alpha}));
    rows.emplace_back("global V0 " + tag,
                      fd_check([&](bool b) { return tr.loss_global_v(batch, b); },
                               tr.global()->v0.params()));
    rows.emplace_back("global Q " + tag,
                      fd_check([&](bool b) { return tr.loss_global_q(batch, b); },
                               tr.global()->q.params()));
    // Attention path in isolation: only the attention projections.
    rows.emplace_back("attention path " + tag,
                      fd_check([&](bool b) { return tr.loss_global_q(batch, b); },
                               tr.global()->q.att.params()));
  }

  for (const auto& [name, err] : rows) {
    std::printf("    %-24s max_rel_err %.3e\n", name.c_str(), err);
    worst = std::max(worst, err);
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "eight losses, max relative error %.3e", worst);
  report(3, worst <= 1e-3, buf);
}

// ---------------------------------------------------------------------------
// Criterion 6: deterministic metric logs.

void criterion_6() {
  LoadedConfig cfg;
  cfg.world = WorldConfig::defaults();
  cfg.world.train.hidden_width = 64;
  cfg.world.train.global_hidden_width = 64;
  cfg.world.train.episodes = 10;
  cfg.scenario = Scenario{};
  cfg.scenario.device_x = {50.0, 75.0, 145.0};
  cfg.scenario.device_y = {140.0, 155.0, 60.0};

  auto run = [&]() {
    Trainer tr(cfg.world, cfg.scenario, 2024);
    std::string log;
    for (const EpisodeMetrics& m : tr.train()) {
      char line[128];
      std::snprintf(line, sizeof(line), "%d,%.17g,%lld,%d\n", m.episode, m.r_ac,
                    static_cast<long long>(m.h_total), m.violations);
      log += line;
    }
    return log;
  };
  const std::string a = run();
  const std::string b = run();
  char buf[96];
  std::snprintf(buf, sizeof(buf),
                "10-episode metric logs %s (wall-time column excluded)",
                a == b ? "identical" : "differ");
  report(6, a == b && !a.empty(), buf);
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_6();
  return failures;
}
