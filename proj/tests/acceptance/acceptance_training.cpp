// Acceptance suite, training criteria:
//   4. desk-scale reproduction on the 2 UAV / 3 device / 200 m scenario:
//      after training to plateau, the deterministic policy reaches
//      h_total = 0 with both UAV residuals >= the reserve in at least
//      7 of 10 evaluation seeds.
//   5. ablation direction over 5 seeds: median final h_total of MAGRL is
//      no worse than MAGRL-G and MAGRL-HoE. Soft criterion: an inverted
//      ordering is reported as a finding, not a failure.
//
// Usage: acceptance_training <configs-dir>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "uavwet/config.hpp"
#include "uavwet/magrl.hpp"

using namespace uavwet;

namespace {

int failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("CRITERION %d %s  %s\n", criterion, pass ? "PASS" : "FAIL",
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

LoadedConfig base_cfg() {
  LoadedConfig c;
  c.world = WorldConfig::defaults();
  c.scenario = Scenario{};
  c.scenario.device_x = {50.0, 75.0, 145.0};
  c.scenario.device_y = {140.0, 155.0, 60.0};
  return c;
}

void criterion_4(const std::string& configs_dir) {
  const LoadedConfig cfg =
      load_config(configs_dir + "/accept2x3.ini", base_cfg());

  const auto t0 = std::chrono::steady_clock::now();
  Trainer trainer(cfg.world, cfg.scenario, 1);
  trainer.train([&](const EpisodeMetrics& m) {
    if (m.episode % 25 == 0) {
      std::printf("    train episode %4d  r_ac %9.3f  h_total %6lld\n",
                  m.episode, m.r_ac, static_cast<long long>(m.h_total));
      std::fflush(stdout);
    }
  });
  const double train_min =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count() / 60.0;

  int successes = 0;
  for (std::uint64_t k = 0; k < 10; ++k) {
    const EpisodeReport rep = trainer.evaluate(3000000 + k);
    const bool ok = rep.h_total == 0 && rep.all_reserve_ok;
    std::printf("    eval seed %llu: h_total %lld, residuals",
                static_cast<unsigned long long>(3000000 + k),
                static_cast<long long>(rep.h_total));
    for (double r : rep.uav_residual) std::printf(" %.1f", r);
    std::printf("  -> %s\n", ok ? "ok" : "miss");
    if (ok) ++successes;
  }

  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "%d/10 evaluation seeds reach h_total=0 with residuals >= "
                "%.0f W*s (training %.1f min)",
                successes, cfg.world.energy.uav_reserve, train_min);
  report(4, successes >= 7, buf);
}

void criterion_5(const std::string& configs_dir) {
  LoadedConfig cfg = load_config(configs_dir + "/accept2x3.ini", base_cfg());
  // Shorter runs for the 20-run matrix; the comparison is relative.
  cfg.world.train.episodes = std::max(40, cfg.world.train.episodes / 3);

  const std::vector<Variant> variants = {Variant::Magrl, Variant::MagrlHoe,
                                         Variant::MagrlG, Variant::MagrlHoeG};
  const std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};

  struct Job {
    Variant variant;
    std::uint64_t seed;
    double h_total = 0.0;
  };
  std::vector<Job> jobs;
  for (Variant v : variants) {
    for (std::uint64_t s : seeds) jobs.push_back({v, s, 0.0});
  }

  std::atomic<std::size_t> next{0};
  std::mutex io;
  auto worker = [&]() {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= jobs.size()) return;
      LoadedConfig c = cfg;
      c.world.train.variant = jobs[k].variant;
      Trainer tr(c.world, c.scenario, jobs[k].seed);
      tr.train();
      const EpisodeReport rep = tr.evaluate(jobs[k].seed + 1000003);
      jobs[k].h_total = static_cast<double>(rep.h_total);
      std::lock_guard<std::mutex> lk(io);
      std::printf("    %-12s seed %llu  eval h_total %.0f\n",
                  variant_name(jobs[k].variant).c_str(),
                  static_cast<unsigned long long>(jobs[k].seed), jobs[k].h_total);
      std::fflush(stdout);
    }
  };
  std::thread w1(worker), w2(worker);
  w1.join();
  w2.join();

  auto median_of = [&](Variant v) {
    std::vector<double> xs;
    for (const Job& j : jobs) {
      if (j.variant == v) xs.push_back(j.h_total);
    }
    return median(xs);
  };
  const double m_full = median_of(Variant::Magrl);
  const double m_nohoe = median_of(Variant::MagrlHoe);
  const double m_noglobal = median_of(Variant::MagrlG);
  const double m_neither = median_of(Variant::MagrlHoeG);

  std::printf("    medians: magrl %.0f, magrl-hoe %.0f, magrl-g %.0f, "
              "magrl-hoe-g %.0f\n", m_full, m_nohoe, m_noglobal, m_neither);

  const bool ordering = m_full <= m_noglobal && m_full <= m_nohoe;
  char buf[160];
  if (ordering) {
    std::snprintf(buf, sizeof(buf),
                  "median h_total ordering holds (magrl %.0f <= magrl-g %.0f "
                  "and <= magrl-hoe %.0f)", m_full, m_noglobal, m_nohoe);
  } else {
    std::snprintf(buf, sizeof(buf),
                  "FINDING: ordering inverted at this scale (magrl %.0f, "
                  "magrl-g %.0f, magrl-hoe %.0f); reported, not a failure",
                  m_full, m_noglobal, m_nohoe);
  }
  // Soft criterion per the protocol: the ordering is reported either way.
  report(5, true, buf);
}

}  // namespace

int main(int argc, char** argv) {
  const std::string configs_dir = argc > 1 ? argv[1] : "configs";
  criterion_4(configs_dir);
  criterion_5(configs_dir);
  return failures;
}
