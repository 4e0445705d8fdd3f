// Command-line front end: train / eval / ablation.
//
// Exit codes: 0 success, 1 configuration error, 2 runtime divergence.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "uavwet/config.hpp"
#include "uavwet/errors.hpp"
#include "uavwet/magrl.hpp"

namespace fs = std::filesystem;
using namespace uavwet;

namespace {

LoadedConfig default_loaded() {
  LoadedConfig c;
  c.world = WorldConfig::defaults();
  c.scenario = Scenario{};
  c.scenario.device_x = {50.0, 75.0, 145.0};
  c.scenario.device_y = {140.0, 155.0, 60.0};
  return c;
}

std::string resolve_scenario_path(const std::string& arg) {
  if (fs::exists(arg)) return arg;
  const std::string local = "configs/" + arg + ".ini";
  if (fs::exists(local)) return local;
  throw ConfigError("scenario not found: " + arg + " (also tried " + local + ")");
}

LoadedConfig load_effective(const std::string& config_path,
                            const std::string& scenario_arg) {
  LoadedConfig cfg = default_loaded();
  if (!config_path.empty()) cfg = load_config(config_path, cfg);
  if (!scenario_arg.empty()) {
    cfg = load_config(resolve_scenario_path(scenario_arg), cfg);
  }
  cfg.world.validate();
  cfg.scenario.validate();
  return cfg;
}

std::vector<std::uint64_t> parse_seeds(const std::string& spec) {
  std::vector<std::uint64_t> out;
  const auto dots = spec.find("..");
  if (dots != std::string::npos) {
    const std::uint64_t lo = std::stoull(spec.substr(0, dots));
    const std::uint64_t hi = std::stoull(spec.substr(dots + 2));
    for (std::uint64_t s = lo; s <= hi; ++s) out.push_back(s);
    return out;
  }
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stoull(item));
  }
  if (out.empty()) throw ConfigError("empty seed list: " + spec);
  return out;
}

void write_metrics_csv(const fs::path& path,
                       const std::vector<EpisodeMetrics>& metrics) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write metrics: " + path.string());
  out << "episode,r_ac,h_total,violations,wall_ms\n";
  char buf[160];
  for (const auto& m : metrics) {
    std::snprintf(buf, sizeof(buf), "%d,%.10g,%lld,%d,%.3f\n", m.episode, m.r_ac,
                  static_cast<long long>(m.h_total), m.violations, m.wall_ms);
    out << buf;
  }
}

void print_report(const EpisodeReport& rep, const WorldConfig& world,
                  std::ostream& os) {
  os << "h_total: " << rep.h_total << "\n";
  os << "r_ac: " << rep.r_ac << "\n";
  for (std::size_t i = 0; i < rep.devices.size(); ++i) {
    os << "device " << i << ": final_battery_ws=" << rep.devices[i].final_battery
       << " threshold_ws=" << world.energy.dev_threshold << " satisfied="
       << (rep.devices[i].satisfied ? "yes" : "no") << "\n";
  }
  for (std::size_t u = 0; u < rep.uav_residual.size(); ++u) {
    os << "uav " << u << ": residual_ws=" << rep.uav_residual[u]
       << " reserve_ws=" << world.energy.uav_reserve << " ok="
       << (rep.uav_residual[u] >= world.energy.uav_reserve ? "yes" : "no")
       << "\n";
  }
  os << "all_satisfied: " << (rep.all_satisfied ? "yes" : "no") << "\n";
  os << "all_reserve_ok: " << (rep.all_reserve_ok ? "yes" : "no") << "\n";
}

int run_train(const std::string& config_path, const std::string& scenario_arg,
              const std::string& variant, std::uint64_t seed,
              std::optional<int> episodes, const std::string& out_dir,
              bool quiet) {
  LoadedConfig cfg = load_effective(config_path, scenario_arg);
  if (!variant.empty()) cfg.world.train.variant = parse_variant(variant);
  if (episodes) cfg.world.train.episodes = *episodes;
  cfg.world.validate();

  fs::create_directories(out_dir);
  save_config(fs::path(out_dir) / "config.ini", cfg);

  Trainer trainer(cfg.world, cfg.scenario, seed);
  std::vector<EpisodeMetrics> metrics = trainer.train([&](const EpisodeMetrics& m) {
    if (!quiet && (m.episode % 10 == 0 || m.episode + 1 == cfg.world.train.episodes)) {
      std::printf("episode %4d  r_ac %10.4f  h_total %8lld  viol %4d  %.0f ms\n",
                  m.episode, m.r_ac, static_cast<long long>(m.h_total),
                  m.violations, m.wall_ms);
      std::fflush(stdout);
    }
  });

  write_metrics_csv(fs::path(out_dir) / "metrics.csv", metrics);
  save_checkpoint((fs::path(out_dir) / "checkpoint.txt").string(),
                  trainer.make_checkpoint());
  if (!quiet) std::printf("wrote %s/{metrics.csv,checkpoint.txt,config.ini}\n", out_dir.c_str());
  return 0;
}

int run_eval(const std::string& config_path, const std::string& scenario_arg,
             const std::string& checkpoint_path, std::uint64_t seed,
             const std::string& out_dir) {
  LoadedConfig cfg = load_effective(config_path, scenario_arg);
  const Checkpoint ck = load_checkpoint(checkpoint_path);
  // Adopt the checkpoint's network widths so shape validation reflects the
  // trained model rather than the config defaults.
  cfg.world.train.hidden_width = ck.hidden_width;
  cfg.world.train.global_hidden_width = ck.global_hidden_width;
  cfg.world.train.variant = ck.has_global ? Variant::Magrl : Variant::MagrlG;

  const EpisodeReport rep =
      evaluate_checkpoint(ck, cfg.world, cfg.scenario, seed);

  fs::create_directories(out_dir);
  {
    std::ofstream traj(fs::path(out_dir) / "trajectory.csv");
    traj << rep.trajectory.to_csv();
  }
  {
    std::ofstream report(fs::path(out_dir) / "report.txt");
    print_report(rep, cfg.world, report);
  }
  print_report(rep, cfg.world, std::cout);
  return 0;
}

struct AblationRow {
  std::string variant;
  std::uint64_t seed;
  double final_r_ac;
  long long eval_h_total;
};

double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

int run_ablation(const std::string& config_path, const std::string& scenario_arg,
                 const std::string& seeds_spec, std::optional<int> episodes,
                 const std::string& out_dir, int jobs) {
  const std::vector<std::uint64_t> seeds = parse_seeds(seeds_spec);
  const std::vector<Variant> variants = {Variant::Magrl, Variant::MagrlHoe,
                                         Variant::MagrlG, Variant::MagrlHoeG};

  struct Job {
    Variant variant;
    std::uint64_t seed;
  };
  std::vector<Job> jobs_list;
  for (Variant v : variants) {
    for (std::uint64_t s : seeds) jobs_list.push_back({v, s});
  }

  std::vector<AblationRow> rows(jobs_list.size());
  std::mutex io_mutex;
  std::atomic<std::size_t> next{0};

  auto worker = [&]() {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= jobs_list.size()) return;
      const Job job = jobs_list[k];
      LoadedConfig cfg = load_effective(config_path, scenario_arg);
      cfg.world.train.variant = job.variant;
      if (episodes) cfg.world.train.episodes = *episodes;
      cfg.world.validate();

      Trainer trainer(cfg.world, cfg.scenario, job.seed);
      const auto metrics = trainer.train();
      // Evaluation seed fixed per training seed so variants share it.
      const EpisodeReport rep = trainer.evaluate(job.seed + 1000003);
      rows[k] = {variant_name(job.variant), job.seed,
                 metrics.empty() ? 0.0 : metrics.back().r_ac,
                 static_cast<long long>(rep.h_total)};
      std::lock_guard<std::mutex> lk(io_mutex);
      std::printf("done %-12s seed %llu  final r_ac %10.4f  eval h_total %lld\n",
                  rows[k].variant.c_str(),
                  static_cast<unsigned long long>(job.seed), rows[k].final_r_ac,
                  rows[k].eval_h_total);
      std::fflush(stdout);
    }
  };

  std::vector<std::thread> pool;
  const int nthreads = std::max(1, jobs);
  for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  fs::create_directories(out_dir);
  std::ofstream csv(fs::path(out_dir) / "ablation.csv");
  csv << "variant,seed,final_r_ac,eval_h_total\n";
  for (const auto& r : rows) {
    csv << r.variant << "," << r.seed << "," << r.final_r_ac << ","
        << r.eval_h_total << "\n";
  }

  std::printf("\n%-12s %14s %16s\n", "variant", "median r_ac", "median h_total");
  for (Variant v : variants) {
    std::vector<double> racs, hts;
    for (const auto& r : rows) {
      if (r.variant == variant_name(v)) {
        racs.push_back(r.final_r_ac);
        hts.push_back(static_cast<double>(r.eval_h_total));
      }
    }
    std::printf("%-12s %14.4f %16.1f\n", variant_name(v).c_str(), median(racs),
                median(hts));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-UAV wireless-energy-transfer simulator and MAGRL trainer"};
  app.require_subcommand(1);

  std::string config_path, scenario_arg, variant, checkpoint_path, seeds_spec;
  std::string out_dir = "out";
  std::uint64_t seed = 1;
  int episodes = -1;
  int jobs = 2;
  bool quiet = false;

  auto* train = app.add_subcommand("train", "Train MAGRL on a scenario");
  train->add_option("--config", config_path, "World-config override file");
  train->add_option("--scenario", scenario_arg, "Scenario name or file");
  train->add_option("--variant", variant, "magrl|magrl-hoe|magrl-g|magrl-hoe-g");
  train->add_option("--seed", seed, "Root seed");
  train->add_option("--episodes", episodes, "Override episode count");
  train->add_option("--out", out_dir, "Output directory");
  train->add_flag("--quiet", quiet, "Suppress progress output");

  auto* eval = app.add_subcommand("eval", "Evaluate a trained checkpoint");
  eval->add_option("--config", config_path, "World-config override file");
  eval->add_option("--scenario", scenario_arg, "Scenario name or file");
  eval->add_option("--checkpoint", checkpoint_path, "Checkpoint file")->required();
  eval->add_option("--seed", seed, "Evaluation seed");
  eval->add_option("--out", out_dir, "Output directory");

  auto* ablation = app.add_subcommand("ablation", "Run the 4-variant ablation");
  ablation->add_option("--config", config_path, "World-config override file");
  ablation->add_option("--scenario", scenario_arg, "Scenario name or file");
  ablation->add_option("--seeds", seeds_spec, "Seed list, e.g. 1..5 or 1,2,3")
      ->required();
  ablation->add_option("--episodes", episodes, "Override episode count");
  ablation->add_option("--out", out_dir, "Output directory");
  ablation->add_option("--jobs", jobs, "Parallel training processes");

  CLI11_PARSE(app, argc, argv);

  try {
    const std::optional<int> ep_override =
        episodes > 0 ? std::optional<int>(episodes) : std::nullopt;
    if (*train) {
      return run_train(config_path, scenario_arg, variant, seed, ep_override,
                       out_dir, quiet);
    }
    if (*eval) {
      return run_eval(config_path, scenario_arg, checkpoint_path, seed, out_dir);
    }
    if (*ablation) {
      return run_ablation(config_path, scenario_arg, seeds_spec, ep_override,
                          out_dir, jobs);
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 1;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "runtime divergence: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
