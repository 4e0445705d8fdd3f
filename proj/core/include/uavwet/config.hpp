#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "uavwet/channel.hpp"
#include "uavwet/energy.hpp"

namespace uavwet {

enum class Variant { Magrl, MagrlHoe, MagrlG, MagrlHoeG };

std::string variant_name(Variant v);
Variant parse_variant(const std::string& s);

// Energy bookkeeping constants shared by the environment.
struct EnergyParams {
  double uav_capacity = 140000.0;   // W*s
  double uav_reserve = 20000.0;     // W*s, residual energy for safe return
  double dev_capacity = 0.02;       // W*s
  double dev_threshold = 0.01;      // W*s, required battery level
  double wet_power = 1.0;           // W, per-UAV transmit power
  double dev_init_lo = 0.002;       // W*s, reset-time device battery range
  double dev_init_hi = 0.005;       // W*s
};

// MDP shaping and constraint constants.
struct MdpParams {
  double slot_seconds = 1.0;
  double v_max = 20.0;        // m/s
  double d_min = 5.0;         // m, inter-UAV safe distance
  double xi0 = 0.25;          // charging-reward weight
  double xi1 = 1.0;           // penalty weight
  double xi2 = 1e-5;          // residual-battery reward weight
  double varrho2 = 100.0;     // Gaussian kernel width of the similarity matrix
  bool shared_penalty = true; // penalty term sums violations of all UAVs
  // Energy unit of the device-battery deltas inside the charging reward, in
  // W*s. Device-side constants are specified in mW*s, and the reward recipe
  // takes its numerators in that native unit; 1e-3 keeps the charging term on
  // the same footing as the xi2-weighted UAV battery term.
  double reward_device_unit = 1e-3;
};

// Trainer hyperparameters.
struct TrainParams {
  double gamma = 0.985;
  double epsilon = 0.8;        // local/global target mixing
  double tau = 0.999;          // soft-update retention
  double lr = 2e-4;            // critics
  double policy_lr = 3e-4;
  double alpha_lr = 2e-4;
  double alpha_init = 0.2;
  int buffer_capacity = 1 << 17;
  int minibatch = 128;
  int episodes = 400;
  int hidden_width = 256;      // local networks
  int global_hidden_width = 256;
  double grad_clip = 10.0;
  bool squash_correction = false;
  Variant variant = Variant::Magrl;
};

struct WorldConfig {
  ChannelParams channel;
  PropulsionParams propulsion;
  HarvesterParams harvester;
  EnergyParams energy;
  MdpParams mdp;
  TrainParams train;

  // Sensitivity/saturation are configured in dBm and converted to watts once
  // at load time; the dBm values are kept so a save/load round trip is
  // bit-identical.
  double p_sen_dbm = -10.0;
  double p_sat_dbm = 7.0;

  static WorldConfig defaults();
  void validate() const;
};

struct Scenario {
  std::string name = "test2x3";
  double area_w = 200.0;  // m, x extent
  double area_l = 200.0;  // m, y extent
  int num_uavs = 2;
  int num_devices = 3;
  int horizon = 100;      // slots
  std::vector<double> device_x;
  std::vector<double> device_y;

  int obs_dim() const { return 2 * num_devices + 3; }
  void validate() const;
};

double dbm_to_watts(double dbm);

struct LoadedConfig {
  WorldConfig world;
  Scenario scenario;
};

// Parse a flat key-value config file with [section] headers. Unknown sections
// or keys are rejected. Values in `base` act as defaults; only keys present in
// the file are overridden.
LoadedConfig load_config(const std::string& path, const LoadedConfig& base);
LoadedConfig load_config(const std::string& path);

std::string serialize_config(const LoadedConfig& cfg);
void save_config(const std::string& path, const LoadedConfig& cfg);

}  // namespace uavwet
