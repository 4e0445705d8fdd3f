#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "uavwet/config.hpp"
#include "uavwet/env.hpp"
#include "uavwet/nn.hpp"
#include "uavwet/rng.hpp"
#include "uavwet/tensor.hpp"

namespace uavwet {

// One environment slot as stored in the replay buffer. Actions are kept as
// the pre-squash policy samples (one row per UAV) so critics see the same
// encoding for stored and freshly sampled actions.
struct Transition {
  ad::Mat o;   // U x M observations
  ad::Mat u;   // U x 3 pre-squash action samples
  ad::Mat r;   // 1 x U rewards
  ad::Mat o2;  // U x M next observations
  ad::Mat z;   // U x U similarity
  ad::Mat z2;  // U x U next similarity
};

// FIFO ring with uniform with-replacement sampling.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(int capacity) : capacity_(capacity) {}

  void push(Transition t);
  int size() const { return static_cast<int>(data_.size()); }
  int capacity() const { return capacity_; }
  const Transition& at(int i) const { return data_[static_cast<std::size_t>(i)]; }
  std::vector<int> sample_indices(int n, Rng& rng) const;

 private:
  int capacity_;
  std::vector<Transition> data_;
  int write_ = 0;
};

// Minibatch assembled from transitions, plus the fixed exploration noise used
// by every expectation over a' ~ pi in this update (a single reparameterized
// sample per batch element).
struct Batch {
  int size = 0;
  std::vector<ad::Mat> s;    // per agent: B x M
  std::vector<ad::Mat> s2;   // per agent: B x M
  std::vector<ad::Mat> u;    // per agent: B x 3 stored samples
  ad::Mat r;                 // B x U
  std::vector<ad::Mat> o;    // per sample: U x M
  std::vector<ad::Mat> o2;   // per sample: U x M
  std::vector<ad::Mat> z;    // per sample: U x U
  std::vector<ad::Mat> z2;   // per sample: U x U
  std::vector<ad::Mat> eps;  // per agent: B x 3
  std::vector<ad::Mat> a_enc;  // per agent: B x 4 encoded stored actions
  ad::Mat a_joint;             // B x U*4 joint encoded stored actions
};

// Five local networks per UAV agent plus its learnable temperature.
struct LocalAgentNets {
  Mlp policy;      // M -> 6 (3 means + 3 raw log-stds)
  Mlp q0, q1;      // M + 4 -> 1
  Mlp v0;          // M -> 1
  Mlp v1;          // target, soft-updated only
  ad::Tensor alpha;
  double target_entropy = 0.0;  // = M
};

// Attention block + fully connected head.
struct GlobalCritic {
  AttentionBlock att;
  Mlp head;
  std::vector<ad::Tensor*> params();
};

struct GlobalNets {
  GlobalCritic q;   // joint critic
  GlobalCritic v0;  // online state value
  GlobalCritic v1;  // target, soft-updated only
};

struct EpisodeMetrics {
  int episode = 0;
  double r_ac = 0.0;          // accumulated average reward
  std::int64_t h_total = 0;
  int violations = 0;         // PEN flags raised over the episode
  double wall_ms = 0.0;
};

struct TrajectoryLog {
  struct UavRow {
    int t, u;
    double x, y, v, phi;
    int c;
    double battery;
  };
  struct DevRow {
    int t, i;
    double battery;
    int hoe;
    double e_har;
  };
  std::vector<UavRow> uav_rows;
  std::vector<DevRow> dev_rows;

  std::string to_csv() const;
};

struct DeviceOutcome {
  double final_battery = 0.0;
  bool satisfied = false;
};

struct EpisodeReport {
  std::int64_t h_total = 0;
  double r_ac = 0.0;
  std::vector<DeviceOutcome> devices;
  std::vector<double> uav_residual;
  bool all_satisfied = false;
  bool all_reserve_ok = false;
  TrajectoryLog trajectory;
};

// The MAGRL trainer: per-agent soft actor-critic with a similarity-masked
// self-attention critic trio at the central controller. Sequential and
// deterministic for a given root seed.
class Trainer {
 public:
  Trainer(const WorldConfig& world, const Scenario& scenario,
          std::uint64_t seed);

  // Run the configured number of episodes. The callback (if set) receives
  // each episode's metrics as it completes.
  std::vector<EpisodeMetrics> train(
      const std::function<void(const EpisodeMetrics&)>& on_episode = {});

  // Deterministic rollout of the current policies.
  EpisodeReport evaluate(std::uint64_t seed);

  // Sample an action from agent u's policy for a single observation row.
  // Returns the env action and writes the pre-squash sample into `u_out`.
  AgentAction act(int u, const std::vector<double>& obs, bool stochastic,
                  Rng& noise, double* u_out);

  Checkpoint make_checkpoint() const;
  void load(const Checkpoint& ck);

  // Loss surfaces, exposed for gradient verification. Each computes the loss
  // on `batch`; with `backward` set it also accumulates gradients into the
  // parameters that the training step would update.
  double loss_local_v(int u, const Batch& batch, bool backward);
  double loss_local_q(int u, int j, const Batch& batch, bool backward);
  double loss_policy(int u, const Batch& batch, bool backward);
  double loss_temperature(int u, const Batch& batch, bool backward);
  double loss_global_v(const Batch& batch, bool backward);
  double loss_global_q(const Batch& batch, bool backward);

  Batch assemble_batch(const std::vector<const Transition*>& txs, Rng& noise) const;

  LocalAgentNets& agent(int u) { return agents_[static_cast<std::size_t>(u)]; }
  GlobalNets* global() { return global_ ? global_.get() : nullptr; }
  bool global_enabled() const { return global_ != nullptr; }
  Env& env() { return env_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  int obs_dim() const { return scenario_.obs_dim(); }
  int num_uavs() const { return scenario_.num_uavs; }

 private:
  void update_from_batch(const Batch& batch);
  ad::Mat encode_actions(const ad::Mat& u_rows) const;  // U x 3 -> 1 x U*4
  // Fresh-sample policy quantities without the tape (for constant targets).
  void policy_sample_eval(int u, const ad::Mat& s, const ad::Mat& eps,
                          ad::Mat* u_out, ad::Mat* enc_out, ad::Mat* logp_out) const;
  double qg_eval(const GlobalCritic& net, const ad::Mat& o, const ad::Mat& z,
                 std::span<const double> joint_enc) const;
  double vg_eval(const GlobalCritic& net, const ad::Mat& o, const ad::Mat& z) const;

  WorldConfig world_;
  Scenario scenario_;
  SeedStreams streams_;
  Env env_;
  std::vector<LocalAgentNets> agents_;
  std::unique_ptr<GlobalNets> global_;
  ReplayBuffer buffer_;
  Rng noise_rng_;
  Rng replay_rng_;
  Rng env_rng_;
  double epsilon_eff_ = 1.0;
};

// Deterministic evaluation of a stored checkpoint on a fresh environment.
EpisodeReport evaluate_checkpoint(const Checkpoint& ck, const WorldConfig& world,
                                  const Scenario& scenario, std::uint64_t seed);

}  // namespace uavwet
