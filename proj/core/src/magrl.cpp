#include "uavwet/magrl.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "uavwet/errors.hpp"

namespace uavwet {

namespace {

constexpr double kLogStdLo = -5.0;
constexpr double kLogStdHi = 2.0;
constexpr double kHalfLog2Pi = 0.9189385332046727;  // 0.5 * ln(2*pi)
constexpr double kAlphaFloor = 1e-8;

double wrap_angle(double phi) {
  const double two_pi = 2.0 * M_PI;
  double w = std::fmod(phi, two_pi);
  if (w < 0.0) w += two_pi;
  return w;
}

double squash_logstd(double raw) {
  return 0.5 * (kLogStdHi + kLogStdLo) +
         0.5 * (kLogStdHi - kLogStdLo) * std::tanh(raw);
}

void check_loss(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw NumericError(std::string("divergence: non-finite ") + what);
  }
}

ad::Mat rows_to_mat(const std::vector<std::vector<double>>& rows) {
  ad::Mat m(static_cast<int>(rows.size()),
            rows.empty() ? 0 : static_cast<int>(rows[0].size()));
  for (int r = 0; r < m.rows; ++r) {
    for (int c = 0; c < m.cols; ++c) m(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
  }
  return m;
}

ad::Mat similarity_to_mat(const SimilarityMatrix& z) {
  ad::Mat m(z.n, z.n);
  m.v = z.z;
  return m;
}

ad::Mat hcat(const ad::Mat& a, const ad::Mat& b) {
  ad::Mat out(a.rows, a.cols + b.cols);
  for (int r = 0; r < a.rows; ++r) {
    for (int c = 0; c < a.cols; ++c) out(r, c) = a(r, c);
    for (int c = 0; c < b.cols; ++c) out(r, a.cols + c) = b(r, c);
  }
  return out;
}

// Encode one pre-squash sample row (u0, u1, u2) for critic input:
// bounded speed channel, unit-circle heading, bounded WET channel.
void encode_row(const double* u, double* out) {
  out[0] = std::tanh(u[0]);
  out[1] = std::cos(u[1]);
  out[2] = std::sin(u[1]);
  out[3] = std::tanh(u[2]);
}

struct PolicyNodes {
  int u = -1;
  int enc = -1;
  int logp = -1;
};

// Tape version of the reparameterized policy sample, its critic encoding and
// its log-density.
PolicyNodes policy_sample_tape(ad::Tape& t, const Mlp& policy, int s,
                               const ad::Mat& eps, bool squash_correction) {
  const int out = policy.forward(t, s);
  const int mean = t.slice_cols(out, 0, 3);
  const int raw = t.slice_cols(out, 3, 6);
  const int logstd = t.add_scalar(
      t.scale(t.tanh_op(raw), 0.5 * (kLogStdHi - kLogStdLo)),
      0.5 * (kLogStdHi + kLogStdLo));
  const int sigma = t.exp_op(logstd);
  const int noise = t.constant(eps);
  const int u = t.add(mean, t.mul(sigma, noise));

  const int inv_sigma = t.exp_op(t.scale(logstd, -1.0));
  const int zscore = t.mul(t.sub(u, mean), inv_sigma);
  const int terms = t.sub(t.scale(t.square(zscore), -0.5), logstd);
  int logp = t.add_scalar(t.row_sums(terms), -3.0 * kHalfLog2Pi);
  if (squash_correction) {
    // Squash-density correction for the two tanh-bounded channels.
    const int t0 = t.tanh_op(t.slice_cols(u, 0, 1));
    const int t2 = t.tanh_op(t.slice_cols(u, 2, 3));
    const int c0 = t.log_op(t.add_scalar(t.scale(t.square(t0), -1.0), 1.0 + 1e-12));
    const int c2 = t.log_op(t.add_scalar(t.scale(t.square(t2), -1.0), 1.0 + 1e-12));
    logp = t.sub(logp, t.add(c0, c2));
  }

  const int u0 = t.slice_cols(u, 0, 1);
  const int u1 = t.slice_cols(u, 1, 2);
  const int u2 = t.slice_cols(u, 2, 3);
  const int enc = t.concat_cols(
      {t.tanh_op(u0), t.cos_op(u1), t.sin_op(u1), t.tanh_op(u2)});
  return {u, enc, logp};
}

}  // namespace

void ReplayBuffer::push(Transition t) {
  if (size() < capacity_) {
    data_.push_back(std::move(t));
  } else {
    data_[static_cast<std::size_t>(write_)] = std::move(t);
  }
  write_ = (write_ + 1) % capacity_;
}

std::vector<int> ReplayBuffer::sample_indices(int n, Rng& rng) const {
  std::vector<int> idx(static_cast<std::size_t>(n));
  for (int& i : idx) {
    i = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(size())));
  }
  return idx;
}

std::vector<ad::Tensor*> GlobalCritic::params() {
  std::vector<ad::Tensor*> out = att.params();
  for (ad::Tensor* p : head.params()) out.push_back(p);
  return out;
}

std::string TrajectoryLog::to_csv() const {
  std::ostringstream out;
  char buf[192];
  out << "kind,t,id,x,y,v,phi,c,b_u\n";
  for (const auto& r : uav_rows) {
    std::snprintf(buf, sizeof(buf), "uav,%d,%d,%.10g,%.10g,%.10g,%.10g,%d,%.10g\n",
                  r.t, r.u, r.x, r.y, r.v, r.phi, r.c, r.battery);
    out << buf;
  }
  out << "kind,t,id,b_i,h_i,e_har\n";
  for (const auto& r : dev_rows) {
    std::snprintf(buf, sizeof(buf), "dev,%d,%d,%.10g,%d,%.10g\n", r.t, r.i,
                  r.battery, r.hoe, r.e_har);
    out << buf;
  }
  return out.str();
}

Trainer::Trainer(const WorldConfig& world, const Scenario& scenario,
                 std::uint64_t seed)
    : world_(world),
      scenario_(scenario),
      streams_(seed),
      env_(world, scenario),
      buffer_(world.train.buffer_capacity),
      noise_rng_(streams_.stream("policy-noise")),
      replay_rng_(streams_.stream("replay")),
      env_rng_(streams_.stream("env-episodes")) {
  const int m = scenario_.obs_dim();
  const int h = world_.train.hidden_width;
  const int u_count = scenario_.num_uavs;

  const bool with_global = world_.train.variant == Variant::Magrl ||
                           world_.train.variant == Variant::MagrlHoe;
  epsilon_eff_ = with_global ? world_.train.epsilon : 1.0;

  Rng init = streams_.stream("init");
  agents_.reserve(static_cast<std::size_t>(u_count));
  for (int u = 0; u < u_count; ++u) {
    const std::string p = "agent" + std::to_string(u);
    LocalAgentNets ag{
        Mlp(p + ".policy", {m, h, h, 6}, Activation::Tanh),
        Mlp(p + ".q0", {m + 4, h, h, 1}, Activation::Relu),
        Mlp(p + ".q1", {m + 4, h, h, 1}, Activation::Relu),
        Mlp(p + ".v0", {m, h, h, 1}, Activation::Relu),
        Mlp(p + ".v1", {m, h, h, 1}, Activation::Relu),
        ad::Tensor(p + ".alpha", 1, 1),
        static_cast<double>(m)};
    ag.policy.init(init);
    ag.q0.init(init);
    ag.q1.init(init);
    ag.v0.init(init);
    ag.alpha.value.v[0] = world_.train.alpha_init;
    // Target starts as a copy of the online net.
    ag.v1.init(init);
    {
      auto src = ag.v0.params();
      auto dst = ag.v1.params();
      for (std::size_t i = 0; i < src.size(); ++i) dst[i]->value = src[i]->value;
    }
    agents_.push_back(std::move(ag));
  }

  if (with_global) {
    const int hg = world_.train.global_hidden_width;
    global_ = std::make_unique<GlobalNets>(GlobalNets{
        {AttentionBlock("global.q.att", m),
         Mlp("global.q.head", {u_count * m + u_count * 4, hg, 1}, Activation::Relu)},
        {AttentionBlock("global.v0.att", m),
         Mlp("global.v0.head", {u_count * m, hg, 1}, Activation::Relu)},
        {AttentionBlock("global.v1.att", m),
         Mlp("global.v1.head", {u_count * m, hg, 1}, Activation::Relu)}});
    global_->q.att.init(init);
    global_->q.head.init(init);
    global_->v0.att.init(init);
    global_->v0.head.init(init);
    auto src = global_->v0.params();
    auto dst = global_->v1.params();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i]->value = src[i]->value;
  }
}

ad::Mat Trainer::encode_actions(const ad::Mat& u_rows) const {
  ad::Mat out(1, u_rows.rows * 4);
  for (int u = 0; u < u_rows.rows; ++u) {
    encode_row(&u_rows.v[static_cast<std::size_t>(u) * 3], &out.v[static_cast<std::size_t>(u) * 4]);
  }
  return out;
}

void Trainer::policy_sample_eval(int u, const ad::Mat& s, const ad::Mat& eps,
                                 ad::Mat* u_out, ad::Mat* enc_out,
                                 ad::Mat* logp_out) const {
  const LocalAgentNets& ag = agents_[static_cast<std::size_t>(u)];
  const ad::Mat out = ag.policy.eval(s);
  const int b = s.rows;
  ad::Mat usmp(b, 3), enc(b, 4), logp(b, 1);
  const bool corr = world_.train.squash_correction;
  for (int r = 0; r < b; ++r) {
    double lp = 0.0;
    for (int d = 0; d < 3; ++d) {
      const double mean = out(r, d);
      const double logstd = squash_logstd(out(r, d + 3));
      const double sigma = std::exp(logstd);
      const double e = eps(r, d);
      const double uu = mean + sigma * e;
      usmp(r, d) = uu;
      const double z = (uu - mean) / sigma;
      lp += -0.5 * z * z - logstd - kHalfLog2Pi;
    }
    if (corr) {
      for (int d : {0, 2}) {
        const double th = std::tanh(usmp(r, d));
        lp -= std::log(1.0 - th * th + 1e-12);
      }
    }
    logp(r, 0) = lp;
    encode_row(&usmp.v[static_cast<std::size_t>(r) * 3], &enc.v[static_cast<std::size_t>(r) * 4]);
  }
  if (u_out) *u_out = std::move(usmp);
  if (enc_out) *enc_out = std::move(enc);
  if (logp_out) *logp_out = std::move(logp);
}

double Trainer::qg_eval(const GlobalCritic& net, const ad::Mat& o,
                        const ad::Mat& z, std::span<const double> joint_enc) const {
  const ad::Mat feat = attention_features_eval(o, z, net.att);
  ad::Mat in(1, static_cast<int>(feat.size() + joint_enc.size()));
  std::copy(feat.v.begin(), feat.v.end(), in.v.begin());
  std::copy(joint_enc.begin(), joint_enc.end(),
            in.v.begin() + static_cast<std::ptrdiff_t>(feat.size()));
  return net.head.eval(in).v[0];
}

double Trainer::vg_eval(const GlobalCritic& net, const ad::Mat& o,
                        const ad::Mat& z) const {
  const ad::Mat feat = attention_features_eval(o, z, net.att);
  ad::Mat in(1, static_cast<int>(feat.size()));
  in.v = feat.v;
  return net.head.eval(in).v[0];
}

Batch Trainer::assemble_batch(const std::vector<const Transition*>& txs,
                              Rng& noise) const {
  const int b = static_cast<int>(txs.size());
  const int u_count = scenario_.num_uavs;
  const int m = scenario_.obs_dim();

  Batch out;
  out.size = b;
  out.s.assign(static_cast<std::size_t>(u_count), ad::Mat(b, m));
  out.s2.assign(static_cast<std::size_t>(u_count), ad::Mat(b, m));
  out.u.assign(static_cast<std::size_t>(u_count), ad::Mat(b, 3));
  out.a_enc.assign(static_cast<std::size_t>(u_count), ad::Mat(b, 4));
  out.r = ad::Mat(b, u_count);
  out.a_joint = ad::Mat(b, u_count * 4);
  out.o.reserve(static_cast<std::size_t>(b));
  out.o2.reserve(static_cast<std::size_t>(b));
  out.z.reserve(static_cast<std::size_t>(b));
  out.z2.reserve(static_cast<std::size_t>(b));

  for (int k = 0; k < b; ++k) {
    const Transition& tx = *txs[static_cast<std::size_t>(k)];
    for (int u = 0; u < u_count; ++u) {
      for (int c = 0; c < m; ++c) {
        out.s[u](k, c) = tx.o(u, c);
        out.s2[u](k, c) = tx.o2(u, c);
      }
      for (int d = 0; d < 3; ++d) out.u[u](k, d) = tx.u(u, d);
      encode_row(&tx.u.v[static_cast<std::size_t>(u) * 3],
                 &out.a_enc[u].v[static_cast<std::size_t>(k) * 4]);
      encode_row(&tx.u.v[static_cast<std::size_t>(u) * 3],
                 &out.a_joint.v[static_cast<std::size_t>(k) * (u_count * 4) + u * 4]);
      out.r(k, u) = tx.r(0, u);
    }
    out.o.push_back(tx.o);
    out.o2.push_back(tx.o2);
    out.z.push_back(tx.z);
    out.z2.push_back(tx.z2);
  }

  out.eps.assign(static_cast<std::size_t>(u_count), ad::Mat(b, 3));
  for (int u = 0; u < u_count; ++u) {
    for (int k = 0; k < b; ++k) {
      for (int d = 0; d < 3; ++d) out.eps[u](k, d) = noise.normal();
    }
  }
  return out;
}

double Trainer::loss_local_v(int u, const Batch& batch, bool backward) {
  LocalAgentNets& ag = agents_[static_cast<std::size_t>(u)];
  // Constant target: entropy-added minimum Q at a fresh policy sample.
  ad::Mat enc, logp;
  policy_sample_eval(u, batch.s[static_cast<std::size_t>(u)],
                     batch.eps[static_cast<std::size_t>(u)], nullptr, &enc, &logp);
  const ad::Mat q_in = hcat(batch.s[static_cast<std::size_t>(u)], enc);
  const ad::Mat q0v = ag.q0.eval(q_in);
  const ad::Mat q1v = ag.q1.eval(q_in);
  const double alpha = ag.alpha.value.v[0];
  ad::Mat target(batch.size, 1);
  for (int k = 0; k < batch.size; ++k) {
    target(k, 0) = std::min(q0v(k, 0), q1v(k, 0)) - alpha * logp(k, 0);
  }

  ad::Tape t;
  const int s = t.constant(batch.s[static_cast<std::size_t>(u)]);
  const int v = ag.v0.forward(t, s);
  const int diff = t.sub(v, t.constant(std::move(target)));
  const int loss = t.scale(t.mean(t.square(diff)), 0.5);
  const double value = t.scalar_val(loss);
  check_loss(value, "local V loss");
  if (backward) {
    ag.v0.zero_grads();
    t.backward(loss);
  }
  return value;
}

double Trainer::loss_local_q(int u, int j, const Batch& batch, bool backward) {
  LocalAgentNets& ag = agents_[static_cast<std::size_t>(u)];
  Mlp& q = j == 0 ? ag.q0 : ag.q1;
  const double gamma = world_.train.gamma;
  const double eps_mix = epsilon_eff_;

  const ad::Mat v1v = ag.v1.eval(batch.s2[static_cast<std::size_t>(u)]);
  ad::Mat target(batch.size, 1);
  for (int k = 0; k < batch.size; ++k) {
    target(k, 0) = eps_mix * (batch.r(k, u) + gamma * v1v(k, 0));
  }
  if (eps_mix < 1.0) {
    for (int k = 0; k < batch.size; ++k) {
      const double qg = qg_eval(
          global_->q, batch.o[static_cast<std::size_t>(k)],
          batch.z[static_cast<std::size_t>(k)],
          std::span<const double>(
              batch.a_joint.v.data() + static_cast<std::size_t>(k) * batch.a_joint.cols,
              static_cast<std::size_t>(batch.a_joint.cols)));
      target(k, 0) += (1.0 - eps_mix) * qg;
    }
  }

  ad::Tape t;
  const int in = t.constant(hcat(batch.s[static_cast<std::size_t>(u)],
                                 batch.a_enc[static_cast<std::size_t>(u)]));
  const int qv = q.forward(t, in);
  const int diff = t.sub(qv, t.constant(std::move(target)));
  const int loss = t.scale(t.mean(t.square(diff)), 0.5);
  const double value = t.scalar_val(loss);
  check_loss(value, "local Q loss");
  if (backward) {
    q.zero_grads();
    t.backward(loss);
  }
  return value;
}

double Trainer::loss_policy(int u, const Batch& batch, bool backward) {
  LocalAgentNets& ag = agents_[static_cast<std::size_t>(u)];
  const double alpha = ag.alpha.value.v[0];

  ad::Tape t;
  const int s = t.constant(batch.s[static_cast<std::size_t>(u)]);
  const PolicyNodes pol =
      policy_sample_tape(t, ag.policy, s, batch.eps[static_cast<std::size_t>(u)],
                         world_.train.squash_correction);
  const int q_in = t.concat_cols({s, pol.enc});
  const int q0v = ag.q0.forward(t, q_in);
  const int q1v = ag.q1.forward(t, q_in);
  const int qmin = t.minimum(q0v, q1v);
  const int loss = t.mean(t.sub(t.scale(pol.logp, alpha), qmin));
  const double value = t.scalar_val(loss);
  check_loss(value, "policy loss");
  if (backward) {
    // Gradient flows through the action into both critics; only the policy
    // parameters are stepped, so clear everything the backward pass touches.
    ag.policy.zero_grads();
    ag.q0.zero_grads();
    ag.q1.zero_grads();
    t.backward(loss);
  }
  return value;
}

double Trainer::loss_temperature(int u, const Batch& batch, bool backward) {
  LocalAgentNets& ag = agents_[static_cast<std::size_t>(u)];
  ad::Mat logp;
  policy_sample_eval(u, batch.s[static_cast<std::size_t>(u)],
                     batch.eps[static_cast<std::size_t>(u)], nullptr, nullptr, &logp);
  double mean_term = 0.0;
  for (int k = 0; k < batch.size; ++k) mean_term += logp(k, 0) + ag.target_entropy;
  mean_term /= static_cast<double>(batch.size);

  ad::Tape t;
  const int a = t.leaf(ag.alpha);
  const int loss = t.scale(a, -mean_term);
  const double value = t.scalar_val(loss);
  check_loss(value, "temperature loss");
  if (backward) {
    ag.alpha.zero_grad();
    t.backward(loss);
  }
  return value;
}

double Trainer::loss_global_v(const Batch& batch, bool backward) {
  if (!global_) throw StateError("global V loss without global networks");

  // Constant target: Q_G at fresh joint actions from the current policies.
  const int u_count = scenario_.num_uavs;
  std::vector<ad::Mat> enc(static_cast<std::size_t>(u_count));
  for (int u = 0; u < u_count; ++u) {
    policy_sample_eval(u, batch.s[static_cast<std::size_t>(u)],
                       batch.eps[static_cast<std::size_t>(u)], nullptr,
                       &enc[static_cast<std::size_t>(u)], nullptr);
  }
  ad::Mat target(batch.size, 1);
  std::vector<double> joint(static_cast<std::size_t>(u_count) * 4);
  for (int k = 0; k < batch.size; ++k) {
    for (int u = 0; u < u_count; ++u) {
      for (int d = 0; d < 4; ++d) {
        joint[static_cast<std::size_t>(u) * 4 + d] = enc[static_cast<std::size_t>(u)](k, d);
      }
    }
    target(k, 0) = qg_eval(global_->q, batch.o[static_cast<std::size_t>(k)],
                           batch.z[static_cast<std::size_t>(k)], joint);
  }

  ad::Tape t;
  std::vector<int> flats(static_cast<std::size_t>(batch.size));
  const int m = scenario_.obs_dim();
  for (int k = 0; k < batch.size; ++k) {
    const int o = t.constant(batch.o[static_cast<std::size_t>(k)]);
    const int z = t.constant(batch.z[static_cast<std::size_t>(k)]);
    const int feat = attention_features(t, o, z, global_->v0.att);
    flats[static_cast<std::size_t>(k)] = t.reshape(feat, 1, u_count * m);
  }
  const int stacked = t.stack_rows(flats);
  const int v = global_->v0.head.forward(t, stacked);
  const int diff = t.sub(v, t.constant(std::move(target)));
  const int loss = t.scale(t.mean(t.square(diff)), 0.5);
  const double value = t.scalar_val(loss);
  check_loss(value, "global V loss");
  if (backward) {
    for (ad::Tensor* p : global_->v0.params()) p->zero_grad();
    t.backward(loss);
  }
  return value;
}

double Trainer::loss_global_q(const Batch& batch, bool backward) {
  if (!global_) throw StateError("global Q loss without global networks");
  const int u_count = scenario_.num_uavs;
  const int m = scenario_.obs_dim();
  const double gamma = world_.train.gamma;

  // Constant target: mean team reward + discounted target state value.
  ad::Mat target(batch.size, 1);
  for (int k = 0; k < batch.size; ++k) {
    double r_mean = 0.0;
    for (int u = 0; u < u_count; ++u) r_mean += batch.r(k, u);
    r_mean /= static_cast<double>(u_count);
    target(k, 0) = r_mean + gamma * vg_eval(global_->v1,
                                            batch.o2[static_cast<std::size_t>(k)],
                                            batch.z2[static_cast<std::size_t>(k)]);
  }

  ad::Tape t;
  std::vector<int> flats(static_cast<std::size_t>(batch.size));
  for (int k = 0; k < batch.size; ++k) {
    const int o = t.constant(batch.o[static_cast<std::size_t>(k)]);
    const int z = t.constant(batch.z[static_cast<std::size_t>(k)]);
    const int feat = attention_features(t, o, z, global_->q.att);
    flats[static_cast<std::size_t>(k)] = t.reshape(feat, 1, u_count * m);
  }
  const int stacked = t.stack_rows(flats);
  const int in = t.concat_cols({stacked, t.constant(batch.a_joint)});
  const int qv = global_->q.head.forward(t, in);
  const int diff = t.sub(qv, t.constant(std::move(target)));
  const int loss = t.scale(t.mean(t.square(diff)), 0.5);
  const double value = t.scalar_val(loss);
  check_loss(value, "global Q loss");
  if (backward) {
    for (ad::Tensor* p : global_->q.params()) p->zero_grad();
    t.backward(loss);
  }
  return value;
}

void Trainer::update_from_batch(const Batch& batch) {
  const double lr = world_.train.lr;
  const double clip = world_.train.grad_clip;
  const double tau = world_.train.tau;

  for (int u = 0; u < scenario_.num_uavs; ++u) {
    LocalAgentNets& ag = agents_[static_cast<std::size_t>(u)];

    loss_local_v(u, batch, true);
    {
      auto p = ag.v0.params();
      ad::sgd_step(p, lr, clip);
    }
    for (int j = 0; j < 2; ++j) {
      loss_local_q(u, j, batch, true);
      auto p = (j == 0 ? ag.q0 : ag.q1).params();
      ad::sgd_step(p, lr, clip);
    }
    loss_policy(u, batch, true);
    {
      auto p = ag.policy.params();
      ad::sgd_step(p, world_.train.policy_lr, clip);
    }
    loss_temperature(u, batch, true);
    ag.alpha.value.v[0] -= world_.train.alpha_lr * ag.alpha.grad.v[0];
    ag.alpha.value.v[0] = std::max(ag.alpha.value.v[0], kAlphaFloor);

    auto tgt = ag.v1.params();
    auto onl = ag.v0.params();
    ad::soft_update(tgt, onl, tau);
  }

  if (global_) {
    loss_global_v(batch, true);
    {
      auto p = global_->v0.params();
      ad::sgd_step(p, lr, clip);
    }
    loss_global_q(batch, true);
    {
      auto p = global_->q.params();
      ad::sgd_step(p, lr, clip);
    }
    auto tgt = global_->v1.params();
    auto onl = global_->v0.params();
    ad::soft_update(tgt, onl, tau);
  }
}

AgentAction Trainer::act(int u, const std::vector<double>& obs, bool stochastic,
                         Rng& noise, double* u_out) {
  const LocalAgentNets& ag = agents_[static_cast<std::size_t>(u)];
  ad::Mat s(1, static_cast<int>(obs.size()));
  s.v.assign(obs.begin(), obs.end());
  const ad::Mat out = ag.policy.eval(s);

  double usmp[3];
  for (int d = 0; d < 3; ++d) {
    const double mean = out(0, d);
    if (stochastic) {
      const double sigma = std::exp(squash_logstd(out(0, d + 3)));
      usmp[d] = mean + sigma * noise.normal();
    } else {
      usmp[d] = mean;
    }
  }
  if (u_out) std::copy(usmp, usmp + 3, u_out);

  AgentAction a;
  a.v = world_.mdp.v_max * 0.5 * (std::tanh(usmp[0]) + 1.0);
  a.phi = wrap_angle(usmp[1]);
  a.wet = usmp[2] >= 0.0;
  return a;
}

std::vector<EpisodeMetrics> Trainer::train(
    const std::function<void(const EpisodeMetrics&)>& on_episode) {
  std::vector<EpisodeMetrics> all;
  const int u_count = scenario_.num_uavs;
  const int horizon = scenario_.horizon;

  for (int ep = 0; ep < world_.train.episodes; ++ep) {
    const auto t0 = std::chrono::steady_clock::now();
    env_.reset(env_rng_.next_u64());
    ad::Mat o = rows_to_mat(env_.observations());
    ad::Mat z = similarity_to_mat(env_.similarity());

    double reward_sum = 0.0;
    int violations = 0;

    for (int slot = 0; slot < horizon; ++slot) {
      std::vector<AgentAction> actions(static_cast<std::size_t>(u_count));
      ad::Mat u_rows(u_count, 3);
      for (int u = 0; u < u_count; ++u) {
        std::vector<double> obs_row(
            o.v.begin() + static_cast<std::ptrdiff_t>(u) * o.cols,
            o.v.begin() + static_cast<std::ptrdiff_t>(u + 1) * o.cols);
        actions[static_cast<std::size_t>(u)] =
            act(u, obs_row, true, noise_rng_, &u_rows.v[static_cast<std::size_t>(u) * 3]);
      }

      StepOutcome so = env_.step(actions);
      ad::Mat o2 = rows_to_mat(so.obs);
      ad::Mat z2 = similarity_to_mat(env_.similarity());

      ad::Mat r(1, u_count);
      for (int u = 0; u < u_count; ++u) {
        r(0, u) = so.rewards[static_cast<std::size_t>(u)];
        reward_sum += so.rewards[static_cast<std::size_t>(u)];
        violations += (so.pen_distance[static_cast<std::size_t>(u)] ? 1 : 0) +
                      (so.pen_area[static_cast<std::size_t>(u)] ? 1 : 0);
      }

      buffer_.push({o, u_rows, r, o2, z, z2});

      if (buffer_.size() >= world_.train.minibatch) {
        const std::vector<int> idx =
            buffer_.sample_indices(world_.train.minibatch, replay_rng_);
        std::vector<const Transition*> txs;
        txs.reserve(idx.size());
        for (int i : idx) txs.push_back(&buffer_.at(i));
        const Batch batch = assemble_batch(txs, noise_rng_);
        update_from_batch(batch);
      }

      o = std::move(o2);
      z = std::move(z2);
    }

    EpisodeMetrics m;
    m.episode = ep;
    m.r_ac = reward_sum / static_cast<double>(u_count);
    m.h_total = env_.episode_h_total();
    m.violations = violations;
    m.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
    all.push_back(m);
    if (on_episode) on_episode(m);
  }
  return all;
}

EpisodeReport Trainer::evaluate(std::uint64_t seed) {
  const int u_count = scenario_.num_uavs;
  const int horizon = scenario_.horizon;
  env_.reset(seed);

  EpisodeReport rep;
  Rng unused(0);
  double reward_sum = 0.0;

  for (int slot = 0; slot < horizon; ++slot) {
    const EnvState& st = env_.state();
    const auto obs = env_.observations();

    std::vector<AgentAction> actions(static_cast<std::size_t>(u_count));
    for (int u = 0; u < u_count; ++u) {
      actions[static_cast<std::size_t>(u)] =
          act(u, obs[static_cast<std::size_t>(u)], false, unused, nullptr);
    }

    // Start-of-slot snapshot for the trajectory log.
    std::vector<double> b_start(st.uav_batt.size());
    for (std::size_t u = 0; u < st.uav_batt.size(); ++u) b_start[u] = st.uav_batt[u].level;
    std::vector<double> dev_start(st.dev_batt.size());
    std::vector<int> hoe_start = st.hoe.h;
    for (std::size_t i = 0; i < st.dev_batt.size(); ++i) dev_start[i] = st.dev_batt[i].level;
    std::vector<Position3> pos_start = st.uav_pos;

    StepOutcome so = env_.step(actions);
    for (int u = 0; u < u_count; ++u) reward_sum += so.rewards[static_cast<std::size_t>(u)];

    for (int u = 0; u < u_count; ++u) {
      rep.trajectory.uav_rows.push_back(
          {slot, u, pos_start[static_cast<std::size_t>(u)].x,
           pos_start[static_cast<std::size_t>(u)].y,
           so.executed[static_cast<std::size_t>(u)].v,
           so.executed[static_cast<std::size_t>(u)].phi,
           so.executed[static_cast<std::size_t>(u)].wet ? 1 : 0,
           b_start[static_cast<std::size_t>(u)]});
    }
    for (int i = 0; i < scenario_.num_devices; ++i) {
      rep.trajectory.dev_rows.push_back(
          {slot, i, dev_start[static_cast<std::size_t>(i)],
           hoe_start[static_cast<std::size_t>(i)],
           so.harvested[static_cast<std::size_t>(i)]});
    }
  }

  rep.h_total = env_.episode_h_total();
  rep.r_ac = reward_sum / static_cast<double>(u_count);
  rep.all_satisfied = true;
  rep.all_reserve_ok = true;
  const EnvState& st = env_.state();
  for (int i = 0; i < scenario_.num_devices; ++i) {
    const bool ok = st.dev_batt[static_cast<std::size_t>(i)].level >=
                    world_.energy.dev_threshold;
    rep.devices.push_back({st.dev_batt[static_cast<std::size_t>(i)].level, ok});
    rep.all_satisfied = rep.all_satisfied && ok;
  }
  for (int u = 0; u < u_count; ++u) {
    const double res = st.uav_batt[static_cast<std::size_t>(u)].level;
    rep.uav_residual.push_back(res);
    rep.all_reserve_ok = rep.all_reserve_ok && res >= world_.energy.uav_reserve;
  }
  return rep;
}

Checkpoint Trainer::make_checkpoint() const {
  Checkpoint ck;
  ck.num_uavs = scenario_.num_uavs;
  ck.num_devices = scenario_.num_devices;
  ck.obs_dim = scenario_.obs_dim();
  ck.hidden_width = world_.train.hidden_width;
  ck.global_hidden_width = world_.train.global_hidden_width;
  ck.has_global = global_ != nullptr;
  for (const LocalAgentNets& ag : agents_) {
    for (const Mlp* net : {&ag.policy, &ag.q0, &ag.q1, &ag.v0, &ag.v1}) {
      for (const ad::Tensor* p : net->params()) ck.tensors[p->name] = p->value;
    }
    ck.tensors[ag.alpha.name] = ag.alpha.value;
  }
  if (global_) {
    for (GlobalCritic* net : {&global_->q, &global_->v0, &global_->v1}) {
      for (ad::Tensor* p : net->params()) ck.tensors[p->name] = p->value;
    }
  }
  return ck;
}

void Trainer::load(const Checkpoint& ck) {
  if (ck.num_uavs != scenario_.num_uavs ||
      ck.num_devices != scenario_.num_devices ||
      ck.obs_dim != scenario_.obs_dim() ||
      ck.hidden_width != world_.train.hidden_width ||
      ck.has_global != (global_ != nullptr) ||
      (ck.has_global && ck.global_hidden_width != world_.train.global_hidden_width)) {
    throw ConfigError("checkpoint does not match the scenario/network shape");
  }
  auto assign = [&ck](ad::Tensor* p) {
    auto it = ck.tensors.find(p->name);
    if (it == ck.tensors.end()) {
      throw ConfigError("checkpoint missing tensor: " + p->name);
    }
    if (!it->second.same_shape(p->value)) {
      throw ConfigError("checkpoint shape mismatch for tensor: " + p->name);
    }
    p->value = it->second;
  };
  for (LocalAgentNets& ag : agents_) {
    for (Mlp* net : {&ag.policy, &ag.q0, &ag.q1, &ag.v0, &ag.v1}) {
      for (ad::Tensor* p : net->params()) assign(p);
    }
    assign(&ag.alpha);
  }
  if (global_) {
    for (GlobalCritic* net : {&global_->q, &global_->v0, &global_->v1}) {
      for (ad::Tensor* p : net->params()) assign(p);
    }
  }
}

EpisodeReport evaluate_checkpoint(const Checkpoint& ck, const WorldConfig& world,
                                  const Scenario& scenario, std::uint64_t seed) {
  Trainer t(world, scenario, seed);
  t.load(ck);
  return t.evaluate(seed);
}

}  // namespace uavwet
