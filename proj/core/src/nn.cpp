#include "uavwet/nn.hpp"

#include <Eigen/Core>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "uavwet/errors.hpp"

namespace uavwet {

namespace {
using EMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapC = Eigen::Map<const EMat>;
using MapM = Eigen::Map<EMat>;
}  // namespace

Mlp::Mlp(std::string name, std::vector<int> widths, Activation hidden)
    : name_(std::move(name)), widths_(std::move(widths)), hidden_(hidden) {
  if (widths_.size() < 2) throw ConfigError("Mlp: need at least two layers");
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    weights_.emplace_back(name_ + ".w" + std::to_string(l), widths_[l],
                          widths_[l + 1]);
    biases_.emplace_back(name_ + ".b" + std::to_string(l), 1, widths_[l + 1]);
  }
}

void Mlp::init(Rng& rng) {
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(widths_[l]));
    for (double& w : weights_[l].value.v) w = rng.uniform(-bound, bound);
    for (double& b : biases_[l].value.v) b = rng.uniform(-bound, bound);
    weights_[l].zero_grad();
    biases_[l].zero_grad();
  }
}

int Mlp::forward(ad::Tape& tape, int x) const {
  int h = x;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    const int w = tape.leaf(weights_[l]);
    const int b = tape.leaf(biases_[l]);
    h = tape.add_rowvec(tape.matmul(h, w), b);
    if (l + 1 < weights_.size()) {
      h = hidden_ == Activation::Tanh ? tape.tanh_op(h) : tape.relu(h);
    }
  }
  return h;
}

ad::Mat Mlp::eval(const ad::Mat& x) const {
  ad::Mat h = x;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    const ad::Mat& w = weights_[l].value;
    const ad::Mat& b = biases_[l].value;
    ad::Mat out(h.rows, w.cols);
    MapM(out.v.data(), out.rows, out.cols).noalias() =
        MapC(h.v.data(), h.rows, h.cols) * MapC(w.v.data(), w.rows, w.cols);
    for (int r = 0; r < out.rows; ++r) {
      for (int c = 0; c < out.cols; ++c) out(r, c) += b(0, c);
    }
    if (l + 1 < weights_.size()) {
      if (hidden_ == Activation::Tanh) {
        for (double& v : out.v) v = std::tanh(v);
      } else {
        for (double& v : out.v) v = v > 0.0 ? v : 0.0;
      }
    }
    h = std::move(out);
  }
  return h;
}

std::vector<ad::Tensor*> Mlp::params() {
  std::vector<ad::Tensor*> out;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    out.push_back(&weights_[l]);
    out.push_back(&biases_[l]);
  }
  return out;
}

std::vector<const ad::Tensor*> Mlp::params() const {
  std::vector<const ad::Tensor*> out;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    out.push_back(&weights_[l]);
    out.push_back(&biases_[l]);
  }
  return out;
}

void Mlp::zero_grads() {
  for (auto* t : params()) t->zero_grad();
}

AttentionBlock::AttentionBlock(std::string name, int feature_dim)
    : wq(name + ".wq", feature_dim, feature_dim),
      wk(name + ".wk", feature_dim, feature_dim),
      wv(name + ".wv", feature_dim, feature_dim) {}

void AttentionBlock::init(Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(dim()));
  for (ad::Tensor* t : {&wq, &wk, &wv}) {
    for (double& w : t->value.v) w = rng.uniform(-bound, bound);
    t->zero_grad();
  }
}

std::vector<ad::Tensor*> AttentionBlock::params() { return {&wq, &wk, &wv}; }

int attention_features(ad::Tape& tape, int o, int z, AttentionBlock& blk) {
  const int m = blk.dim();
  const int q = tape.matmul(o, tape.leaf(blk.wq));
  const int k = tape.matmul(o, tape.leaf(blk.wk));
  const int v = tape.matmul(o, tape.leaf(blk.wv));
  int logits = tape.matmul(q, tape.transpose(k));
  logits = tape.scale(logits, 1.0 / std::sqrt(static_cast<double>(m)));
  logits = tape.mul(logits, z);
  const int att = tape.softmax_rows(logits);
  return tape.add(tape.matmul(att, v), v);
}

ad::Mat attention_features_eval(const ad::Mat& o, const ad::Mat& z,
                                const AttentionBlock& blk) {
  const int u = o.rows;
  const int m = o.cols;
  auto mm = [](const ad::Mat& a, const ad::Mat& b) {
    ad::Mat out(a.rows, b.cols);
    MapM(out.v.data(), out.rows, out.cols).noalias() =
        MapC(a.v.data(), a.rows, a.cols) * MapC(b.v.data(), b.rows, b.cols);
    return out;
  };
  const ad::Mat q = mm(o, blk.wq.value);
  const ad::Mat k = mm(o, blk.wk.value);
  const ad::Mat v = mm(o, blk.wv.value);
  ad::Mat logits(u, u);
  const double inv_sqrt_m = 1.0 / std::sqrt(static_cast<double>(m));
  for (int r = 0; r < u; ++r) {
    for (int c = 0; c < u; ++c) {
      double dot = 0.0;
      for (int j = 0; j < m; ++j) dot += q(r, j) * k(c, j);
      logits(r, c) = dot * inv_sqrt_m * z(r, c);
    }
  }
  ad::Mat att(u, u);
  for (int r = 0; r < u; ++r) {
    double mx = logits(r, 0);
    for (int c = 1; c < u; ++c) mx = std::max(mx, logits(r, c));
    double zsum = 0.0;
    for (int c = 0; c < u; ++c) {
      att(r, c) = std::exp(logits(r, c) - mx);
      zsum += att(r, c);
    }
    for (int c = 0; c < u; ++c) att(r, c) /= zsum;
  }
  ad::Mat out = mm(att, v);
  for (std::size_t i = 0; i < out.size(); ++i) out.v[i] += v.v[i];
  return out;
}

void save_checkpoint(const std::string& path, const Checkpoint& ck) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write checkpoint: " + path);
  out << "uavwet-checkpoint v1\n";
  out << "dims " << ck.num_uavs << " " << ck.num_devices << " " << ck.obs_dim
      << " " << ck.hidden_width << " " << ck.global_hidden_width << " "
      << (ck.has_global ? 1 : 0) << "\n";
  char buf[32];
  for (const auto& [name, mat] : ck.tensors) {
    out << "tensor " << name << " " << mat.rows << " " << mat.cols << "\n";
    for (int r = 0; r < mat.rows; ++r) {
      for (int c = 0; c < mat.cols; ++c) {
        std::snprintf(buf, sizeof(buf), "%.17g", mat(r, c));
        out << buf << (c + 1 < mat.cols ? ' ' : '\n');
      }
    }
  }
  if (!out) throw IoError("failed writing checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  std::string magic, version;
  in >> magic >> version;
  if (magic != "uavwet-checkpoint" || version != "v1") {
    throw IoError("bad checkpoint header in " + path);
  }
  Checkpoint ck;
  std::string tag;
  int has_global = 0;
  in >> tag >> ck.num_uavs >> ck.num_devices >> ck.obs_dim >> ck.hidden_width >>
      ck.global_hidden_width >> has_global;
  if (tag != "dims" || !in) throw IoError("bad checkpoint dims in " + path);
  ck.has_global = has_global != 0;
  while (in >> tag) {
    if (tag != "tensor") throw IoError("bad checkpoint record in " + path);
    std::string name;
    int rows = 0, cols = 0;
    in >> name >> rows >> cols;
    if (!in || rows <= 0 || cols <= 0) {
      throw IoError("bad tensor header in " + path);
    }
    ad::Mat m(rows, cols);
    for (double& v : m.v) {
      if (!(in >> v)) throw IoError("truncated tensor " + name + " in " + path);
    }
    ck.tensors.emplace(name, std::move(m));
  }
  return ck;
}

}  // namespace uavwet
