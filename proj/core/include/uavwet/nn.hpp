#pragma once

#include <map>
#include <string>
#include <vector>

#include "uavwet/rng.hpp"
#include "uavwet/tensor.hpp"

namespace uavwet {

enum class Activation { Tanh, Relu };

// Fully connected network: `widths` lists every neuron layer including input
// and output, so a 4-layer net is {in, h, h, out}. Hidden activations only;
// the output layer is linear.
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::string name, std::vector<int> widths, Activation hidden);

  void init(Rng& rng);

  // Record the forward pass on the tape. x: N x widths.front().
  int forward(ad::Tape& tape, int x) const;

  // Tape-free forward for rollouts and constant targets.
  ad::Mat eval(const ad::Mat& x) const;

  std::vector<ad::Tensor*> params();
  std::vector<const ad::Tensor*> params() const;
  void zero_grads();

  int in_dim() const { return widths_.front(); }
  int out_dim() const { return widths_.back(); }
  int layer_count() const { return static_cast<int>(widths_.size()); }
  const std::string& name() const { return name_; }

 private:
  std::string name_;
  std::vector<int> widths_;
  Activation hidden_ = Activation::Relu;
  // weights_[l]: widths[l] x widths[l+1], biases_[l]: 1 x widths[l+1]
  mutable std::vector<ad::Tensor> weights_;
  mutable std::vector<ad::Tensor> biases_;
};

// Square query/key/value projections over the per-agent feature dimension.
struct AttentionBlock {
  ad::Tensor wq, wk, wv;

  AttentionBlock() = default;
  AttentionBlock(std::string name, int feature_dim);
  void init(Rng& rng);
  std::vector<ad::Tensor*> params();
  int dim() const { return wq.value.rows; }
};

// Similarity-masked self-attention over one sample:
//   W_att = softmax_rows((1/sqrt(M)) (o Wq)(o Wk)^T  .* Z)
//   out   = W_att (o Wv) + (o Wv)
// o: U x M on the tape, z: U x U constant mask. Masking multiplies the scaled
// logits elementwise before the row softmax.
int attention_features(ad::Tape& tape, int o, int z, AttentionBlock& blk);

// Tape-free version for constant targets.
ad::Mat attention_features_eval(const ad::Mat& o, const ad::Mat& z,
                                const AttentionBlock& blk);

// Checkpoint container: named tensors in a stable order with a header
// describing the scenario dimensions the networks were built for.
struct Checkpoint {
  std::map<std::string, ad::Mat> tensors;
  int num_uavs = 0;
  int num_devices = 0;
  int obs_dim = 0;
  int hidden_width = 0;
  int global_hidden_width = 0;
  bool has_global = false;
};

void save_checkpoint(const std::string& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace uavwet
