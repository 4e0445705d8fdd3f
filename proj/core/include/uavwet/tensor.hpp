#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace uavwet::ad {

// Dense row-major matrix of 64-bit reals. Scalars are 1x1.
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> v;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), v(static_cast<std::size_t>(r) * c, 0.0) {}
  Mat(int r, int c, std::vector<double> data);

  double& operator()(int r, int c) { return v[static_cast<std::size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return v[static_cast<std::size_t>(r) * cols + c]; }
  std::size_t size() const { return v.size(); }
  bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }
  void fill(double x) { std::fill(v.begin(), v.end(), x); }
  bool all_finite() const;

  static Mat scalar(double x) {
    Mat m(1, 1);
    m.v[0] = x;
    return m;
  }
};

// A named value with a persistent gradient slot. Parameters and graph leaves
// are Tensors; backward() accumulates into `grad`.
struct Tensor {
  std::string name;
  Mat value;
  Mat grad;

  Tensor() = default;
  Tensor(std::string n, int r, int c)
      : name(std::move(n)), value(r, c), grad(r, c) {}

  void zero_grad() { grad.fill(0.0); }
};

// Reverse-mode tape over 2-D ops. Build a graph forward, call backward(root)
// once on a scalar root; gradients land in the bound Tensors. The tape is
// confined to one thread at a time and reused via clear().
class Tape {
 public:
  // Leaf bound to an external Tensor; participates in backward.
  int leaf(Tensor& t);
  // Constant value; backward never flows into it.
  int constant(Mat m);
  int constant_scalar(double x) { return constant(Mat::scalar(x)); }

  int matmul(int a, int b);
  int transpose(int a);
  int add(int a, int b);
  int sub(int a, int b);
  int mul(int a, int b);          // elementwise
  int add_rowvec(int a, int b);   // a: NxK, b: 1xK broadcast over rows
  int scale(int a, double s);
  int add_scalar(int a, double s);
  int tanh_op(int a);
  int relu(int a);
  int exp_op(int a);
  int log_op(int a);
  int sin_op(int a);
  int cos_op(int a);
  int square(int a);
  int minimum(int a, int b);      // elementwise min; subgradient to the argmin
  int softmax_rows(int a);
  int sum(int a);                 // -> 1x1
  int mean(int a);                // -> 1x1
  int row_sums(int a);            // NxK -> Nx1
  int concat_cols(std::span<const int> parts);
  int concat_cols(std::initializer_list<int> parts);
  int slice_cols(int a, int c0, int c1);  // [c0, c1)
  int reshape(int a, int r, int c);
  int stack_rows(std::span<const int> parts);  // vertical concatenation
  int detach(int a);              // value copy, gradient barrier

  const Mat& val(int id) const { return nodes_[static_cast<std::size_t>(id)].val; }
  double scalar_val(int id) const { return val(id).v[0]; }

  // Backward from a 1x1 root with seed 1. Accumulates into bound Tensors.
  void backward(int root);

  void clear();
  std::size_t size() const { return nodes_.size(); }

  // Throw NumericError when an op produces a non-finite value.
  bool finite_checks = true;

 private:
  enum class Op : std::uint8_t {
    Leaf, Const, MatMul, Transpose, Add, Sub, Mul, AddRowVec, Scale, AddScalar,
    Tanh, Relu, Exp, Log, Sin, Cos, Square, Minimum, SoftmaxRows, Sum, Mean,
    RowSums, ConcatCols, SliceCols, Reshape, StackRows, Detach
  };

  struct Node {
    Op op;
    int a = -1;
    int b = -1;
    double s = 0.0;
    int i0 = 0;
    std::vector<int> srcs;
    Mat val;
    Mat grad;
    Tensor* bound = nullptr;
    bool needs_grad = false;
    bool grad_alloc = false;
  };

  int push(Node n);
  Mat& grad_of(int id);
  void check_finite(int id);

  std::vector<Node> nodes_;
};

// SGD step with a global gradient-norm clip applied per parameter set.
void sgd_step(std::span<Tensor* const> params, double lr, double grad_clip);

// Polyak update: target <- tau * target + (1 - tau) * online.
void soft_update(std::span<Tensor* const> target,
                 std::span<Tensor* const> online, double tau);

double grad_norm(std::span<Tensor* const> params);

}  // namespace uavwet::ad
