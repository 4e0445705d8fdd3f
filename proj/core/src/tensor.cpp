#include "uavwet/tensor.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>

#include "uavwet/errors.hpp"

namespace uavwet::ad {

namespace {
using EMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapM = Eigen::Map<EMat>;
using MapC = Eigen::Map<const EMat>;

MapC emap(const Mat& m) { return MapC(m.v.data(), m.rows, m.cols); }
MapM emap(Mat& m) { return MapM(m.v.data(), m.rows, m.cols); }
}  // namespace

Mat::Mat(int r, int c, std::vector<double> data) : rows(r), cols(c), v(std::move(data)) {
  if (v.size() != static_cast<std::size_t>(r) * c) {
    throw NumericError("Mat: data size does not match shape");
  }
}

bool Mat::all_finite() const {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

int Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  const int id = static_cast<int>(nodes_.size()) - 1;
  if (finite_checks) check_finite(id);
  return id;
}

void Tape::check_finite(int id) {
  if (!nodes_[static_cast<std::size_t>(id)].val.all_finite()) {
    throw NumericError("non-finite value produced by tape op " +
                       std::to_string(static_cast<int>(nodes_[id].op)));
  }
}

Mat& Tape::grad_of(int id) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  if (!n.grad_alloc) {
    n.grad = Mat(n.val.rows, n.val.cols);
    n.grad_alloc = true;
  }
  return n.grad;
}

int Tape::leaf(Tensor& t) {
  Node n;
  n.op = Op::Leaf;
  n.val = t.value;
  n.bound = &t;
  n.needs_grad = true;
  return push(std::move(n));
}

int Tape::constant(Mat m) {
  Node n;
  n.op = Op::Const;
  n.val = std::move(m);
  n.needs_grad = false;
  return push(std::move(n));
}

#define UAVWET_SRC(x) nodes_[static_cast<std::size_t>(x)]

int Tape::matmul(int a, int b) {
  const Mat& av = UAVWET_SRC(a).val;
  const Mat& bv = UAVWET_SRC(b).val;
  if (av.cols != bv.rows) throw NumericError("matmul: inner dims differ");
  Node n;
  n.op = Op::MatMul;
  n.a = a;
  n.b = b;
  n.val = Mat(av.rows, bv.cols);
  emap(n.val).noalias() = emap(av) * emap(bv);
  n.needs_grad = UAVWET_SRC(a).needs_grad || UAVWET_SRC(b).needs_grad;
  return push(std::move(n));
}

int Tape::transpose(int a) {
  const Mat& av = UAVWET_SRC(a).val;
  Node n;
  n.op = Op::Transpose;
  n.a = a;
  n.val = Mat(av.cols, av.rows);
  emap(n.val) = emap(av).transpose();
  n.needs_grad = UAVWET_SRC(a).needs_grad;
  return push(std::move(n));
}

int Tape::add(int a, int b) {
  const Mat& av = UAVWET_SRC(a).val;
  const Mat& bv = UAVWET_SRC(b).val;
  if (!av.same_shape(bv)) throw NumericError("add: shape mismatch");
  Node n;
  n.op = Op::Add;
  n.a = a;
  n.b = b;
  n.val = Mat(av.rows, av.cols);
  for (std::size_t i = 0; i < av.size(); ++i) n.val.v[i] = av.v[i] + bv.v[i];
  n.needs_grad = UAVWET_SRC(a).needs_grad || UAVWET_SRC(b).needs_grad;
  return push(std::move(n));
}

int Tape::sub(int a, int b) {
  const Mat& av = UAVWET_SRC(a).val;
  const Mat& bv = UAVWET_SRC(b).val;
  if (!av.same_shape(bv)) throw NumericError("sub: shape mismatch");
  Node n;
  n.op = Op::Sub;
  n.a = a;
  n.b = b;
  n.val = Mat(av.rows, av.cols);
  for (std::size_t i = 0; i < av.size(); ++i) n.val.v[i] = av.v[i] - bv.v[i];
  n.needs_grad = UAVWET_SRC(a).needs_grad || UAVWET_SRC(b).needs_grad;
  return push(std::move(n));
}

int Tape::mul(int a, int b) {
  const Mat& av = UAVWET_SRC(a).val;
  const Mat& bv = UAVWET_SRC(b).val;
  if (!av.same_shape(bv)) throw NumericError("mul: shape mismatch");
  Node n;
  n.op = Op::Mul;
  n.a = a;
  n.b = b;
  n.val = Mat(av.rows, av.cols);
  for (std::size_t i = 0; i < av.size(); ++i) n.val.v[i] = av.v[i] * bv.v[i];
  n.needs_grad = UAVWET_SRC(a).needs_grad || UAVWET_SRC(b).needs_grad;
  return push(std::move(n));
}

int Tape::add_rowvec(int a, int b) {
  const Mat& av = UAVWET_SRC(a).val;
  const Mat& bv = UAVWET_SRC(b).val;
  if (bv.rows != 1 || bv.cols != av.cols) {
    throw NumericError("add_rowvec: b must be 1 x cols(a)");
  }
  Node n;
  n.op = Op::AddRowVec;
  n.a = a;
  n.b = b;
  n.val = Mat(av.rows, av.cols);
  for (int r = 0; r < av.rows; ++r) {
    for (int c = 0; c < av.cols; ++c) n.val(r, c) = av(r, c) + bv(0, c);
  }
  n.needs_grad = UAVWET_SRC(a).needs_grad || UAVWET_SRC(b).needs_grad;
  return push(std::move(n));
}

int Tape::scale(int a, double s) {
  const Mat& av = UAVWET_SRC(a).val;
  Node n;
  n.op = Op::Scale;
  n.a = a;
  n.s = s;
  n.val = Mat(av.rows, av.cols);
  for (std::size_t i = 0; i < av.size(); ++i) n.val.v[i] = av.v[i] * s;
  n.needs_grad = UAVWET_SRC(a).needs_grad;
  return push(std::move(n));
}

int Tape::add_scalar(int a, double s) {
  const Mat& av = UAVWET_SRC(a).val;
  Node n;
  n.op = Op::AddScalar;
  n.a = a;
  n.s = s;
  n.val = Mat(av.rows, av.cols);
  for (std::size_t i = 0; i < av.size(); ++i) n.val.v[i] = av.v[i] + s;
  n.needs_grad = UAVWET_SRC(a).needs_grad;
  return push(std::move(n));
}

namespace {
template <typename F>
Mat map_unary(const Mat& a, F f) {
  Mat out(a.rows, a.cols);
  for (std::size_t i = 0; i < a.size(); ++i) out.v[i] = f(a.v[i]);
  return out;
}
}  // namespace

int Tape::tanh_op(int a) {
  Node n;
  n.op = Op::Tanh;
  n.a = a;
  n.val = map_unary(UAVWET_SRC(a).val, [](double x) { return std::tanh(x); });
  n.needs_grad = UAVWET_SRC(a).needs_grad;
  return push(std::move(n));
}

int Tape::relu(int a) {
  Node n;
  n.op = Op::Relu;
  n.a = a;
  n.val = map_unary(UAVWET_SRC(a).val, [](double x) { return x > 0.0 ? x : 0.0; });
  n.needs_grad = UAVWET_SRC(a).needs_grad;
  return push(std::move(n));
}

int Tape::exp_op(int a) {
  Node n;
  n.op = Op::Exp;
  n.a = a;
  n.val = map_unary(UAVWET_SRC(a).val, [](double x) { return std::exp(x); });
  n.needs_grad = UAVWET_SRC(a).needs_grad;
  return push(std::move(n));
}

int Tape::log_op(int a) {
  Node n;
  n.op = Op::Log;
  n.a = a;
  n.val = map_unary(UAVWET_SRC(a).val, [](double x) { return std::log(x); });
  n.needs_grad = UAVWET_SRC(a).needs_grad;
  return push(std::move(n));
}

int Tape::sin_op(int a) {
  Node n;
  n.op = Op::Sin;
  n.a = a;
  n.val = map_unary(UAVWET_SRC(a).val, [](double x) { return std::sin(x); });
  n.needs_grad = UAVWET_SRC(a).needs_grad;
  return push(std::move(n));
}

int Tape::cos_op(int a) {
  Node n;
  n.op = Op::Cos;
  n.a = a;
  n.val = map_unary(UAVWET_SRC(a).val, [](double x) { return std::cos(x); });
  n.needs_grad = UAVWET_SRC(a).needs_grad;
  return push(std::move(n));
}

int Tape::square(int a) {
  Node n;
  n.op = Op::Square;
  n.a = a;
  n.val = map_unary(UAVWET_SRC(a).val, [](double x) { return x * x; });
  n.needs_grad = UAVWET_SRC(a).needs_grad;
  return push(std::move(n));
}

int Tape::minimum(int a, int b) {
  const Mat& av = UAVWET_SRC(a).val;
  const Mat& bv = UAVWET_SRC(b).val;
  if (!av.same_shape(bv)) throw NumericError("minimum: shape mismatch");
  Node n;
  n.op = Op::Minimum;
  n.a = a;
  n.b = b;
  n.val = Mat(av.rows, av.cols);
  for (std::size_t i = 0; i < av.size(); ++i) n.val.v[i] = std::min(av.v[i], bv.v[i]);
  n.needs_grad = UAVWET_SRC(a).needs_grad || UAVWET_SRC(b).needs_grad;
  return push(std::move(n));
}

int Tape::softmax_rows(int a) {
  const Mat& av = UAVWET_SRC(a).val;
  Node n;
  n.op = Op::SoftmaxRows;
  n.a = a;
  n.val = Mat(av.rows, av.cols);
  for (int r = 0; r < av.rows; ++r) {
    double mx = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < av.cols; ++c) mx = std::max(mx, av(r, c));
    double z = 0.0;
    for (int c = 0; c < av.cols; ++c) {
      const double e = std::exp(av(r, c) - mx);
      n.val(r, c) = e;
      z += e;
    }
    for (int c = 0; c < av.cols; ++c) n.val(r, c) /= z;
  }
  n.needs_grad = UAVWET_SRC(a).needs_grad;
  return push(std::move(n));
}

int Tape::sum(int a) {
  const Mat& av = UAVWET_SRC(a).val;
  double s = 0.0;
  for (double x : av.v) s += x;
  Node n;
  n.op = Op::Sum;
  n.a = a;
  n.val = Mat::scalar(s);
  n.needs_grad = UAVWET_SRC(a).needs_grad;
  return push(std::move(n));
}

int Tape::mean(int a) {
  const Mat& av = UAVWET_SRC(a).val;
  double s = 0.0;
  for (double x : av.v) s += x;
  Node n;
  n.op = Op::Mean;
  n.a = a;
  n.val = Mat::scalar(s / static_cast<double>(av.size()));
  n.needs_grad = UAVWET_SRC(a).needs_grad;
  return push(std::move(n));
}

int Tape::row_sums(int a) {
  const Mat& av = UAVWET_SRC(a).val;
  Node n;
  n.op = Op::RowSums;
  n.a = a;
  n.val = Mat(av.rows, 1);
  for (int r = 0; r < av.rows; ++r) {
    double s = 0.0;
    for (int c = 0; c < av.cols; ++c) s += av(r, c);
    n.val(r, 0) = s;
  }
  n.needs_grad = UAVWET_SRC(a).needs_grad;
  return push(std::move(n));
}

int Tape::concat_cols(std::span<const int> parts) {
  if (parts.empty()) throw NumericError("concat_cols: no parts");
  const int rows = UAVWET_SRC(parts[0]).val.rows;
  int cols = 0;
  bool needs = false;
  for (int p : parts) {
    const Mat& pv = UAVWET_SRC(p).val;
    if (pv.rows != rows) throw NumericError("concat_cols: row mismatch");
    cols += pv.cols;
    needs = needs || UAVWET_SRC(p).needs_grad;
  }
  Node n;
  n.op = Op::ConcatCols;
  n.srcs.assign(parts.begin(), parts.end());
  n.val = Mat(rows, cols);
  int off = 0;
  for (int p : parts) {
    const Mat& pv = UAVWET_SRC(p).val;
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < pv.cols; ++c) n.val(r, off + c) = pv(r, c);
    }
    off += pv.cols;
  }
  n.needs_grad = needs;
  return push(std::move(n));
}

int Tape::concat_cols(std::initializer_list<int> parts) {
  std::vector<int> p(parts);
  return concat_cols(std::span<const int>(p));
}

int Tape::slice_cols(int a, int c0, int c1) {
  const Mat& av = UAVWET_SRC(a).val;
  if (c0 < 0 || c1 > av.cols || c0 >= c1) throw NumericError("slice_cols: bad range");
  Node n;
  n.op = Op::SliceCols;
  n.a = a;
  n.i0 = c0;
  n.val = Mat(av.rows, c1 - c0);
  for (int r = 0; r < av.rows; ++r) {
    for (int c = c0; c < c1; ++c) n.val(r, c - c0) = av(r, c);
  }
  n.needs_grad = UAVWET_SRC(a).needs_grad;
  return push(std::move(n));
}

int Tape::reshape(int a, int r, int c) {
  const Mat& av = UAVWET_SRC(a).val;
  if (static_cast<std::size_t>(r) * c != av.size()) {
    throw NumericError("reshape: element count mismatch");
  }
  Node n;
  n.op = Op::Reshape;
  n.a = a;
  n.val = Mat(r, c, av.v);
  n.needs_grad = UAVWET_SRC(a).needs_grad;
  return push(std::move(n));
}

int Tape::stack_rows(std::span<const int> parts) {
  if (parts.empty()) throw NumericError("stack_rows: no parts");
  const int cols = UAVWET_SRC(parts[0]).val.cols;
  int rows = 0;
  bool needs = false;
  for (int p : parts) {
    const Mat& pv = UAVWET_SRC(p).val;
    if (pv.cols != cols) throw NumericError("stack_rows: col mismatch");
    rows += pv.rows;
    needs = needs || UAVWET_SRC(p).needs_grad;
  }
  Node n;
  n.op = Op::StackRows;
  n.srcs.assign(parts.begin(), parts.end());
  n.val = Mat(rows, cols);
  int off = 0;
  for (int p : parts) {
    const Mat& pv = UAVWET_SRC(p).val;
    std::copy(pv.v.begin(), pv.v.end(), n.val.v.begin() + static_cast<std::ptrdiff_t>(off) * cols);
    off += pv.rows;
  }
  n.needs_grad = needs;
  return push(std::move(n));
}

int Tape::detach(int a) {
  Node n;
  n.op = Op::Detach;
  n.val = UAVWET_SRC(a).val;
  n.needs_grad = false;
  return push(std::move(n));
}

void Tape::backward(int root) {
  Node& rn = nodes_[static_cast<std::size_t>(root)];
  if (rn.val.rows != 1 || rn.val.cols != 1) {
    throw NumericError("backward: root must be 1x1");
  }
  if (!rn.needs_grad) return;
  grad_of(root).v[0] = 1.0;

  for (int id = root; id >= 0; --id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.needs_grad || !n.grad_alloc) continue;
    const Mat& g = n.grad;
    switch (n.op) {
      case Op::Leaf: {
        Mat& out = n.bound->grad;
        for (std::size_t i = 0; i < g.size(); ++i) out.v[i] += g.v[i];
        break;
      }
      case Op::Const:
      case Op::Detach:
        break;
      case Op::MatMul: {
        Node& na = UAVWET_SRC(n.a);
        Node& nb = UAVWET_SRC(n.b);
        if (na.needs_grad) {
          emap(grad_of(n.a)).noalias() += emap(g) * emap(nb.val).transpose();
        }
        if (nb.needs_grad) {
          emap(grad_of(n.b)).noalias() += emap(na.val).transpose() * emap(g);
        }
        break;
      }
      case Op::Transpose: {
        if (UAVWET_SRC(n.a).needs_grad) {
          emap(grad_of(n.a)) += emap(g).transpose();
        }
        break;
      }
      case Op::Add: {
        if (UAVWET_SRC(n.a).needs_grad) {
          Mat& ga = grad_of(n.a);
          for (std::size_t i = 0; i < g.size(); ++i) ga.v[i] += g.v[i];
        }
        if (UAVWET_SRC(n.b).needs_grad) {
          Mat& gb = grad_of(n.b);
          for (std::size_t i = 0; i < g.size(); ++i) gb.v[i] += g.v[i];
        }
        break;
      }
      case Op::Sub: {
        if (UAVWET_SRC(n.a).needs_grad) {
          Mat& ga = grad_of(n.a);
          for (std::size_t i = 0; i < g.size(); ++i) ga.v[i] += g.v[i];
        }
        if (UAVWET_SRC(n.b).needs_grad) {
          Mat& gb = grad_of(n.b);
          for (std::size_t i = 0; i < g.size(); ++i) gb.v[i] -= g.v[i];
        }
        break;
      }
      case Op::Mul: {
        const Mat& av = UAVWET_SRC(n.a).val;
        const Mat& bv = UAVWET_SRC(n.b).val;
        if (UAVWET_SRC(n.a).needs_grad) {
          Mat& ga = grad_of(n.a);
          for (std::size_t i = 0; i < g.size(); ++i) ga.v[i] += g.v[i] * bv.v[i];
        }
        if (UAVWET_SRC(n.b).needs_grad) {
          Mat& gb = grad_of(n.b);
          for (std::size_t i = 0; i < g.size(); ++i) gb.v[i] += g.v[i] * av.v[i];
        }
        break;
      }
      case Op::AddRowVec: {
        if (UAVWET_SRC(n.a).needs_grad) {
          Mat& ga = grad_of(n.a);
          for (std::size_t i = 0; i < g.size(); ++i) ga.v[i] += g.v[i];
        }
        if (UAVWET_SRC(n.b).needs_grad) {
          Mat& gb = grad_of(n.b);
          for (int r = 0; r < g.rows; ++r) {
            for (int c = 0; c < g.cols; ++c) gb(0, c) += g(r, c);
          }
        }
        break;
      }
      case Op::Scale: {
        if (UAVWET_SRC(n.a).needs_grad) {
          Mat& ga = grad_of(n.a);
          for (std::size_t i = 0; i < g.size(); ++i) ga.v[i] += g.v[i] * n.s;
        }
        break;
      }
      case Op::AddScalar: {
        if (UAVWET_SRC(n.a).needs_grad) {
          Mat& ga = grad_of(n.a);
          for (std::size_t i = 0; i < g.size(); ++i) ga.v[i] += g.v[i];
        }
        break;
      }
      case Op::Tanh: {
        if (UAVWET_SRC(n.a).needs_grad) {
          Mat& ga = grad_of(n.a);
          for (std::size_t i = 0; i < g.size(); ++i) {
            ga.v[i] += g.v[i] * (1.0 - n.val.v[i] * n.val.v[i]);
          }
        }
        break;
      }
      case Op::Relu: {
        if (UAVWET_SRC(n.a).needs_grad) {
          const Mat& av = UAVWET_SRC(n.a).val;
          Mat& ga = grad_of(n.a);
          for (std::size_t i = 0; i < g.size(); ++i) {
            if (av.v[i] > 0.0) ga.v[i] += g.v[i];
          }
        }
        break;
      }
      case Op::Exp: {
        if (UAVWET_SRC(n.a).needs_grad) {
          Mat& ga = grad_of(n.a);
          for (std::size_t i = 0; i < g.size(); ++i) ga.v[i] += g.v[i] * n.val.v[i];
        }
        break;
      }
      case Op::Log: {
        if (UAVWET_SRC(n.a).needs_grad) {
          const Mat& av = UAVWET_SRC(n.a).val;
          Mat& ga = grad_of(n.a);
          for (std::size_t i = 0; i < g.size(); ++i) ga.v[i] += g.v[i] / av.v[i];
        }
        break;
      }
      case Op::Sin: {
        if (UAVWET_SRC(n.a).needs_grad) {
          const Mat& av = UAVWET_SRC(n.a).val;
          Mat& ga = grad_of(n.a);
          for (std::size_t i = 0; i < g.size(); ++i) {
            ga.v[i] += g.v[i] * std::cos(av.v[i]);
          }
        }
        break;
      }
      case Op::Cos: {
        if (UAVWET_SRC(n.a).needs_grad) {
          const Mat& av = UAVWET_SRC(n.a).val;
          Mat& ga = grad_of(n.a);
          for (std::size_t i = 0; i < g.size(); ++i) {
            ga.v[i] -= g.v[i] * std::sin(av.v[i]);
          }
        }
        break;
      }
      case Op::Square: {
        if (UAVWET_SRC(n.a).needs_grad) {
          const Mat& av = UAVWET_SRC(n.a).val;
          Mat& ga = grad_of(n.a);
          for (std::size_t i = 0; i < g.size(); ++i) {
            ga.v[i] += g.v[i] * 2.0 * av.v[i];
          }
        }
        break;
      }
      case Op::Minimum: {
        const Mat& av = UAVWET_SRC(n.a).val;
        const Mat& bv = UAVWET_SRC(n.b).val;
        const bool ga_needs = UAVWET_SRC(n.a).needs_grad;
        const bool gb_needs = UAVWET_SRC(n.b).needs_grad;
        for (std::size_t i = 0; i < g.size(); ++i) {
          if (av.v[i] <= bv.v[i]) {
            if (ga_needs) grad_of(n.a).v[i] += g.v[i];
          } else {
            if (gb_needs) grad_of(n.b).v[i] += g.v[i];
          }
        }
        break;
      }
      case Op::SoftmaxRows: {
        if (UAVWET_SRC(n.a).needs_grad) {
          Mat& ga = grad_of(n.a);
          for (int r = 0; r < g.rows; ++r) {
            double dot = 0.0;
            for (int c = 0; c < g.cols; ++c) dot += g(r, c) * n.val(r, c);
            for (int c = 0; c < g.cols; ++c) {
              ga(r, c) += (g(r, c) - dot) * n.val(r, c);
            }
          }
        }
        break;
      }
      case Op::Sum: {
        if (UAVWET_SRC(n.a).needs_grad) {
          Mat& ga = grad_of(n.a);
          const double gs = g.v[0];
          for (std::size_t i = 0; i < ga.size(); ++i) ga.v[i] += gs;
        }
        break;
      }
      case Op::Mean: {
        if (UAVWET_SRC(n.a).needs_grad) {
          Mat& ga = grad_of(n.a);
          const double gs = g.v[0] / static_cast<double>(ga.size());
          for (std::size_t i = 0; i < ga.size(); ++i) ga.v[i] += gs;
        }
        break;
      }
      case Op::RowSums: {
        if (UAVWET_SRC(n.a).needs_grad) {
          Mat& ga = grad_of(n.a);
          for (int r = 0; r < ga.rows; ++r) {
            for (int c = 0; c < ga.cols; ++c) ga(r, c) += g(r, 0);
          }
        }
        break;
      }
      case Op::ConcatCols: {
        int off = 0;
        for (int p : n.srcs) {
          Node& np = UAVWET_SRC(p);
          if (np.needs_grad) {
            Mat& gp = grad_of(p);
            for (int r = 0; r < gp.rows; ++r) {
              for (int c = 0; c < gp.cols; ++c) gp(r, c) += g(r, off + c);
            }
          }
          off += np.val.cols;
        }
        break;
      }
      case Op::SliceCols: {
        if (UAVWET_SRC(n.a).needs_grad) {
          Mat& ga = grad_of(n.a);
          for (int r = 0; r < g.rows; ++r) {
            for (int c = 0; c < g.cols; ++c) ga(r, n.i0 + c) += g(r, c);
          }
        }
        break;
      }
      case Op::Reshape: {
        if (UAVWET_SRC(n.a).needs_grad) {
          Mat& ga = grad_of(n.a);
          for (std::size_t i = 0; i < g.size(); ++i) ga.v[i] += g.v[i];
        }
        break;
      }
      case Op::StackRows: {
        int off = 0;
        for (int p : n.srcs) {
          Node& np = UAVWET_SRC(p);
          if (np.needs_grad) {
            Mat& gp = grad_of(p);
            for (std::size_t i = 0; i < gp.size(); ++i) {
              gp.v[i] += g.v[static_cast<std::size_t>(off) * g.cols + i];
            }
          }
          off += np.val.rows;
        }
        break;
      }
    }
  }
}

#undef UAVWET_SRC

void Tape::clear() { nodes_.clear(); }

double grad_norm(std::span<Tensor* const> params) {
  double sq = 0.0;
  for (const Tensor* t : params) {
    for (double g : t->grad.v) sq += g * g;
  }
  return std::sqrt(sq);
}

void sgd_step(std::span<Tensor* const> params, double lr, double grad_clip) {
  double scale = 1.0;
  if (grad_clip > 0.0) {
    const double norm = grad_norm(params);
    if (norm > grad_clip) scale = grad_clip / norm;
  }
  for (Tensor* t : params) {
    for (std::size_t i = 0; i < t->value.size(); ++i) {
      t->value.v[i] -= lr * scale * t->grad.v[i];
    }
  }
}

void soft_update(std::span<Tensor* const> target,
                 std::span<Tensor* const> online, double tau) {
  if (target.size() != online.size()) {
    throw NumericError("soft_update: parameter count mismatch");
  }
  for (std::size_t k = 0; k < target.size(); ++k) {
    Tensor* t = target[k];
    const Tensor* o = online[k];
    if (!t->value.same_shape(o->value)) {
      throw NumericError("soft_update: shape mismatch for " + t->name);
    }
    for (std::size_t i = 0; i < t->value.size(); ++i) {
      t->value.v[i] = tau * t->value.v[i] + (1.0 - tau) * o->value.v[i];
    }
  }
}

}  // namespace uavwet::ad
