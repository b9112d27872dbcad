#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <initializer_list>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace avp {
class PortableRng;
}

namespace avp::ad {

// Dense row-major matrix of doubles. Vectors are 1 x n.
struct Tensor {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Tensor() = default;
  Tensor(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}
  Tensor(std::size_t r, std::size_t c, std::vector<double> values);
  static Tensor row_vector(std::span<const double> values);
  static Tensor scalar(double v) { return Tensor(1, 1, v); }

  std::size_t size() const noexcept { return data.size(); }
  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<double> row(std::size_t r) { return std::span<double>(data).subspan(r * cols, cols); }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(data).subspan(r * cols, cols);
  }
  bool same_shape(const Tensor& o) const noexcept { return rows == o.rows && cols == o.cols; }
  bool operator==(const Tensor&) const = default;
};

class Tape;

// Handle to a node on a tape.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  const Tensor& value() const;
  // Gradient after backward(); zeros if nothing flowed into this node.
  const Tensor& grad() const;
  std::size_t rows() const { return value().rows; }
  std::size_t cols() const { return value().cols; }
  double item() const;  // value of a 1 x 1 node
  bool requires_grad() const;

  Tape* tape() const noexcept { return tape_; }
  std::size_t id() const noexcept { return id_; }
  bool valid() const noexcept { return tape_ != nullptr; }

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Append-only operation record. Backward walks nodes in reverse creation
// order; gradients accumulate additively where a node feeds several others.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::size_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var leaf(Tensor value, bool requires_grad = true);
  Var constant(Tensor value) { return leaf(std::move(value), false); }

  // Records a computed node. The node requires grad if any parent does;
  // `fn` is dropped otherwise.
  Var record(Tensor value, std::initializer_list<Var> parents, BackwardFn fn);
  Var record(Tensor value, std::span<const Var> parents, BackwardFn fn);

  void backward(Var root);

  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  const Tensor& grad(std::size_t id) const;
  // Gradient buffer of `id`, zero-allocated on first use.
  Tensor& grad_mut(std::size_t id);
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    BackwardFn backward;
  };
  std::deque<Node> nodes_;  // stable references across push_back
  Tensor empty_grad_;
};

// Elementwise and structural ops. Shape errors throw ShapeError.
Var add(Var a, Var b);  // b may be 1 x cols(a): broadcast over rows
Var sub(Var a, Var b);
Var mul(Var a, Var b);  // elementwise, same shape
Var affine(Var a, double scale, double shift);  // scale * a + shift
inline Var scale(Var a, double s) { return affine(a, s, 0.0); }
Var mul_scalar(Var a, Var s);  // s is 1 x 1
Var div_scalar(Var a, Var s);  // s is 1 x 1
Var matmul(Var a, Var b);
// a (n x k) times rows [offset, offset + k) of b.
Var matmul_rows(Var a, Var b, std::size_t offset);
Var transpose(Var a);
Var sigmoid(Var a);
Var tanh(Var a);
Var relu(Var a);  // subgradient at exactly 0 is 0
Var exp(Var a);
Var log(Var a);
Var clamp(Var a, double lo, double hi);  // gradient passes only strictly inside
Var pow_scalar(Var a, double p);         // a >= 0
Var softmax_rows(Var a);
Var logsumexp_rows(Var a);  // n x 1
Var concat_cols(std::span<const Var> parts);
Var concat_rows(std::span<const Var> parts);
inline Var concat_cols(std::initializer_list<Var> parts) { return concat_cols(std::span<const Var>(parts.begin(), parts.size())); }
inline Var concat_rows(std::initializer_list<Var> parts) { return concat_rows(std::span<const Var>(parts.begin(), parts.size())); }
Var slice_rows(Var a, std::size_t start, std::size_t count);
Var slice_cols(Var a, std::size_t start, std::size_t count);
Var pick(Var a, std::size_t r, std::size_t c);  // 1 x 1
Var sum(Var a);   // 1 x 1
Var mean(Var a);  // 1 x 1
Var maximum(Var a, Var b);  // ties send the gradient to a
Var dot(Var a, Var b);      // same shape, 1 x 1
Var cosine(Var a, Var b);   // 1 x 1; ZeroVectorError on a zero vector
// Inverted dropout with keep probability 1 - p.
Var dropout(Var a, double p, PortableRng& rng);

// Valid 1-D convolution followed by ReLU.
//   x: L x Dx, W: (H * stride) x K with stride >= Dx, b: 1 x K.
// Tap i uses rows [i * stride, i * stride + Dx) of W. `extra` (1 x K), when
// given, is added before the ReLU; it carries the contribution of input
// columns that are constant along the sequence. Without `extra`, stride must
// equal Dx. Output is (L - H + 1) x K.
Var conv1d(Var x, Var W, Var b, std::size_t H, std::optional<Var> extra = std::nullopt);

struct LstmParams {
  // Each W_* is (Dh + Din) x Dh applied to [h_{t-1}; x_t]; each b_* is 1 x Dh.
  Var W_f, W_i, W_C, W_o;
  Var b_f, b_i, b_C, b_o;
  std::size_t hidden() const { return b_f.cols(); }
};

struct LstmState {
  Var h;
  Var C;
};

// One LSTM cell update on x_t (1 x Din).
LstmState lstm_step(Var x_t, Var h_prev, Var C_prev, const LstmParams& p);

// Bidirectional LSTM over x (L x Dx); output L x 2Dh with the forward state
// in the first Dh columns. When `g` (1 x Dg) is given, every step sees the
// input [x_t; g] and the weights have Dh + Dx + Dg rows.
Var bilstm(Var x, const LstmParams& fwd, const LstmParams& bwd, std::optional<Var> g = std::nullopt);

struct AttentionOutput {
  Var pooled;   // 1 x D
  Var weights;  // 1 x L
};

// e_t = w^T tanh(W^T h_t), alpha = softmax(e), pooled = sum_t alpha_t h_t.
// hs: L x D, W: D x A, w: A x 1.
AttentionOutput attention_pool(Var hs, Var W, Var w);

struct FiniteDiffOptions {
  double epsilon = 1e-5;
  // When nonzero, at most this many coordinates per tensor are checked,
  // chosen with `seed`.
  std::size_t max_coords_per_tensor = 0;
  std::uint64_t seed = 0;
  // Central differences at epsilon 1e-5 carry roughly 1e-11 |f| of rounding
  // noise, so smaller gradients are compared against this floor instead of
  // their own magnitude.
  double abs_floor = 1e-6;
};

struct FiniteDiffReport {
  double max_rel_error = 0.0;
  std::size_t coordinates = 0;
  std::size_t worst_tensor = 0;
  std::size_t worst_index = 0;
};

using ScalarFn = std::function<Var(Tape&, std::span<const Var>)>;

// Compares reverse-mode gradients of f at theta with central differences:
// max over coordinates of |analytic - central| / max(abs_floor, |central|).
FiniteDiffReport finite_diff_check(const ScalarFn& f, const std::vector<Tensor>& theta,
                                   const FiniteDiffOptions& opts = {});

}  // namespace avp::ad
