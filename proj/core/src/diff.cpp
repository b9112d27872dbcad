#include "avp/diff.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "avp/errors.hpp"
#include "avp/rng.hpp"

namespace avp::ad {

namespace {

constexpr const char* kModule = "diffcore";

std::string shape_str(const Tensor& t) { return std::to_string(t.rows) + "x" + std::to_string(t.cols); }

[[noreturn]] void shape_fail(const char* op, const Tensor& a, const Tensor& b) {
  throw ShapeError(kModule, std::string(op) + ": incompatible shapes " + shape_str(a) + " and " + shape_str(b));
}

void check_finite([[maybe_unused]] const Tensor& t) {
#ifndef NDEBUG
  for (double v : t.data) assert(std::isfinite(v) && "non-finite value produced by a diffcore op");
#endif
}

// Accumulate g into parent's gradient if it participates.
template <typename F>
void accum(Tape& t, std::size_t parent, F&& body) {
  if (t.requires_grad(parent)) body(t.grad_mut(parent));
}

// c += a * b for row-major a (n x k), b (k x m) starting at row `boff`.
void gemm_acc(const double* a, std::size_t n, std::size_t k, const double* b, std::size_t m, double* c) {
  for (std::size_t i = 0; i < n; ++i) {
    double* crow = c + i * m;
    const double* arow = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      const double* brow = b + p * m;
      for (std::size_t j = 0; j < m; ++j) crow[j] += av * brow[j];
    }
  }
}

// c (n x k) += g (n x m) * b^T where b is k x m.
void gemm_acc_bt(const double* g, std::size_t n, std::size_t m, const double* b, std::size_t k, double* c) {
  for (std::size_t i = 0; i < n; ++i) {
    const double* grow = g + i * m;
    double* crow = c + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double* brow = b + p * m;
      double s = 0.0;
      for (std::size_t j = 0; j < m; ++j) s += grow[j] * brow[j];
      crow[p] += s;
    }
  }
}

// c (k x m) += a^T (k x n) * g (n x m) where a is n x k.
void gemm_acc_at(const double* a, std::size_t n, std::size_t k, const double* g, std::size_t m, double* c) {
  for (std::size_t i = 0; i < n; ++i) {
    const double* arow = a + i * k;
    const double* grow = g + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      double* crow = c + p * m;
      for (std::size_t j = 0; j < m; ++j) crow[j] += av * grow[j];
    }
  }
}

template <typename Fwd, typename Deriv>
Var unary(Var a, Fwd fwd, Deriv deriv) {
  const Tensor& av = a.value();
  Tensor out(av.rows, av.cols);
  for (std::size_t i = 0; i < av.size(); ++i) out.data[i] = fwd(av.data[i]);
  check_finite(out);
  const std::size_t pa = a.id();
  return a.tape()->record(std::move(out), {a}, [pa, deriv](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    const Tensor& x = t.value(pa);
    const Tensor& y = t.value(self);
    accum(t, pa, [&](Tensor& ga) {
      for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] += g.data[i] * deriv(x.data[i], y.data[i]);
    });
  });
}

Tape& tape_of(Var a, Var b) {
  if (a.tape() != b.tape()) throw ShapeError(kModule, "operands live on different tapes");
  return *a.tape();
}

}  // namespace

Tensor::Tensor(std::size_t r, std::size_t c, std::vector<double> values) : rows(r), cols(c), data(std::move(values)) {
  if (data.size() != r * c) {
    throw ShapeError(kModule, "tensor data length " + std::to_string(data.size()) + " does not match " +
                                  std::to_string(r) + "x" + std::to_string(c));
  }
}

Tensor Tensor::row_vector(std::span<const double> values) {
  return Tensor(1, values.size(), std::vector<double>(values.begin(), values.end()));
}

const Tensor& Var::value() const { return tape_->value(id_); }
const Tensor& Var::grad() const { return tape_->grad(id_); }
bool Var::requires_grad() const { return tape_->requires_grad(id_); }
double Var::item() const {
  const Tensor& v = value();
  if (v.size() != 1) throw ShapeError(kModule, "item() on a " + shape_str(v) + " tensor");
  return v.data[0];
}

Var Tape::leaf(Tensor value, bool requires_grad) {
  nodes_.push_back(Node{std::move(value), Tensor{}, requires_grad, nullptr});
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, std::initializer_list<Var> parents, BackwardFn fn) {
  return record(std::move(value), std::span<const Var>(parents.begin(), parents.size()), std::move(fn));
}

Var Tape::record(Tensor value, std::span<const Var> parents, BackwardFn fn) {
  bool rg = false;
  for (const Var& p : parents) {
    if (p.tape() != this) throw ShapeError(kModule, "operand recorded on a different tape");
    rg = rg || nodes_[p.id()].requires_grad;
  }
  nodes_.push_back(Node{std::move(value), Tensor{}, rg, rg ? std::move(fn) : nullptr});
  return Var(this, nodes_.size() - 1);
}

const Tensor& Tape::grad(std::size_t id) const {
  const Node& n = nodes_[id];
  if (n.grad.size() == 0 && n.value.size() != 0) {
    // Lazily materialize zeros so callers always get the right shape.
    auto& self = const_cast<Tape&>(*this);
    self.nodes_[id].grad = Tensor(n.value.rows, n.value.cols);
  }
  return nodes_[id].grad;
}

Tensor& Tape::grad_mut(std::size_t id) {
  Node& n = nodes_[id];
  if (n.grad.size() != n.value.size() || n.grad.rows != n.value.rows) n.grad = Tensor(n.value.rows, n.value.cols);
  return n.grad;
}

void Tape::backward(Var root) {
  if (root.tape() != this) throw ShapeError(kModule, "backward root belongs to another tape");
  const Tensor& rv = nodes_[root.id()].value;
  if (rv.rows != 1 || rv.cols != 1) throw ShapeError(kModule, "backward needs a scalar root, got " + shape_str(rv));
  grad_mut(root.id()).data[0] += 1.0;
  for (std::size_t i = root.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || !n.backward || n.grad.size() == 0) continue;
    n.backward(*this, i);
  }
}

Var add(Var a, Var b) {
  Tape& t = tape_of(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  const bool bcast = !av.same_shape(bv);
  if (bcast && !(bv.rows == 1 && bv.cols == av.cols)) shape_fail("add", av, bv);
  Tensor out = av;
  for (std::size_t r = 0; r < av.rows; ++r) {
    for (std::size_t c = 0; c < av.cols; ++c) out.at(r, c) += bcast ? bv.data[c] : bv.at(r, c);
  }
  check_finite(out);
  const std::size_t pa = a.id(), pb = b.id();
  return t.record(std::move(out), {a, b}, [pa, pb, bcast](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    accum(tp, pa, [&](Tensor& ga) {
      for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] += g.data[i];
    });
    accum(tp, pb, [&](Tensor& gb) {
      if (!bcast) {
        for (std::size_t i = 0; i < g.size(); ++i) gb.data[i] += g.data[i];
      } else {
        for (std::size_t r = 0; r < g.rows; ++r)
          for (std::size_t c = 0; c < g.cols; ++c) gb.data[c] += g.at(r, c);
      }
    });
  });
}

Var sub(Var a, Var b) {
  Tape& t = tape_of(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (!av.same_shape(bv)) shape_fail("sub", av, bv);
  Tensor out = av;
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] -= bv.data[i];
  const std::size_t pa = a.id(), pb = b.id();
  return t.record(std::move(out), {a, b}, [pa, pb](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    accum(tp, pa, [&](Tensor& ga) {
      for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] += g.data[i];
    });
    accum(tp, pb, [&](Tensor& gb) {
      for (std::size_t i = 0; i < g.size(); ++i) gb.data[i] -= g.data[i];
    });
  });
}

Var mul(Var a, Var b) {
  Tape& t = tape_of(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (!av.same_shape(bv)) shape_fail("mul", av, bv);
  Tensor out = av;
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] *= bv.data[i];
  check_finite(out);
  const std::size_t pa = a.id(), pb = b.id();
  return t.record(std::move(out), {a, b}, [pa, pb](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    const Tensor& x = tp.value(pa);
    const Tensor& y = tp.value(pb);
    accum(tp, pa, [&](Tensor& ga) {
      for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] += g.data[i] * y.data[i];
    });
    accum(tp, pb, [&](Tensor& gb) {
      for (std::size_t i = 0; i < g.size(); ++i) gb.data[i] += g.data[i] * x.data[i];
    });
  });
}

Var affine(Var a, double s, double shift) {
  return unary(
      a, [s, shift](double x) { return s * x + shift; }, [s](double, double) { return s; });
}

Var mul_scalar(Var a, Var s) {
  Tape& t = tape_of(a, s);
  if (s.value().size() != 1) shape_fail("mul_scalar", a.value(), s.value());
  const double sv = s.value().data[0];
  Tensor out = a.value();
  for (double& v : out.data) v *= sv;
  check_finite(out);
  const std::size_t pa = a.id(), ps = s.id();
  return t.record(std::move(out), {a, s}, [pa, ps](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    const Tensor& x = tp.value(pa);
    const double k = tp.value(ps).data[0];
    accum(tp, pa, [&](Tensor& ga) {
      for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] += g.data[i] * k;
    });
    accum(tp, ps, [&](Tensor& gs) {
      double acc = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) acc += g.data[i] * x.data[i];
      gs.data[0] += acc;
    });
  });
}

Var div_scalar(Var a, Var s) {
  Tape& t = tape_of(a, s);
  if (s.value().size() != 1) shape_fail("div_scalar", a.value(), s.value());
  const double sv = s.value().data[0];
  if (sv == 0.0) throw DomainError(kModule, "division by zero scalar");
  Tensor out = a.value();
  for (double& v : out.data) v /= sv;
  check_finite(out);
  const std::size_t pa = a.id(), ps = s.id();
  return t.record(std::move(out), {a, s}, [pa, ps](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    const Tensor& y = tp.value(self);
    const double k = tp.value(ps).data[0];
    accum(tp, pa, [&](Tensor& ga) {
      for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] += g.data[i] / k;
    });
    accum(tp, ps, [&](Tensor& gs) {
      double acc = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) acc += g.data[i] * y.data[i];
      gs.data[0] -= acc / k;
    });
  });
}

Var matmul_rows(Var a, Var b, std::size_t offset) {
  Tape& t = tape_of(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (offset + av.cols > bv.rows) shape_fail("matmul", av, bv);
  Tensor out(av.rows, bv.cols);
  const double* bp = bv.data.data() + offset * bv.cols;
  gemm_acc(av.data.data(), av.rows, av.cols, bp, bv.cols, out.data.data());
  check_finite(out);
  const std::size_t pa = a.id(), pb = b.id();
  return t.record(std::move(out), {a, b}, [pa, pb, offset](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    const Tensor& x = tp.value(pa);
    const Tensor& w = tp.value(pb);
    accum(tp, pa, [&](Tensor& ga) {
      gemm_acc_bt(g.data.data(), g.rows, g.cols, w.data.data() + offset * w.cols, x.cols, ga.data.data());
    });
    accum(tp, pb, [&](Tensor& gb) {
      gemm_acc_at(x.data.data(), x.rows, x.cols, g.data.data(), g.cols, gb.data.data() + offset * gb.cols);
    });
  });
}

Var matmul(Var a, Var b) {
  if (a.value().cols != b.value().rows) shape_fail("matmul", a.value(), b.value());
  return matmul_rows(a, b, 0);
}

Var transpose(Var a) {
  const Tensor& av = a.value();
  Tensor out(av.cols, av.rows);
  for (std::size_t r = 0; r < av.rows; ++r)
    for (std::size_t c = 0; c < av.cols; ++c) out.at(c, r) = av.at(r, c);
  const std::size_t pa = a.id();
  return a.tape()->record(std::move(out), {a}, [pa](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    accum(tp, pa, [&](Tensor& ga) {
      for (std::size_t r = 0; r < ga.rows; ++r)
        for (std::size_t c = 0; c < ga.cols; ++c) ga.at(r, c) += g.at(c, r);
    });
  });
}

Var sigmoid(Var a) {
  return unary(
      a,
      [](double x) {
        if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Var tanh(Var a) {
  return unary(
      a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Var relu(Var a) {
  return unary(
      a, [](double x) { return x > 0.0 ? x : 0.0; }, [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var exp(Var a) {
  return unary(
      a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Var log(Var a) {
  for (double v : a.value().data) {
    if (!(v > 0.0)) throw DomainError(kModule, "log of a non-positive value");
  }
  return unary(
      a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Var clamp(Var a, double lo, double hi) {
  return unary(
      a, [lo, hi](double x) { return std::clamp(x, lo, hi); },
      [lo, hi](double x, double) { return (x > lo && x < hi) ? 1.0 : 0.0; });
}

Var pow_scalar(Var a, double p) {
  for (double v : a.value().data) {
    if (v < 0.0) throw DomainError(kModule, "pow_scalar of a negative value");
  }
  return unary(
      a, [p](double x) { return p == 0.0 ? 1.0 : std::pow(x, p); },
      [p](double x, double) {
        if (p == 0.0) return 0.0;
        if (x == 0.0) return p == 1.0 ? 1.0 : 0.0;
        return p * std::pow(x, p - 1.0);
      });
}

Var softmax_rows(Var a) {
  const Tensor& av = a.value();
  Tensor out(av.rows, av.cols);
  for (std::size_t r = 0; r < av.rows; ++r) {
    const auto in = av.row(r);
    auto o = out.row(r);
    const double mx = *std::max_element(in.begin(), in.end());
    double z = 0.0;
    for (std::size_t c = 0; c < in.size(); ++c) z += (o[c] = std::exp(in[c] - mx));
    for (double& v : o) v /= z;
  }
  const std::size_t pa = a.id();
  return a.tape()->record(std::move(out), {a}, [pa](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    const Tensor& y = tp.value(self);
    accum(tp, pa, [&](Tensor& ga) {
      for (std::size_t r = 0; r < y.rows; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < y.cols; ++c) s += g.at(r, c) * y.at(r, c);
        for (std::size_t c = 0; c < y.cols; ++c) ga.at(r, c) += y.at(r, c) * (g.at(r, c) - s);
      }
    });
  });
}

Var logsumexp_rows(Var a) {
  const Tensor& av = a.value();
  if (av.cols == 0) throw ShapeError(kModule, "logsumexp over an empty row");
  Tensor out(av.rows, 1);
  for (std::size_t r = 0; r < av.rows; ++r) {
    const auto in = av.row(r);
    const double mx = *std::max_element(in.begin(), in.end());
    double z = 0.0;
    for (double v : in) z += std::exp(v - mx);
    out.data[r] = mx + std::log(z);
  }
  const std::size_t pa = a.id();
  return a.tape()->record(std::move(out), {a}, [pa](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    const Tensor& y = tp.value(self);
    const Tensor& x = tp.value(pa);
    accum(tp, pa, [&](Tensor& ga) {
      for (std::size_t r = 0; r < x.rows; ++r)
        for (std::size_t c = 0; c < x.cols; ++c) ga.at(r, c) += g.data[r] * std::exp(x.at(r, c) - y.data[r]);
    });
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError(kModule, "concat of zero tensors");
  Tape& t = *parts.front().tape();
  const std::size_t rows = parts.front().rows();
  std::size_t cols = 0;
  for (const Var& p : parts) {
    if (p.rows() != rows) shape_fail("concat_cols", parts.front().value(), p.value());
    cols += p.cols();
  }
  Tensor out(rows, cols);
  std::vector<std::size_t> ids, offs;
  std::size_t off = 0;
  for (const Var& p : parts) {
    const Tensor& v = p.value();
    for (std::size_t r = 0; r < rows; ++r)
      std::copy(v.row(r).begin(), v.row(r).end(), out.row(r).begin() + static_cast<std::ptrdiff_t>(off));
    ids.push_back(p.id());
    offs.push_back(off);
    off += v.cols;
  }
  return t.record(std::move(out), parts, [ids, offs](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    for (std::size_t k = 0; k < ids.size(); ++k) {
      accum(tp, ids[k], [&](Tensor& gp) {
        for (std::size_t r = 0; r < gp.rows; ++r)
          for (std::size_t c = 0; c < gp.cols; ++c) gp.at(r, c) += g.at(r, offs[k] + c);
      });
    }
  });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError(kModule, "concat of zero tensors");
  Tape& t = *parts.front().tape();
  const std::size_t cols = parts.front().cols();
  std::size_t rows = 0;
  for (const Var& p : parts) {
    if (p.cols() != cols) shape_fail("concat_rows", parts.front().value(), p.value());
    rows += p.rows();
  }
  Tensor out(rows, cols);
  std::vector<std::size_t> ids, offs;
  std::size_t off = 0;
  for (const Var& p : parts) {
    const Tensor& v = p.value();
    std::copy(v.data.begin(), v.data.end(), out.data.begin() + static_cast<std::ptrdiff_t>(off * cols));
    ids.push_back(p.id());
    offs.push_back(off * cols);
    off += v.rows;
  }
  return t.record(std::move(out), parts, [ids, offs](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    for (std::size_t k = 0; k < ids.size(); ++k) {
      accum(tp, ids[k], [&](Tensor& gp) {
        for (std::size_t i = 0; i < gp.size(); ++i) gp.data[i] += g.data[offs[k] + i];
      });
    }
  });
}

Var slice_rows(Var a, std::size_t start, std::size_t count) {
  const Tensor& av = a.value();
  if (start + count > av.rows) {
    throw ShapeError(kModule, "slice_rows [" + std::to_string(start) + ", +" + std::to_string(count) +
                                  ") out of range for " + shape_str(av));
  }
  Tensor out(count, av.cols);
  std::copy_n(av.data.begin() + static_cast<std::ptrdiff_t>(start * av.cols), count * av.cols, out.data.begin());
  const std::size_t pa = a.id();
  return a.tape()->record(std::move(out), {a}, [pa, start](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    accum(tp, pa, [&](Tensor& ga) {
      double* dst = ga.data.data() + start * ga.cols;
      for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g.data[i];
    });
  });
}

Var slice_cols(Var a, std::size_t start, std::size_t count) {
  const Tensor& av = a.value();
  if (start + count > av.cols) {
    throw ShapeError(kModule, "slice_cols [" + std::to_string(start) + ", +" + std::to_string(count) +
                                  ") out of range for " + shape_str(av));
  }
  Tensor out(av.rows, count);
  for (std::size_t r = 0; r < av.rows; ++r)
    for (std::size_t c = 0; c < count; ++c) out.at(r, c) = av.at(r, start + c);
  const std::size_t pa = a.id();
  return a.tape()->record(std::move(out), {a}, [pa, start](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    accum(tp, pa, [&](Tensor& ga) {
      for (std::size_t r = 0; r < g.rows; ++r)
        for (std::size_t c = 0; c < g.cols; ++c) ga.at(r, start + c) += g.at(r, c);
    });
  });
}

Var pick(Var a, std::size_t r, std::size_t c) {
  const Tensor& av = a.value();
  if (r >= av.rows || c >= av.cols) throw ShapeError(kModule, "pick outside " + shape_str(av));
  const std::size_t pa = a.id();
  const std::size_t idx = r * av.cols + c;
  return a.tape()->record(Tensor::scalar(av.data[idx]), {a}, [pa, idx](Tape& tp, std::size_t self) {
    const double g = tp.grad(self).data[0];
    accum(tp, pa, [&](Tensor& ga) { ga.data[idx] += g; });
  });
}

Var sum(Var a) {
  const Tensor& av = a.value();
  const double s = std::accumulate(av.data.begin(), av.data.end(), 0.0);
  const std::size_t pa = a.id();
  return a.tape()->record(Tensor::scalar(s), {a}, [pa](Tape& tp, std::size_t self) {
    const double g = tp.grad(self).data[0];
    accum(tp, pa, [&](Tensor& ga) {
      for (double& v : ga.data) v += g;
    });
  });
}

Var mean(Var a) {
  if (a.value().size() == 0) throw ShapeError(kModule, "mean of an empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(a.value().size()));
}

Var maximum(Var a, Var b) {
  Tape& t = tape_of(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (!av.same_shape(bv)) shape_fail("maximum", av, bv);
  Tensor out(av.rows, av.cols);
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = std::max(av.data[i], bv.data[i]);
  const std::size_t pa = a.id(), pb = b.id();
  return t.record(std::move(out), {a, b}, [pa, pb](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    const Tensor& x = tp.value(pa);
    const Tensor& y = tp.value(pb);
    accum(tp, pa, [&](Tensor& ga) {
      for (std::size_t i = 0; i < g.size(); ++i)
        if (x.data[i] >= y.data[i]) ga.data[i] += g.data[i];
    });
    accum(tp, pb, [&](Tensor& gb) {
      for (std::size_t i = 0; i < g.size(); ++i)
        if (x.data[i] < y.data[i]) gb.data[i] += g.data[i];
    });
  });
}

Var dot(Var a, Var b) {
  if (!a.value().same_shape(b.value())) shape_fail("dot", a.value(), b.value());
  return sum(mul(a, b));
}

Var cosine(Var a, Var b) {
  Tape& t = tape_of(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (!av.same_shape(bv)) shape_fail("cosine", av, bv);
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) {
    ab += av.data[i] * bv.data[i];
    aa += av.data[i] * av.data[i];
    bb += bv.data[i] * bv.data[i];
  }
  if (aa == 0.0 || bb == 0.0) throw ZeroVectorError(kModule, "cosine similarity of a zero vector");
  const double na = std::sqrt(aa), nb = std::sqrt(bb);
  const double cosv = ab / (na * nb);
  const std::size_t pa = a.id(), pb = b.id();
  return t.record(Tensor::scalar(cosv), {a, b}, [pa, pb, na, nb, cosv](Tape& tp, std::size_t self) {
    const double g = tp.grad(self).data[0];
    const Tensor& x = tp.value(pa);
    const Tensor& y = tp.value(pb);
    accum(tp, pa, [&](Tensor& ga) {
      for (std::size_t i = 0; i < x.size(); ++i)
        ga.data[i] += g * (y.data[i] / (na * nb) - cosv * x.data[i] / (na * na));
    });
    accum(tp, pb, [&](Tensor& gb) {
      for (std::size_t i = 0; i < y.size(); ++i)
        gb.data[i] += g * (x.data[i] / (na * nb) - cosv * y.data[i] / (nb * nb));
    });
  });
}

Var dropout(Var a, double p, PortableRng& rng) {
  if (p < 0.0 || p >= 1.0) throw DomainError(kModule, "dropout rate must lie in [0, 1)");
  if (p == 0.0) return a;
  const Tensor& av = a.value();
  std::vector<double> mask(av.size());
  const double keep = 1.0 / (1.0 - p);
  for (double& m : mask) m = rng.bernoulli(p) ? 0.0 : keep;
  Tensor out = av;
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] *= mask[i];
  const std::size_t pa = a.id();
  return a.tape()->record(std::move(out), {a}, [pa, mask = std::move(mask)](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    accum(tp, pa, [&](Tensor& ga) {
      for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] += g.data[i] * mask[i];
    });
  });
}

Var conv1d(Var x, Var W, Var b, std::size_t H, std::optional<Var> extra) {
  Tape& t = tape_of(x, W);
  const Tensor& xv = x.value();
  const Tensor& wv = W.value();
  const Tensor& bv = b.value();
  if (H == 0 || wv.rows % H != 0) throw ShapeError(kModule, "conv1d: weight rows not a multiple of kernel size");
  const std::size_t stride = wv.rows / H;
  const std::size_t L = xv.rows, Dx = xv.cols, K = wv.cols;
  if (stride < Dx || (!extra && stride != Dx)) shape_fail("conv1d", xv, wv);
  if (bv.rows != 1 || bv.cols != K) shape_fail("conv1d bias", wv, bv);
  if (extra && (extra->value().rows != 1 || extra->value().cols != K)) shape_fail("conv1d extra", wv, extra->value());
  if (L < H) {
    throw ShapeError(kModule, "conv1d: sequence length " + std::to_string(L) + " is shorter than kernel " +
                                  std::to_string(H));
  }
  const std::size_t n = L - H + 1;
  Tensor out(n, K);
  for (std::size_t j = 0; j < n; ++j) {
    double* o = out.data.data() + j * K;
    for (std::size_t k = 0; k < K; ++k) o[k] = bv.data[k] + (extra ? extra->value().data[k] : 0.0);
    for (std::size_t i = 0; i < H; ++i) {
      gemm_acc(xv.data.data() + (j + i) * Dx, 1, Dx, wv.data.data() + i * stride * K, K, o);
    }
    for (std::size_t k = 0; k < K; ++k) o[k] = o[k] > 0.0 ? o[k] : 0.0;
  }
  check_finite(out);
  std::vector<Var> parents{x, W, b};
  if (extra) parents.push_back(*extra);
  const std::size_t px = x.id(), pw = W.id(), pb = b.id();
  const std::optional<std::size_t> pe = extra ? std::optional<std::size_t>(extra->id()) : std::nullopt;
  return t.record(std::move(out), parents, [px, pw, pb, pe, H, stride](Tape& tp, std::size_t self) {
    const Tensor& y = tp.value(self);
    const Tensor& xs = tp.value(px);
    const Tensor& ws = tp.value(pw);
    Tensor gz = tp.grad(self);
    for (std::size_t i = 0; i < gz.size(); ++i)
      if (!(y.data[i] > 0.0)) gz.data[i] = 0.0;
    const std::size_t nn = gz.rows, KK = gz.cols, D = xs.cols;
    accum(tp, pb, [&](Tensor& gb) {
      for (std::size_t j = 0; j < nn; ++j)
        for (std::size_t k = 0; k < KK; ++k) gb.data[k] += gz.at(j, k);
    });
    if (pe) {
      accum(tp, *pe, [&](Tensor& ge) {
        for (std::size_t j = 0; j < nn; ++j)
          for (std::size_t k = 0; k < KK; ++k) ge.data[k] += gz.at(j, k);
      });
    }
    accum(tp, pw, [&](Tensor& gw) {
      for (std::size_t j = 0; j < nn; ++j)
        for (std::size_t i = 0; i < H; ++i)
          gemm_acc_at(xs.data.data() + (j + i) * D, 1, D, gz.data.data() + j * KK, KK,
                      gw.data.data() + i * stride * KK);
    });
    accum(tp, px, [&](Tensor& gx) {
      for (std::size_t j = 0; j < nn; ++j)
        for (std::size_t i = 0; i < H; ++i)
          gemm_acc_bt(gz.data.data() + j * KK, 1, KK, ws.data.data() + i * stride * KK, D,
                      gx.data.data() + (j + i) * D);
    });
  });
}

namespace {

struct GatePre {
  Var f, i, C, o;
};

LstmState lstm_cell(const GatePre& pre, Var h_prev, Var C_prev, const LstmParams& p) {
  const Var f = sigmoid(add(matmul_rows(h_prev, p.W_f, 0), pre.f));
  const Var i = sigmoid(add(matmul_rows(h_prev, p.W_i, 0), pre.i));
  const Var Ct = tanh(add(matmul_rows(h_prev, p.W_C, 0), pre.C));
  const Var o = sigmoid(add(matmul_rows(h_prev, p.W_o, 0), pre.o));
  const Var C = add(mul(f, C_prev), mul(i, Ct));
  const Var h = mul(o, tanh(C));
  return {h, C};
}

void check_lstm(const LstmParams& p, std::size_t din) {
  const std::size_t dh = p.hidden();
  for (const Var* w : {&p.W_f, &p.W_i, &p.W_C, &p.W_o}) {
    if (w->rows() != dh + din || w->cols() != dh) {
      throw ShapeError(kModule, "lstm weight is " + shape_str(w->value()) + ", expected " + std::to_string(dh + din) +
                                    "x" + std::to_string(dh));
    }
  }
  for (const Var* b : {&p.b_f, &p.b_i, &p.b_C, &p.b_o}) {
    if (b->rows() != 1 || b->cols() != dh) throw ShapeError(kModule, "lstm bias has the wrong shape");
  }
}

}  // namespace

LstmState lstm_step(Var x_t, Var h_prev, Var C_prev, const LstmParams& p) {
  const std::size_t dh = p.hidden();
  if (x_t.rows() != 1) throw ShapeError(kModule, "lstm_step expects a single input row");
  check_lstm(p, x_t.cols());
  if (h_prev.rows() != 1 || h_prev.cols() != dh || C_prev.rows() != 1 || C_prev.cols() != dh) {
    throw ShapeError(kModule, "lstm_step state has the wrong shape");
  }
  GatePre pre{add(matmul_rows(x_t, p.W_f, dh), p.b_f), add(matmul_rows(x_t, p.W_i, dh), p.b_i),
              add(matmul_rows(x_t, p.W_C, dh), p.b_C), add(matmul_rows(x_t, p.W_o, dh), p.b_o)};
  return lstm_cell(pre, h_prev, C_prev, p);
}

namespace {

// Input projections for every step at once: L x Dh per gate.
GatePre project_inputs(Var x, std::optional<Var> g, const LstmParams& p) {
  const std::size_t dh = p.hidden();
  auto one = [&](Var W, Var b) {
    Var bias = b;
    if (g) bias = add(matmul_rows(*g, W, dh + x.cols()), b);
    return add(matmul_rows(x, W, dh), bias);
  };
  return {one(p.W_f, p.b_f), one(p.W_i, p.b_i), one(p.W_C, p.b_C), one(p.W_o, p.b_o)};
}

std::vector<Var> run_direction(const GatePre& all, std::size_t L, const LstmParams& p, bool reverse) {
  Tape& t = *all.f.tape();
  const std::size_t dh = p.hidden();
  Var h = t.constant(Tensor(1, dh));
  Var C = t.constant(Tensor(1, dh));
  std::vector<Var> hs(L);
  for (std::size_t s = 0; s < L; ++s) {
    const std::size_t pos = reverse ? L - 1 - s : s;
    const GatePre pre{slice_rows(all.f, pos, 1), slice_rows(all.i, pos, 1), slice_rows(all.C, pos, 1),
                      slice_rows(all.o, pos, 1)};
    const LstmState st = lstm_cell(pre, h, C, p);
    h = st.h;
    C = st.C;
    hs[pos] = h;
  }
  return hs;
}

}  // namespace

Var bilstm(Var x, const LstmParams& fwd, const LstmParams& bwd, std::optional<Var> g) {
  const std::size_t L = x.rows();
  if (L == 0) throw ShapeError(kModule, "bilstm over an empty sequence");
  const std::size_t din = x.cols() + (g ? g->cols() : 0);
  if (g && g->rows() != 1) throw ShapeError(kModule, "bilstm global input must be a single row");
  check_lstm(fwd, din);
  check_lstm(bwd, din);
  if (fwd.hidden() != bwd.hidden()) throw ShapeError(kModule, "bilstm directions differ in hidden size");
  const auto hf = run_direction(project_inputs(x, g, fwd), L, fwd, false);
  const auto hb = run_direction(project_inputs(x, g, bwd), L, bwd, true);
  return concat_cols({concat_rows(hf), concat_rows(hb)});
}

AttentionOutput attention_pool(Var hs, Var W, Var w) {
  if (hs.rows() == 0) throw ShapeError(kModule, "attention over an empty sequence");
  if (W.rows() != hs.cols() || w.rows() != W.cols() || w.cols() != 1) shape_fail("attention_pool", hs.value(), W.value());
  const Var scores = matmul(tanh(matmul(hs, W)), w);  // L x 1
  const Var alpha = softmax_rows(transpose(scores));  // 1 x L
  return {matmul(alpha, hs), alpha};
}

FiniteDiffReport finite_diff_check(const ScalarFn& f, const std::vector<Tensor>& theta, const FiniteDiffOptions& opts) {
  std::vector<Tensor> grads;
  {
    Tape tape;
    std::vector<Var> leaves;
    for (const Tensor& th : theta) leaves.push_back(tape.leaf(th));
    const Var out = f(tape, leaves);
    tape.backward(out);
    for (const Var& v : leaves) grads.push_back(v.grad());
  }
  auto eval = [&](const std::vector<Tensor>& th) {
    Tape tape;
    std::vector<Var> leaves;
    for (const Tensor& x : th) leaves.push_back(tape.constant(x));
    return f(tape, leaves).item();
  };

  FiniteDiffReport report;
  std::vector<Tensor> work = theta;
  PortableRng rng(opts.seed);
  for (std::size_t k = 0; k < theta.size(); ++k) {
    std::vector<std::size_t> coords(theta[k].size());
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (opts.max_coords_per_tensor > 0 && coords.size() > opts.max_coords_per_tensor) {
      rng.shuffle(std::span<std::size_t>(coords));
      coords.resize(opts.max_coords_per_tensor);
    }
    for (std::size_t idx : coords) {
      const double orig = work[k].data[idx];
      work[k].data[idx] = orig + opts.epsilon;
      const double fp = eval(work);
      work[k].data[idx] = orig - opts.epsilon;
      const double fm = eval(work);
      work[k].data[idx] = orig;
      const double central = (fp - fm) / (2.0 * opts.epsilon);
      const double err = std::abs(grads[k].data[idx] - central) / std::max(opts.abs_floor, std::abs(central));
      ++report.coordinates;
      if (err > report.max_rel_error) {
        report.max_rel_error = err;
        report.worst_tensor = k;
        report.worst_index = idx;
      }
    }
  }
  return report;
}

}  // namespace avp::ad
