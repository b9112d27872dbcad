#include <gtest/gtest.h>

#include <cmath>

#include "avp/diff.hpp"
#include "avp/errors.hpp"
#include "avp/rng.hpp"
#include "gradcheck.hpp"

using namespace avp;
using namespace avp::ad;

namespace {

LstmParams constant_lstm(Tape& tape, std::size_t rows, std::size_t dh, double w, double bf, double bi, double bc,
                         double bo) {
  auto W = [&] { return tape.leaf(Tensor(rows, dh, w)); };
  auto b = [&](double v) { return tape.leaf(Tensor(1, dh, v)); };
  return LstmParams{W(), W(), W(), W(), b(bf), b(bi), b(bc), b(bo)};
}

LstmParams random_lstm(Tape& tape, PortableRng& rng, std::size_t rows, std::size_t dh) {
  auto t = [&](std::size_t r, std::size_t c) {
    Tensor x(r, c);
    for (auto& v : x.data) v = 0.5 * rng.gaussian();
    return tape.leaf(x);
  };
  return LstmParams{t(rows, dh), t(rows, dh), t(rows, dh), t(rows, dh), t(1, dh), t(1, dh), t(1, dh), t(1, dh)};
}

}  // namespace

TEST(Diff, ConvHandCase) {
  Tape tape;
  const auto x = tape.constant(Tensor(3, 1, {1, 2, 3}));
  const auto W = tape.leaf(Tensor(2, 1, {1, 1}));
  const auto b = tape.leaf(Tensor(1, 1, 0.0));
  const auto y = conv1d(x, W, b, 2);
  EXPECT_EQ(y.value(), Tensor(2, 1, {3, 5}));
}

TEST(Diff, ConvZeroAndClipped) {
  Tape tape;
  const auto y0 = conv1d(tape.constant(Tensor(4, 2, 1.0)), tape.leaf(Tensor(4, 3)), tape.leaf(Tensor(1, 3)), 2);
  EXPECT_EQ(y0.value(), Tensor(3, 3, 0.0));
  const auto y1 = conv1d(tape.constant(Tensor(1, 1, 1.0)), tape.leaf(Tensor(1, 1, 1.0)), tape.leaf(Tensor(1, 1, -5.0)), 1);
  EXPECT_EQ(y1.value(), Tensor(1, 1, 0.0));
}

TEST(Diff, ConvRejectsShortInput) {
  Tape tape;
  EXPECT_THROW(conv1d(tape.constant(Tensor(2, 1)), tape.leaf(Tensor(3, 1)), tape.leaf(Tensor(1, 1)), 3), ShapeError);
}

TEST(Diff, LstmZeroCase) {
  Tape tape;
  const auto p = constant_lstm(tape, 2 + 3, 2, 0.0, 0.0, 0.0, 0.0, 0.0);
  const auto st = lstm_step(tape.constant(Tensor(1, 3, 0.7)), tape.constant(Tensor(1, 2)), tape.constant(Tensor(1, 2)), p);
  EXPECT_EQ(st.h.value(), Tensor(1, 2, 0.0));
  EXPECT_EQ(st.C.value(), Tensor(1, 2, 0.0));
}

TEST(Diff, LstmSaturatedCase) {
  Tape tape;
  const auto p = constant_lstm(tape, 1 + 1, 1, 0.0, 100.0, 100.0, 0.0, 100.0);
  const auto st = lstm_step(tape.constant(Tensor(1, 1, 0.3)), tape.constant(Tensor(1, 1)), tape.constant(Tensor(1, 1, 0.5)), p);
  EXPECT_NEAR(st.C.item(), 0.5, 1e-12);
  EXPECT_NEAR(st.h.item(), std::tanh(0.5), 1e-12);
  EXPECT_NEAR(st.h.item(), 0.4621, 5e-5);
}

TEST(Diff, BilstmSingleStepAndZero) {
  Tape tape;
  PortableRng rng(2);
  const auto fwd = random_lstm(tape, rng, 3 + 2, 3);
  const auto bwd = random_lstm(tape, rng, 3 + 2, 3);
  const auto x = tape.constant(Tensor(1, 2, {0.4, -0.9}));
  const auto y = bilstm(x, fwd, bwd);
  EXPECT_EQ(y.rows(), 1u);
  EXPECT_EQ(y.cols(), 6u);
  const auto zero = constant_lstm(tape, 5, 3, 0.0, 0.0, 0.0, 0.0, 0.0);
  const auto z = bilstm(tape.constant(Tensor(4, 2, 1.0)), zero, zero);
  EXPECT_EQ(z.value(), Tensor(4, 6, 0.0));
}

TEST(Diff, BilstmPalindromeSymmetry) {
  Tape tape;
  PortableRng rng(9);
  const auto p = random_lstm(tape, rng, 3 + 2, 3);
  Tensor x(5, 2);
  for (std::size_t t = 0; t < 3; ++t) {
    for (std::size_t c = 0; c < 2; ++c) {
      const double v = rng.gaussian();
      x.at(t, c) = v;
      x.at(4 - t, c) = v;
    }
  }
  const auto y = bilstm(tape.constant(x), p, p).value();
  for (std::size_t t = 0; t < 5; ++t) {
    for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(y.at(t, c), y.at(4 - t, 3 + c), 1e-14);
  }
}

TEST(Diff, AttentionIdenticalRows) {
  Tape tape;
  PortableRng rng(3);
  Tensor hs(4, 3);
  for (std::size_t t = 0; t < 4; ++t) {
    hs.at(t, 0) = 0.5;
    hs.at(t, 1) = -1.0;
    hs.at(t, 2) = 2.0;
  }
  Tensor W(3, 2), w(2, 1);
  for (auto& v : W.data) v = rng.gaussian();
  for (auto& v : w.data) v = rng.gaussian();
  const auto out = attention_pool(tape.constant(hs), tape.leaf(W), tape.leaf(w));
  EXPECT_NEAR(out.pooled.value().at(0, 0), 0.5, 1e-12);
  EXPECT_NEAR(out.pooled.value().at(0, 1), -1.0, 1e-12);
  EXPECT_NEAR(out.pooled.value().at(0, 2), 2.0, 1e-12);
}

TEST(Diff, AttentionZeroScoresGiveMean) {
  Tape tape;
  const Tensor hs(3, 2, {1, 2, 3, 4, 5, 9});
  const auto out = attention_pool(tape.constant(hs), tape.leaf(Tensor(2, 2)), tape.leaf(Tensor(2, 1)));
  for (double a : out.weights.value().data) EXPECT_NEAR(a, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(out.pooled.value().at(0, 0), 3.0, 1e-12);
  EXPECT_NEAR(out.pooled.value().at(0, 1), 5.0, 1e-12);
}

TEST(Diff, AttentionTwoStepHandCase) {
  // h1 = (1, 0), h2 = (0, 1), W = I, w = (1, -1):
  // e1 = tanh(1) - tanh(0), e2 = tanh(0) - tanh(1).
  Tape tape;
  const auto out = attention_pool(tape.constant(Tensor(2, 2, {1, 0, 0, 1})), tape.leaf(Tensor(2, 2, {1, 0, 0, 1})),
                                  tape.leaf(Tensor(2, 1, {1, -1})));
  const double e1 = std::tanh(1.0), e2 = -std::tanh(1.0);
  const double a1 = std::exp(e1) / (std::exp(e1) + std::exp(e2));
  EXPECT_NEAR(out.weights.value().at(0, 0), a1, 1e-15);
  EXPECT_NEAR(out.weights.value().at(0, 1), 1.0 - a1, 1e-15);
  EXPECT_NEAR(out.pooled.value().at(0, 0), a1, 1e-15);
  EXPECT_NEAR(out.pooled.value().at(0, 1), 1.0 - a1, 1e-15);
}

TEST(Diff, BackwardSumAndDot) {
  Tape tape;
  const auto x = tape.leaf(Tensor(2, 3, {1, 2, 3, 4, 5, 6}));
  tape.backward(sum(x));
  EXPECT_EQ(x.grad(), Tensor(2, 3, 1.0));

  Tape t2;
  const auto a = t2.leaf(Tensor(1, 3, {1, -2, 3}));
  const auto b = t2.leaf(Tensor(1, 3, {4, 5, -6}));
  t2.backward(dot(a, b));
  EXPECT_EQ(a.grad(), b.value());
  EXPECT_EQ(b.grad(), a.value());
}

TEST(Diff, GradientsAccumulateOverFanOut) {
  Tape tape;
  const auto x = tape.leaf(Tensor(1, 2, {3, -1}));
  tape.backward(sum(add(mul(x, x), x)));
  EXPECT_EQ(x.grad(), Tensor(1, 2, {7, -1}));
}

TEST(Diff, ReluSubgradientAtZeroIsZero) {
  Tape tape;
  const auto x = tape.leaf(Tensor(1, 3, {0.0, 1.0, -1.0}));
  tape.backward(sum(relu(x)));
  EXPECT_EQ(x.grad(), Tensor(1, 3, {0.0, 1.0, 0.0}));
}

TEST(Diff, SoftmaxSumsToOneAndShiftInvariant) {
  PortableRng rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    Tape tape;
    const std::size_t c = 1 + rng.below(12);
    Tensor x(2, c);
    for (auto& v : x.data) v = 10.0 * rng.gaussian();
    const double shift = 50.0 * rng.gaussian();
    const auto s1 = softmax_rows(tape.constant(x)).value();
    const auto s2 = softmax_rows(affine(tape.constant(x), 1.0, shift)).value();
    for (std::size_t r = 0; r < 2; ++r) {
      double total = 0.0;
      for (std::size_t j = 0; j < c; ++j) {
        total += s1.at(r, j);
        EXPECT_NEAR(s1.at(r, j), s2.at(r, j), 1e-12);
      }
      EXPECT_NEAR(total, 1.0, 1e-12);
    }
  }
}

TEST(Diff, ShapeErrors) {
  Tape tape;
  EXPECT_THROW(add(tape.leaf(Tensor(2, 2)), tape.leaf(Tensor(3, 2))), ShapeError);
  EXPECT_THROW(matmul(tape.leaf(Tensor(2, 2)), tape.leaf(Tensor(3, 2))), ShapeError);
  EXPECT_THROW(cosine(tape.leaf(Tensor(1, 2)), tape.leaf(Tensor(1, 2, 1.0))), ZeroVectorError);
}

TEST(Diff, DropoutInference) {
  Tape tape;
  PortableRng rng(1);
  const auto x = tape.leaf(Tensor(1, 1000, 1.0));
  const auto y = dropout(x, 0.0, rng);
  EXPECT_EQ(y.value(), x.value());
  const auto z = dropout(x, 0.5, rng).value();
  for (double v : z.data) EXPECT_TRUE(v == 0.0 || v == 2.0);
}

TEST(Diff, FiniteDiffLinearAndQuadratic) {
  PortableRng rng(6);
  Tensor theta(1, 6), coef(1, 6);
  for (auto& v : theta.data) v = rng.gaussian();
  for (auto& v : coef.data) v = rng.gaussian();
  const ScalarFn linear = [&](Tape& tape, std::span<const Var> v) { return dot(v[0], tape.constant(coef)); };
  EXPECT_LE(finite_diff_check(linear, {theta}).max_rel_error, 1e-9);
  const ScalarFn quadratic = [&](Tape& tape, std::span<const Var> v) {
    return sum(mul(mul(v[0], v[0]), tape.constant(coef)));
  };
  EXPECT_LE(finite_diff_check(quadratic, {theta}).max_rel_error, 1e-7);
}

class PrimitiveGrad : public ::testing::TestWithParam<std::string> {};

TEST_P(PrimitiveGrad, HundredRandomTrials) {
  const auto s = avp::testing::check_primitive(GetParam(), 100, 0xC0FFEE);
  EXPECT_GT(s.coordinates, 0u);
  EXPECT_LE(s.worst, 1e-4) << GetParam();
}

INSTANTIATE_TEST_SUITE_P(All, PrimitiveGrad, ::testing::ValuesIn(avp::testing::primitive_names()),
                         [](const auto& info) { return info.param; });

TEST(Diff, CompositeModelLossGradient) {
  const auto s = avp::testing::check_composite_model(3, 77);
  EXPECT_LE(s.worst, 1e-4);
}
