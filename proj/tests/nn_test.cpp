// Copyright 2026 The aadit Authors
// SPDX-License-Identifier: Apache-2.0

#include "aadit/nn.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace aadit {
namespace {

DenseLayer make_layer(Matrix w, Matrix b, Activation act) {
  DenseLayer layer;
  layer.weights = ParamBlock("w", std::move(w));
  layer.bias = ParamBlock("b", std::move(b));
  layer.activation = act;
  return layer;
}

FeedForwardStack random_stack(std::uint64_t seed, std::vector<Index> dims) {
  std::mt19937_64 rng(seed);
  FeedForwardStack stack = FeedForwardStack::glorot("s", dims, Activation::kIdentity, rng);
  std::normal_distribution<double> normal(0.0, 0.3);
  for (DenseLayer& layer : stack.layers()) {
    for (Index i = 0; i < layer.bias.value.rows(); ++i) layer.bias.value(i, 0) = normal(rng);
  }
  return stack;
}

Matrix random_matrix(std::mt19937_64& rng, Index rows, Index cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
  }
  return m;
}

double rel_error(const Matrix& a, const Matrix& b) {
  double worst = 0;
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      const double denom = std::max({std::abs(a(i, j)), std::abs(b(i, j)), 1e-6});
      worst = std::max(worst, std::abs(a(i, j) - b(i, j)) / denom);
    }
  }
  return worst;
}

TEST(StackForward, IdentityLayer) {
  FeedForwardStack stack(
      {make_layer(Matrix::Identity(2, 2), Matrix::Zero(2, 1), Activation::kIdentity)});
  Matrix x(2, 1);
  x << 1, 2;
  const ForwardResult r = stack_forward(stack, x);
  EXPECT_EQ(r.output(0, 0), 1.0);
  EXPECT_EQ(r.output(1, 0), 2.0);
}

TEST(StackForward, ZeroWeightsGiveTanhOfBias) {
  FeedForwardStack stack(
      {make_layer(Matrix::Zero(3, 2), Matrix::Constant(3, 1, 0.5), Activation::kTanh)});
  const Matrix out = stack_apply(stack, Matrix::Random(2, 4));
  for (Index i = 0; i < out.size(); ++i) EXPECT_NEAR(out.data()[i], 0.46212, 1e-5);
}

TEST(StackForward, TwoLayerMatchesScalarRecomputation) {
  const FeedForwardStack stack = random_stack(3, {3, 4, 2});
  std::mt19937_64 rng(11);
  const Matrix x = random_matrix(rng, 3, 1);
  const Matrix out = stack_apply(stack, x);
  const DenseLayer& l1 = stack.layers()[0];
  const DenseLayer& l2 = stack.layers()[1];
  std::vector<double> hidden(4);
  for (int i = 0; i < 4; ++i) {
    double s = l1.bias.value(i, 0);
    for (int j = 0; j < 3; ++j) s += l1.weights.value(i, j) * x(j, 0);
    hidden[i] = std::tanh(s);
  }
  for (int i = 0; i < 2; ++i) {
    double s = l2.bias.value(i, 0);
    for (int j = 0; j < 4; ++j) s += l2.weights.value(i, j) * hidden[j];
    EXPECT_NEAR(out(i, 0), s, 1e-14);
  }
}

TEST(StackForward, DimensionMismatchNamesLayer) {
  const FeedForwardStack stack = random_stack(1, {3, 4, 2});
  try {
    stack_apply(stack, Matrix::Zero(5, 1));
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("layer"), std::string::npos);
  }
}

TEST(StackForward, Deterministic) {
  const FeedForwardStack stack = random_stack(5, {4, 6, 3});
  const Matrix x = Matrix::Random(4, 7);
  EXPECT_EQ(stack_apply(stack, x), stack_apply(stack, x));
}

TEST(FeedForwardStack, RejectsUnchainedLayers) {
  EXPECT_THROW(FeedForwardStack({make_layer(Matrix::Zero(3, 2), Matrix::Zero(3, 1),
                                            Activation::kTanh),
                                 make_layer(Matrix::Zero(2, 4), Matrix::Zero(2, 1),
                                            Activation::kTanh)}),
               ConfigError);
}

TEST(FeedForwardStack, GlorotRange) {
  std::mt19937_64 rng(2);
  const std::vector<Index> dims{10, 30};
  const FeedForwardStack stack = FeedForwardStack::glorot("g", dims, Activation::kTanh, rng);
  const double s = std::sqrt(6.0 / 40.0);
  EXPECT_LE(stack.layers()[0].weights.value.cwiseAbs().maxCoeff(), s);
  EXPECT_TRUE(stack.layers()[0].bias.value.isZero(0.0));
  EXPECT_EQ(stack.layers()[0].weights.name, "g.0.weight");
}

TEST(StackBackward, IdentityLayer) {
  FeedForwardStack stack(
      {make_layer(Matrix::Identity(2, 2), Matrix::Zero(2, 1), Activation::kIdentity)});
  Matrix x(2, 1);
  x << 0.5, -1.5;
  Matrix g(2, 1);
  g << 2, 3;
  const ForwardResult fwd = stack_forward(stack, x);
  const Matrix gin = stack_backward(stack, fwd.cache, g);
  EXPECT_EQ(gin, g);
  const Matrix expected = g * x.transpose();
  EXPECT_EQ(stack.layers()[0].weights.grad, expected);
  EXPECT_EQ(stack.layers()[0].bias.grad, g);
}

TEST(StackBackward, ZeroGradOutput) {
  FeedForwardStack stack = random_stack(8, {3, 5, 2});
  const Matrix x = Matrix::Random(3, 4);
  const ForwardResult fwd = stack_forward(stack, x);
  const Matrix gin = stack_backward(stack, fwd.cache, Matrix::Zero(2, 4));
  EXPECT_TRUE(gin.isZero(0.0));
  for (const DenseLayer& layer : stack.layers()) {
    EXPECT_TRUE(layer.weights.grad.isZero(0.0));
    EXPECT_TRUE(layer.bias.grad.isZero(0.0));
  }
}

TEST(StackBackward, MismatchedCacheIsInternalError) {
  FeedForwardStack stack = random_stack(8, {3, 5, 2});
  const ForwardResult fwd = stack_forward(stack, Matrix::Random(3, 4));
  EXPECT_THROW(stack_backward(stack, fwd.cache, Matrix::Zero(2, 3)), InternalError);
  ForwardCache empty;
  EXPECT_THROW(stack_backward(stack, empty, Matrix::Zero(2, 4)), InternalError);
}

// Loss = sum(R .* output) for a fixed random R, so grad_output = R.
TEST(StackBackward, MatchesFiniteDifferencesOverSeeds) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    FeedForwardStack stack = random_stack(seed, {3, 5, 2});
    std::mt19937_64 rng(seed + 100);
    const Matrix x = random_matrix(rng, 3, 4);
    const Matrix r = random_matrix(rng, 2, 4);
    const ForwardResult fwd = stack_forward(stack, x);
    const Matrix gin = stack_backward(stack, fwd.cache, r);
    for (DenseLayer& layer : stack.layers()) {
      for (ParamBlock* block : {&layer.weights, &layer.bias}) {
        const Matrix numeric = finite_diff_grad(
            [&] { return (stack_apply(stack, x).array() * r.array()).sum(); }, block->value,
            1e-5);
        EXPECT_LT(rel_error(block->grad, numeric), 1e-6) << "seed " << seed << " " << block->name;
      }
    }
    Matrix xm = x;
    const Matrix numeric_in = finite_diff_grad(
        [&] { return (stack_apply(stack, xm).array() * r.array()).sum(); }, xm, 1e-5);
    EXPECT_LT(rel_error(gin, numeric_in), 1e-6) << "seed " << seed;
  }
}

TEST(Softmax, ColumnsAreDistributions) {
  std::mt19937_64 rng(4);
  const Matrix logits = 10.0 * random_matrix(rng, 6, 9);
  const Matrix p = softmax_columns(logits);
  for (Index j = 0; j < p.cols(); ++j) {
    EXPECT_NEAR(p.col(j).sum(), 1.0, 1e-12);
    EXPECT_GE(p.col(j).minCoeff(), 0.0);
    EXPECT_LE(p.col(j).maxCoeff(), 1.0);
  }
}

TEST(SoftmaxXent, UniformLogits) {
  const Labels labels{3};
  EXPECT_NEAR(softmax_xent(Matrix::Zero(5, 1), labels).loss, std::log(5.0), 1e-12);
  EXPECT_NEAR(softmax_xent(Matrix::Zero(5, 1), labels).loss, 1.60944, 1e-5);
}

TEST(SoftmaxXent, SaturatedCorrectClass) {
  Matrix logits = Matrix::Zero(4, 2);
  logits(1, 0) = 1000;
  logits(2, 1) = 1000;
  const Labels labels{1, 2};
  const XentResult r = softmax_xent(logits, labels);
  EXPECT_NEAR(r.loss, 0.0, 1e-12);
  EXPECT_NEAR(r.grad_logits.cwiseAbs().maxCoeff(), 0.0, 1e-12);
  EXPECT_TRUE(std::isfinite(r.loss));
}

TEST(SoftmaxXent, MatchesFiniteDifferences) {
  std::mt19937_64 rng(9);
  Matrix logits = random_matrix(rng, 4, 3);
  const Labels labels{0, 3, 1};
  const XentResult r = softmax_xent(logits, labels);
  double manual = 0;
  for (Index j = 0; j < 3; ++j) {
    double z = 0;
    for (Index i = 0; i < 4; ++i) z += std::exp(logits(i, j));
    manual -= std::log(std::exp(logits(labels[j], j)) / z);
  }
  EXPECT_NEAR(r.loss, manual / 3, 1e-12);
  const Matrix numeric =
      finite_diff_grad([&] { return softmax_xent(logits, labels).loss; }, logits, 1e-5);
  EXPECT_LT(rel_error(r.grad_logits, numeric), 1e-6);
}

TEST(SoftmaxXent, ShiftInvariant) {
  std::mt19937_64 rng(12);
  const Matrix logits = random_matrix(rng, 5, 4);
  const Labels labels{0, 1, 2, 4};
  Matrix shifted = logits;
  shifted.col(2).array() += 37.5;
  EXPECT_NEAR(softmax_xent(logits, labels).loss, softmax_xent(shifted, labels).loss, 1e-12);
}

TEST(SoftmaxXent, LabelOutOfRange) {
  const Labels bad{5};
  EXPECT_THROW(softmax_xent(Matrix::Zero(5, 1), bad), InputError);
  const Labels negative{-1};
  EXPECT_THROW(softmax_xent(Matrix::Zero(5, 1), negative), InputError);
}

TEST(SgdStep, OneStep) {
  ParamBlock p("theta", Matrix::Constant(1, 1, 1.0));
  p.grad(0, 0) = 2.0;
  ParamBlock* params[] = {&p};
  sgd_step(params, 0.1);
  EXPECT_NEAR(p.value(0, 0), 0.8, 1e-15);
  EXPECT_EQ(p.grad(0, 0), 0.0);
}

TEST(SgdStep, ZeroRateLeavesValues) {
  ParamBlock p("theta", Matrix::Constant(2, 2, 1.5));
  p.grad.setConstant(3.0);
  ParamBlock* params[] = {&p};
  sgd_step(params, 0.0);
  EXPECT_EQ(p.value, Matrix::Constant(2, 2, 1.5));
}

TEST(SgdStep, NonFiniteGradientAbortsAndNamesBlock) {
  ParamBlock a("alpha", Matrix::Constant(1, 1, 1.0));
  ParamBlock b("beta", Matrix::Constant(1, 1, 1.0));
  a.grad(0, 0) = 1.0;
  b.grad(0, 0) = std::nan("");
  ParamBlock* params[] = {&a, &b};
  try {
    sgd_step(params, 0.1);
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("beta"), std::string::npos);
  }
  EXPECT_EQ(a.value(0, 0), 1.0);
}

// f(x, y) = 2x^2 + y^2 + xy, grad = (4x + y, 2y + x), stepped by hand.
TEST(SgdStep, QuadraticDescentByHand) {
  ParamBlock p("xy", Matrix(2, 1));
  p.value << 1.0, -2.0;
  const double mu = 0.1;
  double x = 1.0;
  double y = -2.0;
  ParamBlock* params[] = {&p};
  for (int step = 0; step < 2; ++step) {
    p.grad(0, 0) = 4 * p.value(0, 0) + p.value(1, 0);
    p.grad(1, 0) = 2 * p.value(1, 0) + p.value(0, 0);
    sgd_step(params, mu);
    const double gx = 4 * x + y;
    const double gy = 2 * y + x;
    x -= mu * gx;
    y -= mu * gy;
  }
  EXPECT_NEAR(p.value(0, 0), x, 1e-15);
  EXPECT_NEAR(p.value(1, 0), y, 1e-15);
  // Two steps differ from one step with the initial gradient doubled.
  EXPECT_GT(std::abs(p.value(0, 0) - (1.0 - 2 * mu * 2.0)), 1e-3);
}

TEST(FiniteDiff, Square) {
  Vector theta(1);
  theta << 3.0;
  const Vector g = finite_diff_grad([](const Vector& t) { return t(0) * t(0); }, theta, 1e-5);
  EXPECT_NEAR(g(0), 6.0, 1e-9);
}

TEST(FiniteDiff, ConstantAndRestoresParam) {
  Matrix m = Matrix::Random(2, 3);
  const Matrix before = m;
  const Matrix g = finite_diff_grad([] { return 4.0; }, m, 1e-5);
  EXPECT_TRUE(g.isZero(0.0));
  EXPECT_EQ(m, before);
}

}  // namespace
}  // namespace aadit
