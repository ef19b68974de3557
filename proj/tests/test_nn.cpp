#include <gtest/gtest.h>

#include "distillkit/nn.hpp"

using namespace distillkit;

namespace {

// Random input nudged so that no pre-activation sits within 1e-3 of a kink.
Vector away_from_kinks(const Mlp2& net, Rng& rng) {
  for (;;) {
    Vector x(static_cast<Eigen::Index>(net.input_dim()));
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = rng.normal();
    const Vector pre1 = net.w1 * x + net.b1;
    const Vector pre2 = net.w2 * pre1.cwiseMax(0.0) + net.b2;
    if (pre1.cwiseAbs().minCoeff() > 1e-3 && pre2.cwiseAbs().minCoeff() > 1e-3) return x;
  }
}

double rel_err(const Vector& a, const Vector& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, b.cwiseAbs().maxCoeff());
}

}  // namespace

TEST(MlpInit, DeterministicAndStandardNormal) {
  const MlpShape s{100, 100, 10};
  Rng a(1), b(1);
  EXPECT_EQ(mlp_init_gaussian(s, a).flatten(), mlp_init_gaussian(s, b).flatten());
  Rng rng(2);
  const Mlp2 net = mlp_init_gaussian(s, rng);
  const double mean = net.w1.mean();
  const double var = (net.w1.array() - mean).square().mean();
  EXPECT_GE(mean, -0.05);
  EXPECT_LE(mean, 0.05);
  EXPECT_GE(var, 0.9);
  EXPECT_LE(var, 1.1);
  EXPECT_NE(net.b1.norm(), 0.0);  // biases sampled too
}

TEST(MlpForward, ConstantHead) {
  Mlp2 net = Mlp2::zeros({3, 4, 5});
  net.b_out = 3.0;
  EXPECT_EQ(net.forward(Vector::Random(3)), 3.0);
  EXPECT_THROW(net.forward(Vector::Zero(2)), DimensionError);
}

TEST(MlpForward, HandEvaluatedAtZeroInput) {
  Mlp2 net = Mlp2::zeros({2, 2, 2});
  net.b1 << 1.0, -2.0;
  net.w2 << 0.5, 3.0, -1.0, 4.0;
  net.b2 << 0.25, 0.5;
  net.w_out << 2.0, -1.0;
  net.b_out = 0.1;
  // relu(b1) = (1, 0); W2 * that + b2 = (0.75, -0.5); relu -> (0.75, 0)
  EXPECT_DOUBLE_EQ(net.forward(Vector::Zero(2)), 2.0 * 0.75 + 0.1);
}

TEST(MlpForward, AllDeadReluGivesBias) {
  Rng rng(3);
  Mlp2 net = mlp_init_gaussian({3, 4, 4}, rng);
  net.b1.setConstant(-100.0);
  net.w1 *= 0.01;
  net.b2.setConstant(-1.0);
  net.b_out = 0.7;
  EXPECT_DOUBLE_EQ(net.forward(Vector::Ones(3)), 0.7);
  EXPECT_EQ(net.grad_input(Vector::Ones(3)), Vector::Zero(3));
}

TEST(MlpForward, BatchMatchesSingle) {
  Rng rng(4);
  const Mlp2 net = mlp_init_gaussian({3, 5, 4}, rng);
  Matrix x(6, 3);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  const Vector y = net.forward_batch(x);
  for (Eigen::Index i = 0; i < 6; ++i) EXPECT_NEAR(y(i), net.forward(x.row(i).transpose()), 1e-12);
}

TEST(MlpForward, PiecewiseLinearAlongRay) {
  Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    Mlp2 net = mlp_init_gaussian({3, 6, 6}, rng);
    net.b1.setZero();
    net.b2.setZero();
    net.b_out = 0.0;
    const Vector x = away_from_kinks(net, rng);
    // Zero biases: the activation pattern is constant along alpha * x, alpha > 0.
    const double f1 = net.forward(x), f2 = net.forward(2.0 * x), f3 = net.forward(3.5 * x);
    EXPECT_NEAR(f2, 2.0 * f1, 1e-10 * std::max(1.0, std::abs(f1)));
    EXPECT_NEAR(f3, 3.5 * f1, 1e-10 * std::max(1.0, std::abs(f1)));
  }
}

TEST(MlpGradWeights, PerfectFitIsZero) {
  Rng rng(6);
  const Mlp2 net = mlp_init_gaussian({2, 3, 3}, rng);
  Matrix x(4, 2);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  const auto g = mlp_grad_weights(net, x, net.forward_batch(x));
  EXPECT_EQ(g.loss, 0.0);
  EXPECT_EQ(g.grad.flatten(), Vector::Zero(static_cast<Eigen::Index>(net.shape().param_count())));
}

TEST(MlpGradWeights, HeadGradientByHand) {
  Mlp2 net = Mlp2::zeros({1, 1, 1});
  net.w1(0, 0) = 2.0;
  net.w2(0, 0) = 3.0;
  net.w_out(0) = 0.5;
  const Matrix x = (Matrix(1, 1) << 1.0).finished();
  const Vector t = (Vector(1) << 1.0).finished();
  // hidden activation 6, output 3, residual 2
  const auto g = mlp_grad_weights(net, x, t);
  EXPECT_DOUBLE_EQ(g.loss, 4.0);
  EXPECT_DOUBLE_EQ(g.grad.w_out(0), 2.0 * 2.0 * 6.0);
  EXPECT_DOUBLE_EQ(g.grad.b_out, 4.0);
}

TEST(MlpGradWeights, FiniteDifferences) {
  Rng rng(7);
  for (int t = 0; t < 20; ++t) {
    const Mlp2 net = mlp_init_gaussian({3, 5, 4}, rng);
    Matrix x(6, 3);
    for (Eigen::Index i = 0; i < 6; ++i) x.row(i) = away_from_kinks(net, rng).transpose();
    Vector target(6);
    for (Eigen::Index i = 0; i < 6; ++i) target(i) = rng.normal();
    const Vector g = mlp_grad_weights(net, x, target).grad.flatten();
    const Vector p = net.flatten();
    Vector fd(p.size());
    const double h = 1e-6;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      Mlp2 a = net, b = net;
      Vector pp = p, pm = p;
      pp(i) += h;
      pm(i) -= h;
      a.unflatten(pp);
      b.unflatten(pm);
      fd(i) = (mlp_grad_weights(a, x, target).loss - mlp_grad_weights(b, x, target).loss) / (2 * h);
    }
    EXPECT_LT(rel_err(g, fd), 1e-4);
  }
}

TEST(MlpGradInput, IdentityNetworkByHand) {
  Mlp2 net = Mlp2::zeros({2, 2, 2});
  net.w1.setIdentity();
  net.w2.setIdentity();
  net.w_out.setOnes();
  const Vector x = (Vector(2) << 0.3, 0.7).finished();
  EXPECT_DOUBLE_EQ(net.forward(x), 1.0);
  EXPECT_EQ(net.grad_input(x), Vector::Ones(2));
  // Only the first coordinate active.
  EXPECT_EQ(net.grad_input((Vector(2) << 0.3, -0.7).finished()), (Vector(2) << 1.0, 0.0).finished());
}

TEST(MlpGradInput, FiniteDifferences) {
  Rng rng(8);
  for (int t = 0; t < 20; ++t) {
    const Mlp2 net = mlp_init_gaussian({4, 6, 5}, rng);
    const Vector x = away_from_kinks(net, rng);
    Vector fd(4);
    const double h = 1e-6;
    for (Eigen::Index i = 0; i < 4; ++i) {
      Vector xp = x, xm = x;
      xp(i) += h;
      xm(i) -= h;
      fd(i) = (net.forward(xp) - net.forward(xm)) / (2 * h);
    }
    EXPECT_LT(rel_err(net.grad_input(x), fd), 1e-4);
  }
}

TEST(MlpOptimizer, FitsAffineTarget) {
  Rng rng(9);
  Mlp2 net = mlp_init_he({1, 16, 16}, rng);
  Matrix x(32, 1);
  Vector y(32);
  for (int i = 0; i < 32; ++i) {
    x(i, 0) = -1.0 + 2.0 * i / 31.0;
    y(i) = 2.0 * x(i, 0) + 0.5;
  }
  MlpOptimizer opt(net);
  double first = 0.0, last = 0.0;
  for (int s = 0; s < 3000; ++s) {
    const auto g = mlp_grad_weights(net, x, y);
    if (s == 0) first = g.loss;
    last = g.loss;
    opt.step(net, g.grad, 1e-2);
  }
  EXPECT_LT(last, 1e-3);
  EXPECT_LT(last, first);
}

TEST(MlpJson, RoundTripIsExact) {
  Rng rng(10);
  const Mlp2 net = mlp_init_gaussian({3, 4, 2}, rng);
  const Mlp2 back = mlp_from_json(nlohmann::json::parse(to_json(net).dump()));
  EXPECT_EQ(back.flatten(), net.flatten());
  const auto j = to_json(net);
  EXPECT_EQ(j.at("w1").at("shape"), nlohmann::json({4, 3}));
  EXPECT_EQ(j.at("w1").at("data").at(1).get<double>(), net.w1(0, 1));  // row-major
}
