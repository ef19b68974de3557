#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "distillkit/adam.hpp"
#include "distillkit/data.hpp"
#include "distillkit/errors.hpp"
#include "distillkit/rng.hpp"

namespace distillkit {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct MlpShape {
  std::size_t in = 1;
  std::size_t h1 = 10;
  std::size_t h2 = 10;

  std::size_t param_count() const { return h1 * in + h1 + h2 * h1 + h2 + h2 + 1; }
  bool operator==(const MlpShape&) const = default;
};

/// Two hidden ReLU layers followed by a scalar linear head:
///   f(x) = w_out . relu(W2 relu(W1 x + b1) + b2) + b_out
struct Mlp2 {
  Matrix w1;  // h1 x in
  Vector b1;
  Matrix w2;  // h2 x h1
  Vector b2;
  Vector w_out;  // h2
  double b_out = 0.0;

  static Mlp2 zeros(const MlpShape& s) {
    require(s.in >= 1 && s.h1 >= 1 && s.h2 >= 1, "layer sizes must be positive");
    const auto in = static_cast<Eigen::Index>(s.in), h1 = static_cast<Eigen::Index>(s.h1),
               h2 = static_cast<Eigen::Index>(s.h2);
    return Mlp2{Matrix::Zero(h1, in), Vector::Zero(h1), Matrix::Zero(h2, h1), Vector::Zero(h2), Vector::Zero(h2), 0.0};
  }

  MlpShape shape() const {
    return {static_cast<std::size_t>(w1.cols()), static_cast<std::size_t>(w1.rows()),
            static_cast<std::size_t>(w2.rows())};
  }
  std::size_t input_dim() const { return static_cast<std::size_t>(w1.cols()); }

  Vector flatten() const {
    Vector p(static_cast<Eigen::Index>(shape().param_count()));
    Eigen::Index o = 0;
    auto put = [&](const auto& blk) {
      for (Eigen::Index j = 0; j < blk.cols(); ++j)
        for (Eigen::Index i = 0; i < blk.rows(); ++i) p(o++) = blk(i, j);
    };
    put(w1);
    put(b1);
    put(w2);
    put(b2);
    put(w_out);
    p(o) = b_out;
    return p;
  }

  void unflatten(const Vector& p) {
    require_dims(p.size() == static_cast<Eigen::Index>(shape().param_count()), "parameter vector size mismatch");
    Eigen::Index o = 0;
    auto get = [&](auto& blk) {
      for (Eigen::Index j = 0; j < blk.cols(); ++j)
        for (Eigen::Index i = 0; i < blk.rows(); ++i) blk(i, j) = p(o++);
    };
    get(w1);
    get(b1);
    get(w2);
    get(b2);
    get(w_out);
    b_out = p(o);
  }

  double forward(const Eigen::Ref<const Vector>& x) const {
    require_dims(x.size() == w1.cols(), "input size mismatch");
    const Vector h1 = (w1 * x + b1).cwiseMax(0.0);
    const Vector h2 = (w2 * h1 + b2).cwiseMax(0.0);
    return w_out.dot(h2) + b_out;
  }

  /// One output per row of x.
  Vector forward_batch(const Matrix& x) const {
    require_dims(x.cols() == w1.cols(), "input size mismatch");
    const Matrix h1 = ((x * w1.transpose()).rowwise() + b1.transpose()).cwiseMax(0.0);
    const Matrix h2 = ((h1 * w2.transpose()).rowwise() + b2.transpose()).cwiseMax(0.0);
    return (h2 * w_out).array() + b_out;
  }

  /// d f / d x for every row of x (same shape as x).
  Matrix grad_input_batch(const Matrix& x) const {
    require_dims(x.cols() == w1.cols(), "input size mismatch");
    const Matrix pre1 = (x * w1.transpose()).rowwise() + b1.transpose();
    const Matrix h1 = pre1.cwiseMax(0.0);
    const Matrix pre2 = (h1 * w2.transpose()).rowwise() + b2.transpose();
    const Matrix d2 = (pre2.array() > 0.0).cast<double>().rowwise() * w_out.transpose().array();
    const Matrix d1 = (d2 * w2).array() * (pre1.array() > 0.0).cast<double>();
    return d1 * w1;
  }

  Vector grad_input(const Eigen::Ref<const Vector>& x) const {
    return grad_input_batch(x.transpose()).row(0).transpose();
  }
};

inline Mlp2 mlp_init_gaussian(const MlpShape& s, Rng& rng, double stddev = 1.0) {
  Mlp2 net = Mlp2::zeros(s);
  Vector p(static_cast<Eigen::Index>(s.param_count()));
  for (Eigen::Index i = 0; i < p.size(); ++i) p(i) = rng.normal(0.0, stddev);
  net.unflatten(p);
  return net;
}

/// Fan-in scaled Gaussian weights (variance 2 / fan_in), zero biases.
inline Mlp2 mlp_init_he(const MlpShape& s, Rng& rng) {
  Mlp2 net = Mlp2::zeros(s);
  auto fill = [&rng](Matrix& w) {
    const double sd = std::sqrt(2.0 / static_cast<double>(w.cols()));
    for (Eigen::Index j = 0; j < w.cols(); ++j)
      for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = rng.normal(0.0, sd);
  };
  fill(net.w1);
  fill(net.w2);
  const double sd = std::sqrt(1.0 / static_cast<double>(s.h2));
  for (Eigen::Index i = 0; i < net.w_out.size(); ++i) net.w_out(i) = rng.normal(0.0, sd);
  return net;
}

struct MlpGradient {
  Mlp2 grad;  // same layout as the network
  double loss = 0.0;
};

/// Gradient of mean((f(x_i) - target_i)^2) with respect to every parameter.
inline MlpGradient mlp_grad_weights(const Mlp2& net, const Matrix& x, const Vector& target) {
  require_dims(x.rows() >= 1, "empty batch");
  require_dims(x.rows() == target.size(), "batch and target sizes differ");
  require_dims(x.cols() == net.w1.cols(), "input size mismatch");
  const double n = static_cast<double>(x.rows());

  const Matrix pre1 = (x * net.w1.transpose()).rowwise() + net.b1.transpose();
  const Matrix h1 = pre1.cwiseMax(0.0);
  const Matrix pre2 = (h1 * net.w2.transpose()).rowwise() + net.b2.transpose();
  const Matrix h2 = pre2.cwiseMax(0.0);
  const Vector resid = (h2 * net.w_out).array() + net.b_out - target.array();

  MlpGradient g;
  g.loss = resid.squaredNorm() / n;
  const Vector dout = resid * (2.0 / n);
  g.grad.w_out = h2.transpose() * dout;
  g.grad.b_out = dout.sum();
  const Matrix d2 = ((dout * net.w_out.transpose()).array() * (pre2.array() > 0.0).cast<double>()).matrix();
  g.grad.w2 = d2.transpose() * h1;
  g.grad.b2 = d2.colwise().sum().transpose();
  const Matrix d1 = ((d2 * net.w2).array() * (pre1.array() > 0.0).cast<double>()).matrix();
  g.grad.w1 = d1.transpose() * x;
  g.grad.b1 = d1.colwise().sum().transpose();
  return g;
}

/// Adam over the flattened parameters of a network.
struct MlpOptimizer {
  AdamState<Vector> state;

  explicit MlpOptimizer(const Mlp2& net, AdamConfig cfg = {}) : state(net.flatten(), cfg) {}

  void step(Mlp2& net, const Mlp2& grad, double lr) {
    Vector p = net.flatten();
    adam_update(p, grad.flatten(), state, lr);
    net.unflatten(p);
  }
};

// ---------------------------------------------------------------------------
// JSON checkpoint: row-major data with an explicit shape header per block.

inline nlohmann::json matrix_to_json(const Matrix& m) {
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
  return {{"shape", {m.rows(), m.cols()}}, {"data", data}};
}

inline Matrix matrix_from_json(const nlohmann::json& j) {
  const auto rows = j.at("shape").at(0).get<Eigen::Index>();
  const auto cols = j.at("shape").at(1).get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  require_dims(static_cast<Eigen::Index>(data.size()) == rows * cols, "matrix data does not match its shape");
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = data[static_cast<std::size_t>(i * cols + k)];
  return m;
}

inline nlohmann::json to_json(const Mlp2& net) {
  const auto s = net.shape();
  return {{"type", "mlp2"},
          {"sizes", {s.in, s.h1, s.h2}},
          {"w1", matrix_to_json(net.w1)},
          {"b1", matrix_to_json(net.b1)},
          {"w2", matrix_to_json(net.w2)},
          {"b2", matrix_to_json(net.b2)},
          {"w_out", matrix_to_json(net.w_out)},
          {"b_out", net.b_out}};
}

inline Mlp2 mlp_from_json(const nlohmann::json& j) {
  if (j.at("type").get<std::string>() != "mlp2") throw ConfigError("checkpoint is not an mlp2 network");
  const auto sizes = j.at("sizes").get<std::vector<std::size_t>>();
  require_dims(sizes.size() == 3, "mlp2 checkpoint needs three sizes");
  Mlp2 net = Mlp2::zeros({sizes[0], sizes[1], sizes[2]});
  auto load = [&](const char* key, auto& dst) {
    const Matrix m = matrix_from_json(j.at(key));
    require_dims(m.rows() == dst.rows() && m.cols() == dst.cols(), std::string("block shape mismatch: ") + key);
    dst = m;
  };
  load("w1", net.w1);
  load("b1", net.b1);
  load("w2", net.w2);
  load("b2", net.b2);
  load("w_out", net.w_out);
  net.b_out = j.at("b_out").get<double>();
  return net;
}

}  // namespace distillkit
