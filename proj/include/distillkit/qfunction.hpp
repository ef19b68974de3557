#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "distillkit/data.hpp"
#include "distillkit/envs.hpp"
#include "distillkit/errors.hpp"
#include "distillkit/nn.hpp"
#include "distillkit/rng.hpp"

namespace distillkit {

enum class FeatureMode {
  concat_onehot,        // phi(s, a) = (s, a)
  decomposable_linear,  // phi(s, a) = Ws s + Wa a
  interaction,          // phi(s, a) = (s, a, s (x) a); not decomposable
};

inline std::string to_string(FeatureMode m) {
  switch (m) {
    case FeatureMode::concat_onehot: return "concat_onehot";
    case FeatureMode::decomposable_linear: return "decomposable_linear";
    case FeatureMode::interaction: return "interaction";
  }
  return "?";
}

inline FeatureMode parse_feature_mode(std::string_view s) {
  if (s == "concat_onehot") return FeatureMode::concat_onehot;
  if (s == "decomposable_linear") return FeatureMode::decomposable_linear;
  if (s == "interaction") return FeatureMode::interaction;
  throw ConfigError("unknown feature mode '" + std::string(s) + "'");
}

/// Feature map over (state, relaxed action vector).
struct FeatureMap {
  FeatureMode mode = FeatureMode::concat_onehot;
  std::size_t state_dim = 1;
  std::size_t action_count = 1;
  Matrix ws;  // decomposable_linear only: p x state_dim
  Matrix wa;  // decomposable_linear only: p x action_count

  static FeatureMap concat(std::size_t d, std::size_t n_actions) {
    return {FeatureMode::concat_onehot, d, n_actions, {}, {}};
  }
  static FeatureMap linear(const Matrix& ws, const Matrix& wa) {
    require_dims(ws.rows() == wa.rows(), "state and action projections must share an output dimension");
    return {FeatureMode::decomposable_linear, static_cast<std::size_t>(ws.cols()),
            static_cast<std::size_t>(wa.cols()), ws, wa};
  }
  static FeatureMap interaction_map(std::size_t d, std::size_t n_actions) {
    return {FeatureMode::interaction, d, n_actions, {}, {}};
  }

  bool decomposable() const { return mode != FeatureMode::interaction; }

  std::size_t dim() const {
    switch (mode) {
      case FeatureMode::concat_onehot: return state_dim + action_count;
      case FeatureMode::decomposable_linear: return static_cast<std::size_t>(ws.rows());
      case FeatureMode::interaction: return state_dim + action_count + state_dim * action_count;
    }
    return 0;
  }

  Vector phi(const Eigen::Ref<const Vector>& s, const Eigen::Ref<const Vector>& a) const {
    require_dims(static_cast<std::size_t>(s.size()) == state_dim && static_cast<std::size_t>(a.size()) == action_count,
                 "feature map input size mismatch");
    const auto d = static_cast<Eigen::Index>(state_dim), na = static_cast<Eigen::Index>(action_count);
    Vector out(static_cast<Eigen::Index>(dim()));
    switch (mode) {
      case FeatureMode::concat_onehot:
        out << s, a;
        break;
      case FeatureMode::decomposable_linear:
        out = ws * s + wa * a;
        break;
      case FeatureMode::interaction:
        out.head(d) = s;
        out.segment(d, na) = a;
        for (Eigen::Index i = 0; i < d; ++i)
          for (Eigen::Index k = 0; k < na; ++k) out(d + na + i * na + k) = s(i) * a(k);
        break;
    }
    return out;
  }

  /// Vector-Jacobian product: gradients of g . phi(s, a) with respect to s and a.
  void vjp(const Eigen::Ref<const Vector>& s, const Eigen::Ref<const Vector>& a, const Vector& g, Vector& gs,
           Vector& ga) const {
    const auto d = static_cast<Eigen::Index>(state_dim), na = static_cast<Eigen::Index>(action_count);
    switch (mode) {
      case FeatureMode::concat_onehot:
        gs = g.head(d);
        ga = g.segment(d, na);
        break;
      case FeatureMode::decomposable_linear:
        gs = ws.transpose() * g;
        ga = wa.transpose() * g;
        break;
      case FeatureMode::interaction:
        gs = g.head(d);
        ga = g.segment(d, na);
        for (Eigen::Index i = 0; i < d; ++i)
          for (Eigen::Index k = 0; k < na; ++k) {
            const double w = g(d + na + i * na + k);
            gs(i) += w * a(k);
            ga(k) += w * s(i);
          }
        break;
    }
  }

  /// Canonical split phi1(s) = phi(s, e0) - phi(0, e0), phi2(a) = phi(0, a).
  /// Exact for decomposable maps.
  Vector phi1(const Eigen::Ref<const Vector>& s) const {
    const Vector e0 = Vector::Unit(static_cast<Eigen::Index>(action_count), 0);
    return phi(s, e0) - phi(Vector::Zero(static_cast<Eigen::Index>(state_dim)), e0);
  }
  Vector phi2(const Eigen::Ref<const Vector>& a) const {
    return phi(Vector::Zero(static_cast<Eigen::Index>(state_dim)), a);
  }
};

/// Q-value predictor f(s, a): either v . phi(s, a) or an MLP over concat(s, a).
struct QPredictor {
  enum class Kind { linear, mlp };
  Kind kind = Kind::mlp;
  FeatureMap fmap;  // linear only
  Vector v;         // linear only
  Mlp2 net;         // mlp only
  std::size_t state_dim = 0;
  std::size_t action_count = 0;
  // Optional affine state normalisation applied before the network: (s - shift) / scale.
  Vector state_shift;
  Vector state_scale;

  static QPredictor linear(const FeatureMap& fm, const Vector& v) {
    require_dims(static_cast<std::size_t>(v.size()) == fm.dim(), "weight vector does not match feature dimension");
    return {Kind::linear, fm, v, {}, fm.state_dim, fm.action_count, {}, {}};
  }
  static QPredictor mlp(const Mlp2& net, std::size_t d, std::size_t n_actions) {
    require_dims(net.input_dim() == d + n_actions, "network input must be state_dim + action_count");
    return {Kind::mlp, {}, {}, net, d, n_actions, {}, {}};
  }

  bool normalised() const { return state_scale.size() > 0; }

  Matrix net_input(const Matrix& s, const Matrix& a) const {
    Matrix x(s.rows(), s.cols() + a.cols());
    if (normalised()) {
      x << (s.rowwise() - state_shift.transpose()).array().rowwise() / state_scale.transpose().array(), a;
    } else {
      x << s, a;
    }
    return x;
  }

  double value(const Eigen::Ref<const Vector>& s, const Eigen::Ref<const Vector>& a) const {
    if (kind == Kind::linear) return v.dot(fmap.phi(s, a));
    return net.forward(net_input(s.transpose(), a.transpose()).row(0).transpose());
  }

  /// f(s_i, a_i) for every row.
  Vector values(const Matrix& s, const Matrix& a) const {
    require_dims(s.rows() == a.rows(), "state and action row counts differ");
    if (kind == Kind::mlp) return net.forward_batch(net_input(s, a));
    Vector out(s.rows());
    for (Eigen::Index i = 0; i < s.rows(); ++i) out(i) = v.dot(fmap.phi(s.row(i).transpose(), a.row(i).transpose()));
    return out;
  }

  /// Input gradients of f at every row.
  void input_grads(const Matrix& s, const Matrix& a, Matrix& gs, Matrix& ga) const {
    require_dims(s.rows() == a.rows(), "state and action row counts differ");
    if (kind == Kind::mlp) {
      const Matrix g = net.grad_input_batch(net_input(s, a));
      gs = g.leftCols(s.cols());
      if (normalised()) gs = gs.array().rowwise() / state_scale.transpose().array();
      ga = g.rightCols(a.cols());
      return;
    }
    gs.resize(s.rows(), s.cols());
    ga.resize(a.rows(), a.cols());
    Vector rs, ra;
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
      fmap.vjp(s.row(i).transpose(), a.row(i).transpose(), v, rs, ra);
      gs.row(i) = rs.transpose();
      ga.row(i) = ra.transpose();
    }
  }

  /// n x action_count matrix of f(s_i, e_a) over the discrete actions.
  Matrix action_values(const Matrix& s) const {
    const auto n = s.rows(), na = static_cast<Eigen::Index>(action_count);
    Matrix out(n, na);
    for (Eigen::Index a = 0; a < na; ++a) {
      Matrix e = Matrix::Zero(n, na);
      e.col(a).setOnes();
      out.col(a) = values(s, e);
    }
    return out;
  }
};

/// Index of the largest entry; ties go to the lowest index.
inline int argmax_lowest(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  int best = 0;
  for (Eigen::Index j = 1; j < row.size(); ++j)
    if (row(j) > row(best)) best = static_cast<int>(j);
  return best;
}

inline int greedy_action(const QPredictor& q, const Vector& s) {
  return argmax_lowest(q.action_values(s.transpose()).row(0));
}

inline Policy greedy_policy(const QPredictor& q) {
  return [q](const Vector& s) { return greedy_action(q, s); };
}

inline nlohmann::json to_json(const FeatureMap& fm) {
  nlohmann::json j{{"mode", to_string(fm.mode)}, {"state_dim", fm.state_dim}, {"action_count", fm.action_count}};
  if (fm.mode == FeatureMode::decomposable_linear) {
    j["ws"] = matrix_to_json(fm.ws);
    j["wa"] = matrix_to_json(fm.wa);
  }
  return j;
}

inline FeatureMap feature_map_from_json(const nlohmann::json& j) {
  const auto mode = parse_feature_mode(j.at("mode").get<std::string>());
  const auto d = j.at("state_dim").get<std::size_t>(), na = j.at("action_count").get<std::size_t>();
  switch (mode) {
    case FeatureMode::concat_onehot: return FeatureMap::concat(d, na);
    case FeatureMode::interaction: return FeatureMap::interaction_map(d, na);
    case FeatureMode::decomposable_linear:
      return FeatureMap::linear(matrix_from_json(j.at("ws")), matrix_from_json(j.at("wa")));
  }
  throw ConfigError("bad feature map");
}

/// Checkpoint: the network (or weight vector) plus a feature-map descriptor.
inline nlohmann::json to_json(const QPredictor& q) {
  if (q.kind == QPredictor::Kind::mlp) {
    nlohmann::json j{{"kind", "mlp"},
                     {"features", {{"mode", "concat_onehot"}, {"state_dim", q.state_dim}, {"action_count", q.action_count}}},
                     {"network", to_json(q.net)}};
    if (q.normalised()) {
      j["features"]["state_shift"] = matrix_to_json(q.state_shift);
      j["features"]["state_scale"] = matrix_to_json(q.state_scale);
    }
    return j;
  }
  return {{"kind", "linear"}, {"features", to_json(q.fmap)}, {"weights", matrix_to_json(q.v)}};
}

inline QPredictor qpredictor_from_json(const nlohmann::json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "mlp") {
    const auto& f = j.at("features");
    auto q = QPredictor::mlp(mlp_from_json(j.at("network")), f.at("state_dim").get<std::size_t>(),
                             f.at("action_count").get<std::size_t>());
    if (f.contains("state_scale")) {
      q.state_shift = matrix_from_json(f.at("state_shift")).col(0);
      q.state_scale = matrix_from_json(f.at("state_scale")).col(0);
      require_dims(static_cast<std::size_t>(q.state_scale.size()) == q.state_dim &&
                       q.state_shift.size() == q.state_scale.size(),
                   "normalisation vectors do not match the state dimension");
    }
    return q;
  }
  if (kind == "linear") {
    const Matrix w = matrix_from_json(j.at("weights"));
    return QPredictor::linear(feature_map_from_json(j.at("features")), w.col(0));
  }
  throw ConfigError("unknown predictor kind '" + kind + "'");
}

}  // namespace distillkit
