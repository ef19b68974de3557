#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "distillkit/adam.hpp"
#include "distillkit/data.hpp"
#include "distillkit/errors.hpp"
#include "distillkit/rng.hpp"

namespace distillkit {

/// Homogeneous linear regressor acting on z = (x, y). A predictor v for the
/// label corresponds to r = (v, -1), so that r.z = v.x - y.
struct LinearRegressor {
  Vector r;

  static LinearRegressor from_predictor(const Vector& v) {
    LinearRegressor f{Vector(v.size() + 1)};
    f.r.head(v.size()) = v;
    f.r(v.size()) = -1.0;
    return f;
  }

  /// Label predictor v, assuming the canonical r = (v, -1) form.
  Vector predictor() const { return r.head(r.size() - 1); }
  double predict(const Eigen::Ref<const Vector>& x) const { return predictor().dot(x); }
};

struct RegressorEnsemble {
  std::vector<LinearRegressor> regressors;
  std::uint64_t seed = 0;

  std::size_t size() const { return regressors.size(); }

  /// k x (d+1), one regressor per row.
  Matrix as_matrix() const {
    require(!regressors.empty(), "empty regressor ensemble");
    Matrix m(static_cast<Eigen::Index>(regressors.size()), regressors.front().r.size());
    for (std::size_t j = 0; j < regressors.size(); ++j) m.row(static_cast<Eigen::Index>(j)) = regressors[j].r.transpose();
    return m;
  }
};

/// Draw from G: every coordinate i.i.d. N(0, 1/(d+1)).
inline LinearRegressor sample_regressor_g(std::size_t d, Rng& rng) {
  require(d >= 1, "regressor dimension must be >= 1");
  const double sd = 1.0 / std::sqrt(static_cast<double>(d + 1));
  LinearRegressor f{Vector(static_cast<Eigen::Index>(d + 1))};
  for (Eigen::Index i = 0; i < f.r.size(); ++i) f.r(i) = rng.normal(0.0, sd);
  return f;
}

inline RegressorEnsemble sample_ensemble(std::size_t d, std::size_t k, std::uint64_t seed) {
  require(k >= 1, "ensemble size must be >= 1");
  Rng rng(seed);
  RegressorEnsemble ens{{}, seed};
  ens.regressors.reserve(k);
  for (std::size_t j = 0; j < k; ++j) ens.regressors.push_back(sample_regressor_g(d, rng));
  return ens;
}

/// Mean of (r.z)^2 over the rows of z.
inline double mse_loss(const Matrix& z, const LinearRegressor& f) {
  require_dims(z.cols() == f.r.size(), "regressor and data dimensions differ");
  require_dims(z.rows() >= 1, "empty dataset");
  return (z * f.r).squaredNorm() / static_cast<double>(z.rows());
}

inline double mse_loss(const RegressionDataset& ds, const LinearRegressor& f) {
  require_dims(ds.dim() + 1 == static_cast<std::size_t>(f.r.size()), "regressor and data dimensions differ");
  return (ds.features * f.r.head(f.r.size() - 1) + f.r(f.r.size() - 1) * ds.labels).squaredNorm() /
         static_cast<double>(ds.size());
}

inline double evaluate_mse(const LinearRegressor& f, const RegressionDataset& test) { return mse_loss(test, f); }

/// Sum over an ensemble of squared differences between train and synthetic
/// MSE losses, evaluated on homogeneous point matrices. The train-side losses
/// are fixed at construction.
class LossMatcher {
 public:
  LossMatcher(const Matrix& train_z, const RegressorEnsemble& ens) : regs_(ens.as_matrix()) {
    require_dims(train_z.cols() == regs_.cols(), "train and ensemble dimensions differ");
    require_dims(train_z.rows() >= 1, "empty training set");
    train_losses_ = (train_z * regs_.transpose()).colwise().squaredNorm().transpose() / static_cast<double>(train_z.rows());
  }

  const Vector& train_losses() const { return train_losses_; }
  const Matrix& regressors() const { return regs_; }

  Vector syn_losses(const Matrix& syn_z) const {
    require_dims(syn_z.cols() == regs_.cols(), "synthetic and ensemble dimensions differ");
    require_dims(syn_z.rows() >= 1, "empty synthetic set");
    return (syn_z * regs_.transpose()).colwise().squaredNorm().transpose() / static_cast<double>(syn_z.rows());
  }

  double objective(const Matrix& syn_z) const { return (syn_losses(syn_z) - train_losses_).squaredNorm(); }

  /// d/dz_i = sum_j 2 (L_syn,j - L_train,j) (2/m) (r_j.z_i) r_j
  Matrix gradient(const Matrix& syn_z, double* objective_out = nullptr) const {
    require_dims(syn_z.cols() == regs_.cols(), "synthetic and ensemble dimensions differ");
    const double m = static_cast<double>(syn_z.rows());
    const Matrix proj = syn_z * regs_.transpose();  // m x k
    const Vector diff = proj.colwise().squaredNorm().transpose() / m - train_losses_;
    if (objective_out) *objective_out = diff.squaredNorm();
    return proj * (diff * (4.0 / m)).asDiagonal() * regs_;
  }

 private:
  Matrix regs_;
  Vector train_losses_;
};

inline double loss_match_objective(const RegressionDataset& train, const RegressionDataset& syn,
                                   const RegressorEnsemble& ens) {
  require_dims(train.dim() == syn.dim(), "train and synthetic feature dimensions differ");
  return LossMatcher(homogenize(train), ens).objective(homogenize(syn));
}

/// Gradient with respect to every synthetic coordinate, m x (d+1), label last.
inline Matrix objective_gradient(const RegressionDataset& train, const RegressionDataset& syn,
                                 const RegressorEnsemble& ens) {
  require_dims(train.dim() == syn.dim(), "train and synthetic feature dimensions differ");
  return LossMatcher(homogenize(train), ens).gradient(homogenize(syn));
}

/// In-place projection of homogeneous rows onto ||x|| <= B, |y| <= b.
inline void project_rows(Matrix& z, double feature_bound, double label_bound) {
  const Eigen::Index d = z.cols() - 1;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const double nrm = z.row(i).head(d).norm();
    if (nrm > feature_bound) z.row(i).head(d) *= feature_bound / nrm;
    z(i, d) = std::clamp(z(i, d), -label_bound, label_bound);
  }
}

inline RegressionDataset project_feasible(const RegressionDataset& syn, double feature_bound, double label_bound) {
  require(feature_bound > 0.0 && label_bound > 0.0, "projection bounds must be positive");
  Matrix z = homogenize(syn);
  project_rows(z, feature_bound, label_bound);
  return dehomogenize(z);
}

// ---------------------------------------------------------------------------
// Distillation driver

struct DistillConfig {
  std::size_t m = 50;          // synthetic size
  std::size_t k = 100;         // matching ensemble
  std::size_t n_eval = 100;    // held-out ensemble used for checkpointing
  double learning_rate = 0.01;
  std::size_t max_steps = 5000;
  std::size_t eval_stride = 1;
  std::uint64_t seed = 0;
  bool project = true;
};

struct DistillReport {
  DistillConfig config;
  std::uint64_t match_seed = 0;
  std::uint64_t eval_seed = 0;
  std::uint64_t init_seed = 0;
  std::vector<double> objective_trace;  // matching objective, index = step
  std::vector<double> eval_trace;       // held-out objective at steps 0, stride, 2*stride, ...
  std::size_t best_step = 0;
  double best_eval_objective = 0.0;
  double initial_eval_objective = 0.0;
  RegressionDataset synthetic;
};

/// Minimizes the matching objective from an explicit starting set. Returns the
/// iterate with the lowest held-out objective (earliest on ties).
inline std::pair<RegressionDataset, DistillReport> distill_from(const RegressionDataset& train,
                                                                 const RegressionDataset& init,
                                                                 const DistillConfig& cfg) {
  require(cfg.k >= 1 && cfg.n_eval >= 1, "ensemble sizes must be >= 1");
  require(cfg.learning_rate > 0.0, "learning rate must be positive");
  require(cfg.eval_stride >= 1, "eval stride must be >= 1");
  require_dims(train.dim() == init.dim(), "train and initial synthetic dimensions differ");

  DistillReport rep;
  rep.config = cfg;
  rep.match_seed = derive_seed(cfg.seed, "match-ensemble");
  rep.eval_seed = derive_seed(cfg.seed, "eval-ensemble");
  rep.init_seed = derive_seed(cfg.seed, "init-subsample");

  const Matrix train_z = homogenize(train);
  const LossMatcher matcher(train_z, sample_ensemble(train.dim(), cfg.k, rep.match_seed));
  const LossMatcher evaluator(train_z, sample_ensemble(train.dim(), cfg.n_eval, rep.eval_seed));

  Matrix z = homogenize(init);
  Matrix best = z;
  rep.objective_trace.push_back(matcher.objective(z));
  rep.best_eval_objective = rep.initial_eval_objective = evaluator.objective(z);
  rep.eval_trace.push_back(rep.best_eval_objective);

  AdamState<Matrix> adam(z);
  for (std::size_t step = 1; step <= cfg.max_steps; ++step) {
    const Matrix g = matcher.gradient(z);
    adam_update(z, g, adam, cfg.learning_rate);
    if (cfg.project) project_rows(z, train.feature_bound, train.label_bound);
    rep.objective_trace.push_back(matcher.objective(z));
    if (step % cfg.eval_stride == 0) {
      const double ev = evaluator.objective(z);
      rep.eval_trace.push_back(ev);
      if (ev < rep.best_eval_objective) {
        rep.best_eval_objective = ev;
        rep.best_step = step;
        best = z;
      }
    }
  }
  rep.synthetic = dehomogenize(best);
  return {rep.synthetic, std::move(rep)};
}

/// Distillation initialized from a uniform random subsample of the training set.
inline std::pair<RegressionDataset, DistillReport> distill(const RegressionDataset& train, const DistillConfig& cfg) {
  require(cfg.m >= 1, "synthetic size must be >= 1");
  if (cfg.m > train.size())
    throw ConfigError("synthetic size " + std::to_string(cfg.m) + " exceeds training size " +
                      std::to_string(train.size()));
  Rng rng(derive_seed(cfg.seed, "init-subsample"));
  const auto idx = sample_without_replacement(train.size(), cfg.m, rng);
  return distill_from(train, train.rows(idx), cfg);
}

// ---------------------------------------------------------------------------
// Downstream model

/// Homogeneous least-squares model v.x fitted by full-batch Adam from zero.
inline LinearRegressor train_linear(const RegressionDataset& ds, double lr, std::size_t steps) {
  require(steps >= 1, "training needs at least one step");
  require(lr > 0.0, "learning rate must be positive");
  const double n = static_cast<double>(ds.size());
  Vector v = Vector::Zero(static_cast<Eigen::Index>(ds.dim()));
  AdamState<Vector> adam(v);
  for (std::size_t s = 0; s < steps; ++s) {
    const Vector g = (2.0 / n) * (ds.features.transpose() * (ds.features * v - ds.labels));
    adam_update(v, g, adam, lr);
  }
  return LinearRegressor::from_predictor(v);
}

}  // namespace distillkit
