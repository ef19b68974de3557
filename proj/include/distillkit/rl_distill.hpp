#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "distillkit/adam.hpp"
#include "distillkit/envs.hpp"
#include "distillkit/errors.hpp"
#include "distillkit/linreg_distill.hpp"
#include "distillkit/nn.hpp"
#include "distillkit/qfunction.hpp"
#include "distillkit/rng.hpp"

namespace distillkit {

/// Architecture of the sampled (and trained) Q-predictors.
struct QArch {
  QPredictor::Kind kind = QPredictor::Kind::mlp;
  std::size_t h1 = 10;
  std::size_t h2 = 10;
  FeatureMap fmap;  // linear only
};

struct QEnsembleSample {
  QPredictor q;
  double lambda = 1.0;
};

/// All predictor parameters and the reward scale drawn i.i.d. N(0, sigma^2).
inline QEnsembleSample sample_predictor_H(const QArch& arch, std::size_t state_dim, std::size_t action_count,
                                          double sigma, Rng& rng) {
  require(sigma > 0.0, "sigma must be positive");
  QEnsembleSample out;
  if (arch.kind == QPredictor::Kind::mlp) {
    out.q = QPredictor::mlp(mlp_init_gaussian({state_dim + action_count, arch.h1, arch.h2}, rng, sigma), state_dim,
                            action_count);
  } else {
    require_dims(arch.fmap.state_dim == state_dim && arch.fmap.action_count == action_count,
                 "feature map does not match the environment");
    Vector v(static_cast<Eigen::Index>(arch.fmap.dim()));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.normal(0.0, sigma);
    out.q = QPredictor::linear(arch.fmap, v);
  }
  out.lambda = rng.normal(0.0, sigma);
  return out;
}

inline std::vector<QEnsembleSample> sample_q_ensemble(const QArch& arch, std::size_t state_dim,
                                                      std::size_t action_count, double sigma, std::size_t k,
                                                      std::uint64_t seed) {
  require(k >= 1, "ensemble size must be >= 1");
  Rng rng(seed);
  std::vector<QEnsembleSample> ens;
  ens.reserve(k);
  for (std::size_t j = 0; j < k; ++j) ens.push_back(sample_predictor_H(arch, state_dim, action_count, sigma, rng));
  return ens;
}

/// sigma = 1 / sqrt(d + 1) for linear predictors over a d-dimensional feature map.
inline double default_linear_sigma(const FeatureMap& fm) { return 1.0 / std::sqrt(static_cast<double>(fm.dim() + 1)); }

// ---------------------------------------------------------------------------
// Bellman residuals

struct BellmanResiduals {
  Vector delta;                // f(s, a) - lambda r - gamma max f(s', .) (no max on terminated rows)
  std::vector<int> next_best;  // argmax action at s' (-1 on terminated rows)
};

inline BellmanResiduals bellman_residuals(const RelaxedTransitions& ds, const QEnsembleSample& q, double gamma) {
  require_dims(ds.size() >= 1, "empty dataset");
  require_dims(ds.state_dim() == q.q.state_dim && ds.action_count() == q.q.action_count,
               "dataset and predictor dimensions differ");
  BellmanResiduals out;
  out.delta = q.q.values(ds.s, ds.a) - q.lambda * ds.r;
  out.next_best.assign(ds.size(), -1);
  std::vector<std::size_t> boot;
  for (std::size_t i = 0; i < ds.size(); ++i)
    if (!ds.terminated[i]) boot.push_back(i);
  if (boot.empty() || gamma == 0.0) return out;

  Matrix sn(static_cast<Eigen::Index>(boot.size()), ds.sn.cols());
  for (std::size_t b = 0; b < boot.size(); ++b) sn.row(static_cast<Eigen::Index>(b)) = ds.sn.row(static_cast<Eigen::Index>(boot[b]));
  const Matrix qn = q.q.action_values(sn);
  for (std::size_t b = 0; b < boot.size(); ++b) {
    const int best = argmax_lowest(qn.row(static_cast<Eigen::Index>(b)));
    out.next_best[boot[b]] = best;
    out.delta(static_cast<Eigen::Index>(boot[b])) -= gamma * qn(static_cast<Eigen::Index>(b), best);
  }
  return out;
}

/// Mean of (f(s,a) - lambda r - gamma max_a' f(s',a'))^2, with the max term
/// dropped on terminated rows. The max ranges over the discrete actions.
inline double bellman_loss(const RelaxedTransitions& ds, const QEnsembleSample& q, double gamma) {
  return bellman_residuals(ds, q, gamma).delta.squaredNorm() / static_cast<double>(ds.size());
}

inline double bellman_loss(const OfflineRLDataset& ds, const QEnsembleSample& q, double gamma) {
  return bellman_loss(to_relaxed(ds), q, gamma);
}

// ---------------------------------------------------------------------------
// Synthetic offline data

struct SyntheticOfflineDataset {
  RelaxedTransitions nonterminated;
  RelaxedTransitions terminated;
  std::size_t train_nonterminated = 0;
  std::size_t train_terminated = 0;

  std::size_t size() const { return nonterminated.size() + terminated.size(); }
  RelaxedTransitions combined() const { return concat(nonterminated, terminated); }
};

/// Rows allotted to the terminated partition: round-half-up of m * n_t / n,
/// at least one row for each nonempty partition.
inline std::size_t allocate_terminated(std::size_t m, std::size_t n_terminated, std::size_t n) {
  require(n >= 1, "empty training set");
  require(n_terminated <= n, "terminated count exceeds dataset size");
  if (n_terminated == 0) return 0;
  if (n_terminated == n) return m;
  require(m >= 2, "need at least one synthetic row per partition");
  auto mt = static_cast<std::size_t>(std::floor(static_cast<double>(m) * static_cast<double>(n_terminated) /
                                                    static_cast<double>(n) + 0.5));
  return std::clamp<std::size_t>(mt, 1, m - 1);
}

class BellmanMatcher {
 public:
  BellmanMatcher(const RelaxedTransitions& train, std::vector<QEnsembleSample> ens, double gamma)
      : ens_(std::move(ens)), gamma_(gamma) {
    require(gamma >= 0.0 && gamma < 1.0, "gamma must lie in [0, 1)");
    require(!ens_.empty(), "empty predictor ensemble");
    const auto nt = train.partition(false), te = train.partition(true);
    n_nonterminated_ = nt.size();
    n_terminated_ = te.size();
    for (const auto& q : ens_) {
      train_nt_.push_back(n_nonterminated_ ? bellman_loss(nt, q, gamma_) : 0.0);
      train_te_.push_back(n_terminated_ ? bellman_loss(te, q, gamma_) : 0.0);
    }
  }

  const std::vector<QEnsembleSample>& ensemble() const { return ens_; }
  double gamma() const { return gamma_; }

  void check(const SyntheticOfflineDataset& syn) const {
    if ((n_nonterminated_ > 0) != (syn.nonterminated.size() > 0) ||
        (n_terminated_ > 0) != (syn.terminated.size() > 0))
      throw ConfigError("synthetic partitions do not match the training partitions");
    for (auto f : syn.terminated.terminated)
      if (!f) throw ConfigError("terminated partition holds a non-terminated row");
    for (auto f : syn.nonterminated.terminated)
      if (f) throw ConfigError("non-terminated partition holds a terminated row");
  }

  double objective(const SyntheticOfflineDataset& syn) const {
    check(syn);
    double total = 0.0;
    for (std::size_t j = 0; j < ens_.size(); ++j) {
      if (n_nonterminated_) total += sq(train_nt_[j] - bellman_loss(syn.nonterminated, ens_[j], gamma_));
      if (n_terminated_) total += sq(train_te_[j] - bellman_loss(syn.terminated, ens_[j], gamma_));
    }
    return total;
  }

  /// Gradient with respect to every synthetic coordinate (s, a, r, s'),
  /// returned in the layout of the synthetic dataset.
  SyntheticOfflineDataset gradient(const SyntheticOfflineDataset& syn, double* objective_out = nullptr) const {
    check(syn);
    SyntheticOfflineDataset g = syn;
    zero(g.nonterminated);
    zero(g.terminated);
    double total = 0.0;
    for (std::size_t j = 0; j < ens_.size(); ++j) {
      if (n_nonterminated_) total += accumulate(syn.nonterminated, ens_[j], train_nt_[j], g.nonterminated);
      if (n_terminated_) total += accumulate(syn.terminated, ens_[j], train_te_[j], g.terminated);
    }
    if (objective_out) *objective_out = total;
    return g;
  }

 private:
  static double sq(double x) { return x * x; }

  static void zero(RelaxedTransitions& t) {
    t.s.setZero();
    t.a.setZero();
    t.r.setZero();
    t.sn.setZero();
  }

  double accumulate(const RelaxedTransitions& p, const QEnsembleSample& q, double train_loss,
                    RelaxedTransitions& g) const {
    const auto res = bellman_residuals(p, q, gamma_);
    const double m = static_cast<double>(p.size());
    const double syn_loss = res.delta.squaredNorm() / m;
    const Vector c = res.delta * (-2.0 * (train_loss - syn_loss) * 2.0 / m);

    Matrix gs, ga;
    q.q.input_grads(p.s, p.a, gs, ga);
    g.s += c.asDiagonal() * gs;
    g.a += c.asDiagonal() * ga;
    g.r += -q.lambda * c;

    std::vector<Eigen::Index> boot;
    for (std::size_t i = 0; i < p.size(); ++i)
      if (res.next_best[i] >= 0) boot.push_back(static_cast<Eigen::Index>(i));
    if (!boot.empty()) {
      const auto nb = static_cast<Eigen::Index>(boot.size());
      Matrix sn(nb, p.sn.cols());
      Matrix an = Matrix::Zero(nb, p.a.cols());
      for (Eigen::Index b = 0; b < nb; ++b) {
        sn.row(b) = p.sn.row(boot[static_cast<std::size_t>(b)]);
        an(b, res.next_best[static_cast<std::size_t>(boot[static_cast<std::size_t>(b)])]) = 1.0;
      }
      Matrix gsn, gan;
      q.q.input_grads(sn, an, gsn, gan);
      for (Eigen::Index b = 0; b < nb; ++b) {
        const auto i = boot[static_cast<std::size_t>(b)];
        g.sn.row(i) += -gamma_ * c(i) * gsn.row(b);
      }
    }
    return sq(train_loss - syn_loss);
  }

  std::vector<QEnsembleSample> ens_;
  double gamma_;
  std::size_t n_nonterminated_ = 0;
  std::size_t n_terminated_ = 0;
  std::vector<double> train_nt_;
  std::vector<double> train_te_;
};

inline double bellman_match_objective(const RelaxedTransitions& train, const SyntheticOfflineDataset& syn,
                                      const std::vector<QEnsembleSample>& ens, double gamma) {
  return BellmanMatcher(train, ens, gamma).objective(syn);
}

// ---------------------------------------------------------------------------
// Mean constraint for decomposable feature maps

/// mean over syn minus mean over train of (phi1(s), phi2(a), r, phi1(s')).
inline Vector mean_constraint_residual(const RelaxedTransitions& train, const RelaxedTransitions& syn,
                                       const FeatureMap& fm) {
  if (!fm.decomposable()) throw ConfigError("mean constraint needs a decomposable feature map");
  require_dims(train.size() >= 1 && syn.size() >= 1, "empty dataset");
  const auto p = static_cast<Eigen::Index>(fm.dim());
  auto means = [&](const RelaxedTransitions& t) {
    Vector acc = Vector::Zero(3 * p + 1);
    for (Eigen::Index i = 0; i < t.s.rows(); ++i) {
      acc.segment(0, p) += fm.phi1(t.s.row(i).transpose());
      acc.segment(p, p) += fm.phi2(t.a.row(i).transpose());
      acc(2 * p) += t.r(i);
      acc.segment(2 * p + 1, p) += fm.phi1(t.sn.row(i).transpose());
    }
    return Vector(acc / static_cast<double>(t.s.rows()));
  };
  return means(syn) - means(train);
}

inline Vector mean_constraint_residual(const RelaxedTransitions& train, const SyntheticOfflineDataset& syn,
                                       const FeatureMap& fm) {
  return mean_constraint_residual(train, syn.combined(), fm);
}

struct MeanProjection {
  RelaxedTransitions syn;
  double reward_residual = 0.0;  // mean reward gap left after clamping
};

/// Shifts each block (states, actions, rewards, next states) so its mean
/// matches the training mean; for affine phi1/phi2 this zeroes the residual.
/// Rewards are re-clamped to [r_lo, r_hi]; the clamp deficit is spread over
/// the rows that still have headroom.
inline MeanProjection mean_constraint_project(const RelaxedTransitions& syn, const RelaxedTransitions& train,
                                              const FeatureMap& fm, double r_lo, double r_hi) {
  if (fm.mode == FeatureMode::interaction) throw ConfigError("projection needs a linear decomposable feature map");
  require(r_lo <= r_hi, "empty reward range");
  require_dims(syn.state_dim() == train.state_dim() && syn.action_count() == train.action_count(),
               "synthetic and training layouts differ");
  MeanProjection out{syn, 0.0};
  auto shift = [](Matrix& x, const Matrix& ref) {
    const Eigen::RowVectorXd d = ref.colwise().mean() - x.colwise().mean();
    x.rowwise() += d;
  };
  shift(out.syn.s, train.s);
  shift(out.syn.a, train.a);
  shift(out.syn.sn, train.sn);

  Vector& r = out.syn.r;
  const double target = train.r.mean();
  r.array() += target - r.mean();
  const auto m = r.size();
  for (int pass = 0; pass < static_cast<int>(m) + 1; ++pass) {
    double deficit = 0.0;  // amount removed by clamping (positive: mean dropped)
    for (Eigen::Index i = 0; i < m; ++i) {
      const double c = std::clamp(r(i), r_lo, r_hi);
      deficit += r(i) - c;
      r(i) = c;
    }
    if (std::abs(deficit) <= 1e-15 * static_cast<double>(m)) break;
    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < m; ++i)
      if ((deficit > 0.0 && r(i) < r_hi) || (deficit < 0.0 && r(i) > r_lo)) free.push_back(i);
    if (free.empty()) break;
    const double each = deficit / static_cast<double>(free.size());
    for (auto i : free) r(i) += each;
  }
  out.reward_residual = r.mean() - target;
  return out;
}

/// max_a' v.phi(s', a') == v.phi1(s') + max_a' v.phi2(a') on every s' row.
inline bool decomposable_max_identity_check(const Vector& v, const Matrix& s_next, std::size_t action_count,
                                            const FeatureMap& fm, double tol = 1e-10) {
  require_dims(static_cast<std::size_t>(v.size()) == fm.dim(), "weight vector does not match feature dimension");
  double alpha = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < action_count; ++a)
    alpha = std::max(alpha, v.dot(fm.phi2(Vector::Unit(static_cast<Eigen::Index>(action_count), static_cast<Eigen::Index>(a)))));
  for (Eigen::Index i = 0; i < s_next.rows(); ++i) {
    const Vector sn = s_next.row(i).transpose();
    double lhs = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < action_count; ++a)
      lhs = std::max(lhs, v.dot(fm.phi(sn, Vector::Unit(static_cast<Eigen::Index>(action_count), static_cast<Eigen::Index>(a)))));
    const double rhs = v.dot(fm.phi1(sn)) + alpha;
    if (std::abs(lhs - rhs) > tol * std::max(1.0, std::abs(lhs))) return false;
  }
  return true;
}

/// Homogeneous regression points (phi1(s) - gamma phi1(s') + phi2(a), r) whose
/// MSE-matching objective under regressors (v, -lambda) equals the Bellman
/// matching objective when the mean constraint holds.
inline Matrix supervised_equivalent_points(const RelaxedTransitions& ds, const FeatureMap& fm, double gamma) {
  if (!fm.decomposable()) throw ConfigError("reduction needs a decomposable feature map");
  const auto p = static_cast<Eigen::Index>(fm.dim());
  Matrix z(ds.s.rows(), p + 1);
  for (Eigen::Index i = 0; i < ds.s.rows(); ++i) {
    z.row(i).head(p) = (fm.phi1(ds.s.row(i).transpose()) - gamma * fm.phi1(ds.sn.row(i).transpose()) +
                        fm.phi2(ds.a.row(i).transpose()))
                           .transpose();
    z(i, p) = ds.r(i);
  }
  return z;
}

inline RegressorEnsemble supervised_equivalent_regressors(const std::vector<QEnsembleSample>& ens) {
  RegressorEnsemble out;
  for (const auto& q : ens) {
    if (q.q.kind != QPredictor::Kind::linear) throw ConfigError("reduction needs linear predictors");
    Vector r(q.q.v.size() + 1);
    r << q.q.v, -q.lambda;
    out.regressors.push_back({r});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Algorithm: Bellman-loss matching with a learning-rate search

struct RlDistillConfig {
  std::size_t m = 50;
  std::size_t k = 20;
  double sigma = 1.0;
  double gamma = 0.99;
  std::vector<double> lr_grid{3e-1, 1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4};
  std::size_t max_steps = 1000;
  std::uint64_t seed = 0;
  QArch arch;
  bool clamp_rewards = true;
  double state_radius = 0.0;     // 0 disables the state-ball projection
  bool mean_constraint = false;  // linear decomposable predictors only
};

struct RlLrRun {
  double lr = 0.0;
  std::vector<double> objective_trace;  // index = step, entry 0 is the initialisation
  std::size_t best_step = 0;
  double best_objective = 0.0;
  std::optional<double> eval_return;
  SyntheticOfflineDataset synthetic;  // best-objective iterate
};

struct RlDistillReport {
  RlDistillConfig config;
  std::uint64_t ensemble_seed = 0;
  std::uint64_t init_seed = 0;
  std::size_t m_terminated = 0;
  std::size_t m_nonterminated = 0;
  double reward_lo = 0.0;
  double reward_hi = 0.0;
  double initial_objective = 0.0;
  std::vector<RlLrRun> runs;
  std::size_t chosen = 0;
};

/// Downstream score of a candidate synthetic dataset (larger is better).
using SyntheticEvaluator = std::function<double(const SyntheticOfflineDataset&)>;

namespace detail {

inline void clamp_rows(Matrix& x, double radius) {
  if (radius <= 0.0) return;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double n = x.row(i).norm();
    if (n > radius) x.row(i) *= radius / n;
  }
}

inline void project_synthetic(SyntheticOfflineDataset& syn, const RlDistillConfig& cfg, double r_lo, double r_hi) {
  for (auto* p : {&syn.nonterminated, &syn.terminated}) {
    if (cfg.clamp_rewards) p->r = p->r.cwiseMax(r_lo).cwiseMin(r_hi);
    clamp_rows(p->s, cfg.state_radius);
    clamp_rows(p->sn, cfg.state_radius);
  }
}

/// Flattens the optimised blocks. The next states of terminated rows do not
/// enter the loss and are left out.
inline Vector pack(const SyntheticOfflineDataset& d) {
  std::vector<double> buf;
  auto put = [&buf](const Matrix& x) { buf.insert(buf.end(), x.data(), x.data() + x.size()); };
  put(d.nonterminated.s);
  put(d.nonterminated.a);
  put(d.nonterminated.r);
  put(d.nonterminated.sn);
  put(d.terminated.s);
  put(d.terminated.a);
  put(d.terminated.r);
  return Eigen::Map<Vector>(buf.data(), static_cast<Eigen::Index>(buf.size()));
}

inline void unpack(const Vector& v, SyntheticOfflineDataset& d) {
  Eigen::Index o = 0;
  auto get = [&](auto& x) {
    std::copy(v.data() + o, v.data() + o + x.size(), x.data());
    o += x.size();
  };
  get(d.nonterminated.s);
  get(d.nonterminated.a);
  get(d.nonterminated.r);
  get(d.nonterminated.sn);
  get(d.terminated.s);
  get(d.terminated.a);
  get(d.terminated.r);
}

}  // namespace detail

/// Initial synthetic set: a random subsample of each partition, sized by
/// allocate_terminated.
inline SyntheticOfflineDataset init_synthetic(const RelaxedTransitions& train, std::size_t m, std::uint64_t seed) {
  require(m >= 1, "synthetic size must be >= 1");
  require(m <= train.size(), "synthetic size exceeds the training set");
  const auto nt = train.partition(false), te = train.partition(true);
  const auto mt = allocate_terminated(m, te.size(), train.size());
  Rng rng(seed);
  SyntheticOfflineDataset syn;
  syn.train_nonterminated = nt.size();
  syn.train_terminated = te.size();
  auto draw = [&rng](const RelaxedTransitions& part, std::size_t count) {
    return part.rows(count ? sample_without_replacement(part.size(), count, rng) : std::vector<std::size_t>{});
  };
  syn.nonterminated = draw(nt, m - mt);
  syn.terminated = draw(te, mt);
  return syn;
}

inline std::pair<SyntheticOfflineDataset, RlDistillReport> distill_rl(const RelaxedTransitions& train,
                                                                      const RlDistillConfig& cfg,
                                                                      const SyntheticEvaluator& evaluate = {}) {
  require(!cfg.lr_grid.empty(), "learning-rate grid is empty");
  for (double lr : cfg.lr_grid) require(lr > 0.0, "learning rates must be positive");
  if (cfg.mean_constraint &&
      (cfg.arch.kind != QPredictor::Kind::linear || cfg.arch.fmap.mode == FeatureMode::interaction))
    throw ConfigError("mean constraint needs linear predictors over a linear decomposable feature map");
  if (cfg.m > train.size()) throw ConfigError("synthetic size exceeds the training set");

  RlDistillReport rep;
  rep.config = cfg;
  rep.ensemble_seed = derive_seed(cfg.seed, "rl-ensemble");
  rep.init_seed = derive_seed(cfg.seed, "rl-init-subsample");
  rep.reward_lo = train.r.minCoeff();
  rep.reward_hi = train.r.maxCoeff();

  const BellmanMatcher matcher(train, sample_q_ensemble(cfg.arch, train.state_dim(), train.action_count(), cfg.sigma,
                                                        cfg.k, rep.ensemble_seed),
                               cfg.gamma);
  SyntheticOfflineDataset init = init_synthetic(train, cfg.m, rep.init_seed);
  rep.m_terminated = init.terminated.size();
  rep.m_nonterminated = init.nonterminated.size();
  auto enforce = [&](SyntheticOfflineDataset& syn) {
    detail::project_synthetic(syn, cfg, rep.reward_lo, rep.reward_hi);
    if (cfg.mean_constraint) {
      // Per-partition shift keeps the terminated flags and partition sizes intact.
      const auto nt = train.partition(false), te = train.partition(true);
      if (syn.nonterminated.size())
        syn.nonterminated = mean_constraint_project(syn.nonterminated, nt, cfg.arch.fmap, rep.reward_lo, rep.reward_hi).syn;
      if (syn.terminated.size())
        syn.terminated = mean_constraint_project(syn.terminated, te, cfg.arch.fmap, rep.reward_lo, rep.reward_hi).syn;
    }
  };
  enforce(init);
  rep.initial_objective = matcher.objective(init);

  for (double lr : cfg.lr_grid) {
    RlLrRun run;
    run.lr = lr;
    SyntheticOfflineDataset cur = init;
    run.synthetic = init;
    run.best_objective = rep.initial_objective;
    run.objective_trace.push_back(rep.initial_objective);
    Vector params = detail::pack(cur);
    AdamState<Vector> adam(params);
    for (std::size_t step = 1; step <= cfg.max_steps; ++step) {
      const SyntheticOfflineDataset g = matcher.gradient(cur);
      adam_update(params, detail::pack(g), adam, lr);
      detail::unpack(params, cur);
      enforce(cur);
      params = detail::pack(cur);
      const double obj = matcher.objective(cur);
      run.objective_trace.push_back(obj);
      if (obj < run.best_objective) {
        run.best_objective = obj;
        run.best_step = step;
        run.synthetic = cur;
      }
    }
    if (evaluate) run.eval_return = evaluate(run.synthetic);
    rep.runs.push_back(std::move(run));
  }

  for (std::size_t i = 1; i < rep.runs.size(); ++i) {
    const auto& a = rep.runs[i];
    const auto& b = rep.runs[rep.chosen];
    const bool better = (a.eval_return && b.eval_return && *a.eval_return != *b.eval_return)
                            ? *a.eval_return > *b.eval_return
                            : a.best_objective < b.best_objective;
    if (better) rep.chosen = i;
  }
  return {rep.runs[rep.chosen].synthetic, rep};
}

}  // namespace distillkit
