#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "distillkit/envs.hpp"
#include "distillkit/errors.hpp"
#include "distillkit/nn.hpp"
#include "distillkit/qfunction.hpp"
#include "distillkit/rng.hpp"

namespace distillkit {

struct FqiConfig {
  std::size_t iterations = 50;
  std::size_t inner_epochs = 200;
  double inner_lr = 1e-3;
  std::size_t batch_size = 0;  // 0: full batch up to 200 rows, else 256
  double gamma = 0.99;
  std::uint64_t seed = 0;
  std::size_t h1 = 10;
  std::size_t h2 = 10;
  bool warm_start = true;
  bool standardize_states = true;  // scale network inputs by the dataset's state statistics
};

struct FqiResult {
  QPredictor q;
  std::vector<double> fit_loss;  // training MSE at the end of each outer iteration
};

inline std::size_t effective_batch(const FqiConfig& cfg, std::size_t n) {
  if (cfg.batch_size > 0) return std::min(cfg.batch_size, n);
  return n <= 200 ? n : 256;
}

/// Regression targets r + gamma max_a' Q(s', a'), or r on terminated rows.
inline Vector fqi_targets(const RelaxedTransitions& ds, const QPredictor* q_old, double gamma) {
  Vector y = ds.r;
  if (!q_old) return y;
  const Matrix qn = q_old->action_values(ds.sn);
  for (Eigen::Index i = 0; i < y.size(); ++i)
    if (!ds.terminated[static_cast<std::size_t>(i)]) y(i) += gamma * qn.row(i).maxCoeff();
  return y;
}

/// Fitted-Q iteration: Q_0 = 0, then each outer iteration regresses a network
/// on targets built from the frozen previous iterate.
inline FqiResult fqi_train(const RelaxedTransitions& ds, const FqiConfig& cfg) {
  require(ds.size() >= 1, "FQI needs a nonempty dataset");
  require(cfg.iterations >= 1 && cfg.inner_epochs >= 1, "FQI iteration counts must be positive");
  require(cfg.inner_lr > 0.0, "FQI learning rate must be positive");
  require(cfg.gamma >= 0.0 && cfg.gamma < 1.0, "gamma must lie in [0, 1)");
  const std::size_t d = ds.state_dim(), na = ds.action_count();
  const MlpShape shape{d + na, cfg.h1, cfg.h2};
  Rng rng(derive_seed(cfg.seed, "fqi"));

  FqiResult res;
  QPredictor q = QPredictor::mlp(mlp_init_he(shape, rng), d, na);
  if (cfg.standardize_states) {
    q.state_shift = ds.s.colwise().mean().transpose();
    q.state_scale = ((ds.s.rowwise() - q.state_shift.transpose()).array().square().colwise().mean().sqrt()).transpose();
    for (Eigen::Index j = 0; j < q.state_scale.size(); ++j)
      if (!(q.state_scale(j) > 1e-12)) q.state_scale(j) = 1.0;
  }
  const Matrix x = q.net_input(ds.s, ds.a);
  const std::size_t n = ds.size(), bs = effective_batch(cfg, n);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Matrix xb;
  Vector yb;

  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    const Vector y = fqi_targets(ds, it == 0 ? nullptr : &q, cfg.gamma);
    if (!cfg.warm_start && it > 0) q.net = mlp_init_he(shape, rng);
    MlpOptimizer opt(q.net);
    for (std::size_t ep = 0; ep < cfg.inner_epochs; ++ep) {
      if (bs < n) {
        for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.uniform_index(i + 1)]);
      }
      for (std::size_t start = 0; start < n; start += bs) {
        const std::size_t len = std::min(bs, n - start);
        if (bs == n) {
          opt.step(q.net, mlp_grad_weights(q.net, x, y).grad, cfg.inner_lr);
          continue;
        }
        xb.resize(static_cast<Eigen::Index>(len), x.cols());
        yb.resize(static_cast<Eigen::Index>(len));
        for (std::size_t b = 0; b < len; ++b) {
          xb.row(static_cast<Eigen::Index>(b)) = x.row(static_cast<Eigen::Index>(order[start + b]));
          yb(static_cast<Eigen::Index>(b)) = y(static_cast<Eigen::Index>(order[start + b]));
        }
        opt.step(q.net, mlp_grad_weights(q.net, xb, yb).grad, cfg.inner_lr);
      }
    }
    res.fit_loss.push_back((q.net.forward_batch(x) - y).squaredNorm() / static_cast<double>(n));
  }
  res.q = std::move(q);
  return res;
}

inline FqiResult fqi_train(const OfflineRLDataset& ds, const FqiConfig& cfg) { return fqi_train(to_relaxed(ds), cfg); }

struct EvalResult {
  std::vector<double> returns;
  double mean = 0.0;
  double std = 0.0;  // population
  double max = 0.0;
};

inline EvalResult summarize_returns(std::vector<double> returns) {
  require(!returns.empty(), "no returns to summarize");
  EvalResult r;
  r.returns = std::move(returns);
  const double n = static_cast<double>(r.returns.size());
  r.mean = std::accumulate(r.returns.begin(), r.returns.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : r.returns) ss += (v - r.mean) * (v - r.mean);
  r.std = std::sqrt(ss / n);
  r.max = *std::max_element(r.returns.begin(), r.returns.end());
  return r;
}

/// Undiscounted returns; episode e resets from derive_seed(seed, e).
inline EvalResult evaluate_policy(EnvKind kind, const Policy& policy, std::size_t episodes, std::uint64_t seed) {
  require(episodes >= 1, "need at least one evaluation episode");
  Env env(kind);
  std::vector<double> returns;
  for (std::size_t e = 0; e < episodes; ++e) {
    Vector s = env.reset(derive_seed(seed, static_cast<std::uint64_t>(e)));
    double total = 0.0;
    for (;;) {
      const EnvStep st = env.step(policy(s));
      total += st.reward;
      if (st.terminated || st.truncated) break;
      s = st.obs;
    }
    returns.push_back(total);
  }
  return summarize_returns(std::move(returns));
}

}  // namespace distillkit
