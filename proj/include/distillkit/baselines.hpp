#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "distillkit/data.hpp"
#include "distillkit/errors.hpp"
#include "distillkit/rng.hpp"

namespace distillkit {

inline RegressionDataset random_subsample(const RegressionDataset& ds, std::size_t m, Rng& rng) {
  if (m > ds.size()) throw ConfigError("subsample size exceeds dataset size");
  return ds.rows(sample_without_replacement(ds.size(), m, rng));
}

struct LeverageProfile {
  Vector scores;  // diagonal of the hat matrix, each in [0, 1]
  std::size_t rank = 0;
};

/// score_i = x_i^T (X^T X)^+ x_i, read off the left singular vectors above the
/// numerical-rank tolerance max(n, p) * sigma_max * 1e-12.
inline LeverageProfile leverage_scores(const Matrix& x) {
  require_dims(x.rows() >= 1 && x.cols() >= 1, "leverage scores need a non-empty matrix");
  LeverageProfile prof;
  prof.scores = Vector::Zero(x.rows());
  if (x.cwiseAbs().maxCoeff() == 0.0) return prof;

  Eigen::JacobiSVD<Matrix> svd(x, Eigen::ComputeThinU);
  const Vector& sv = svd.singularValues();
  const double tol = static_cast<double>(std::max(x.rows(), x.cols())) * sv(0) * 1e-12;
  Eigen::Index r = 0;
  while (r < sv.size() && sv(r) > tol) ++r;
  prof.rank = static_cast<std::size_t>(r);
  prof.scores = svd.matrixU().leftCols(r).rowwise().squaredNorm();
  return prof;
}

/// Rows drawn without replacement with probability proportional to the
/// leverage scores of the homogenized data, renormalizing after each draw.
/// Zero-score rows are only taken once every positive-score row is used.
inline RegressionDataset leverage_subsample(const RegressionDataset& ds, std::size_t m, Rng& rng) {
  if (m > ds.size()) throw ConfigError("subsample size exceeds dataset size");
  require(m >= 1, "subsample size must be >= 1");
  const LeverageProfile prof = leverage_scores(homogenize(ds));
  if (prof.rank == 0) throw ConfigError("all leverage scores are zero");

  std::vector<double> w(prof.scores.data(), prof.scores.data() + prof.scores.size());
  std::vector<bool> taken(w.size(), false);
  std::vector<std::size_t> idx;
  idx.reserve(m);
  for (std::size_t draw = 0; draw < m; ++draw) {
    double total = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i)
      if (!taken[i]) total += w[i];
    std::size_t pick = w.size();
    if (total > 0.0) {
      double u = rng.uniform() * total;
      for (std::size_t i = 0; i < w.size(); ++i) {
        if (taken[i] || w[i] <= 0.0) continue;
        pick = i;
        u -= w[i];
        if (u < 0.0) break;
      }
    } else {
      std::vector<std::size_t> rest;
      for (std::size_t i = 0; i < w.size(); ++i)
        if (!taken[i]) rest.push_back(i);
      pick = rest[rng.uniform_index(rest.size())];
    }
    taken[pick] = true;
    idx.push_back(pick);
  }
  return ds.rows(idx);
}

/// Replaces a synthetic set by exactly d+1 points with the same second-moment
/// matrix, hence the same MSE loss under every homogeneous regressor.
/// Rows are sqrt(q * lambda_i) * u_i from the eigendecomposition of Z^T Z / m.
inline RegressionDataset moment_reduce(const RegressionDataset& syn) {
  const Matrix z = homogenize(syn);
  const auto q = z.cols();
  const Matrix moment = z.transpose() * z / static_cast<double>(z.rows());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(moment);
  Matrix out(q, q);
  for (Eigen::Index i = 0; i < q; ++i) {
    const double lam = std::max(0.0, eig.eigenvalues()(i));
    out.row(i) = std::sqrt(static_cast<double>(q) * lam) * eig.eigenvectors().col(i).transpose();
  }
  return dehomogenize(out);
}

/// Number of eigenvalues of the training second-moment matrix above
/// sqrt(eps) / c_hat^2, a lower bound on the synthetic size needed for
/// eps-accurate loss matching.
inline std::size_t min_synth_size(const RegressionDataset& train, double eps, double c_hat) {
  require(eps > 0.0, "eps must be positive");
  require(c_hat >= 1.0 && c_hat <= 2.0, "c_hat must lie in [1, 2]");
  const Matrix z = homogenize(train);
  const Matrix moment = z.transpose() * z / static_cast<double>(z.rows());
  const Vector ev = Eigen::SelfAdjointEigenSolver<Matrix>(moment, Eigen::EigenvaluesOnly).eigenvalues();
  const double threshold = std::sqrt(eps) / (c_hat * c_hat);
  return static_cast<std::size_t>((ev.array() > threshold).count());
}

}  // namespace distillkit
