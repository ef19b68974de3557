#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "distillkit/data.hpp"
#include "distillkit/errors.hpp"

namespace distillkit {

// Adversarial construction showing that fewer than q(q+1)/2 homogeneous
// regressors cannot certify a synthetic dataset.

struct SymmetricWitness {
  Matrix a;  // symmetric q x q, <A, v v^T> = 0 for the supplied v
  double operator_norm = 0.0;
};

struct CounterexampleBundle {
  Matrix d_train;  // q x q, rows are points
  Matrix d_syn;    // q x q
  Vector f0;       // unit vector
  double gap = 0.0;
};

struct LowerBoundReport {
  double max_equal_dev = 0.0;  // max_t (L_train - L_syn)^2 over supplied regressors
  double max_abs_diff = 0.0;   // max_t |L_train - L_syn|
  double gap = 0.0;            // (L_train - L_syn)^2 at f0
  double gap_target = 0.0;     // 1 / (4 q^2)
  bool pass = false;
};

inline std::size_t sym_dim(std::size_t q) { return q * (q + 1) / 2; }

/// Isometric vectorization of v v^T: diagonal entries as is, off-diagonals
/// scaled by sqrt(2), so dot products equal Frobenius inner products.
inline Vector vec_outer(const Vector& v) {
  const auto q = v.size();
  Vector out(static_cast<Eigen::Index>(sym_dim(static_cast<std::size_t>(q))));
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < q; ++i)
    for (Eigen::Index j = i; j < q; ++j) out(k++) = (i == j ? 1.0 : std::sqrt(2.0)) * v(i) * v(j);
  return out;
}

inline Matrix unvec_sym(const Vector& x, Eigen::Index q) {
  Matrix a(q, q);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < q; ++i)
    for (Eigen::Index j = i; j < q; ++j) {
      const double val = i == j ? x(k) : x(k) / std::sqrt(2.0);
      a(i, j) = a(j, i) = val;
      ++k;
    }
  return a;
}

inline double spectral_norm_sym(const Matrix& a) {
  return Eigen::SelfAdjointEigenSolver<Matrix>(a, Eigen::EigenvaluesOnly).eigenvalues().cwiseAbs().maxCoeff();
}

/// Non-zero symmetric A with v_t^T A v_t = 0 for every supplied v_t, scaled to
/// operator norm 1/2.
inline SymmetricWitness null_symmetric(const std::vector<Vector>& regressors, std::size_t q) {
  require(q >= 1, "dimension must be >= 1");
  const std::size_t p = sym_dim(q);
  if (regressors.size() >= p)
    throw ConfigError("no witness guaranteed: need T < q(q+1)/2 = " + std::to_string(p) + " regressors, got " +
                      std::to_string(regressors.size()));

  // Padded to p x p so the full right singular basis is available; the padding
  // rows only add zero singular values.
  const auto pi = static_cast<Eigen::Index>(p);
  Matrix c = Matrix::Zero(pi, pi);
  for (std::size_t t = 0; t < regressors.size(); ++t) {
    require_dims(regressors[t].size() == static_cast<Eigen::Index>(q), "regressor dimension mismatch");
    c.row(static_cast<Eigen::Index>(t)) = vec_outer(regressors[t]).transpose();
  }

  Vector null_vec;
  if (regressors.empty()) {
    null_vec = Vector::Unit(pi, 0);
  } else {
    Eigen::JacobiSVD<Matrix> svd(c, Eigen::ComputeFullV);
    const Vector& sv = svd.singularValues();
    const double smallest = sv(pi - 1);
    if (smallest > 1e-8 * std::max(1.0, sv(0)))
      throw Error("internal: constraint matrix has no numerical null space");
    // Lowest index among the columns tied at the minimum.
    const double tie = 1e-12 * std::max(1.0, sv(0));
    Eigen::Index pick = pi - 1;
    for (Eigen::Index i = 0; i < pi; ++i)
      if (sv(i) - smallest <= tie) {
        pick = i;
        break;
      }
    null_vec = svd.matrixV().col(pick);
  }

  SymmetricWitness w;
  w.a = unvec_sym(null_vec, static_cast<Eigen::Index>(q));
  const double nrm = spectral_norm_sym(w.a);
  if (!(nrm > 0.0)) throw Error("internal: zero witness");
  w.a *= 0.5 / nrm;
  w.operator_norm = spectral_norm_sym(w.a);
  return w;
}

inline SymmetricWitness null_symmetric(const std::vector<Vector>& regressors) {
  require(!regressors.empty(), "dimension cannot be inferred from an empty regressor set");
  return null_symmetric(regressors, static_cast<std::size_t>(regressors.front().size()));
}

/// Train set e_1..e_q, synthetic rows sqrt(lambda_i) u_i from I + A, and f0 the
/// top-magnitude eigenvector of A.
inline CounterexampleBundle construct_counterexample(const SymmetricWitness& w) {
  const auto q = w.a.rows();
  require_dims(w.a.cols() == q && q >= 1, "witness must be square");
  CounterexampleBundle b;
  b.d_train = Matrix::Identity(q, q);

  Eigen::SelfAdjointEigenSolver<Matrix> eb(Matrix::Identity(q, q) + w.a);
  b.d_syn.resize(q, q);
  for (Eigen::Index i = 0; i < q; ++i)
    b.d_syn.row(i) = std::sqrt(std::max(0.0, eb.eigenvalues()(i))) * eb.eigenvectors().col(i).transpose();

  Eigen::SelfAdjointEigenSolver<Matrix> ea(w.a);
  // Magnitude ties go to the larger signed eigenvalue; sign fixed by the first
  // non-negligible component.
  const Vector& ev = ea.eigenvalues();
  const double top_abs = ev.cwiseAbs().maxCoeff();
  Eigen::Index top = 0;
  for (Eigen::Index i = 0; i < q; ++i)
    if (std::abs(ev(i)) >= top_abs - 1e-12 && (std::abs(ev(top)) < top_abs - 1e-12 || ev(i) > ev(top))) top = i;
  b.f0 = ea.eigenvectors().col(top).normalized();
  for (Eigen::Index i = 0; i < q; ++i)
    if (std::abs(b.f0(i)) > 1e-12) {
      if (b.f0(i) < 0) b.f0 = -b.f0;
      break;
    }
  const double quad = b.f0.dot(w.a * b.f0);
  b.gap = quad * quad / static_cast<double>(q * q);
  return b;
}

inline double homogeneous_loss(const Matrix& points, const Vector& v) {
  return (points * v).squaredNorm() / static_cast<double>(points.rows());
}

inline LowerBoundReport verify(const CounterexampleBundle& b, const std::vector<Vector>& regressors) {
  const auto q = b.d_train.cols();
  require_dims(b.d_syn.cols() == q && b.f0.size() == q, "bundle dimensions disagree");
  LowerBoundReport rep;
  for (const auto& v : regressors) {
    require_dims(v.size() == q, "regressor dimension mismatch");
    const double diff = homogeneous_loss(b.d_train, v) - homogeneous_loss(b.d_syn, v);
    rep.max_abs_diff = std::max(rep.max_abs_diff, std::abs(diff));
    rep.max_equal_dev = std::max(rep.max_equal_dev, diff * diff);
  }
  const double g = homogeneous_loss(b.d_train, b.f0) - homogeneous_loss(b.d_syn, b.f0);
  rep.gap = g * g;
  rep.gap_target = 1.0 / (4.0 * static_cast<double>(q * q));
  rep.pass = rep.max_equal_dev <= 1e-9 && rep.gap >= rep.gap_target - 1e-9;
  return rep;
}

}  // namespace distillkit
