#include <gtest/gtest.h>

#include <map>
#include <set>

#include "distillkit/baselines.hpp"
#include "distillkit/linreg_distill.hpp"

using namespace distillkit;

namespace {

RegressionDataset gaussian_ds(std::size_t n, std::size_t d, Rng& rng) {
  Matrix x(n, d);
  Vector y(n);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = rng.normal();
    y(i) = rng.normal();
  }
  return RegressionDataset::from(x, y);
}

RegressionDataset indexed_ds(std::size_t n) {
  Matrix x(n, 1);
  Vector y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    y(i) = static_cast<double>(i);
  }
  return RegressionDataset::from(x, y);
}

std::multiset<double> label_set(const RegressionDataset& ds) { return {ds.labels.begin(), ds.labels.end()}; }

}  // namespace

TEST(RandomSubsample, FullSizeIsPermutation) {
  const auto ds = indexed_ds(9);
  Rng rng(1);
  EXPECT_EQ(label_set(random_subsample(ds, 9, rng)), label_set(ds));
  const auto one = indexed_ds(1);
  EXPECT_EQ(random_subsample(one, 1, rng).labels, one.labels);
  EXPECT_THROW(random_subsample(ds, 10, rng), ConfigError);
}

TEST(RandomSubsample, PairFrequenciesUniform) {
  const auto ds = indexed_ds(4);
  Rng rng(2);
  std::map<std::pair<int, int>, int> freq;
  const int trials = 10000;
  for (int t = 0; t < trials; ++t) {
    const auto s = random_subsample(ds, 2, rng);
    int a = static_cast<int>(s.labels(0)), b = static_cast<int>(s.labels(1));
    if (a > b) std::swap(a, b);
    ++freq[{a, b}];
  }
  ASSERT_EQ(freq.size(), 6u);
  const double p = 1.0 / 6.0, sigma = std::sqrt(trials * p * (1 - p));
  for (const auto& [pair, c] : freq) EXPECT_LT(std::abs(c - trials * p), 3 * sigma);
}

TEST(Leverage, IdentityScoresAreOne) {
  const auto prof = leverage_scores(Matrix::Identity(5, 5));
  EXPECT_EQ(prof.rank, 5u);
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(prof.scores(i), 1.0, 1e-12);
}

TEST(Leverage, DuplicateRowsShareScore) {
  Matrix x(3, 2);
  x << 1.0, 2.0, 1.0, 2.0, -0.5, 3.0;
  const auto prof = leverage_scores(x);
  EXPECT_NEAR(prof.scores(0), prof.scores(1), 1e-12);
  EXPECT_EQ(prof.rank, 2u);
}

TEST(Leverage, ZeroMatrix) {
  const auto prof = leverage_scores(Matrix::Zero(4, 3));
  EXPECT_EQ(prof.rank, 0u);
  EXPECT_EQ(prof.scores, Vector::Zero(4));
}

TEST(Leverage, SumEqualsRankAndMatchesHatMatrix) {
  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    const Eigen::Index n = 5 + static_cast<Eigen::Index>(rng.uniform_index(20));
    const Eigen::Index p = 1 + static_cast<Eigen::Index>(rng.uniform_index(6));
    const Eigen::Index r = std::min<Eigen::Index>(p, 1 + static_cast<Eigen::Index>(rng.uniform_index(p)));
    Matrix a(n, r), b(r, p);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.normal();
    for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = rng.normal();
    const Matrix x = a * b;
    const auto prof = leverage_scores(x);
    EXPECT_EQ(prof.rank, static_cast<std::size_t>(r));
    EXPECT_NEAR(prof.scores.sum(), static_cast<double>(r), 1e-8);
    EXPECT_GE(prof.scores.minCoeff(), -1e-12);
    EXPECT_LE(prof.scores.maxCoeff(), 1.0 + 1e-12);
    // Oracle: diagonal of X (X^T X)^+ X^T through the complete orthogonal decomposition.
    const Matrix pinv = (x.transpose() * x).completeOrthogonalDecomposition().pseudoInverse();
    const Vector hat = (x * pinv * x.transpose()).diagonal();
    EXPECT_LT((hat - prof.scores).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(Leverage, PermutationInvariant) {
  Rng rng(4);
  Matrix x(6, 3);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(6);
  perm.indices() << 5, 2, 0, 4, 1, 3;
  const Vector s = leverage_scores(x).scores;
  const Vector sp = leverage_scores(perm * x).scores;
  EXPECT_LT((perm * s - sp).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(LeverageSubsample, EqualScoresLookUniform) {
  // Homogenized rows (+-1, +-1) in orthogonal pairs: all four scores are 1/2.
  Matrix x(4, 1);
  x << 1, 1, -1, -1;
  const auto ds = RegressionDataset::from(x, (Vector(4) << 1, -1, 1, -1).finished());
  const auto prof = leverage_scores(homogenize(ds));
  for (int i = 0; i < 4; ++i) ASSERT_NEAR(prof.scores(i), 0.5, 1e-12);
  Rng rng(5);
  std::map<std::pair<double, double>, int> counts;
  const int trials = 10000;
  for (int t = 0; t < trials; ++t) {
    const auto s = leverage_subsample(ds, 1, rng);
    ++counts[{s.features(0, 0), s.labels(0)}];
  }
  ASSERT_EQ(counts.size(), 4u);
  double chi2 = 0.0;
  for (const auto& [k, c] : counts) chi2 += std::pow(c - trials / 4.0, 2) / (trials / 4.0);
  EXPECT_LT(chi2, 16.27);  // chi^2_3 at p = 0.001
}

TEST(LeverageSubsample, ZeroScoreRowNeverChosen) {
  Matrix x(4, 2);
  x << 1, 0, 0, 1, 1, 1, 0, 0;
  const auto ds = RegressionDataset::from(x, (Vector(4) << 0, 0, 0, 0).finished());
  Rng rng(6);
  for (int t = 0; t < 500; ++t) {
    const auto s = leverage_subsample(ds, 3, rng);
    for (int i = 0; i < 3; ++i) EXPECT_GT(s.features.row(i).norm(), 0.0);
  }
  const auto all = leverage_subsample(ds, 4, rng);
  EXPECT_EQ(all.size(), 4u);
  EXPECT_THROW(leverage_subsample(ds, 5, rng), ConfigError);
}

TEST(MomentReduce, PreservesEveryHomogeneousLoss) {
  Rng rng(7);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const auto syn = gaussian_ds(50, 5, rng);
    const auto red = moment_reduce(syn);
    ASSERT_EQ(red.size(), 6u);
    const Matrix m1 = homogenize(syn).transpose() * homogenize(syn) / 50.0;
    const Matrix m2 = homogenize(red).transpose() * homogenize(red) / 6.0;
    EXPECT_LT((m1 - m2).cwiseAbs().maxCoeff(), 1e-10);
    for (int j = 0; j < 100; ++j) {
      const auto h = sample_regressor_g(5, rng);
      worst = std::max(worst, std::abs(mse_loss(red, h) - mse_loss(syn, h)));
    }
    const double bound = std::sqrt(6.0) * std::sqrt(std::pow(syn.feature_bound, 2) + std::pow(syn.label_bound, 2));
    EXPECT_LE(homogenize(red).rowwise().norm().maxCoeff(), bound + 1e-9);
  }
  EXPECT_LT(worst, 1e-9);
}

TEST(MomentReduce, RepeatedPointIsRankOne) {
  const Vector p = (Vector(3) << 0.6, -0.8, 2.0).finished();
  Matrix x(7, 2);
  Vector y(7);
  for (int i = 0; i < 7; ++i) {
    x.row(i) = p.head(2).transpose();
    y(i) = p(2);
  }
  const Matrix z = homogenize(moment_reduce(RegressionDataset::from(x, y)));
  int nonzero = 0;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    if (z.row(i).norm() < 1e-7) continue;
    ++nonzero;
    const Vector expected = std::sqrt(3.0) * p;
    EXPECT_LT(std::min((z.row(i).transpose() - expected).norm(), (z.row(i).transpose() + expected).norm()), 1e-10);
  }
  EXPECT_EQ(nonzero, 1);
}

TEST(MinSynthSize, BasisAndExtremes) {
  // sqrt(3) e_i rows: unit moment matrix.
  const Matrix z = std::sqrt(3.0) * Matrix::Identity(3, 3);
  const auto ds = dehomogenize(z);
  EXPECT_EQ(min_synth_size(ds, 1e-6, 1.0), 3u);
  EXPECT_EQ(min_synth_size(ds, 1e6, 1.0), 0u);
  EXPECT_THROW(min_synth_size(ds, 0.0, 1.0), ConfigError);
  EXPECT_THROW(min_synth_size(ds, 1.0, 3.0), ConfigError);
}

TEST(MinSynthSize, RankTwoData) {
  Rng rng(8);
  Matrix a(40, 2), b(2, 6);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.normal();
  for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = rng.normal();
  const Matrix z = a * b;
  const Vector ev =
      Eigen::SelfAdjointEigenSolver<Matrix>(z.transpose() * z / 40.0, Eigen::EigenvaluesOnly).eigenvalues();
  const double lam2 = ev(4), lam3 = ev(3);  // ascending order
  const double thr = std::sqrt(std::max(lam3, 1e-12) * lam2);
  const double eps = std::pow(thr, 2);  // sqrt(eps) / c^2 = thr with c = 1
  EXPECT_EQ(min_synth_size(dehomogenize(z), eps, 1.0), 2u);
}

TEST(MinSynthSize, MonotoneInEps) {
  Rng rng(9);
  const auto ds = gaussian_ds(30, 4, rng);
  std::size_t prev = 1000;
  for (double eps = 1e-8; eps < 1e3; eps *= 3) {
    const auto s = min_synth_size(ds, eps, 1.5);
    EXPECT_LE(s, prev);
    prev = s;
  }
}
