#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstddef>
#include <fstream>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "distillkit/errors.hpp"
#include "distillkit/rng.hpp"

namespace distillkit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Dense regression data: one row per sample, label kept separately.
///
/// The norm bounds are derived from the data on construction and refreshed by
/// every operation that produces a new dataset.
struct RegressionDataset {
  Matrix features;             // n x d
  Vector labels;               // n
  double feature_bound = 0.0;  // max l2 row norm of features
  double label_bound = 0.0;    // max |label|

  std::size_t size() const { return static_cast<std::size_t>(features.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(features.cols()); }

  static RegressionDataset from(Matrix x, Vector y) {
    require_dims(x.rows() == y.size(), "features and labels have different row counts");
    require_dims(x.rows() >= 1 && x.cols() >= 1, "dataset needs n >= 1 and d >= 1");
    RegressionDataset ds{std::move(x), std::move(y)};
    ds.refresh_bounds();
    return ds;
  }

  void refresh_bounds() {
    feature_bound = features.rows() ? features.rowwise().norm().maxCoeff() : 0.0;
    label_bound = labels.size() ? labels.cwiseAbs().maxCoeff() : 0.0;
  }

  RegressionDataset rows(std::span<const std::size_t> idx) const {
    Matrix x(static_cast<Eigen::Index>(idx.size()), features.cols());
    Vector y(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) {
      require(idx[i] < size(), "row index out of range");
      x.row(static_cast<Eigen::Index>(i)) = features.row(static_cast<Eigen::Index>(idx[i]));
      y(static_cast<Eigen::Index>(i)) = labels(static_cast<Eigen::Index>(idx[i]));
    }
    return from(std::move(x), std::move(y));
  }
};

/// Features with the label appended as the last coordinate: z = (x, y).
inline Matrix homogenize(const RegressionDataset& ds) {
  Matrix z(ds.features.rows(), ds.features.cols() + 1);
  z.leftCols(ds.features.cols()) = ds.features;
  z.col(ds.features.cols()) = ds.labels;
  return z;
}

inline RegressionDataset dehomogenize(const Matrix& z) {
  require_dims(z.cols() >= 2, "homogeneous points need at least two coordinates");
  return RegressionDataset::from(z.leftCols(z.cols() - 1), z.col(z.cols() - 1));
}

// ---------------------------------------------------------------------------
// Loading

enum class CsvFormat { wine, housing, generic };

struct LoadOptions {
  CsvFormat format = CsvFormat::generic;
  bool has_header = false;  // generic only
  int label_column = -1;    // generic only; negative counts from the end
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::string_view unquote(std::string_view s) {
  s = trim(s);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

inline std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delim, start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t b = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > b) out.push_back(line.substr(b, i - b));
  }
  return out;
}

inline double parse_number(std::string_view tok, std::size_t row) {
  tok = unquote(tok);
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size() || tok.empty())
    throw ParseError(row, "cannot parse number '" + std::string(tok) + "'");
  if (!std::isfinite(v)) throw ParseError(row, "non-finite value '" + std::string(tok) + "'");
  return v;
}

}  // namespace detail

/// Parses an in-memory table. `text` holds the full file contents.
inline RegressionDataset parse_regression(std::string_view text, const LoadOptions& opt) {
  std::vector<std::vector<double>> rows;
  std::size_t label_col = 0;
  std::size_t ncols = 0;
  bool header_pending = opt.format == CsvFormat::wine || (opt.format == CsvFormat::generic && opt.has_header);

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = detail::trim(text.substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;
    if (line.empty()) {
      if (nl == text.size()) break;
      continue;
    }

    std::vector<std::string_view> toks;
    switch (opt.format) {
      case CsvFormat::wine: toks = detail::split(line, ';'); break;
      case CsvFormat::housing: toks = detail::split_ws(line); break;
      case CsvFormat::generic: toks = detail::split(line, ','); break;
    }

    if (header_pending) {
      header_pending = false;
      ncols = toks.size();
      if (opt.format == CsvFormat::wine) {
        auto it = std::find_if(toks.begin(), toks.end(),
                               [](std::string_view t) { return detail::unquote(t) == "quality"; });
        if (it == toks.end()) throw ParseError(line_no, "wine header has no 'quality' column");
        label_col = static_cast<std::size_t>(it - toks.begin());
      }
      continue;
    }

    if (opt.format == CsvFormat::housing && toks.size() != 14)
      throw ParseError(line_no, "expected 14 columns, got " + std::to_string(toks.size()));
    if (ncols == 0) ncols = toks.size();
    if (toks.size() != ncols)
      throw ParseError(line_no, "expected " + std::to_string(ncols) + " columns, got " + std::to_string(toks.size()));

    std::vector<double> vals;
    vals.reserve(toks.size());
    for (auto t : toks) vals.push_back(detail::parse_number(t, line_no));
    rows.push_back(std::move(vals));
    if (nl == text.size()) break;
  }

  if (rows.empty()) throw Error("no data rows");
  if (ncols < 2) throw ParseError(1, "need at least one feature column and one label column");

  if (opt.format == CsvFormat::housing) {
    label_col = 13;
  } else if (opt.format == CsvFormat::generic) {
    const int lc = opt.label_column < 0 ? static_cast<int>(ncols) + opt.label_column : opt.label_column;
    require(lc >= 0 && lc < static_cast<int>(ncols), "label column out of range");
    label_col = static_cast<std::size_t>(lc);
  }

  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto d = static_cast<Eigen::Index>(ncols - 1);
  Matrix x(n, d);
  Vector y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    Eigen::Index c = 0;
    for (std::size_t j = 0; j < ncols; ++j) {
      if (j == label_col)
        y(i) = r[j];
      else
        x(i, c++) = r[j];
    }
  }
  return RegressionDataset::from(std::move(x), std::move(y));
}

inline RegressionDataset load_csv_regression(const std::string& path, const LoadOptions& opt) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  if (detail::trim(text).empty()) throw Error(path + ": empty file");
  return parse_regression(text, opt);
}

/// Round-trippable decimal form.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Header x0..x{d-1},y; readable back with the generic format and has_header.
inline void write_regression_csv(std::ostream& os, const RegressionDataset& ds) {
  for (std::size_t j = 0; j < ds.dim(); ++j) os << 'x' << j << ',';
  os << "y\n";
  for (Eigen::Index i = 0; i < ds.features.rows(); ++i) {
    for (Eigen::Index j = 0; j < ds.features.cols(); ++j) os << format_double(ds.features(i, j)) << ',';
    os << format_double(ds.labels(i)) << '\n';
  }
}

inline CsvFormat parse_format(std::string_view name) {
  if (name == "wine") return CsvFormat::wine;
  if (name == "housing") return CsvFormat::housing;
  if (name == "generic") return CsvFormat::generic;
  throw ConfigError("unknown dataset format '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Standardization

/// Per-column statistics over the homogeneous columns (features then label).
struct StandardizationParams {
  Vector mean;                 // d+1
  Vector stddev;               // d+1; 1 for constant columns
  std::vector<bool> constant;  // d+1
};

/// Zero mean / unit population stddev per column. Constant columns are only
/// shifted and flagged.
inline std::pair<RegressionDataset, StandardizationParams> standardize(const RegressionDataset& ds) {
  require(ds.size() >= 2, "standardize needs at least two rows");
  Matrix z = homogenize(ds);
  const auto n = static_cast<double>(z.rows());
  StandardizationParams p;
  p.mean = z.colwise().mean().transpose();
  p.stddev.resize(z.cols());
  p.constant.assign(static_cast<std::size_t>(z.cols()), false);
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    z.col(j).array() -= p.mean(j);
    const double sd = std::sqrt(z.col(j).squaredNorm() / n);
    if (sd > 0.0 && z.col(j).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, std::abs(p.mean(j)))) {
      p.stddev(j) = sd;
      z.col(j) /= sd;
    } else {
      p.stddev(j) = 1.0;
      p.constant[static_cast<std::size_t>(j)] = true;
      z.col(j).setZero();
    }
  }
  return {dehomogenize(z), std::move(p)};
}

inline RegressionDataset inverse_standardize(const RegressionDataset& ds, const StandardizationParams& p) {
  Matrix z = homogenize(ds);
  require_dims(z.cols() == p.mean.size(), "standardization parameters do not match dataset width");
  for (Eigen::Index j = 0; j < z.cols(); ++j) z.col(j) = (z.col(j).array() * p.stddev(j) + p.mean(j)).matrix();
  return dehomogenize(z);
}

// ---------------------------------------------------------------------------
// Splitting

/// Fisher-Yates permutation of 0..n-1.
inline std::vector<std::size_t> permutation(std::size_t n, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) std::swap(idx[i - 1], idx[rng.uniform_index(i)]);
  return idx;
}

/// Test part has floor(n * test_fraction) rows, train part the remainder.
inline std::pair<RegressionDataset, RegressionDataset> train_test_split(const RegressionDataset& ds,
                                                                        double test_fraction,
                                                                        std::uint64_t seed) {
  require(test_fraction > 0.0 && test_fraction < 1.0, "test_fraction must lie in (0, 1)");
  const std::size_t n = ds.size();
  const auto n_test = static_cast<std::size_t>(std::floor(static_cast<double>(n) * test_fraction + 1e-9));
  require(n_test >= 1 && n_test < n, "split leaves an empty partition");
  Rng rng(derive_seed(seed, "train_test_split"));
  const auto idx = permutation(n, rng);
  const std::span<const std::size_t> all(idx);
  return {ds.rows(all.subspan(0, n - n_test)), ds.rows(all.subspan(n - n_test))};
}

}  // namespace distillkit

namespace distillkit {

/// m distinct indices drawn uniformly from [0, n), in draw order.
inline std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t m, Rng& rng) {
  require(m >= 1 && m <= n, "subsample size must satisfy 1 <= m <= n");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < m; ++i) std::swap(idx[i], idx[i + rng.uniform_index(n - i)]);
  idx.resize(m);
  return idx;
}

}  // namespace distillkit
