#pragma once

#include <cmath>
#include <cstdint>

#include <Eigen/Dense>

#include "distillkit/errors.hpp"

namespace distillkit {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Moment accumulators for one optimized tensor (any dense Eigen type).
template <class T>
struct AdamState {
  T m;
  T v;
  std::int64_t step = 0;
  AdamConfig cfg;

  AdamState() = default;
  explicit AdamState(const T& like, AdamConfig c = {}) : m(T::Zero(like.rows(), like.cols())), v(m), cfg(c) {}
};

/// One bias-corrected Adam step, in place.
template <class T>
void adam_update(T& params, const T& grad, AdamState<T>& st, double lr) {
  require_dims(params.rows() == grad.rows() && params.cols() == grad.cols(), "adam: gradient shape mismatch");
  require_dims(st.m.rows() == params.rows() && st.m.cols() == params.cols(), "adam: state shape mismatch");
  const auto& c = st.cfg;
  ++st.step;
  st.m = c.beta1 * st.m + (1.0 - c.beta1) * grad;
  st.v = c.beta2 * st.v + (1.0 - c.beta2) * grad.cwiseProduct(grad);
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(st.step));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(st.step));
  params.array() -= lr * (st.m.array() / bc1) / ((st.v.array() / bc2).sqrt() + c.epsilon);
}

}  // namespace distillkit
