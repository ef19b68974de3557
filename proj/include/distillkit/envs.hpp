#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "distillkit/data.hpp"
#include "distillkit/errors.hpp"
#include "distillkit/rng.hpp"

namespace distillkit {

enum class EnvKind { cartpole, mountaincar, acrobot };

struct EnvSpec {
  EnvKind kind;
  std::string name;
  std::size_t state_dim;  // observation dimension
  std::size_t action_count;
  int max_episode_steps;
  double reward_min;
  double reward_max;
  std::string termination;
};

inline EnvSpec env_spec(EnvKind kind) {
  switch (kind) {
    case EnvKind::cartpole:
      return {kind, "cartpole", 4, 2, 500, 1.0, 1.0, "|x| > 2.4 or |theta| > 12 degrees"};
    case EnvKind::mountaincar:
      return {kind, "mountaincar", 2, 3, 200, -1.0, -1.0, "position >= 0.5"};
    case EnvKind::acrobot:
      return {kind, "acrobot", 6, 3, 500, -1.0, 0.0, "-cos(t1) - cos(t1 + t2) > 1"};
  }
  throw ConfigError("unknown environment");
}

inline EnvKind parse_env(std::string_view name) {
  if (name == "cartpole") return EnvKind::cartpole;
  if (name == "mountaincar") return EnvKind::mountaincar;
  if (name == "acrobot") return EnvKind::acrobot;
  throw ConfigError("unknown environment '" + std::string(name) + "' (expected cartpole, mountaincar or acrobot)");
}

struct StepResult {
  Vector state;  // next internal state
  double reward = 0.0;
  bool terminated = false;
};

namespace detail {

inline void require_finite(const Vector& s, std::size_t n, const char* who) {
  require_dims(static_cast<std::size_t>(s.size()) == n, std::string(who) + ": wrong state size");
  if (!s.allFinite()) throw ConfigError(std::string(who) + ": non-finite state");
}

inline void require_action(int a, int count, const char* who) {
  if (a < 0 || a >= count) throw ConfigError(std::string(who) + ": action out of range");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// CartPole

namespace cartpole {
constexpr double gravity = 9.8;
constexpr double masscart = 1.0;
constexpr double masspole = 0.1;
constexpr double total_mass = masscart + masspole;
constexpr double length = 0.5;  // half the pole length
constexpr double polemass_length = masspole * length;
constexpr double force_mag = 10.0;
constexpr double tau = 0.02;
constexpr double theta_threshold = 12.0 * 2.0 * std::numbers::pi / 360.0;
constexpr double x_threshold = 2.4;

inline bool terminal(const Vector& s) {
  return s(0) < -x_threshold || s(0) > x_threshold || s(2) < -theta_threshold || s(2) > theta_threshold;
}
}  // namespace cartpole

inline StepResult cartpole_step(const Vector& s, int action) {
  using namespace cartpole;
  detail::require_finite(s, 4, "cartpole_step");
  detail::require_action(action, 2, "cartpole_step");
  const double x = s(0), x_dot = s(1), theta = s(2), theta_dot = s(3);
  const double force = action == 1 ? force_mag : -force_mag;
  const double c = std::cos(theta), sn = std::sin(theta);
  const double temp = (force + polemass_length * theta_dot * theta_dot * sn) / total_mass;
  const double thetaacc = (gravity * sn - c * temp) / (length * (4.0 / 3.0 - masspole * c * c / total_mass));
  const double xacc = temp - polemass_length * thetaacc * c / total_mass;

  StepResult out;
  out.state.resize(4);
  out.state << x + tau * x_dot, x_dot + tau * xacc, theta + tau * theta_dot, theta_dot + tau * thetaacc;
  out.reward = 1.0;
  out.terminated = terminal(out.state);
  return out;
}

// ---------------------------------------------------------------------------
// MountainCar

namespace mountaincar {
constexpr double min_position = -1.2;
constexpr double max_position = 0.6;
constexpr double max_speed = 0.07;
constexpr double goal_position = 0.5;
constexpr double force = 0.001;
constexpr double gravity = 0.0025;
}  // namespace mountaincar

inline StepResult mountaincar_step(const Vector& s, int action) {
  using namespace mountaincar;
  detail::require_finite(s, 2, "mountaincar_step");
  detail::require_action(action, 3, "mountaincar_step");
  double position = s(0), velocity = s(1);
  velocity += (action - 1) * force + std::cos(3.0 * position) * (-gravity);
  velocity = std::clamp(velocity, -max_speed, max_speed);
  position += velocity;
  position = std::clamp(position, min_position, max_position);
  if (position == min_position && velocity < 0.0) velocity = 0.0;

  StepResult out;
  out.state.resize(2);
  out.state << position, velocity;
  out.reward = -1.0;
  out.terminated = position >= goal_position;
  return out;
}

// ---------------------------------------------------------------------------
// Acrobot (internal state: theta1, theta2, dtheta1, dtheta2)

namespace acrobot {
constexpr double dt = 0.2;
constexpr double link_length_1 = 1.0;
constexpr double link_mass_1 = 1.0;
constexpr double link_mass_2 = 1.0;
constexpr double link_com_pos_1 = 0.5;
constexpr double link_com_pos_2 = 0.5;
constexpr double link_moi = 1.0;
constexpr double max_vel_1 = 4.0 * std::numbers::pi;
constexpr double max_vel_2 = 9.0 * std::numbers::pi;
constexpr std::array<double, 3> torques{-1.0, 0.0, 1.0};

inline std::array<double, 4> dsdt(const std::array<double, 4>& s, double a) {
  constexpr double m1 = link_mass_1, m2 = link_mass_2, l1 = link_length_1;
  constexpr double lc1 = link_com_pos_1, lc2 = link_com_pos_2, i1 = link_moi, i2 = link_moi, g = 9.8;
  const double theta1 = s[0], theta2 = s[1], dtheta1 = s[2], dtheta2 = s[3];
  const double pi = std::numbers::pi;
  const double d1 = m1 * lc1 * lc1 + m2 * (l1 * l1 + lc2 * lc2 + 2 * l1 * lc2 * std::cos(theta2)) + i1 + i2;
  const double d2 = m2 * (lc2 * lc2 + l1 * lc2 * std::cos(theta2)) + i2;
  const double phi2 = m2 * lc2 * g * std::cos(theta1 + theta2 - pi / 2.0);
  const double phi1 = -m2 * l1 * lc2 * dtheta2 * dtheta2 * std::sin(theta2) -
                      2 * m2 * l1 * lc2 * dtheta2 * dtheta1 * std::sin(theta2) +
                      (m1 * lc1 + m2 * l1) * g * std::cos(theta1 - pi / 2.0) + phi2;
  const double ddtheta2 = (a + d2 / d1 * phi1 - m2 * l1 * lc2 * dtheta1 * dtheta1 * std::sin(theta2) - phi2) /
                          (m2 * lc2 * lc2 + i2 - d2 * d2 / d1);
  const double ddtheta1 = -(d2 * ddtheta2 + phi1) / d1;
  return {dtheta1, dtheta2, ddtheta1, ddtheta2};
}

inline double wrap(double x, double lo, double hi) {
  const double diff = hi - lo;
  while (x > hi) x -= diff;
  while (x < lo) x += diff;
  return x;
}

inline bool terminal(const Vector& s) { return -std::cos(s(0)) - std::cos(s(1) + s(0)) > 1.0; }

inline Vector observe(const Vector& s) {
  Vector o(6);
  o << std::cos(s(0)), std::sin(s(0)), std::cos(s(1)), std::sin(s(1)), s(2), s(3);
  return o;
}
}  // namespace acrobot

/// One RK4 step of the acrobot; `state` is the internal 4-vector.
inline StepResult acrobot_step(const Vector& s, int action) {
  using namespace acrobot;
  detail::require_finite(s, 4, "acrobot_step");
  detail::require_action(action, 3, "acrobot_step");
  const double a = torques[static_cast<std::size_t>(action)];
  const std::array<double, 4> y0{s(0), s(1), s(2), s(3)};
  auto shifted = [](const std::array<double, 4>& y, const std::array<double, 4>& k, double h) {
    return std::array<double, 4>{y[0] + h * k[0], y[1] + h * k[1], y[2] + h * k[2], y[3] + h * k[3]};
  };
  const auto k1 = dsdt(y0, a);
  const auto k2 = dsdt(shifted(y0, k1, dt / 2.0), a);
  const auto k3 = dsdt(shifted(y0, k2, dt / 2.0), a);
  const auto k4 = dsdt(shifted(y0, k3, dt), a);
  std::array<double, 4> y{};
  for (std::size_t i = 0; i < 4; ++i) y[i] = y0[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);

  StepResult out;
  out.state.resize(4);
  out.state << wrap(y[0], -std::numbers::pi, std::numbers::pi), wrap(y[1], -std::numbers::pi, std::numbers::pi),
      std::clamp(y[2], -max_vel_1, max_vel_1), std::clamp(y[3], -max_vel_2, max_vel_2);
  out.terminated = terminal(out.state);
  out.reward = out.terminated ? 0.0 : -1.0;
  return out;
}

// ---------------------------------------------------------------------------

struct EnvStep {
  Vector obs;
  double reward = 0.0;
  bool terminated = false;
  bool truncated = false;
};

/// Stateful episode wrapper around the step functions above.
class Env {
 public:
  explicit Env(EnvKind kind) : spec_(env_spec(kind)) {}

  const EnvSpec& spec() const { return spec_; }
  EnvKind kind() const { return spec_.kind; }

  Vector reset(Rng& rng) {
    switch (spec_.kind) {
      case EnvKind::cartpole:
        state_ = Vector(4);
        for (Eigen::Index i = 0; i < 4; ++i) state_(i) = rng.uniform(-0.05, 0.05);
        break;
      case EnvKind::mountaincar:
        state_ = Vector(2);
        state_ << rng.uniform(-0.6, -0.4), 0.0;
        break;
      case EnvKind::acrobot:
        state_ = Vector(4);
        for (Eigen::Index i = 0; i < 4; ++i) state_(i) = rng.uniform(-0.1, 0.1);
        break;
    }
    steps_ = 0;
    return observation();
  }

  Vector reset(std::uint64_t seed) {
    Rng rng(seed);
    return reset(rng);
  }

  EnvStep step(int action) {
    require(state_.size() > 0, "step called before reset");
    StepResult r;
    switch (spec_.kind) {
      case EnvKind::cartpole: r = cartpole_step(state_, action); break;
      case EnvKind::mountaincar: r = mountaincar_step(state_, action); break;
      case EnvKind::acrobot: r = acrobot_step(state_, action); break;
    }
    state_ = r.state;
    ++steps_;
    return {observation(), r.reward, r.terminated, !r.terminated && steps_ >= spec_.max_episode_steps};
  }

  Vector observation() const { return spec_.kind == EnvKind::acrobot ? acrobot::observe(state_) : state_; }
  const Vector& internal_state() const { return state_; }
  int elapsed_steps() const { return steps_; }

 private:
  EnvSpec spec_;
  Vector state_;
  int steps_ = 0;
};

using Policy = std::function<int(const Vector&)>;

// ---------------------------------------------------------------------------
// Offline data

struct Transition {
  Vector s;
  int a = 0;
  double r = 0.0;
  Vector s_next;
  bool terminated = false;
  bool truncated = false;
};

/// Column-oriented store of transitions (one row per transition).
struct OfflineRLDataset {
  Matrix states;
  std::vector<int> actions;
  Vector rewards;
  Matrix next_states;
  std::vector<std::uint8_t> terminated;
  std::vector<std::uint8_t> truncated;
  double gamma = 0.99;
  std::string env_name;
  std::size_t action_count = 0;

  std::size_t size() const { return actions.size(); }
  std::size_t state_dim() const { return static_cast<std::size_t>(states.cols()); }

  Transition at(std::size_t i) const {
    const auto r = static_cast<Eigen::Index>(i);
    return {states.row(r).transpose(), actions[i], rewards(r), next_states.row(r).transpose(), terminated[i] != 0,
            truncated[i] != 0};
  }

  static OfflineRLDataset from(const std::vector<Transition>& ts, std::size_t action_count, double gamma,
                               std::string env_name) {
    require(!ts.empty(), "offline dataset must be nonempty");
    require(gamma > 0.0 && gamma < 1.0, "gamma must lie in (0, 1)");
    const auto n = static_cast<Eigen::Index>(ts.size());
    const auto d = ts.front().s.size();
    OfflineRLDataset ds;
    ds.states.resize(n, d);
    ds.next_states.resize(n, d);
    ds.rewards.resize(n);
    ds.actions.resize(ts.size());
    ds.terminated.resize(ts.size());
    ds.truncated.resize(ts.size());
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& t = ts[static_cast<std::size_t>(i)];
      require_dims(t.s.size() == d && t.s_next.size() == d, "inconsistent state dimensions");
      require_dims(t.a >= 0 && static_cast<std::size_t>(t.a) < action_count, "action out of range");
      ds.states.row(i) = t.s.transpose();
      ds.next_states.row(i) = t.s_next.transpose();
      ds.rewards(i) = t.r;
      ds.actions[static_cast<std::size_t>(i)] = t.a;
      ds.terminated[static_cast<std::size_t>(i)] = t.terminated;
      ds.truncated[static_cast<std::size_t>(i)] = t.truncated;
    }
    ds.gamma = gamma;
    ds.env_name = std::move(env_name);
    ds.action_count = action_count;
    return ds;
  }

  OfflineRLDataset rows(const std::vector<std::size_t>& idx) const {
    std::vector<Transition> ts;
    ts.reserve(idx.size());
    for (auto i : idx) ts.push_back(at(i));
    return from(ts, action_count, gamma, env_name);
  }

  std::size_t terminated_count() const {
    return static_cast<std::size_t>(std::count(terminated.begin(), terminated.end(), 1));
  }
};

/// Transitions with real-valued action vectors (one-hot for recorded data,
/// free for synthetic data).
struct RelaxedTransitions {
  Matrix s;
  Matrix a;  // n x action_count
  Vector r;
  Matrix sn;
  std::vector<std::uint8_t> terminated;

  std::size_t size() const { return static_cast<std::size_t>(s.rows()); }
  std::size_t state_dim() const { return static_cast<std::size_t>(s.cols()); }
  std::size_t action_count() const { return static_cast<std::size_t>(a.cols()); }

  RelaxedTransitions rows(const std::vector<std::size_t>& idx) const {
    const auto m = static_cast<Eigen::Index>(idx.size());
    RelaxedTransitions out{Matrix(m, s.cols()), Matrix(m, a.cols()), Vector(m), Matrix(m, sn.cols()), {}};
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto src = static_cast<Eigen::Index>(idx[static_cast<std::size_t>(i)]);
      out.s.row(i) = s.row(src);
      out.a.row(i) = a.row(src);
      out.r(i) = r(src);
      out.sn.row(i) = sn.row(src);
      out.terminated.push_back(terminated[static_cast<std::size_t>(src)]);
    }
    return out;
  }

  /// Rows whose terminated flag equals `flag`.
  RelaxedTransitions partition(bool flag) const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < size(); ++i)
      if ((terminated[i] != 0) == flag) idx.push_back(i);
    return rows(idx);
  }
};

inline Matrix one_hot(const std::vector<int>& actions, std::size_t count) {
  Matrix a = Matrix::Zero(static_cast<Eigen::Index>(actions.size()), static_cast<Eigen::Index>(count));
  for (std::size_t i = 0; i < actions.size(); ++i) a(static_cast<Eigen::Index>(i), actions[i]) = 1.0;
  return a;
}

inline RelaxedTransitions to_relaxed(const OfflineRLDataset& ds) {
  return {ds.states, one_hot(ds.actions, ds.action_count), ds.rewards, ds.next_states, ds.terminated};
}

inline RelaxedTransitions concat(const RelaxedTransitions& x, const RelaxedTransitions& y) {
  if (x.size() == 0) return y;
  if (y.size() == 0) return x;
  require_dims(x.s.cols() == y.s.cols() && x.a.cols() == y.a.cols(), "cannot concatenate differing layouts");
  const auto n = x.s.rows() + y.s.rows();
  RelaxedTransitions out{Matrix(n, x.s.cols()), Matrix(n, x.a.cols()), Vector(n), Matrix(n, x.sn.cols()), x.terminated};
  out.s << x.s, y.s;
  out.a << x.a, y.a;
  out.r << x.r, y.r;
  out.sn << x.sn, y.sn;
  out.terminated.insert(out.terminated.end(), y.terminated.begin(), y.terminated.end());
  return out;
}

/// Rolls out `policy` for exactly n transitions, resetting on termination or
/// truncation. Truncated steps keep terminated = false.
inline std::vector<Transition> rollout(Env& env, const Policy& policy, std::size_t n, Rng& rng) {
  std::vector<Transition> out;
  out.reserve(n);
  Vector obs = env.reset(rng);
  while (out.size() < n) {
    const int a = policy(obs);
    const EnvStep st = env.step(a);
    out.push_back({obs, a, st.reward, st.obs, st.terminated, st.truncated});
    obs = (st.terminated || st.truncated) ? env.reset(rng) : st.obs;
  }
  return out;
}

inline OfflineRLDataset collect_random(EnvKind kind, std::size_t n, std::uint64_t seed, double gamma = 0.99) {
  require(n >= 1, "need at least one transition");
  Env env(kind);
  Rng rng(derive_seed(seed, "collect-random"));
  const auto count = env.spec().action_count;
  Policy random_policy = [&rng, count](const Vector&) { return static_cast<int>(rng.uniform_index(count)); };
  return OfflineRLDataset::from(rollout(env, random_policy, n, rng), count, gamma, env.spec().name);
}

// ---------------------------------------------------------------------------
// Tabular expert for MountainCar

struct TabularQ {
  int bins_pos = 40;
  int bins_vel = 40;
  std::vector<double> q;  // (pos bin, vel bin, action)

  TabularQ(int bp, int bv) : bins_pos(bp), bins_vel(bv), q(static_cast<std::size_t>(bp * bv * 3), 0.0) {}

  std::size_t cell(const Vector& s) const {
    using namespace mountaincar;
    auto bin = [](double v, double lo, double hi, int n) {
      const int b = static_cast<int>(std::floor((v - lo) / (hi - lo) * n));
      return std::clamp(b, 0, n - 1);
    };
    const int p = bin(s(0), min_position, max_position, bins_pos);
    const int v = bin(s(1), -max_speed, max_speed, bins_vel);
    return static_cast<std::size_t>(p * bins_vel + v);
  }

  double& at(std::size_t c, int a) { return q[c * 3 + static_cast<std::size_t>(a)]; }
  double at(std::size_t c, int a) const { return q[c * 3 + static_cast<std::size_t>(a)]; }

  /// Greedy action; ties go to the lowest index.
  int act(const Vector& s) const {
    const auto c = cell(s);
    int best = 0;
    for (int a = 1; a < 3; ++a)
      if (at(c, a) > at(c, best)) best = a;
    return best;
  }

  double max_value(const Vector& s) const {
    const auto c = cell(s);
    return std::max({at(c, 0), at(c, 1), at(c, 2)});
  }
};

struct ExpertConfig {
  int bins_pos = 40;
  int bins_vel = 40;
  int episodes = 20000;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  double learning_rate = 0.1;
  double gamma = 0.99;
  int check_seeds = 10;
  int required_successes = 8;
};

struct ExpertResult {
  TabularQ table;
  int successes = 0;  // greedy evaluation episodes that reached the goal
  std::vector<std::string> warnings;
};

inline ExpertResult train_tabular_expert_mountaincar(const ExpertConfig& cfg, std::uint64_t seed) {
  require(cfg.bins_pos >= 10 && cfg.bins_vel >= 10, "expert grid needs at least 10 bins per axis");
  require(cfg.episodes >= 0, "episode count must be nonnegative");
  ExpertResult res{TabularQ(cfg.bins_pos, cfg.bins_vel), 0, {}};
  TabularQ& tab = res.table;
  Env env(EnvKind::mountaincar);
  Rng rng(derive_seed(seed, "tabular-expert"));

  for (int ep = 0; ep < cfg.episodes; ++ep) {
    const double frac = cfg.episodes > 1 ? static_cast<double>(ep) / (cfg.episodes - 1) : 1.0;
    const double eps = cfg.epsilon_start + (cfg.epsilon_end - cfg.epsilon_start) * frac;
    Vector s = env.reset(rng);
    for (;;) {
      const int a = rng.uniform() < eps ? static_cast<int>(rng.uniform_index(3)) : tab.act(s);
      const EnvStep st = env.step(a);
      const double target = st.reward + (st.terminated ? 0.0 : cfg.gamma * tab.max_value(st.obs));
      double& qsa = tab.at(tab.cell(s), a);
      qsa += cfg.learning_rate * (target - qsa);
      if (st.terminated || st.truncated) break;
      s = st.obs;
    }
  }

  for (int e = 0; e < cfg.check_seeds; ++e) {
    Vector s = env.reset(derive_seed(seed, static_cast<std::uint64_t>(e)));
    for (;;) {
      const EnvStep st = env.step(tab.act(s));
      if (st.terminated) {
        ++res.successes;
        break;
      }
      if (st.truncated) break;
      s = st.obs;
    }
  }
  if (res.successes < cfg.required_successes) {
    res.warnings.push_back("expert reached the goal in " + std::to_string(res.successes) + "/" +
                           std::to_string(cfg.check_seeds) + " checks; training budget may be too small");
  }
  return res;
}

/// 5000 uniformly random transitions followed by 5000 expert transitions (by default).
inline OfflineRLDataset collect_mixed_mountaincar(const TabularQ& expert, std::size_t n_random, std::size_t n_expert,
                                                  std::uint64_t seed, double gamma = 0.99) {
  require(n_random + n_expert >= 1, "need at least one transition");
  Env env(EnvKind::mountaincar);
  Rng rng(derive_seed(seed, "collect-mixed"));
  Policy random_policy = [&rng](const Vector&) { return static_cast<int>(rng.uniform_index(3)); };
  Policy expert_policy = [&expert](const Vector& s) { return expert.act(s); };
  std::vector<Transition> ts;
  if (n_random > 0) ts = rollout(env, random_policy, n_random, rng);
  if (n_expert > 0) {
    auto more = rollout(env, expert_policy, n_expert, rng);
    ts.insert(ts.end(), more.begin(), more.end());
  }
  return OfflineRLDataset::from(ts, 3, gamma, "mountaincar");
}

// ---------------------------------------------------------------------------
// CSV: s0..s{D-1},a,r,sn0..sn{D-1},terminated,truncated

inline void write_offline_csv(std::ostream& os, const OfflineRLDataset& ds) {
  const auto d = ds.state_dim();
  for (std::size_t j = 0; j < d; ++j) os << 's' << j << ',';
  os << "a,r";
  for (std::size_t j = 0; j < d; ++j) os << ",sn" << j;
  os << ",terminated,truncated\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    for (std::size_t j = 0; j < d; ++j) os << format_double(ds.states(r, static_cast<Eigen::Index>(j))) << ',';
    os << ds.actions[i] << ',' << format_double(ds.rewards(r));
    for (std::size_t j = 0; j < d; ++j) os << ',' << format_double(ds.next_states(r, static_cast<Eigen::Index>(j)));
    os << ',' << int(ds.terminated[i]) << ',' << int(ds.truncated[i]) << '\n';
  }
}

/// Relaxed-action rows carry an extra "a_relaxed0..a_relaxed{A-1}" block.
inline void write_relaxed_csv(std::ostream& os, const RelaxedTransitions& t) {
  const auto d = t.state_dim(), na = t.action_count();
  for (std::size_t j = 0; j < d; ++j) os << 's' << j << ',';
  os << "a,r";
  for (std::size_t j = 0; j < d; ++j) os << ",sn" << j;
  os << ",terminated,truncated";
  for (std::size_t j = 0; j < na; ++j) os << ",a_relaxed" << j;
  os << '\n';
  for (Eigen::Index i = 0; i < t.s.rows(); ++i) {
    for (Eigen::Index j = 0; j < t.s.cols(); ++j) os << format_double(t.s(i, j)) << ',';
    Eigen::Index best = 0;
    t.a.row(i).maxCoeff(&best);
    os << best << ',' << format_double(t.r(i));
    for (Eigen::Index j = 0; j < t.sn.cols(); ++j) os << ',' << format_double(t.sn(i, j));
    os << ',' << int(t.terminated[static_cast<std::size_t>(i)]) << ",0";
    for (Eigen::Index j = 0; j < t.a.cols(); ++j) os << ',' << format_double(t.a(i, j));
    os << '\n';
  }
}

struct TransitionTable {
  RelaxedTransitions relaxed;  // one-hot actions unless the file has a relaxed block
  std::vector<int> actions;
  std::vector<std::uint8_t> truncated;
  bool has_relaxed = false;
};

inline TransitionTable parse_transitions_csv(std::string_view text, std::size_t action_count) {
  std::vector<std::vector<double>> rows;
  std::vector<std::string_view> header;
  std::size_t line_no = 0, pos = 0;
  while (pos < text.size()) {
    const auto end = std::min(text.find('\n', pos), text.size());
    const auto line = detail::trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    const auto cells = detail::split(line, ',');
    if (header.empty()) {
      header = cells;
      continue;
    }
    if (cells.size() != header.size())
      throw ParseError(line_no, "expected " + std::to_string(header.size()) + " columns, got " +
                                    std::to_string(cells.size()));
    std::vector<double> vals;
    vals.reserve(cells.size());
    for (auto c : cells) vals.push_back(detail::parse_number(c, line_no));
    rows.push_back(std::move(vals));
  }
  if (header.empty()) throw ConfigError("transition CSV is empty");
  if (rows.empty()) throw ConfigError("transition CSV holds no transitions");

  std::size_t d = 0;
  while (d < header.size() && header[d] == "s" + std::to_string(d)) ++d;
  const bool has_relaxed = header.size() == 2 * d + 4 + action_count;
  if (d == 0 || (header.size() != 2 * d + 4 && !has_relaxed)) throw ParseError(1, "unexpected transition CSV header");
  auto expect = [&](std::size_t col, const std::string& name) {
    if (header[col] != name) throw ParseError(1, "expected column '" + name + "' at position " + std::to_string(col));
  };
  expect(d, "a");
  expect(d + 1, "r");
  for (std::size_t j = 0; j < d; ++j) expect(d + 2 + j, "sn" + std::to_string(j));
  expect(2 * d + 2, "terminated");
  expect(2 * d + 3, "truncated");
  if (has_relaxed)
    for (std::size_t j = 0; j < action_count; ++j) expect(2 * d + 4 + j, "a_relaxed" + std::to_string(j));

  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto di = static_cast<Eigen::Index>(d), na = static_cast<Eigen::Index>(action_count);
  TransitionTable out;
  out.has_relaxed = has_relaxed;
  auto& t = out.relaxed;
  t.s.resize(n, di);
  t.sn.resize(n, di);
  t.a = Matrix::Zero(n, na);
  t.r.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& v = rows[static_cast<std::size_t>(i)];
    const auto line = static_cast<std::size_t>(i) + 2;
    for (Eigen::Index j = 0; j < di; ++j) {
      t.s(i, j) = v[static_cast<std::size_t>(j)];
      t.sn(i, j) = v[static_cast<std::size_t>(di + 2 + j)];
    }
    const double a = v[d];
    if (a != std::floor(a) || a < 0 || a >= static_cast<double>(action_count)) throw ParseError(line, "action out of range");
    out.actions.push_back(static_cast<int>(a));
    t.r(i) = v[d + 1];
    t.terminated.push_back(v[2 * d + 2] != 0.0);
    out.truncated.push_back(v[2 * d + 3] != 0.0);
    if (has_relaxed) {
      for (Eigen::Index j = 0; j < na; ++j) t.a(i, j) = v[static_cast<std::size_t>(2 * di + 4 + j)];
    } else {
      t.a(i, static_cast<int>(a)) = 1.0;
    }
  }
  return out;
}

inline OfflineRLDataset parse_offline_csv(std::string_view text, std::size_t action_count, double gamma,
                                          std::string env_name) {
  const auto tab = parse_transitions_csv(text, action_count);
  std::vector<Transition> ts;
  for (std::size_t i = 0; i < tab.actions.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    ts.push_back({tab.relaxed.s.row(r).transpose(), tab.actions[i], tab.relaxed.r(r), tab.relaxed.sn.row(r).transpose(),
                  tab.relaxed.terminated[i] != 0, tab.truncated[i] != 0});
  }
  return OfflineRLDataset::from(ts, action_count, gamma, std::move(env_name));
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline OfflineRLDataset load_offline_csv(const std::string& path, EnvKind kind, double gamma = 0.99) {
  const auto spec = env_spec(kind);
  auto ds = parse_offline_csv(read_file(path), spec.action_count, gamma, spec.name);
  require_dims(ds.state_dim() == spec.state_dim, "offline CSV state width does not match " + spec.name);
  return ds;
}

}  // namespace distillkit
