#include <gtest/gtest.h>

#include <sstream>

#include "distillkit/envs.hpp"

using namespace distillkit;

namespace {
Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}
}  // namespace

TEST(CartPole, OneEulerStepByHand) {
  const auto r = cartpole_step(Vector::Zero(4), 1);
  // At rest, theta = 0: temp = F / M, thetaacc = -temp / (l (4/3 - m/M)), xacc = temp - ml thetaacc / M.
  const double temp = 10.0 / 1.1;
  const double thetaacc = -temp / (0.5 * (4.0 / 3.0 - 0.1 / 1.1));
  const double xacc = temp - 0.05 * thetaacc / 1.1;
  EXPECT_DOUBLE_EQ(r.state(0), 0.0);
  EXPECT_DOUBLE_EQ(r.state(1), 0.02 * xacc);
  EXPECT_DOUBLE_EQ(r.state(2), 0.0);
  EXPECT_DOUBLE_EQ(r.state(3), 0.02 * thetaacc);
  EXPECT_GT(r.state(1), 0.0);
  EXPECT_LT(r.state(3), 0.0);
  EXPECT_EQ(r.reward, 1.0);
  EXPECT_FALSE(r.terminated);
}

TEST(CartPole, ThresholdsAndReward) {
  const auto r = cartpole_step(vec({0, 0, 0.3, 0}), 0);
  EXPECT_TRUE(r.terminated);
  EXPECT_EQ(r.reward, 1.0);
  EXPECT_TRUE(cartpole_step(vec({2.45, 0, 0, 0}), 0).terminated);
  EXPECT_THROW(cartpole_step(vec({0, NAN, 0, 0}), 0), ConfigError);
  EXPECT_THROW(cartpole_step(Vector::Zero(4), 2), ConfigError);
}

// Reference values from the classic-control implementation for a fixed start
// state and action sequence.
TEST(CartPole, MatchesReferenceTrajectory) {
  Vector s = vec({0.01, -0.02, 0.03, 0.04});
  for (int a : {1, 1, 0, 1, 0}) s = cartpole_step(s, a).state;
  const Vector ref = vec({0.03133333989170178, 0.17349499275068458, 0.0006599578018962032, -0.21681286835696195});
  EXPECT_LT((s - ref).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(MountainCar, ValleyStepByHand) {
  const auto r = mountaincar_step(vec({-0.5, 0.0}), 1);
  const double v = -0.0025 * std::cos(-1.5);
  EXPECT_DOUBLE_EQ(r.state(1), v);
  EXPECT_DOUBLE_EQ(r.state(0), -0.5 + v);
  EXPECT_EQ(r.reward, -1.0);
  EXPECT_FALSE(r.terminated);
}

TEST(MountainCar, GoalAndLeftWall) {
  EXPECT_TRUE(mountaincar_step(vec({0.49, 0.02}), 2).terminated);
  const auto wall = mountaincar_step(vec({-1.19, -0.05}), 0);
  EXPECT_EQ(wall.state(0), -1.2);
  EXPECT_EQ(wall.state(1), 0.0);
  EXPECT_LE(std::abs(mountaincar_step(vec({-0.5, 0.0699}), 2).state(1)), 0.07);
}

TEST(MountainCar, MatchesReferenceTrajectory) {
  Vector s = vec({-0.5, 0.0});
  for (int a : {2, 2, 0, 1, 2}) s = mountaincar_step(s, a).state;
  EXPECT_LT((s - vec({-0.4957996374204934, 0.0010458626473540712})).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(MountainCar, RandomEpisodeTruncatesAt200) {
  Env env(EnvKind::mountaincar);
  Rng rng(1);
  env.reset(rng);
  int steps = 0;
  for (;;) {
    const auto st = env.step(static_cast<int>(rng.uniform_index(3)));
    ++steps;
    if (st.terminated || st.truncated) {
      EXPECT_TRUE(st.truncated);
      break;
    }
  }
  EXPECT_EQ(steps, 200);
}

TEST(Acrobot, HangingRestStaysPut) {
  const auto r = acrobot_step(Vector::Zero(4), 1);
  EXPECT_LT(r.state.cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((acrobot::observe(r.state) - vec({1, 0, 1, 0, 0, 0})).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(r.reward, -1.0);
  EXPECT_FALSE(r.terminated);
}

TEST(Acrobot, TerminalThreshold) {
  EXPECT_TRUE(acrobot::terminal(vec({std::numbers::pi, 0, 0, 0})));
  EXPECT_FALSE(acrobot::terminal(vec({0, 0, 0, 0})));
}

TEST(Acrobot, MatchesReferenceTrajectory) {
  Vector s = vec({0.05, -0.03, 0.02, 0.01});
  for (int a : {0, 2, 1, 2, 0}) s = acrobot_step(s, a).state;
  const Vector ref = vec({-0.07457225401132818, 0.15662084020635386, -0.08573448155085181, 0.057751114551473304});
  EXPECT_LT((s - ref).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Acrobot, TruncatesAt500) {
  Env env(EnvKind::acrobot);
  env.reset(std::uint64_t{3});
  int steps = 0;
  for (;;) {
    const auto st = env.step(1);
    ++steps;
    if (st.terminated || st.truncated) break;
  }
  EXPECT_EQ(steps, 500);
}

TEST(Env, ResetRangesAndDeterminism) {
  for (auto kind : {EnvKind::cartpole, EnvKind::mountaincar, EnvKind::acrobot}) {
    Env a(kind), b(kind);
    EXPECT_EQ(a.reset(std::uint64_t{5}), b.reset(std::uint64_t{5}));
  }
  Env cp(EnvKind::cartpole), mc(EnvKind::mountaincar), ac(EnvKind::acrobot);
  Rng rng(2);
  for (int i = 0; i < 1000; ++i) {
    const Vector c = cp.reset(rng);
    EXPECT_LE(c.cwiseAbs().maxCoeff(), 0.05);
    EXPECT_FALSE(cartpole::terminal(c));
    const Vector m = mc.reset(rng);
    EXPECT_GE(m(0), -0.6);
    EXPECT_LE(m(0), -0.4);
    EXPECT_EQ(m(1), 0.0);
    ac.reset(rng);
    EXPECT_LE(ac.internal_state().cwiseAbs().maxCoeff(), 0.1);
  }
}

TEST(Env, StepFunctionsAreBitDeterministic) {
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    Vector s(4);
    for (int j = 0; j < 4; ++j) s(j) = rng.uniform(-0.2, 0.2);
    const int a = static_cast<int>(rng.uniform_index(2));
    EXPECT_EQ(cartpole_step(s, a).state, cartpole_step(s, a).state);
    EXPECT_EQ(acrobot_step(s, a).state, acrobot_step(s, a).state);
  }
}

TEST(Env, ObservationBoundsUnderRandomPolicy) {
  for (auto kind : {EnvKind::cartpole, EnvKind::mountaincar, EnvKind::acrobot}) {
    const auto ds = collect_random(kind, 10000, 4);
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const auto t = ds.at(i);
      if (kind == EnvKind::cartpole) {
        EXPECT_LE(std::abs(t.s(0)), 2.4 + 1e-12);
        EXPECT_LE(std::abs(t.s(2)), 12.0 * std::numbers::pi / 180.0 + 1e-12);
        EXPECT_LE(std::abs(t.s_next(2)), 12.0 * std::numbers::pi / 180.0 + 0.1);
      } else if (kind == EnvKind::mountaincar) {
        EXPECT_GE(t.s_next(0), -1.2);
        EXPECT_LE(t.s_next(0), 0.6);
        EXPECT_LE(std::abs(t.s_next(1)), 0.07);
      } else {
        EXPECT_LE(t.s_next.head(4).cwiseAbs().maxCoeff(), 1.0);
        EXPECT_LE(std::abs(t.s_next(4)), 4 * std::numbers::pi + 1e-12);
        EXPECT_LE(std::abs(t.s_next(5)), 9 * std::numbers::pi + 1e-12);
      }
    }
  }
}

TEST(Collect, CartPoleHasBothPartitions) {
  const auto ds = collect_random(EnvKind::cartpole, 10000, 1);
  EXPECT_EQ(ds.size(), 10000u);
  EXPECT_GT(ds.terminated_count(), 0u);
  EXPECT_LT(ds.terminated_count(), 10000u);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    // Terminated exactly when the successor breaks the envelope.
    EXPECT_EQ(ds.terminated[i] != 0, cartpole::terminal(ds.at(i).s_next));
    EXPECT_EQ(ds.rewards(static_cast<Eigen::Index>(i)), 1.0);
  }
}

TEST(Collect, MountainCarRewardsAndTruncation) {
  const auto ds = collect_random(EnvKind::mountaincar, 1000, 2);
  EXPECT_EQ(ds.rewards, Vector::Constant(1000, -1.0));
  std::size_t truncs = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.truncated[i]) {
      ++truncs;
      EXPECT_EQ(ds.terminated[i], 0);
    }
  }
  EXPECT_EQ(truncs, 5u);  // 1000 steps, 200 per episode
}

TEST(Collect, Deterministic) {
  const auto a = collect_random(EnvKind::acrobot, 500, 9), b = collect_random(EnvKind::acrobot, 500, 9);
  EXPECT_EQ(a.states, b.states);
  EXPECT_EQ(a.actions, b.actions);
  const auto c = collect_random(EnvKind::acrobot, 500, 10);
  EXPECT_NE(a.actions, c.actions);
}

TEST(Expert, UntrainedTableNeverEscapes) {
  ExpertConfig cfg;
  cfg.episodes = 0;
  const auto res = train_tabular_expert_mountaincar(cfg, 1);
  EXPECT_EQ(res.successes, 0);
  EXPECT_FALSE(res.warnings.empty());
  Env env(EnvKind::mountaincar);
  Vector s = env.reset(std::uint64_t{1});
  double total = 0.0;
  for (;;) {
    const auto st = env.step(res.table.act(s));
    total += st.reward;
    if (st.terminated || st.truncated) break;
    s = st.obs;
  }
  EXPECT_EQ(total, -200.0);
}

TEST(Expert, TrainedExpertEscapes) {
  const auto res = train_tabular_expert_mountaincar(ExpertConfig{}, 0);
  EXPECT_GE(res.successes, 5);
  EXPECT_EQ(res.warnings.empty(), res.successes >= 8);
  Env env(EnvKind::mountaincar);
  double total = 0.0;
  for (int e = 0; e < 10; ++e) {
    Vector s = env.reset(derive_seed(123, static_cast<std::uint64_t>(e)));
    for (;;) {
      const auto st = env.step(res.table.act(s));
      total += st.reward;
      if (st.terminated || st.truncated) break;
      s = st.obs;
    }
  }
  EXPECT_GT(total / 10.0, -200.0);

  const auto mixed = collect_mixed_mountaincar(res.table, 5000, 5000, 1);
  EXPECT_EQ(mixed.size(), 10000u);
  EXPECT_GT(mixed.terminated_count(), 0u);
}

TEST(Csv, OfflineRoundTrip) {
  const auto ds = collect_random(EnvKind::cartpole, 300, 5);
  std::ostringstream os;
  write_offline_csv(os, ds);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "s0,s1,s2,s3,a,r,sn0,sn1,sn2,sn3,terminated,truncated");
  const auto back = parse_offline_csv(os.str(), 2, 0.99, "cartpole");
  EXPECT_EQ(back.states, ds.states);
  EXPECT_EQ(back.next_states, ds.next_states);
  EXPECT_EQ(back.actions, ds.actions);
  EXPECT_EQ(back.terminated, ds.terminated);
  EXPECT_EQ(back.truncated, ds.truncated);
}

TEST(Csv, RelaxedRoundTrip) {
  auto t = to_relaxed(collect_random(EnvKind::acrobot, 20, 6));
  t.a(0, 0) = 0.3;
  t.a(0, 2) = -0.25;
  std::ostringstream os;
  write_relaxed_csv(os, t);
  const auto back = parse_transitions_csv(os.str(), 3);
  EXPECT_TRUE(back.has_relaxed);
  EXPECT_EQ(back.relaxed.a, t.a);
  EXPECT_EQ(back.relaxed.s, t.s);
  EXPECT_EQ(back.relaxed.r, t.r);
  EXPECT_EQ(back.relaxed.terminated, t.terminated);
}

TEST(Csv, Errors) {
  EXPECT_THROW(parse_offline_csv("", 2, 0.99, "x"), ConfigError);
  EXPECT_THROW(parse_offline_csv("s0,a,r,sn0,terminated,truncated\n", 2, 0.99, "x"), ConfigError);
  EXPECT_THROW(parse_offline_csv("s0,b,r,sn0,terminated,truncated\n1,0,1,2,0,0\n", 2, 0.99, "x"), ParseError);
  EXPECT_THROW(parse_offline_csv("s0,a,r,sn0,terminated,truncated\n1,5,1,2,0,0\n", 2, 0.99, "x"), ParseError);
  EXPECT_THROW(parse_offline_csv("s0,a,r,sn0,terminated,truncated\n1,0,1,2,0\n", 2, 0.99, "x"), ParseError);
}
