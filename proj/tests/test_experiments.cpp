#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "distillkit/experiments.hpp"

using namespace distillkit;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

json tiny_supervised() {
  return resolve_config({{"trials", 1},
                         {"n_syn", {10}},
                         {"k", {5}},
                         {"supervised",
                          {{"data_path", std::string(DISTILLKIT_SOURCE_DIR) + "/data/winequality-red.csv"},
                           {"distill_steps", 20},
                           {"n_eval", 20},
                           {"train_steps", 100},
                           {"trace_stride", 5}}}},
                        {}, nullptr);
}

json tiny_rl() {
  const json fqi{{"iterations", 2}, {"inner_epochs", 5}};
  return resolve_config({{"experiment", "offline-rl"},
                         {"trials", 1},
                         {"n_syn", {10}},
                         {"k", {3}},
                         {"offline_rl",
                          {{"n_train", 200},
                           {"lr_grid", {1e-2, 1e-3}},
                           {"distill_steps", 5},
                           {"eval_episodes", 2},
                           {"rand_resamples", 2},
                           {"fqi", fqi},
                           {"fqi_full", fqi}}}},
                        {}, nullptr);
}

}  // namespace

TEST(Config, DefaultsResolve) {
  const auto cfg = resolve_config(json::object(), {}, nullptr);
  EXPECT_EQ(cfg.at("experiment"), "supervised");
  EXPECT_EQ(cfg.at("trials"), 10);
  EXPECT_EQ(cfg.at("n_syn"), json({20, 50, 100}));
  EXPECT_EQ(cfg.at("offline_rl").at("lr_grid").size(), 8u);
}

TEST(Config, UnknownKeysRejected) {
  EXPECT_THROW(resolve_config({{"trails", 3}}, {}, nullptr), ConfigError);
  EXPECT_THROW(resolve_config({{"supervised", {{"lr", 0.1}}}}, {}, nullptr), ConfigError);
  EXPECT_THROW(resolve_config(json::object(), {"offline_rl.fqi.depth=3"}, nullptr), ConfigError);
}

TEST(Config, SetOverrides) {
  const auto cfg = resolve_config({{"trials", 4}},
                                  {"n_syn=[5,7]", "offline_rl.env=acrobot", "offline_rl.fqi.inner_lr=0.5", "trials=2"},
                                  nullptr);
  EXPECT_EQ(cfg.at("n_syn"), json({5, 7}));
  EXPECT_EQ(cfg.at("offline_rl").at("env"), "acrobot");
  EXPECT_EQ(cfg.at("offline_rl").at("fqi").at("inner_lr"), 0.5);
  EXPECT_EQ(cfg.at("trials"), 2);
  EXPECT_THROW(resolve_config(json::object(), {"trials"}, nullptr), ConfigError);
  EXPECT_THROW(resolve_config(json::object(), {"=3"}, nullptr), ConfigError);
}

TEST(Config, SeedEnvironment) {
  EXPECT_EQ(resolve_config({{"base_seed", 3}}, {}, "42").at("base_seed"), 42);
  EXPECT_EQ(resolve_config(json::object(), {"base_seed=7"}, "42").at("base_seed"), 7);
  EXPECT_EQ(resolve_config({{"base_seed", 3}}, {}, "").at("base_seed"), 3);
  EXPECT_THROW(resolve_config(json::object(), {}, "abc"), ConfigError);
}

TEST(Config, SweepValidation) {
  EXPECT_THROW(resolve_config({{"trials", 0}}, {}, nullptr), ConfigError);
  EXPECT_THROW(resolve_config({{"n_syn", json::array()}}, {}, nullptr), ConfigError);
  EXPECT_THROW(resolve_config({{"k", json::array()}}, {}, nullptr), ConfigError);
}

TEST(Seeds, TrialStride) {
  EXPECT_EQ(trial_seed(0, 0), 0u);
  EXPECT_EQ(trial_seed(5, 2), 5u + 2u * 10007u);
}

TEST(Format, MeanStdIsPopulation) {
  const auto s = mean_std({1.0, 2.0, 3.0, 4.0});
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_DOUBLE_EQ(s.std, std::sqrt(1.25));
  EXPECT_EQ(fmt_full(0.1), "0.10000000000000001");
}

TEST(Lowerbound, SweepPasses) {
  const auto cfg = resolve_config({{"experiment", "lowerbound"}, {"lowerbound", {{"q_min", 2}, {"q_max", 8}}}}, {}, nullptr);
  const auto res = run_experiment(cfg);
  ASSERT_EQ(res.at("rows").size(), 7u);
  for (const auto& r : res.at("rows")) {
    const auto q = r.at("q").get<double>();
    EXPECT_TRUE(r.at("pass").get<bool>());
    EXPECT_EQ(r.at("regressors"), q * (q + 1) / 2 - 1);
    EXPECT_LE(r.at("max_equal_dev").get<double>(), 1e-9);
    EXPECT_NEAR(r.at("gap").get<double>(), 1.0 / (4 * q * q), 1e-9);
  }
  EXPECT_EQ(res.dump(), run_experiment(cfg).dump());
  const auto e = emit_tables(res);
  EXPECT_EQ(e.csv.substr(0, e.csv.find('\n')), "q,regressors,max_equal_dev,gap,gap_target,pass");
}

TEST(Lowerbound, RefusesAtBound) {
  const auto cfg = resolve_config(
      {{"experiment", "lowerbound"}, {"lowerbound", {{"q_min", 3}, {"q_max", 3}, {"regressors", 6}}}}, {}, nullptr);
  try {
    run_experiment(cfg);
    FAIL() << "expected refusal";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("q(q+1)/2 = 6"), std::string::npos);
  }
}

TEST(Supervised, TinyRunIsDeterministic) {
  const auto cfg = tiny_supervised();
  const auto a = run_supervised(cfg);
  const auto b = run_supervised(cfg);
  EXPECT_EQ(a.dump(), b.dump());
  ASSERT_EQ(a.at("rows").size(), 1u);
  const auto& row = a.at("rows")[0];
  for (const char* col : {"train", "syn", "rand", "lev"}) {
    ASSERT_EQ(row.at(col).size(), 1u);
    EXPECT_GT(row.at(col)[0].get<double>(), 0.0);
  }
  EXPECT_EQ(a.at("n"), 1599);
  EXPECT_EQ(a.at("distill")[0].at("objective_trace").size(), 5u);
  const auto e = emit_tables(a);
  EXPECT_EQ(e.csv, emit_tables(b).csv);
  EXPECT_EQ(std::count(e.csv.begin(), e.csv.end(), '\n'), 5);
}

TEST(Supervised, MissingDataFile) {
  auto cfg = tiny_supervised();
  cfg["supervised"]["data_path"] = "/nonexistent/file.csv";
  EXPECT_THROW(run_supervised(cfg), Error);
}

TEST(OfflineRl, TinyRunIsDeterministic) {
  const auto cfg = tiny_rl();
  const auto a = run_offline_rl(cfg);
  EXPECT_EQ(a.dump(), run_offline_rl(cfg).dump());
  ASSERT_EQ(a.at("rows").size(), 1u);
  const auto& row = a.at("rows")[0];
  EXPECT_EQ(row.at("rand").size(), 2u);
  EXPECT_EQ(row.at("syn").at("returns").size(), 2u);
  EXPECT_EQ(row.at("runs").size(), 2u);
  EXPECT_EQ(row.at("m_terminated").get<int>() + row.at("m_nonterminated").get<int>(), 10);
  const auto syn = relaxed_from_json(row.at("synthetic"));
  EXPECT_EQ(syn.size(), 10u);
  EXPECT_EQ(a.at("hidden"), json({10, 10}));
}

TEST(OfflineRl, RelaxedJsonRoundTrip) {
  const auto t = to_relaxed(collect_random(EnvKind::acrobot, 12, 3));
  const auto back = relaxed_from_json(relaxed_to_json(t));
  EXPECT_EQ(back.s, t.s);
  EXPECT_EQ(back.a, t.a);
  EXPECT_EQ(back.r, t.r);
  EXPECT_EQ(back.sn, t.sn);
  EXPECT_EQ(back.terminated, t.terminated);
  auto bad = relaxed_to_json(t);
  bad["terminated"].erase(0);
  EXPECT_THROW(relaxed_from_json(bad), DimensionError);
}

TEST(OfflineRl, HiddenDefaults) {
  const auto rl = default_config().at("offline_rl");
  EXPECT_EQ(hidden_sizes(rl, EnvKind::cartpole), (std::pair<std::size_t, std::size_t>{10, 10}));
  EXPECT_EQ(hidden_sizes(rl, EnvKind::acrobot), (std::pair<std::size_t, std::size_t>{64, 64}));
  auto custom = rl;
  custom["hidden"] = {3};
  EXPECT_THROW(hidden_sizes(custom, EnvKind::cartpole), ConfigError);
}

TEST(Output, WriteResultsIsReproducible) {
  const auto dir = std::filesystem::temp_directory_path() / "distillkit_test_output";
  std::filesystem::create_directories(dir);
  const auto cfg = resolve_config({{"experiment", "lowerbound"}, {"lowerbound", {{"q_min", 2}, {"q_max", 4}}}}, {}, nullptr);
  const auto stem = write_results(run_experiment(cfg), dir.string(), "lb");
  const auto first = slurp(stem + ".json") + slurp(stem + ".csv") + slurp(stem + ".txt");
  write_results(run_experiment(cfg), dir.string(), "lb");
  EXPECT_EQ(first, slurp(stem + ".json") + slurp(stem + ".csv") + slurp(stem + ".txt"));
  EXPECT_FALSE(slurp(stem + ".txt").empty());
  std::filesystem::remove_all(dir);
  EXPECT_THROW(emit_tables({{"kind", "nope"}}), ConfigError);
  EXPECT_THROW(run_experiment(resolve_config({{"experiment", "nope"}}, {}, nullptr)), ConfigError);
}

TEST(Config, ShippedConfigsResolve) {
  int seen = 0;
  for (const auto& entry : std::filesystem::directory_iterator(std::string(DISTILLKIT_SOURCE_DIR) + "/configs")) {
    if (entry.path().extension() != ".json") continue;
    const auto cfg = json::parse(slurp(entry.path().string()));
    EXPECT_NO_THROW(resolve_config(cfg, {}, nullptr)) << entry.path();
    ++seen;
  }
  EXPECT_EQ(seen, 7);
}
