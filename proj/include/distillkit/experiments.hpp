#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "distillkit/baselines.hpp"
#include "distillkit/data.hpp"
#include "distillkit/envs.hpp"
#include "distillkit/errors.hpp"
#include "distillkit/fqi.hpp"
#include "distillkit/linreg_distill.hpp"
#include "distillkit/lowerbound.hpp"
#include "distillkit/rl_distill.hpp"
#include "distillkit/rng.hpp"

namespace distillkit {

using json = nlohmann::json;

inline constexpr std::uint64_t kTrialStride = 10007;

inline std::uint64_t trial_seed(std::uint64_t base, std::size_t t) { return base + kTrialStride * t; }

inline std::string cell_tag(const char* what, std::size_t k, std::size_t n) {
  return std::string(what) + "-k" + std::to_string(k) + "-n" + std::to_string(n);
}

// ---------------------------------------------------------------------------
// Configuration. Every experiment reads one JSON document; the defaults below
// double as the schema (unknown keys are rejected).

inline json default_config() {
  return {
      {"experiment", "supervised"},
      {"name", ""},
      {"output_dir", "results"},
      {"base_seed", 0},
      {"trials", 10},
      {"n_syn", {20, 50, 100}},
      {"k", {100}},
      {"supervised",
       {{"dataset", "wine-red"},
        {"data_path", "data/winequality-red.csv"},
        {"format", "wine"},
        {"test_fraction", 0.2},
        {"distill_lr", 0.01},
        {"distill_steps", 5000},
        {"n_eval", 100},
        {"eval_stride", 1},
        {"project", true},
        {"train_lr", 0.001},
        {"train_steps", 3000},
        {"trace_stride", 100}}},
      {"offline_rl",
       {{"env", "cartpole"},
        {"n_train", 10000},
        {"n_random", 5000},
        {"n_expert", 5000},
        {"gamma", 0.99},
        {"sigma", 1.0},
        {"hidden", json::array()},
        {"lr_grid", {3e-1, 1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4}},
        {"distill_steps", 1000},
        {"clamp_rewards", true},
        {"state_radius", 0.0},
        {"eval_episodes", 10},
        {"rand_resamples", 10},
        {"evaluate_train", true},
        {"fqi",
         {{"iterations", 50},
          {"inner_epochs", 200},
          {"inner_lr", 1e-3},
          {"batch_size", 0},
          {"warm_start", true},
          {"standardize_states", true}}},
        {"fqi_full",
         {{"iterations", 50},
          {"inner_epochs", 5},
          {"inner_lr", 1e-3},
          {"batch_size", 0},
          {"warm_start", true},
          {"standardize_states", true}}},
        {"expert",
         {{"bins", {40, 40}},
          {"episodes", 20000},
          {"epsilon_start", 1.0},
          {"epsilon_end", 0.05},
          {"learning_rate", 0.1},
          {"gamma", 0.99}}}}},
      {"lowerbound", {{"q_min", 2}, {"q_max", 20}, {"regressors", -1}, {"regressor_sd", 1.0}}},
  };
}

namespace detail {

inline void check_keys(const json& user, const json& schema, const std::string& path) {
  if (!user.is_object()) return;
  for (const auto& [key, val] : user.items()) {
    if (!schema.contains(key)) throw ConfigError("unknown config key '" + path + key + "'");
    if (val.is_object() && schema.at(key).is_object()) check_keys(val, schema.at(key), path + key + ".");
  }
}

inline json parse_scalar(const std::string& text) {
  auto j = json::parse(text, nullptr, false);
  if (j.is_discarded()) return json(text);
  return j;
}

}  // namespace detail

/// Defaults, then the config file, then DISTILLKIT_SEED, then --set overrides.
inline json resolve_config(const json& file_cfg, const std::vector<std::string>& sets, const char* seed_env) {
  json cfg = default_config();
  detail::check_keys(file_cfg, cfg, "");
  cfg.merge_patch(file_cfg);
  if (seed_env && *seed_env) {
    try {
      cfg["base_seed"] = std::stoull(seed_env);
    } catch (const std::exception&) {
      throw ConfigError(std::string("DISTILLKIT_SEED is not an integer: ") + seed_env);
    }
  }
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + s + "'");
    std::string ptr = "/" + s.substr(0, eq);
    std::replace(ptr.begin(), ptr.end(), '.', '/');
    const json::json_pointer jp(ptr);
    if (!cfg.contains(jp)) throw ConfigError("unknown config key '" + s.substr(0, eq) + "'");
    cfg[jp] = detail::parse_scalar(s.substr(eq + 1));
  }
  if (cfg.at("trials").get<long long>() < 1) throw ConfigError("trials must be >= 1");
  if (cfg.at("n_syn").empty() || cfg.at("k").empty()) throw ConfigError("n_syn and k sweeps must be nonempty");
  return cfg;
}

// ---------------------------------------------------------------------------
// Formatting

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population
};

inline MeanStd mean_std(const std::vector<double>& v) {
  if (v.empty()) return {std::nan(""), std::nan("")};
  const double n = static_cast<double>(v.size());
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return {m, std::sqrt(ss / n)};
}

inline std::string fmt(double v, int prec) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

inline std::string fmt_full(double v) { return format_double(v); }

/// Columns padded to their widest cell.
inline std::string aligned_table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& r : rows)
    for (std::size_t c = 0; c < r.size(); ++c) {
      if (width.size() <= c) width.push_back(0);
      width[c] = std::max(width[c], r[c].size());
    }
  std::ostringstream os;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < rows[i].size(); ++c) {
      if (c) os << "  ";
      os << rows[i][c] << std::string(width[c] - rows[i][c].size(), ' ');
    }
    os << '\n';
    if (i == 0) {
      std::size_t total = 0;
      for (auto w : width) total += w;
      os << std::string(total + 2 * (width.empty() ? 0 : width.size() - 1), '-') << '\n';
    }
  }
  return os.str();
}

inline std::string pm(const std::vector<double>& v, int prec) {
  if (v.empty()) return "-";
  const auto s = mean_std(v);
  return fmt(s.mean, prec) + " +- " + fmt(s.std, prec);
}

struct Emitted {
  std::string csv;
  std::string table;
};

inline std::vector<double> doubles(const json& j) { return j.get<std::vector<double>>(); }

// ---------------------------------------------------------------------------
// Supervised experiment

inline json run_supervised(const json& cfg) {
  const auto& sc = cfg.at("supervised");
  LoadOptions opt;
  opt.format = parse_format(sc.at("format").get<std::string>());
  const auto raw = load_csv_regression(sc.at("data_path").get<std::string>(), opt);
  const auto ds = standardize(raw).first;
  const auto trials = cfg.at("trials").get<std::size_t>();
  const auto base = cfg.at("base_seed").get<std::uint64_t>();
  const auto n_syn = cfg.at("n_syn").get<std::vector<std::size_t>>();
  const auto ks = cfg.at("k").get<std::vector<std::size_t>>();
  const double train_lr = sc.at("train_lr").get<double>();
  const auto train_steps = sc.at("train_steps").get<std::size_t>();
  const auto trace_stride = std::max<std::size_t>(1, sc.at("trace_stride").get<std::size_t>());

  json rows = json::array();
  std::vector<double> full_mse;
  std::vector<std::vector<json>> cells(ks.size() * n_syn.size());
  for (auto& c : cells) c.assign(4, json::array());
  json distill_log = json::array();

  for (std::size_t t = 0; t < trials; ++t) {
    const auto seed = trial_seed(base, t);
    const auto [train, test] = train_test_split(ds, sc.at("test_fraction").get<double>(), seed);
    full_mse.push_back(evaluate_mse(train_linear(train, train_lr, train_steps), test));
    for (std::size_t ni = 0; ni < n_syn.size(); ++ni) {
      const auto m = n_syn[ni];
      Rng rand_rng(derive_seed(seed, "rand-n" + std::to_string(m)));
      Rng lev_rng(derive_seed(seed, "lev-n" + std::to_string(m)));
      const double rand_mse = evaluate_mse(train_linear(random_subsample(train, m, rand_rng), train_lr, train_steps), test);
      const double lev_mse = evaluate_mse(train_linear(leverage_subsample(train, m, lev_rng), train_lr, train_steps), test);
      for (std::size_t ki = 0; ki < ks.size(); ++ki) {
        DistillConfig dc;
        dc.m = m;
        dc.k = ks[ki];
        dc.n_eval = sc.at("n_eval").get<std::size_t>();
        dc.learning_rate = sc.at("distill_lr").get<double>();
        dc.max_steps = sc.at("distill_steps").get<std::size_t>();
        dc.eval_stride = sc.at("eval_stride").get<std::size_t>();
        dc.project = sc.at("project").get<bool>();
        dc.seed = derive_seed(seed, cell_tag("distill", dc.k, m));
        const auto [syn, rep] = distill(train, dc);
        const double syn_mse = evaluate_mse(train_linear(syn, train_lr, train_steps), test);
        auto& cell = cells[ki * n_syn.size() + ni];
        cell[0].push_back(full_mse.back());
        cell[1].push_back(syn_mse);
        cell[2].push_back(rand_mse);
        cell[3].push_back(lev_mse);
        json trace = json::array();
        for (std::size_t s = 0; s < rep.objective_trace.size(); s += trace_stride) trace.push_back(rep.objective_trace[s]);
        distill_log.push_back({{"trial", t},
                               {"seed", seed},
                               {"k", dc.k},
                               {"n_syn", m},
                               {"best_step", rep.best_step},
                               {"initial_eval_objective", rep.initial_eval_objective},
                               {"best_eval_objective", rep.best_eval_objective},
                               {"final_objective", rep.objective_trace.back()},
                               {"objective_trace_stride", trace_stride},
                               {"objective_trace", trace}});
      }
    }
  }
  for (std::size_t ki = 0; ki < ks.size(); ++ki)
    for (std::size_t ni = 0; ni < n_syn.size(); ++ni) {
      const auto& c = cells[ki * n_syn.size() + ni];
      rows.push_back({{"k", ks[ki]}, {"n_syn", n_syn[ni]}, {"train", c[0]}, {"syn", c[1]}, {"rand", c[2]}, {"lev", c[3]}});
    }
  return {{"kind", "supervised"},
          {"dataset", sc.at("dataset")},
          {"n", ds.size()},
          {"d", ds.dim()},
          {"config", cfg},
          {"rows", rows},
          {"distill", distill_log}};
}

inline Emitted emit_supervised(const json& res) {
  Emitted out;
  std::ostringstream csv;
  csv << "dataset,k,n_syn,column,trials,mean,std\n";
  std::vector<std::vector<std::string>> tab{{"k", "N_syn", "D_train", "D_syn", "D_rand", "D_lev"}};
  const std::string ds = res.at("dataset").get<std::string>();
  for (const auto& r : res.at("rows")) {
    const auto k = r.at("k").get<std::size_t>(), n = r.at("n_syn").get<std::size_t>();
    std::vector<std::string> line{std::to_string(k), std::to_string(n)};
    for (const char* col : {"train", "syn", "rand", "lev"}) {
      const auto v = doubles(r.at(col));
      const auto s = mean_std(v);
      csv << ds << ',' << k << ',' << n << ',' << col << ',' << v.size() << ',' << fmt_full(s.mean) << ','
          << fmt_full(s.std) << '\n';
      line.push_back(pm(v, 2));
    }
    tab.push_back(line);
  }
  out.csv = csv.str();
  out.table = "Test MSE of a homogeneous linear model (" + ds + ")\n" + aligned_table(tab);
  return out;
}

// ---------------------------------------------------------------------------
// Offline RL experiment

inline FqiConfig fqi_from_json(const json& j, double gamma, std::size_t h1, std::size_t h2, std::uint64_t seed) {
  FqiConfig c;
  c.iterations = j.at("iterations").get<std::size_t>();
  c.inner_epochs = j.at("inner_epochs").get<std::size_t>();
  c.inner_lr = j.at("inner_lr").get<double>();
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.warm_start = j.at("warm_start").get<bool>();
  c.standardize_states = j.at("standardize_states").get<bool>();
  c.gamma = gamma;
  c.h1 = h1;
  c.h2 = h2;
  c.seed = seed;
  return c;
}

inline std::pair<std::size_t, std::size_t> hidden_sizes(const json& rl, EnvKind env) {
  const auto h = rl.at("hidden").get<std::vector<std::size_t>>();
  if (h.empty()) return env == EnvKind::cartpole ? std::pair<std::size_t, std::size_t>{10, 10}
                                                 : std::pair<std::size_t, std::size_t>{64, 64};
  require(h.size() == 2 && h[0] >= 1 && h[1] >= 1, "hidden must list two positive widths");
  return {h[0], h[1]};
}

inline ExpertConfig expert_from_json(const json& j) {
  ExpertConfig e;
  const auto bins = j.at("bins").get<std::vector<int>>();
  require(bins.size() == 2, "expert bins must have two entries");
  e.bins_pos = bins[0];
  e.bins_vel = bins[1];
  e.episodes = j.at("episodes").get<int>();
  e.epsilon_start = j.at("epsilon_start").get<double>();
  e.epsilon_end = j.at("epsilon_end").get<double>();
  e.learning_rate = j.at("learning_rate").get<double>();
  e.gamma = j.at("gamma").get<double>();
  return e;
}

inline json relaxed_to_json(const RelaxedTransitions& t) {
  std::vector<int> term(t.terminated.begin(), t.terminated.end());
  return {{"s", matrix_to_json(t.s)},
          {"a", matrix_to_json(t.a)},
          {"r", matrix_to_json(t.r)},
          {"sn", matrix_to_json(t.sn)},
          {"terminated", term}};
}

inline RelaxedTransitions relaxed_from_json(const json& j) {
  RelaxedTransitions t;
  t.s = matrix_from_json(j.at("s"));
  t.a = matrix_from_json(j.at("a"));
  t.r = matrix_from_json(j.at("r")).col(0);
  t.sn = matrix_from_json(j.at("sn"));
  for (int v : j.at("terminated").get<std::vector<int>>()) t.terminated.push_back(v != 0);
  require_dims(t.a.rows() == t.s.rows() && t.r.size() == t.s.rows() && t.sn.rows() == t.s.rows() &&
                   t.terminated.size() == static_cast<std::size_t>(t.s.rows()),
               "synthetic dataset blocks disagree in length");
  return t;
}

inline json eval_json(const EvalResult& e) {
  return {{"returns", e.returns}, {"mean", e.mean}, {"std", e.std}, {"max", e.max}};
}

/// Offline dataset for one trial: random transitions, or for Mountain Car a
/// random/expert mix.
inline OfflineRLDataset build_offline_dataset(const json& rl, EnvKind env, std::uint64_t seed, json& log) {
  const double gamma = rl.at("gamma").get<double>();
  if (env != EnvKind::mountaincar)
    return collect_random(env, rl.at("n_train").get<std::size_t>(), derive_seed(seed, "data"), gamma);
  const auto expert = train_tabular_expert_mountaincar(expert_from_json(rl.at("expert")), derive_seed(seed, "expert"));
  log["expert_successes"] = expert.successes;
  log["expert_warnings"] = expert.warnings;
  return collect_mixed_mountaincar(expert.table, rl.at("n_random").get<std::size_t>(),
                                   rl.at("n_expert").get<std::size_t>(), derive_seed(seed, "data"), gamma);
}

inline json run_offline_rl(const json& cfg) {
  const auto& rl = cfg.at("offline_rl");
  const EnvKind env = parse_env(rl.at("env").get<std::string>());
  const auto [h1, h2] = hidden_sizes(rl, env);
  const double gamma = rl.at("gamma").get<double>();
  const auto trials = cfg.at("trials").get<std::size_t>();
  const auto base = cfg.at("base_seed").get<std::uint64_t>();
  const auto n_syn = cfg.at("n_syn").get<std::vector<std::size_t>>();
  const auto ks = cfg.at("k").get<std::vector<std::size_t>>();
  const auto episodes = rl.at("eval_episodes").get<std::size_t>();
  const auto resamples = rl.at("rand_resamples").get<std::size_t>();

  json trial_logs = json::array();
  json rows = json::array();
  for (std::size_t t = 0; t < trials; ++t) {
    const auto seed = trial_seed(base, t);
    const auto eval_seed = derive_seed(seed, "eval");
    json tlog{{"trial", t}, {"seed", seed}};
    const auto data = build_offline_dataset(rl, env, seed, tlog);
    const auto train = to_relaxed(data);
    tlog["n_train"] = data.size();
    tlog["n_terminated"] = data.terminated_count();

    auto evaluate_fqi = [&](const RelaxedTransitions& ds, const json& fcfg, std::uint64_t fseed, std::size_t eps,
                            std::uint64_t eseed) {
      const auto q = fqi_train(ds, fqi_from_json(fcfg, gamma, h1, h2, fseed)).q;
      return evaluate_policy(env, greedy_policy(q), eps, eseed);
    };

    json train_eval = nullptr;
    if (rl.at("evaluate_train").get<bool>())
      train_eval = eval_json(evaluate_fqi(train, rl.at("fqi_full"), derive_seed(seed, "fqi-train"), episodes, eval_seed));
    tlog["train"] = train_eval;

    for (const auto m : n_syn) {
      std::vector<double> rand_returns;
      Rng rr(derive_seed(seed, "rand-n" + std::to_string(m)));
      for (std::size_t r = 0; r < resamples; ++r) {
        const auto sub = train.rows(sample_without_replacement(train.size(), m, rr));
        const auto e = evaluate_fqi(sub, rl.at("fqi"), derive_seed(seed, "fqi-rand-n" + std::to_string(m) + "-" + std::to_string(r)),
                                    1, derive_seed(eval_seed, static_cast<std::uint64_t>(r)));
        rand_returns.push_back(e.returns.front());
      }
      for (const auto k : ks) {
        RlDistillConfig dc;
        dc.m = m;
        dc.k = k;
        dc.sigma = rl.at("sigma").get<double>();
        dc.gamma = gamma;
        dc.lr_grid = rl.at("lr_grid").get<std::vector<double>>();
        dc.max_steps = rl.at("distill_steps").get<std::size_t>();
        dc.seed = derive_seed(seed, cell_tag("distill", k, m));
        dc.arch.kind = QPredictor::Kind::mlp;
        dc.arch.h1 = h1;
        dc.arch.h2 = h2;
        dc.clamp_rewards = rl.at("clamp_rewards").get<bool>();
        dc.state_radius = rl.at("state_radius").get<double>();
        const auto syn_fqi_seed = derive_seed(seed, cell_tag("fqi-syn", k, m));
        std::vector<EvalResult> evals;
        const SyntheticEvaluator evaluator = [&](const SyntheticOfflineDataset& s) {
          evals.push_back(evaluate_fqi(s.combined(), rl.at("fqi"), syn_fqi_seed, episodes, eval_seed));
          return evals.back().mean;
        };
        const auto [syn, rep] = distill_rl(train, dc, evaluator);
        json runs = json::array();
        for (std::size_t i = 0; i < rep.runs.size(); ++i) {
          const auto& run = rep.runs[i];
          runs.push_back({{"lr", run.lr},
                          {"best_step", run.best_step},
                          {"best_objective", run.best_objective},
                          {"eval", eval_json(evals[i])},
                          {"objective_trace", run.objective_trace}});
        }
        rows.push_back({{"trial", t},
                        {"seed", seed},
                        {"k", k},
                        {"n_syn", m},
                        {"train", train_eval},
                        {"rand", rand_returns},
                        {"syn", eval_json(evals[rep.chosen])},
                        {"chosen_lr", rep.runs[rep.chosen].lr},
                        {"m_terminated", rep.m_terminated},
                        {"m_nonterminated", rep.m_nonterminated},
                        {"initial_objective", rep.initial_objective},
                        {"runs", runs},
                        {"synthetic", relaxed_to_json(syn.combined())}});
      }
    }
    trial_logs.push_back(tlog);
  }
  return {{"kind", "offline-rl"},
          {"env", env_spec(env).name},
          {"hidden", {h1, h2}},
          {"config", cfg},
          {"trials", trial_logs},
          {"rows", rows}};
}

inline Emitted emit_offline_rl(const json& res) {
  Emitted out;
  std::ostringstream csv;
  csv << "env,trial,seed,k,n_syn,column,episodes,mean,std,max\n";
  std::vector<std::vector<std::string>> tab{{"trial", "k", "N_syn", "D_train", "D_rand", "D_syn", "D_syn max", "lr"}};
  const std::string env = res.at("env").get<std::string>();
  for (const auto& r : res.at("rows")) {
    const auto t = r.at("trial").get<std::size_t>();
    const auto seed = r.at("seed").get<std::uint64_t>();
    const auto k = r.at("k").get<std::size_t>(), n = r.at("n_syn").get<std::size_t>();
    auto emit = [&](const char* col, const std::vector<double>& v) {
      const auto s = mean_std(v);
      const double mx = v.empty() ? std::nan("") : *std::max_element(v.begin(), v.end());
      csv << env << ',' << t << ',' << seed << ',' << k << ',' << n << ',' << col << ',' << v.size() << ','
          << fmt_full(s.mean) << ',' << fmt_full(s.std) << ',' << fmt_full(mx) << '\n';
    };
    std::vector<double> tr;
    if (!r.at("train").is_null()) tr = doubles(r.at("train").at("returns"));
    const auto ra = doubles(r.at("rand"));
    const auto sy = doubles(r.at("syn").at("returns"));
    if (!tr.empty()) emit("train", tr);
    emit("rand", ra);
    emit("syn", sy);
    tab.push_back({std::to_string(t), std::to_string(k), std::to_string(n), pm(tr, 2), pm(ra, 2), pm(sy, 2),
                   fmt(*std::max_element(sy.begin(), sy.end()), 2), fmt_full(r.at("chosen_lr").get<double>())});
  }
  out.csv = csv.str();
  out.table = "Evaluation returns with fitted-Q policies (" + env + ")\n" + aligned_table(tab);
  return out;
}

// ---------------------------------------------------------------------------
// Lower-bound experiment

inline json run_lowerbound(const json& cfg) {
  const auto& lb = cfg.at("lowerbound");
  const auto q_min = lb.at("q_min").get<std::size_t>(), q_max = lb.at("q_max").get<std::size_t>();
  const auto requested = lb.at("regressors").get<long long>();
  const double sd = lb.at("regressor_sd").get<double>();
  require(q_min >= 1 && q_min <= q_max, "need 1 <= q_min <= q_max");
  require(sd > 0.0, "regressor_sd must be positive");
  const auto base = cfg.at("base_seed").get<std::uint64_t>();
  json rows = json::array();
  for (std::size_t q = q_min; q <= q_max; ++q) {
    const std::size_t t_count = requested < 0 ? sym_dim(q) - 1 : static_cast<std::size_t>(requested);
    if (t_count >= sym_dim(q))
      throw ConfigError("T = " + std::to_string(t_count) + " regressors in dimension " + std::to_string(q) +
                        " reaches q(q+1)/2 = " + std::to_string(sym_dim(q)) +
                        "; the construction needs fewer than q(q+1)/2 regressors");
    Rng rng(derive_seed(base, "lowerbound-q" + std::to_string(q)));
    std::vector<Vector> regs;
    for (std::size_t i = 0; i < t_count; ++i) {
      Vector v(static_cast<Eigen::Index>(q));
      for (Eigen::Index j = 0; j < v.size(); ++j) v(j) = rng.normal(0.0, sd);
      regs.push_back(v);
    }
    const auto w = null_symmetric(regs, q);
    const auto bundle = construct_counterexample(w);
    const auto rep = verify(bundle, regs);
    rows.push_back({{"q", q},
                    {"regressors", t_count},
                    {"witness_opnorm", w.operator_norm},
                    {"max_equal_dev", rep.max_equal_dev},
                    {"max_abs_diff", rep.max_abs_diff},
                    {"gap", rep.gap},
                    {"gap_target", rep.gap_target},
                    {"pass", rep.pass},
                    {"d_syn", matrix_to_json(bundle.d_syn)},
                    {"f0", matrix_to_json(bundle.f0)}});
  }
  return {{"kind", "lowerbound"}, {"config", cfg}, {"rows", rows}};
}

inline Emitted emit_lowerbound(const json& res) {
  Emitted out;
  std::ostringstream csv;
  csv << "q,regressors,max_equal_dev,gap,gap_target,pass\n";
  std::vector<std::vector<std::string>> tab{{"q", "T", "max dev", "gap", "1/(4q^2)", "pass"}};
  for (const auto& r : res.at("rows")) {
    const auto dev = r.at("max_equal_dev").get<double>(), gap = r.at("gap").get<double>(),
               target = r.at("gap_target").get<double>();
    const bool pass = r.at("pass").get<bool>();
    csv << r.at("q").get<std::size_t>() << ',' << r.at("regressors").get<std::size_t>() << ',' << fmt_full(dev) << ','
        << fmt_full(gap) << ',' << fmt_full(target) << ',' << (pass ? 1 : 0) << '\n';
    char devbuf[32];
    std::snprintf(devbuf, sizeof devbuf, "%.2e", dev);
    tab.push_back({std::to_string(r.at("q").get<std::size_t>()), std::to_string(r.at("regressors").get<std::size_t>()),
                   devbuf, fmt(gap, 8), fmt(target, 8), pass ? "yes" : "NO"});
  }
  out.csv = csv.str();
  out.table = "Lower-bound construction\n" + aligned_table(tab);
  return out;
}

// ---------------------------------------------------------------------------

inline Emitted emit_tables(const json& res) {
  const auto kind = res.at("kind").get<std::string>();
  if (kind == "supervised") return emit_supervised(res);
  if (kind == "offline-rl") return emit_offline_rl(res);
  if (kind == "lowerbound") return emit_lowerbound(res);
  throw ConfigError("unknown result kind '" + kind + "'");
}

inline json run_experiment(const json& cfg) {
  const auto kind = cfg.at("experiment").get<std::string>();
  if (kind == "supervised") return run_supervised(cfg);
  if (kind == "offline-rl") return run_offline_rl(cfg);
  if (kind == "lowerbound") return run_lowerbound(cfg);
  throw ConfigError("unknown experiment kind '" + kind + "'");
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot write " + path);
  os << text;
}

/// Writes <dir>/<name>.json, .csv and .txt; returns the stem used.
inline std::string write_results(const json& res, const std::string& dir, const std::string& name) {
  const auto e = emit_tables(res);
  const std::string stem = dir + "/" + name;
  write_text(stem + ".json", res.dump(1) + "\n");
  write_text(stem + ".csv", e.csv);
  write_text(stem + ".txt", e.table);
  return stem;
}

}  // namespace distillkit
