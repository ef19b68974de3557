// distillkit command-line driver.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "distillkit/experiments.hpp"

namespace dk = distillkit;
using dk::json;

namespace {

struct Common {
  std::string config_path;
  std::vector<std::string> sets;
  std::string out_dir;
  std::string name;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config_path, "JSON config file");
  sub->add_option("--set", c.sets, "Override a config field, e.g. --set offline_rl.gamma=0.9")->take_all();
  sub->add_option("--out", c.out_dir, "Output directory (overrides output_dir)");
  sub->add_option("--name", c.name, "Output file stem (overrides name)");
}

json load_json(const std::string& path) {
  const auto text = dk::read_file(path);
  auto j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw dk::ConfigError(path + ": not valid JSON");
  return j;
}

json resolve(const Common& c, const char* forced_kind) {
  json file_cfg = c.config_path.empty() ? json::object() : load_json(c.config_path);
  if (!file_cfg.is_object()) throw dk::ConfigError("config must be a JSON object");
  if (forced_kind) {
    if (file_cfg.contains("experiment") && file_cfg["experiment"] != forced_kind)
      throw dk::ConfigError("config declares experiment '" + file_cfg["experiment"].get<std::string>() +
                            "' but the subcommand runs '" + forced_kind + "'");
    file_cfg["experiment"] = forced_kind;
  }
  auto cfg = dk::resolve_config(file_cfg, c.sets, std::getenv("DISTILLKIT_SEED"));
  if (!c.out_dir.empty()) cfg["output_dir"] = c.out_dir;
  if (!c.name.empty()) cfg["name"] = c.name;
  return cfg;
}

std::string default_name(const json& cfg) {
  const auto n = cfg.at("name").get<std::string>();
  if (!n.empty()) return n;
  const auto kind = cfg.at("experiment").get<std::string>();
  if (kind == "supervised") return "supervised-" + cfg.at("supervised").at("dataset").get<std::string>();
  if (kind == "offline-rl") return "offline-rl-" + cfg.at("offline_rl").at("env").get<std::string>();
  return kind;
}

std::string run_and_write(const json& cfg) {
  const auto dir = cfg.at("output_dir").get<std::string>();
  std::filesystem::create_directories(dir);
  const auto res = dk::run_experiment(cfg);
  const auto stem = dk::write_results(res, dir, default_name(cfg));
  if (res.at("kind") == "offline-rl") {
    for (const auto& r : res.at("rows")) {
      const auto path = stem + ".syn-t" + std::to_string(r.at("trial").get<std::size_t>()) + "-k" +
                        std::to_string(r.at("k").get<std::size_t>()) + "-n" +
                        std::to_string(r.at("n_syn").get<std::size_t>()) + ".csv";
      std::ostringstream os;
      dk::write_relaxed_csv(os, dk::relaxed_from_json(r.at("synthetic")));
      dk::write_text(path, os.str());
    }
  }
  std::cout << dk::emit_tables(res).table;
  std::cerr << "wrote " << stem << ".{json,csv,txt}\n";
  return stem;
}

void write_or_print(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    dk::write_text(path, text);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Loss-matching dataset distillation for regression and offline RL"};
  app.require_subcommand(1);

  Common sup_opts, rl_opts, lb_opts;
  auto* sup = app.add_subcommand("distill-sup", "Supervised distillation experiment (test-MSE table)");
  add_common(sup, sup_opts);
  auto* rl = app.add_subcommand("distill-rl", "Offline RL distillation experiment (evaluation-return table)");
  add_common(rl, rl_opts);
  auto* lb = app.add_subcommand("lowerbound", "Verify the q(q+1)/2 regressor lower-bound construction");
  add_common(lb, lb_opts);

  std::string b_data, b_format = "wine", b_method = "random", b_out;
  std::size_t b_m = 50;
  std::uint64_t b_seed = 0;
  bool b_header = false, b_standardize = false;
  auto* base = app.add_subcommand("baseline", "Subsample or moment-reduce a regression dataset");
  base->add_option("--data", b_data, "Input CSV")->required();
  base->add_option("--format", b_format, "wine | housing | generic")->capture_default_str();
  base->add_flag("--header", b_header, "Generic CSV has a header row");
  base->add_option("--method", b_method, "random | leverage | moment")->capture_default_str();
  base->add_option("-m,--size", b_m, "Rows to keep (random, leverage)")->capture_default_str();
  base->add_option("--seed", b_seed, "Sampling seed")->capture_default_str();
  base->add_flag("--standardize", b_standardize, "Standardize columns first");
  base->add_option("--out", b_out, "Output CSV (default stdout)");

  std::string c_env = "cartpole", c_out;
  std::size_t c_n = 10000, c_random = 5000, c_expert = 5000;
  std::uint64_t c_seed = 0;
  bool c_mixed = false;
  auto* col = app.add_subcommand("collect", "Collect an offline transition dataset");
  col->add_option("--env", c_env, "cartpole | mountaincar | acrobot")->capture_default_str();
  col->add_option("-n", c_n, "Random transitions")->capture_default_str();
  col->add_flag("--mixed", c_mixed, "Mountain Car random/expert mix");
  col->add_option("--n-random", c_random, "Random transitions in the mix")->capture_default_str();
  col->add_option("--n-expert", c_expert, "Expert transitions in the mix")->capture_default_str();
  col->add_option("--seed", c_seed, "Collection seed")->capture_default_str();
  col->add_option("--out", c_out, "Output CSV (default stdout)");

  Common f_opts;
  std::string f_data, f_env, f_ckpt;
  std::uint64_t f_seed = 0;
  bool f_full = false;
  auto* fq = app.add_subcommand("train-fqi", "Fitted-Q iteration on a transition CSV");
  fq->add_option("--config", f_opts.config_path, "JSON config (offline_rl.fqi block is used)");
  fq->add_option("--set", f_opts.sets, "Config override")->take_all();
  fq->add_option("--data", f_data, "Transition CSV (plain or synthetic)")->required();
  fq->add_option("--env", f_env, "Environment (default offline_rl.env)");
  fq->add_option("--seed", f_seed, "Initialisation seed")->capture_default_str();
  fq->add_flag("--full", f_full, "Use the offline_rl.fqi_full settings");
  fq->add_option("--out", f_ckpt, "Checkpoint JSON (default stdout)");

  std::string e_ckpt, e_env, e_policy = "greedy", e_out;
  std::size_t e_episodes = 10;
  std::uint64_t e_seed = 0;
  auto* ev = app.add_subcommand("eval-policy", "Evaluate a checkpoint or a reference policy");
  ev->add_option("--checkpoint", e_ckpt, "Q-function checkpoint JSON");
  ev->add_option("--env", e_env, "Environment")->required();
  ev->add_option("--policy", e_policy, "greedy | random | constant:<a>")->capture_default_str();
  ev->add_option("--episodes", e_episodes, "Episodes")->capture_default_str();
  ev->add_option("--seed", e_seed, "Reset seed")->capture_default_str();
  ev->add_option("--out", e_out, "Result JSON (default stdout)");

  std::string r_in, r_csv;
  auto* rep = app.add_subcommand("report", "Re-emit tables from a result JSON");
  rep->add_option("--in", r_in, "Result JSON")->required();
  rep->add_option("--csv", r_csv, "Also write the machine CSV here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sup) run_and_write(resolve(sup_opts, "supervised"));
    if (*rl) run_and_write(resolve(rl_opts, "offline-rl"));
    if (*lb) run_and_write(resolve(lb_opts, "lowerbound"));

    if (*base) {
      dk::LoadOptions opt;
      opt.format = dk::parse_format(b_format);
      opt.has_header = b_header;
      auto ds = dk::load_csv_regression(b_data, opt);
      if (b_standardize) ds = dk::standardize(ds).first;
      dk::Rng rng(b_seed);
      dk::RegressionDataset out;
      if (b_method == "random") {
        out = dk::random_subsample(ds, b_m, rng);
      } else if (b_method == "leverage") {
        out = dk::leverage_subsample(ds, b_m, rng);
      } else if (b_method == "moment") {
        out = dk::moment_reduce(ds);
      } else {
        throw dk::ConfigError("unknown baseline method '" + b_method + "'");
      }
      std::ostringstream os;
      dk::write_regression_csv(os, out);
      write_or_print(b_out, os.str());
    }

    if (*col) {
      const auto kind = dk::parse_env(c_env);
      dk::OfflineRLDataset ds;
      if (c_mixed) {
        if (kind != dk::EnvKind::mountaincar) throw dk::ConfigError("--mixed is only available for mountaincar");
        const auto cfg = dk::default_config().at("offline_rl");
        const auto expert = dk::train_tabular_expert_mountaincar(dk::expert_from_json(cfg.at("expert")),
                                                                 dk::derive_seed(c_seed, "expert"));
        for (const auto& w : expert.warnings) std::cerr << "warning: " << w << '\n';
        ds = dk::collect_mixed_mountaincar(expert.table, c_random, c_expert, dk::derive_seed(c_seed, "data"),
                                           cfg.at("gamma").get<double>());
      } else {
        ds = dk::collect_random(kind, c_n, c_seed);
      }
      std::ostringstream os;
      dk::write_offline_csv(os, ds);
      write_or_print(c_out, os.str());
    }

    if (*fq) {
      const auto cfg = dk::resolve_config(f_opts.config_path.empty() ? json::object() : load_json(f_opts.config_path),
                                          f_opts.sets, nullptr);
      const auto& rlc = cfg.at("offline_rl");
      const auto kind = dk::parse_env(f_env.empty() ? rlc.at("env").get<std::string>() : f_env);
      const auto spec = dk::env_spec(kind);
      const auto table = dk::parse_transitions_csv(dk::read_file(f_data), spec.action_count);
      const auto [h1, h2] = dk::hidden_sizes(rlc, kind);
      const auto fcfg = dk::fqi_from_json(rlc.at(f_full ? "fqi_full" : "fqi"), rlc.at("gamma").get<double>(), h1, h2,
                                          f_seed);
      const auto res = dk::fqi_train(table.relaxed, fcfg);
      json out = dk::to_json(res.q);
      out["env"] = spec.name;
      out["fit_loss"] = res.fit_loss;
      write_or_print(f_ckpt, out.dump(1) + "\n");
    }

    if (*ev) {
      const auto kind = dk::parse_env(e_env);
      const auto spec = dk::env_spec(kind);
      dk::Policy policy;
      std::optional<dk::QPredictor> q;
      if (e_policy == "greedy") {
        if (e_ckpt.empty()) throw dk::ConfigError("greedy evaluation needs --checkpoint");
        q = dk::qpredictor_from_json(load_json(e_ckpt));
        if (q->action_count != spec.action_count || q->state_dim != spec.state_dim)
          throw dk::ConfigError("checkpoint shape does not match " + spec.name);
        policy = dk::greedy_policy(*q);
      } else if (e_policy == "random") {
        auto rng = std::make_shared<dk::Rng>(dk::derive_seed(e_seed, "policy"));
        const auto na = spec.action_count;
        policy = [rng, na](const dk::Vector&) { return static_cast<int>(rng->uniform_index(na)); };
      } else if (e_policy.rfind("constant:", 0) == 0) {
        const int a = std::stoi(e_policy.substr(9));
        if (a < 0 || static_cast<std::size_t>(a) >= spec.action_count) throw dk::ConfigError("constant action out of range");
        policy = [a](const dk::Vector&) { return a; };
      } else {
        throw dk::ConfigError("unknown policy '" + e_policy + "'");
      }
      const auto r = dk::evaluate_policy(kind, policy, e_episodes, e_seed);
      json out = dk::eval_json(r);
      out["env"] = spec.name;
      write_or_print(e_out, out.dump(1) + "\n");
    }

    if (*rep) {
      const auto e = dk::emit_tables(load_json(r_in));
      std::cout << e.table;
      if (!r_csv.empty()) dk::write_text(r_csv, e.csv);
    }
  } catch (const dk::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
