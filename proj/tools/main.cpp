#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dremarl/config.hpp"
#include "dremarl/estimator.hpp"
#include "dremarl/metrics.hpp"
#include "dremarl/nets.hpp"
#include "dremarl/reward_uncertainty.hpp"
#include "dremarl/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct ConfigFlags {
  std::string config_path;
  std::string scenario;
  int agents = -1;
  std::string reward_setting;
  std::string estimator;
  std::string aggregation;
  std::string reward_mode;
  long long seed = -1;
  int episodes = -1;
  bool individual_rewards = false;
};

void add_config_flags(CLI::App* cmd, ConfigFlags& f) {
  cmd->add_option("--config", f.config_path, "JSON config file");
  cmd->add_option("--scenario", f.scenario, "cn | ref | trea");
  cmd->add_option("--agents", f.agents, "agent count (scenario dependent)");
  cmd->add_option("--reward-setting", f.reward_setting, "dete | dist | ac-dist");
  cmd->add_option("--estimator", f.estimator, "dre | p2p | gre | none");
  cmd->add_option("--aggregation", f.aggregation,
                  "ss-ss | smo-mo | mo-mo | smo-ss | smo-only");
  cmd->add_option("--reward-mode", f.reward_mode, "mean | sample");
  cmd->add_option("--seed", f.seed, "run seed");
  cmd->add_option("--episodes", f.episodes, "training episodes");
  cmd->add_flag("--individual-rewards", f.individual_rewards,
                "train on individual rewards instead of the team sum");
}

json overrides_from(const CLI::App* cmd, const ConfigFlags& f) {
  json o = json::object();
  if (cmd->count("--scenario")) o["scenario"] = f.scenario;
  if (cmd->count("--agents")) o["agents"] = f.agents;
  if (cmd->count("--reward-setting")) o["reward_setting"] = f.reward_setting;
  if (cmd->count("--estimator")) o["estimator"] = f.estimator;
  if (cmd->count("--aggregation")) o["aggregation"] = f.aggregation;
  if (cmd->count("--reward-mode")) o["reward_mode"] = f.reward_mode;
  if (cmd->count("--seed")) o["seed"] = static_cast<std::uint64_t>(f.seed);
  if (cmd->count("--episodes")) o["episodes"] = f.episodes;
  if (cmd->count("--individual-rewards")) o["team_reward"] = false;
  return o;
}

dremarl::RunConfig load_config(const CLI::App* cmd, const ConfigFlags& f) {
  const json overrides = overrides_from(cmd, f);
  if (!f.config_path.empty()) {
    return dremarl::parse_config_file(f.config_path, overrides);
  }
  return dremarl::parse_config(json::object(), overrides);
}

std::string default_out_root() {
  if (const char* env = std::getenv("DREMARL_OUT_ROOT")) return env;
  return "runs";
}

/// Executes one run into `dir`: config.json, metrics.jsonl, timings.jsonl,
/// params.json and optionally trajectories.jsonl.
dremarl::TrainResult run_into(const dremarl::RunConfig& config,
                              const fs::path& dir,
                              const std::string& trajectories_path) {
  fs::create_directories(dir);
  {
    std::ofstream cf(dir / "config.json");
    cf << dremarl::config_to_json(config).dump(2) << "\n";
  }
  std::ofstream metrics(dir / "metrics.jsonl");
  std::ofstream timings(dir / "timings.jsonl");
  std::ofstream trajectories;
  dremarl::TrainSinks sinks;
  sinks.metrics = &metrics;
  sinks.timings = &timings;
  if (!trajectories_path.empty()) {
    trajectories.open(trajectories_path);
    sinks.trajectories = &trajectories;
  }
  dremarl::Trainer trainer(config);
  const dremarl::TrainResult result = trainer.run(sinks);
  {
    nlohmann::ordered_json params;
    for (int i = 0; i < trainer.num_agents(); ++i) {
      params["actor" + std::to_string(i)] =
          trainer.actor_params(i).to_json();
    }
    params["critic"] = trainer.critic_params().to_json();
    if (config.estimator == "dre") {
      for (int i = 0; i < trainer.num_agents(); ++i) {
        params["estimator" + std::to_string(i)] =
            trainer.dre_estimator(i).params().to_json();
      }
    } else if (config.estimator == "p2p") {
      for (int i = 0; i < trainer.num_agents(); ++i) {
        params["estimator" + std::to_string(i)] =
            trainer.p2p_estimator(i).params().to_json();
      }
    } else if (config.estimator == "gre") {
      params["estimator"] = trainer.gre_estimator().params().to_json();
    }
    std::ofstream pf(dir / "params.json");
    pf << params.dump() << "\n";
  }
  return result;
}

int cmd_train(const CLI::App* cmd, const ConfigFlags& flags,
              const std::string& out, const std::string& trajectories) {
  const dremarl::RunConfig config = load_config(cmd, flags);
  const fs::path dir = out.empty() ? fs::path(default_out_root()) / "train"
                                   : fs::path(out);
  const dremarl::TrainResult result = run_into(config, dir, trajectories);
  std::cout << "final_eval_mean " << result.final_eval_mean << " +- "
            << result.final_eval_stderr << "\n";
  std::cout << "outputs in " << dir.string() << "\n";
  return 0;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) seeds.push_back(std::stoull(item));
  }
  return seeds;
}

int cmd_sweep(const CLI::App* cmd, const ConfigFlags& flags,
              const std::string& out, const std::string& seeds_text,
              const std::string& sweep_file) {
  std::vector<json> raw_configs;
  std::vector<std::uint64_t> seeds = parse_seed_list(seeds_text);
  const json overrides = overrides_from(cmd, flags);
  if (!sweep_file.empty()) {
    std::ifstream in(sweep_file);
    if (!in) {
      std::cerr << "error: cannot open sweep file " << sweep_file << "\n";
      return 1;
    }
    json spec;
    in >> spec;
    for (const auto& cj : spec.at("configs")) raw_configs.push_back(cj);
    if (spec.contains("seeds") && seeds.empty()) {
      seeds = spec.at("seeds").get<std::vector<std::uint64_t>>();
    }
  } else {
    raw_configs.push_back(json::object());
  }
  if (seeds.empty()) seeds = {0};
  const fs::path root =
      out.empty() ? fs::path(default_out_root()) / "sweep" : fs::path(out);
  fs::create_directories(root);

  std::vector<dremarl::RunSummary> summaries;
  for (std::size_t c = 0; c < raw_configs.size(); ++c) {
    for (const std::uint64_t seed : seeds) {
      const fs::path dir = root / ("config" + std::to_string(c) + "_seed" +
                                   std::to_string(seed));
      // One failing run must not take the sweep down.
      try {
        dremarl::RunConfig config =
            (sweep_file.empty() && !flags.config_path.empty())
                ? dremarl::parse_config_file(flags.config_path, overrides)
                : dremarl::parse_config(raw_configs[c], overrides);
        config.seed = seed;
        run_into(config, dir, "");
      } catch (const std::exception& e) {
        std::cerr << "run " << dir.string() << " failed: " << e.what() << "\n";
      }
      summaries.push_back(dremarl::read_run_dir(dir.string()));
    }
  }
  const auto groups = dremarl::summarize_runs(summaries);
  const std::string table = dremarl::summary_table(groups);
  {
    std::ofstream sf(root / "summary.tsv");
    sf << table;
  }
  std::cout << table;
  std::cout << "sweep outputs in " << root.string() << "\n";
  return 0;
}

int cmd_summarize(const std::string& out) {
  std::vector<dremarl::RunSummary> summaries;
  for (const auto& entry : fs::directory_iterator(out)) {
    if (!entry.is_directory()) continue;
    if (!fs::exists(entry.path() / "config.json")) continue;
    summaries.push_back(dremarl::read_run_dir(entry.path().string()));
  }
  if (summaries.empty()) {
    std::cerr << "error: no run directories under " << out << "\n";
    return 1;
  }
  const std::string table =
      dremarl::summary_table(dremarl::summarize_runs(summaries));
  std::cout << table;
  std::ofstream sf(fs::path(out) / "summary.tsv");
  sf << table;
  return 0;
}

// ---------------------------------------------------------------------------
// `check`: quick self-test of the numerical core.

bool check_line(const std::string& name, bool ok) {
  std::cout << (ok ? "[PASS] " : "[FAIL] ") << name << "\n";
  return ok;
}

int cmd_check() {
  using namespace dremarl;
  bool all = true;

  {
    // gradient of a small random policy head against central differences
    Rng rng(7);
    MlpSpec spec{4, {8, 8}, 3, 0.01};
    ParamStore params;
    init_mlp(params, "net", spec, rng);
    std::vector<double> input(8 * 4);
    for (auto& x : input) x = rng.uniform(-1.0, 1.0);
    const Tensor x = Tensor::from({8, 4}, input);
    auto loss_value = [&]() {
      NoGradScope no_grad;
      return mean_all(square(softmax_rows(mlp_forward(params, "net", spec, x))))
          .value();
    };
    backward(mean_all(square(softmax_rows(mlp_forward(params, "net", spec, x)))));
    double worst = 0.0;
    const double h = 1e-5;
    for (const auto& name : params.names()) {
      Tensor p = params.get(name);
      const std::vector<double> analytic = p.grad();
      for (std::size_t i = 0; i < p.size(); ++i) {
        const double keep = p.raw_values()[i];
        p.raw_values()[i] = keep + h;
        const double up = loss_value();
        p.raw_values()[i] = keep - h;
        const double down = loss_value();
        p.raw_values()[i] = keep;
        const double fd = (up - down) / (2.0 * h);
        const double denom =
            std::max({std::abs(analytic[i]), std::abs(fd), 1e-8});
        if (std::abs(analytic[i] - fd) > 1e-9) {
          worst = std::max(worst, std::abs(analytic[i] - fd) / denom);
        }
      }
    }
    all &= check_line("gradients match finite differences", worst < 1e-4);
  }
  {
    RewardBeliefs b{{0.0}, {1.0}};
    const double nll = nll_loss(b, 0, 0.0);
    all &= check_line("likelihood closed form",
                      std::abs(nll - 0.5 * std::log(2.0 * 3.14159265358979324)) <
                          1e-12);
    RewardBeliefs c{{1.0, 1.0, 1.0, 1.0, 1.0}, {1.0, 1.0, 1.0, 1.0, 1.0}};
    all &= check_line("regularizer closed form",
                      std::abs(regularizer(c, 0.1, 10.0) - 0.5) < 1e-12);
  }
  {
    std::vector<double> m1{1.0, 3.0}, m2{3.0, 5.0};
    const double mixed = mixed_reward(CriticAggregation::kMeanOperation,
                                      {m1, m2}, 0, {0.25, 0.75});
    all &= check_line("policy-weighted aggregation", std::abs(mixed - 3.5) < 1e-12);
    const auto built = build_up({1.0, 2.0, 3.0}, 1, 9.0);
    all &= check_line("built-up splice",
                      built == std::vector<double>({1.0, 9.0, 3.0}));
  }
  {
    const auto norm = normalize_scores({-100.0, -50.0, 0.0});
    all &= check_line("score normalization",
                      std::abs(norm.values[0]) < 1e-12 &&
                          std::abs(norm.values[1] - 5.0) < 1e-12 &&
                          std::abs(norm.values[2] - 10.0) < 1e-12);
  }
  {
    RewardPerturber p(RewardSetting::kActionDisturbance, 11);
    double mean = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) mean += p.perturb(0.0, 3);
    mean /= n;
    all &= check_line("action-branch uncertainty mean", std::abs(mean - 3.0) < 0.01);
  }

  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DRE-MARL experiment driver"};
  app.require_subcommand(1);

  ConfigFlags train_flags;
  std::string train_out, train_traj;
  CLI::App* train = app.add_subcommand("train", "run one training job");
  add_config_flags(train, train_flags);
  train->add_option("--out", train_out, "output directory");
  train->add_option("--dump-trajectories", train_traj,
                    "write per-step trajectory records to this file");

  ConfigFlags sweep_flags;
  std::string sweep_out, sweep_seeds, sweep_file;
  CLI::App* sweep = app.add_subcommand("sweep", "run a config x seed grid");
  add_config_flags(sweep, sweep_flags);
  sweep->add_option("--out", sweep_out, "output directory");
  sweep->add_option("--seeds", sweep_seeds, "comma-separated seed list");
  sweep->add_option("--sweep-config", sweep_file,
                    "JSON file with {configs: [...], seeds: [...]}");

  std::string summarize_out;
  CLI::App* summarize =
      app.add_subcommand("summarize", "rebuild the summary table from run files");
  summarize->add_option("--out", summarize_out, "directory of run folders")
      ->required();

  CLI::App* check = app.add_subcommand("check", "run built-in self checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) {
      return cmd_train(train, train_flags, train_out, train_traj);
    }
    if (sweep->parsed()) {
      return cmd_sweep(sweep, sweep_flags, sweep_out, sweep_seeds, sweep_file);
    }
    if (summarize->parsed()) return cmd_summarize(summarize_out);
    if (check->parsed()) return cmd_check();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
