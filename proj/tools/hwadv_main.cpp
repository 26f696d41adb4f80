#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hwadv/harness/commands.hpp"
#include "hwadv/harness/config.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<long> episodes;
  std::optional<int> env_cars;
  bool with_attacker = false;
  bool no_safety_check = false;
  std::optional<int> workers;
  std::optional<std::string> out_dir;
  bool write_all_traces = false;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config_path, "experiment config file (key = value)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "run seed");
  cmd->add_option("--episodes", o.episodes, "episode count for this command");
  cmd->add_option("--env-cars", o.env_cars, "number of env cars")
      ->check(CLI::IsMember({10, 15, 20}) | CLI::Range(0, 64));
  cmd->add_flag("--with-attacker", o.with_attacker, "evaluate with the attacker present");
  cmd->add_flag("--no-safety-check", o.no_safety_check,
                "disable the AV's short-horizon safety filter");
  cmd->add_option("--workers", o.workers, "evaluation worker threads");
  cmd->add_option("--out", o.out_dir, "output directory");
  cmd->add_flag("--all-traces", o.write_all_traces, "persist non-crash traces too");
}

hwadv::harness::ExperimentConfig build_config(const CommonOpts& o, const char* episodes_key) {
  using hwadv::harness::ExperimentConfig;
  ExperimentConfig cfg = o.config_path.empty() ? ExperimentConfig{}
                                               : ExperimentConfig::from_file(o.config_path);
  if (o.seed) cfg.seed = *o.seed;
  if (o.env_cars) cfg.n_env_cars = *o.env_cars;
  if (o.with_attacker) cfg.with_attacker = true;
  if (o.no_safety_check) cfg.sim.safety.enabled = false;
  if (o.workers) cfg.workers = *o.workers;
  if (o.out_dir) cfg.out_dir = *o.out_dir;
  if (o.write_all_traces) cfg.write_all_traces = true;
  if (o.episodes) {
    const std::string key = episodes_key;
    if (key == "av") cfg.av_train.episodes = *o.episodes;
    else if (key == "attacker") cfg.attacker_train.episodes = *o.episodes;
    else cfg.n_eval_episodes = *o.episodes;
  }
  cfg.validate();
  return cfg;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"hwadv: highway lane-change RL with an adversarial vehicle and "
               "responsibility-aware crash scoring"};
  app.require_subcommand(1);

  CommonOpts train_av_opts;
  auto* train_av = app.add_subcommand("train-av", "train the AV lane-change policy");
  add_common(train_av, train_av_opts);

  CommonOpts train_att_opts;
  std::string att_av_ckpt;
  int repeats = 1;
  auto* train_att =
      app.add_subcommand("train-attacker", "train the attacker against a frozen AV");
  add_common(train_att, train_att_opts);
  train_att->add_option("--av-checkpoint", att_av_ckpt, "frozen AV checkpoint")
      ->required()
      ->check(CLI::ExistingFile);
  train_att->add_option("--repeats", repeats, "independent training repetitions")
      ->check(CLI::Range(1, 64));

  CommonOpts eval_opts;
  std::string eval_av_ckpt, eval_att_ckpt;
  auto* evaluate = app.add_subcommand("evaluate", "evaluate the AV, with or without attacker");
  add_common(evaluate, eval_opts);
  evaluate->add_option("--av-checkpoint", eval_av_ckpt, "frozen AV checkpoint")
      ->required()
      ->check(CLI::ExistingFile);
  evaluate->add_option("--attacker-checkpoint", eval_att_ckpt, "attacker checkpoint")
      ->check(CLI::ExistingFile);

  std::vector<std::string> hist_files;
  bool extended = false;
  std::string csv_out;
  auto* report = app.add_subcommand("report", "render failure-code crash tables");
  report->add_option("histograms", hist_files, "histogram files")->required();
  report->add_flag("--extended", extended, "include failure code 0 and episode totals");
  report->add_option("--csv", csv_out, "also write the table as csv");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train_av) {
      return hwadv::harness::cmd_train_av(build_config(train_av_opts, "av"));
    }
    if (*train_att) {
      return hwadv::harness::cmd_train_attacker(build_config(train_att_opts, "attacker"),
                                                att_av_ckpt, repeats);
    }
    if (*evaluate) {
      auto cfg = build_config(eval_opts, "eval");
      if (!eval_att_ckpt.empty()) cfg.with_attacker = true;
      return hwadv::harness::cmd_evaluate(cfg, eval_av_ckpt, eval_att_ckpt);
    }
    if (*report) {
      return hwadv::harness::cmd_report(hist_files, extended, csv_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
