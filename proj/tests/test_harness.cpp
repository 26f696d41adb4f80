#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "hwadv/attacker/agent.hpp"
#include "hwadv/av/agent.hpp"
#include "hwadv/harness/commands.hpp"
#include "hwadv/harness/config.hpp"
#include "hwadv/harness/histogram.hpp"
#include "hwadv/harness/trace.hpp"
#include "test_util.hpp"

using namespace hwadv;
using harness::ExperimentConfig;
using harness::FcHistogram;

namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const char* name) {
  const fs::path p = fs::temp_directory_path() / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

av::FrozenPolicy zero_policy(const sim::RoadConfig& road) {
  rl::QNetwork net({av::kAvObservationDim, rl::QNetwork::kActionCount}, 0);
  for (auto& W : net.weights()) W.setZero();
  for (auto& b : net.biases()) b.setZero();
  return av::FrozenPolicy(rl::make_checkpoint("av", net, av::scaling_from_road(road), {}));
}

} // namespace

TEST_CASE("config: defaults validate and round-trip through a file") {
  ExperimentConfig cfg;
  cfg.validate();
  const auto path = (fs::temp_directory_path() / "hwadv_cfg.txt").string();
  cfg.save(path);
  const ExperimentConfig back = ExperimentConfig::from_file(path);
  CHECK(back.canonical_text() == cfg.canonical_text());
  CHECK(back.config_hash() == cfg.config_hash());
}

TEST_CASE("config: unknown keys and malformed values are rejected") {
  ExperimentConfig cfg;
  CHECK_THROWS_WITH_AS(cfg.apply("no_such_key", "1"),
                       doctest::Contains("unknown key"), std::runtime_error);
  CHECK_THROWS(cfg.apply("lane_width", "wide"));
  CHECK_THROWS(cfg.apply("with_attacker", "maybe"));

  const auto path = (fs::temp_directory_path() / "hwadv_bad_cfg.txt").string();
  std::ofstream(path) << "lane_width = 3.6\nmystery = 1\n";
  CHECK_THROWS_WITH_AS(ExperimentConfig::from_file(path), doctest::Contains(":2"),
                       std::runtime_error);
  CHECK_THROWS(ExperimentConfig::from_file("/no/such/config.txt"));
}

TEST_CASE("config: comments and blank lines parse; values apply") {
  const auto path = (fs::temp_directory_path() / "hwadv_cfg2.txt").string();
  std::ofstream(path) << "# experiment\n\nn_env_cars = 15  # density\nseed = 7\n"
                      << "attacker_learning_rate = 1e-6\nwith_attacker = true\n";
  const ExperimentConfig cfg = ExperimentConfig::from_file(path);
  CHECK(cfg.n_env_cars == 15);
  CHECK(cfg.seed == 7);
  CHECK(cfg.with_attacker);
  CHECK(cfg.attacker_train.learning_rate == 1e-6);
}

TEST_CASE("config: invariant violations fail validation") {
  ExperimentConfig cfg;
  cfg.sim.road.lane_count = 2;
  CHECK_THROWS(cfg.validate());
  cfg = {};
  cfg.sim.road.speed_min = 35;
  CHECK_THROWS(cfg.validate());
  cfg = {};
  cfg.rl.gamma = 1.0;
  CHECK_THROWS(cfg.validate());
}

TEST_CASE("config: hash covers physics but not run-shape keys") {
  ExperimentConfig a, b;
  b.n_env_cars = 20;
  b.with_attacker = true;
  b.n_eval_episodes = 5;
  b.workers = 8;
  b.out_dir = "elsewhere";
  CHECK(a.config_hash() == b.config_hash());
  b.sim.road.lane_width = 3.7;
  CHECK(a.config_hash() != b.config_hash());
  ExperimentConfig c;
  c.seed = 2;
  CHECK(a.config_hash() != c.config_hash()); // seed is part of the family
}

TEST_CASE("config: per-agent train configs inherit shared keys") {
  ExperimentConfig cfg;
  cfg.rl.gamma = 0.9;
  cfg.rl.batch_size = 32;
  const rl::TrainConfig av_t = cfg.av_train_config();
  const rl::TrainConfig at_t = cfg.attacker_train_config();
  CHECK(av_t.gamma == 0.9);
  CHECK(at_t.gamma == 0.9);
  CHECK(at_t.learning_rate == 1e-6);
  CHECK(at_t.epsilon0 == 0.2);
  CHECK(at_t.anneal_c == 2e-6);
  CHECK(at_t.steps_per_episode == 200);
  CHECK(av_t.seed != at_t.seed);
  CHECK(cfg.attacker_train_config(0).seed != cfg.attacker_train_config(1).seed);
}

TEST_CASE("trace: write/read round trip preserves every field") {
  harness::EpisodeTrace t;
  t.config_hash = "0123456789abcdef";
  t.episode_seed = 991;
  t.episode_id = 17;
  t.n_env_cars = 3;
  t.with_attacker = true;
  t.safety_enabled = false;
  t.initial = {test::car(0, 1, 100.125, 25.5, sim::Role::av),
               test::car(1, 0, 90.0000001, 28.25, sim::Role::attacker)};
  harness::TraceStep step;
  step.actions[0] = {sim::LongitudinalAction::brake, sim::LateralAction::change_left};
  step.actions[1] = {};
  step.states_after = {test::car(0, 1, 125.6250000001, 23.5, sim::Role::av),
                       test::car(1, 0, 118.25, 28.25, sim::Role::attacker)};
  step.av_reward = -0.12345678901234567;
  step.attacker_reward = -0.05;
  t.steps.push_back(step);
  t.termination = "av_crashed";
  judge::Verdict v;
  v.failure_code = 4;
  v.situation = judge::PreCrashSituation::one_on_marker_crash_target_lane;
  v.responsible = 0;
  v.av_at_fault = true;
  v.mee_expected = judge::MeeKind::abandon_lane_change;
  v.attacker_reward = 1.0;
  t.verdict = v;
  t.cumulative_attacker_reward = 0.85;

  const auto path = (fs::temp_directory_path() / "hwadv_trace.trace").string();
  t.write(path);
  const harness::EpisodeTrace back = harness::EpisodeTrace::read(path);
  CHECK(back.config_hash == t.config_hash);
  CHECK(back.episode_seed == t.episode_seed);
  CHECK(back.n_env_cars == 3);
  CHECK(back.with_attacker);
  CHECK_FALSE(back.safety_enabled);
  REQUIRE(back.initial.size() == 2);
  CHECK(back.initial[0].x == t.initial[0].x);
  CHECK(back.initial[1].x == t.initial[1].x);
  REQUIRE(back.steps.size() == 1);
  CHECK(back.steps[0].av_reward == step.av_reward);
  CHECK(back.steps[0].states_after[0].x == step.states_after[0].x);
  CHECK(back.steps[0].actions.at(0).ax == sim::LongitudinalAction::brake);
  REQUIRE(back.verdict.has_value());
  CHECK(back.verdict->failure_code == 4);
  CHECK(back.verdict->attacker_reward == 1.0);
  CHECK(back.cumulative_attacker_reward == 0.85);
}

TEST_CASE("evaluation: traces replay bitwise; tampering is detected") {
  ExperimentConfig cfg;
  cfg.n_env_cars = 6;
  cfg.n_eval_episodes = 8;
  cfg.workers = 2;
  cfg.write_all_traces = true;
  const auto dir = temp_dir("hwadv_eval_traces");

  const auto policy = zero_policy(cfg.sim.road);
  const FcHistogram hist = harness::run_evaluation(cfg, policy, nullptr, dir.string());
  CHECK(hist.episodes == 8);

  int n_traces = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    ++n_traces;
    const auto trace = harness::EpisodeTrace::read(entry.path().string());
    std::string why;
    CHECK_MESSAGE(harness::replay_matches(cfg, trace, &why), why);
  }
  CHECK(n_traces == 8); // write_all_traces

  // flip one recorded state and expect the replay audit to catch it
  const auto some = dir / "ep_000000.trace";
  auto trace = harness::EpisodeTrace::read(some.string());
  REQUIRE(!trace.steps.empty());
  trace.steps.back().states_after[0].x += 1e-9;
  std::string why;
  CHECK_FALSE(harness::replay_matches(cfg, trace, &why));
  CHECK(!why.empty());
}

TEST_CASE("evaluation: histogram is invariant to the worker count") {
  ExperimentConfig cfg;
  cfg.n_env_cars = 8;
  cfg.n_eval_episodes = 40;
  cfg.seed = 5;
  const auto policy = zero_policy(cfg.sim.road);

  cfg.workers = 1;
  const FcHistogram h1 = harness::run_evaluation(cfg, policy, nullptr, "");
  cfg.workers = 4;
  const FcHistogram h4 = harness::run_evaluation(cfg, policy, nullptr, "");
  CHECK(h1 == h4);

  cfg.workers = 1;
  const FcHistogram again = harness::run_evaluation(cfg, policy, nullptr, "");
  CHECK(h1 == again);
}

TEST_CASE("evaluation: zero episodes give an all-zero histogram") {
  ExperimentConfig cfg;
  cfg.n_eval_episodes = 0;
  const auto policy = zero_policy(cfg.sim.road);
  const FcHistogram h = harness::run_evaluation(cfg, policy, nullptr, "");
  CHECK(h.episodes == 0);
  CHECK(h.total_crashes() == 0);
  CHECK(h.timeouts == 0);
}

TEST_CASE("evaluation: crash count equals the number of crash traces written") {
  ExperimentConfig cfg;
  cfg.n_env_cars = 10;
  cfg.n_eval_episodes = 30;
  cfg.sim.safety.enabled = false; // provoke some crashes
  cfg.seed = 11;
  const auto dir = temp_dir("hwadv_crash_traces");
  const auto policy = zero_policy(cfg.sim.road);
  const FcHistogram h = harness::run_evaluation(cfg, policy, nullptr, dir.string());
  long files = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    (void)entry;
    ++files;
  }
  CHECK(files == h.total_crashes());
}

TEST_CASE("histogram: file round trip and merge arithmetic") {
  FcHistogram h;
  h.config_hash = "feedfacefeedface";
  h.with_attacker = true;
  h.n_env_cars = 15;
  h.episodes = 100;
  h.add_crash(2, true);
  h.add_crash(2, false);
  h.add_crash(6, true);
  h.timeouts = 90;
  const auto path = (fs::temp_directory_path() / "hwadv_hist.hist").string();
  h.write(path);
  const FcHistogram back = FcHistogram::read(path);
  CHECK(back == h);
  CHECK(back.total_crashes() == 3);
  CHECK(back.attacker_victim_crashes() == 2);
  CHECK(back.av_at_fault_crashes() == 3);

  FcHistogram other = h;
  other.episodes = 50;
  FcHistogram merged = h;
  merged.merge(other);
  CHECK(merged.episodes == 150);
  CHECK(merged.fc_total[2] == 4);
}

TEST_CASE("report: renders table-style cells and round-trips through csv") {
  FcHistogram base;
  base.config_hash = "aa";
  base.n_env_cars = 10;
  base.episodes = 1000;
  base.add_crash(3, false);
  FcHistogram att;
  att.config_hash = "aa";
  att.with_attacker = true;
  att.n_env_cars = 10;
  att.episodes = 1000;
  for (int i = 0; i < 504; ++i) att.add_crash(6, true);
  for (int i = 0; i < 5; ++i) att.add_crash(1, false);

  const std::string table = harness::render_report({base, att}, false);
  CHECK(table.find("504/504") != std::string::npos);
  CHECK(table.find("w/o. attacker") != std::string::npos);
  CHECK(table.find("w. one attacker") != std::string::npos);

  const std::string csv = harness::render_report_csv({base, att});
  std::istringstream in(csv);
  const auto cells = harness::parse_report_csv(in);
  REQUIRE(cells.size() == 2);
  CHECK(cells[0] == base);
  CHECK(cells[1] == att);
}

TEST_CASE("report: refuses to mix histograms from different configs") {
  const auto dir = temp_dir("hwadv_report_mix");
  FcHistogram a, b;
  a.config_hash = "one";
  b.config_hash = "two";
  a.write((dir / "a.hist").string());
  b.write((dir / "b.hist").string());
  CHECK_THROWS_WITH_AS(
      harness::cmd_report({(dir / "a.hist").string(), (dir / "b.hist").string()}, false,
                          ""),
      doctest::Contains("different configs"), std::runtime_error);
}

TEST_CASE("curve csv: write/read round trip") {
  const auto path = (fs::temp_directory_path() / "hwadv_curve.csv").string();
  const std::vector<attacker::CurveRow> rows = {{100, -4.25, 0.5}, {200, -1.0, 0.125}};
  harness::write_curve_csv(path, rows);
  const auto back = harness::read_curve_csv(path);
  REQUIRE(back.size() == 2);
  CHECK(back[0].episode == 100);
  CHECK(back[0].mean_reward == -4.25);
  CHECK(back[1].std_reward == 0.125);
}
