#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "hwadv/av/agent.hpp"
#include "hwadv/av/observation.hpp"
#include "hwadv/av/reward.hpp"
#include "hwadv/rl/checkpoint.hpp"
#include "test_util.hpp"

using namespace hwadv;
using namespace hwadv::test;
using sim::DiscreteAction;

namespace {

// Straight-line oracle for the three shaping terms.
av::RewardTerms oracle_terms(bool has_lead, double dx, double dx_safe, double y,
                             double y_des, double vx, const av::RewardParams& p) {
  av::RewardTerms t;
  if (has_lead && dx < dx_safe)
    t.r_x = std::exp(-std::pow(dx - dx_safe, 2) / (10.0 * dx_safe)) - 1.0;
  t.r_y = std::exp(-std::pow(y - y_des, 2) / p.y_norm) - 1.0;
  t.r_v = std::exp(-std::pow(vx - p.v_des, 2) / p.v_norm) - 1.0;
  return t;
}

av::FrozenPolicy make_policy(std::uint64_t net_seed, const sim::RoadConfig& road,
                             bool zero = false) {
  rl::QNetwork net({av::kAvObservationDim, 16, rl::QNetwork::kActionCount}, net_seed);
  if (zero) {
    for (auto& W : net.weights()) W.setZero();
    for (auto& b : net.biases()) b.setZero();
  }
  return av::FrozenPolicy(
      rl::make_checkpoint("av", net, av::scaling_from_road(road), {}));
}

std::string file_bytes(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(is), {});
}

} // namespace

TEST_CASE("observe_av: lone AV sees saturated sentinels and scaled self state") {
  sim::SimConfig cfg;
  auto w = make_world({car(0, 1, 100, 15, sim::Role::av)}, cfg);
  const auto scaling = av::scaling_from_road(cfg.road);
  const Eigen::VectorXd obs = av::observe_av(w, scaling);
  REQUIRE(obs.size() == av::kAvObservationDim);
  CHECK(obs(0) == doctest::Approx(0.0)); // middle lane center
  CHECK(obs(1) == doctest::Approx(0.0)); // half of speed_max
  for (int slot = 0; slot < 6; ++slot) {
    const bool front = slot % 2 == 0;
    CHECK(obs(2 + 3 * slot + 0) == (front ? 1.0 : -1.0));
    CHECK(obs(2 + 3 * slot + 1) == 0.0);
    CHECK(obs(2 + 3 * slot + 2) == 0.0);
  }
}

TEST_CASE("observe_av: neighbor at identical pose and speed encodes as zeros") {
  sim::SimConfig cfg;
  auto w = make_world({car(0, 1, 100, 20, sim::Role::av), car(1, 1, 100, 20)}, cfg);
  const Eigen::VectorXd obs = av::observe_av(w, av::scaling_from_road(cfg.road));
  // same x counts as front: slot (lane 1, front) = slot 2
  CHECK(obs(2 + 3 * 2 + 0) == 0.0);
  CHECK(obs(2 + 3 * 2 + 1) == 0.0);
  CHECK(obs(2 + 3 * 2 + 2) == 0.0);
}

TEST_CASE("observe_av: slot assignment agrees with nearest_neighbors") {
  sim::SimConfig cfg;
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> ux(-150, 150), uv(5, 30);
  const auto scaling = av::scaling_from_road(cfg.road);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<sim::VehicleState> cars{car(0, 1, 0, 20, sim::Role::av)};
    for (int i = 1; i < 12; ++i)
      cars.push_back(car(i, static_cast<int>(rng() % 3), ux(rng), uv(rng)));
    auto w = make_world(cars, cfg);
    const auto slots = sim::nearest_neighbors(w, 0);
    const Eigen::VectorXd obs = av::observe_av(w, scaling);
    for (int s = 0; s < 6; ++s) {
      if (slots[s] == sim::kNoVehicle) continue;
      const auto& v = *w.find(slots[s]);
      CHECK(obs(2 + 3 * s + 0) ==
            doctest::Approx(std::clamp(v.x / scaling.dx_range, -1.0, 1.0)));
      CHECK(obs(2 + 3 * s + 2) ==
            doctest::Approx(std::clamp((v.vx - 20.0) / scaling.dv_range, -1.0, 1.0)));
    }
  }
}

TEST_CASE("scaling: affine maps are bijective on the physical ranges") {
  sim::SimConfig cfg;
  const auto s = av::scaling_from_road(cfg.road);
  for (const double y : {-1.8, 0.0, 3.6, 7.2, 9.0}) {
    const double scaled = s.scale_y(y);
    CHECK(scaled * s.y_half + s.y_center == doctest::Approx(y).epsilon(1e-14));
    CHECK(scaled >= -1.0);
    CHECK(scaled <= 1.0);
  }
  for (const double v : {0.0, 15.0, 30.0}) {
    const double scaled = s.scale_v(v);
    CHECK(scaled * s.v_half + s.v_half == doctest::Approx(v).epsilon(1e-14));
  }
}

TEST_CASE("reward: zero at all setpoints") {
  sim::SimConfig cfg;
  av::RewardParams params;
  // AV holding the lane center at v_des with the lead beyond dx_safe
  auto w0 = make_world({car(0, 1, 100, params.v_des, sim::Role::av),
                        car(1, 1, 100 + 60, params.v_des)},
                       cfg);
  CHECK(av::reward_av(w0, w0, false, params) == 0.0);
}

TEST_CASE("reward: collision returns -2") {
  sim::SimConfig cfg;
  auto w = make_world({car(0, 1, 100, 20, sim::Role::av)}, cfg);
  CHECK(av::reward_av(w, w, true, {}) == -2.0);
}

TEST_CASE("reward: dx_safe 30 at dx 15 evaluates the gap branch exactly") {
  sim::SimConfig cfg;
  av::RewardParams params;
  params.dx_safe_min = 30.0;
  params.dx_safe_headway = 0.0;
  auto w = make_world({car(0, 1, 100, params.v_des, sim::Role::av),
                       car(1, 1, 115, params.v_des)},
                      cfg);
  const double expected = (std::exp(-225.0 / 300.0) - 1.0) / 3.0;
  CHECK(av::reward_av(w, w, false, params) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(av::reward_av(w, w, false, params) == doctest::Approx(-0.17588).epsilon(1e-4));
}

TEST_CASE("reward: r_x is continuous at dx = dx_safe") {
  av::RewardParams params;
  const double dx_safe = 25.0;
  const auto below =
      av::reward_terms(true, std::nextafter(dx_safe, 0.0), dx_safe, 0, 0, params.v_des,
                       params);
  const auto at = av::reward_terms(true, dx_safe, dx_safe, 0, 0, params.v_des, params);
  CHECK(at.r_x == 0.0);
  CHECK(std::abs(below.r_x) < 1e-12);
}

TEST_CASE("reward: matches the straight-line oracle on random worlds") {
  sim::SimConfig cfg;
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> udx(1.0, 80.0), uv(0.0, 30.0);
  av::RewardParams params;
  for (int trial = 0; trial < 2000; ++trial) {
    const int lane = static_cast<int>(rng() % 3);
    const double vx = uv(rng);
    const bool has_lead = (rng() % 4) != 0;
    const double dx = udx(rng);
    std::vector<sim::VehicleState> cars{car(0, lane, 200, vx, sim::Role::av)};
    if (has_lead) cars.push_back(car(1, lane, 200 + dx, uv(rng)));
    auto w = make_world(cars, cfg);

    const double got = av::reward_av(w, w, false, params);
    const double dx_safe = std::max(params.dx_safe_min, params.dx_safe_headway * vx);
    const auto t = oracle_terms(has_lead, dx, dx_safe, lane * 3.6, lane * 3.6, vx, params);
    const double want = (t.r_x + t.r_y + t.r_v) / 3.0;
    CHECK(std::abs(got - want) <= 1e-12 * std::max(1.0, std::abs(want)));
    CHECK(got <= 0.0);
    CHECK(got > -1.0);
  }
}

TEST_CASE("reward: terms lie in (-1, 0] and degrade monotonically") {
  av::RewardParams params;
  std::mt19937_64 rng(47);
  std::uniform_real_distribution<double> uy(0, 5), uv(0, 30), udx(0.5, 100);
  double prev_ry = 0.0, prev_rv = 0.0;
  for (int k = 0; k < 50; ++k) {
    // increasing |y - y_des| and |vx - v_des| must not increase the terms
    const double ey = 0.1 * k;
    const auto t = av::reward_terms(false, 0, 10, ey, 0.0, params.v_des + ey, params);
    CHECK(t.r_y <= 0.0);
    CHECK(t.r_y > -1.0);
    if (k > 0) {
      CHECK(t.r_y <= prev_ry);
      CHECK(t.r_v <= prev_rv);
    }
    prev_ry = t.r_y;
    prev_rv = t.r_v;
  }
  // Strictly above -1 while the exponentials stay representable; extreme
  // arguments round exp(-x) - 1 to exactly -1 in doubles.
  std::uniform_real_distribution<double> uv_mid(20, 30);
  for (int k = 0; k < 500; ++k) {
    const auto t =
        av::reward_terms(true, udx(rng), 30, uy(rng), 0.0, uv_mid(rng), params);
    for (const double r : {t.r_x, t.r_y, t.r_v}) {
      CHECK(r <= 0.0);
      CHECK(r > -1.0);
    }
  }
  const auto extreme = av::reward_terms(false, 0, 10, 0.0, 0.0, 0.0, params);
  CHECK(extreme.r_v >= -1.0);
}

TEST_CASE("frozen policy: deterministic and equal to the forward argmax") {
  sim::SimConfig cfg;
  cfg.safety.enabled = false;
  const auto policy = make_policy(77, cfg.road);
  std::mt19937_64 rng(48);
  std::uniform_real_distribution<double> ux(-100, 100), uv(0, 30);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<sim::VehicleState> cars{car(0, 1, 0, uv(rng), sim::Role::av)};
    for (int i = 1; i < 8; ++i)
      cars.push_back(car(i, static_cast<int>(rng() % 3), ux(rng), uv(rng)));
    auto w = make_world(cars, cfg);
    const DiscreteAction a = policy.act(w);
    CHECK(policy.act(w) == a);
    const Eigen::VectorXd obs = av::observe_av(w, policy.scaling());
    CHECK(a.index() == policy.network().argmax(obs));
  }
}

TEST_CASE("frozen policy: adding a constant to all head biases keeps the argmax") {
  sim::SimConfig cfg;
  cfg.safety.enabled = false;
  rl::QNetwork net({av::kAvObservationDim, 16, 12}, 79);
  rl::QNetwork shifted = net;
  shifted.biases().back().array() += 3.25;
  const av::FrozenPolicy a(rl::make_checkpoint("av", net, av::scaling_from_road(cfg.road), {}));
  const av::FrozenPolicy b(
      rl::make_checkpoint("av", shifted, av::scaling_from_road(cfg.road), {}));
  std::mt19937_64 rng(50);
  std::uniform_real_distribution<double> ux(-100, 100), uv(0, 30);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<sim::VehicleState> cars{car(0, 1, 0, uv(rng), sim::Role::av)};
    for (int i = 1; i < 6; ++i)
      cars.push_back(car(i, static_cast<int>(rng() % 3), ux(rng), uv(rng)));
    auto w = make_world(cars, cfg);
    CHECK(a.act(w) == b.act(w));
  }
}

TEST_CASE("frozen policy: rejects a checkpoint with the wrong input width") {
  rl::QNetwork net({10, 12}, 80);
  CHECK_THROWS(av::FrozenPolicy(rl::make_checkpoint("attacker", net, {}, {})));
}

TEST_CASE("train_av: fixed seed reproduces the checkpoint bitwise") {
  av::AvTrainSetup setup;
  setup.n_env_cars = 4;
  setup.train.episodes = 12;
  setup.train.steps_per_episode = 40;
  setup.train.batch_size = 16;
  setup.train.learning_rate = 1e-4;
  setup.train.seed = 1234;

  const auto r1 = av::train_av(setup);
  const auto r2 = av::train_av(setup);
  namespace fs = std::filesystem;
  const auto p1 = (fs::temp_directory_path() / "hwadv_av_a.ckpt").string();
  const auto p2 = (fs::temp_directory_path() / "hwadv_av_b.ckpt").string();
  rl::save_checkpoint(r1.checkpoint, p1);
  rl::save_checkpoint(r2.checkpoint, p2);
  CHECK(file_bytes(p1) == file_bytes(p2));
  CHECK(r1.log.size() == 12);
}
