#include "hwadv/harness/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "hwadv/sim/hash_rng.hpp"

namespace hwadv::harness {

namespace {

// X(kind, key, field, hashed): single source of truth for the config schema.
// hashed = 0 marks run-shape keys excluded from the experiment-family hash.
#define HWADV_CONFIG_FIELDS(X)                                   \
  X(Int, lane_count, sim.road.lane_count, 1)                     \
  X(Dbl, lane_width, sim.road.lane_width, 1)                     \
  X(Dbl, speed_min, sim.road.speed_min, 1)                       \
  X(Dbl, speed_max, sim.road.speed_max, 1)                       \
  X(Dbl, road_length, sim.road.road_length, 1)                   \
  X(Dbl, vehicle_length, sim.road.vehicle_length, 1)             \
  X(Dbl, vehicle_width, sim.road.vehicle_width, 1)               \
  X(Dbl, accel, sim.actions.accelerate, 1)                       \
  X(Dbl, brake, sim.actions.brake, 1)                            \
  X(Dbl, hard_brake, sim.actions.hard_brake, 1)                  \
  X(Int, lane_change_steps, sim.actions.lane_change_steps, 1)    \
  X(Dbl, env_headway_hard, sim.env.headway_hard, 1)              \
  X(Dbl, env_headway_brake, sim.env.headway_brake, 1)            \
  X(Dbl, env_headway_free, sim.env.headway_free, 1)              \
  X(Dbl, env_lane_change_prob, sim.env.lane_change_prob, 1)      \
  X(Dbl, env_safe_front_gap, sim.env.safe_front_gap, 1)          \
  X(Dbl, env_safe_rear_gap, sim.env.safe_rear_gap, 1)            \
  X(Dbl, env_speed_tolerance, sim.env.speed_tolerance, 1)        \
  X(Bol, safety_enabled, sim.safety.enabled, 1)                  \
  X(Dbl, safety_headway, sim.safety.headway, 1)                  \
  X(Dbl, dx_safe_min, reward.dx_safe_min, 1)                     \
  X(Dbl, dx_safe_headway, reward.dx_safe_headway, 1)             \
  X(Dbl, v_des, reward.v_des, 1)                                 \
  X(Dbl, y_norm, reward.y_norm, 1)                               \
  X(Dbl, v_norm, reward.v_norm, 1)                               \
  X(Dbl, gamma, rl.gamma, 1)                                     \
  X(Int, hidden1, rl.hidden1, 1)                                 \
  X(Int, hidden2, rl.hidden2, 1)                                 \
  X(Int, batch_size, rl.batch_size, 1)                           \
  X(Int, target_sync, rl.target_sync, 1)                         \
  X(U64, buffer_normal, rl.buffer_normal, 1)                     \
  X(U64, buffer_crash, rl.buffer_crash, 1)                       \
  X(Dbl, mix_fraction, rl.mix_fraction, 1)                       \
  X(Int, steps_per_episode, rl.steps_per_episode, 1)             \
  X(Dbl, av_learning_rate, av_train.learning_rate, 1)            \
  X(Lng, av_episodes, av_train.episodes, 1)                      \
  X(Dbl, av_epsilon0, av_train.epsilon0, 1)                      \
  X(Dbl, av_epsilon_min, av_train.epsilon_min, 1)                \
  X(Dbl, av_anneal_c, av_train.anneal_c, 1)                      \
  X(Dbl, attacker_learning_rate, attacker_train.learning_rate, 1)\
  X(Lng, attacker_episodes, attacker_train.episodes, 1)          \
  X(Dbl, attacker_epsilon0, attacker_train.epsilon0, 1)          \
  X(Dbl, attacker_epsilon_min, attacker_train.epsilon_min, 1)    \
  X(Dbl, attacker_anneal_c, attacker_train.anneal_c, 1)          \
  X(U64, seed, seed, 1)                                          \
  X(Int, n_env_cars, n_env_cars, 0)                              \
  X(Bol, with_attacker, with_attacker, 0)                        \
  X(Lng, n_eval_episodes, n_eval_episodes, 0)                    \
  X(Int, workers, workers, 0)                                    \
  X(Str, out_dir, out_dir, 0)                                    \
  X(Bol, write_all_traces, write_all_traces, 0)

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_dbl(const std::string& v, const std::string& key) {
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0')
    throw std::runtime_error("config: bad number for '" + key + "': " + v);
  return d;
}

long parse_lng(const std::string& v, const std::string& key) {
  char* end = nullptr;
  const long l = std::strtol(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0')
    throw std::runtime_error("config: bad integer for '" + key + "': " + v);
  return l;
}

std::uint64_t parse_u64(const std::string& v, const std::string& key) {
  char* end = nullptr;
  const unsigned long long u = std::strtoull(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0')
    throw std::runtime_error("config: bad unsigned integer for '" + key + "': " + v);
  return u;
}

bool parse_bol(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw std::runtime_error("config: bad boolean for '" + key + "': " + v);
}

std::string value_Dbl(double v) { return fmt_double(v); }
std::string value_Int(int v) { return std::to_string(v); }
std::string value_Lng(long v) { return std::to_string(v); }
std::string value_U64(std::uint64_t v) { return std::to_string(v); }
std::string value_Bol(bool v) { return v ? "true" : "false"; }
std::string value_Str(const std::string& v) { return v; }

} // namespace

void ExperimentConfig::apply(const std::string& key, const std::string& value) {
#define X_SET_Dbl(field) field = parse_dbl(value, key)
#define X_SET_Int(field) field = static_cast<int>(parse_lng(value, key))
#define X_SET_Lng(field) field = parse_lng(value, key)
#define X_SET_U64(field) field = parse_u64(value, key)
#define X_SET_Bol(field) field = parse_bol(value, key)
#define X_SET_Str(field) field = value
#define X(kind, name, field, hashed) \
  if (key == #name) {                \
    X_SET_##kind(field);             \
    return;                          \
  }
  HWADV_CONFIG_FIELDS(X)
#undef X
#undef X_SET_Dbl
#undef X_SET_Int
#undef X_SET_Lng
#undef X_SET_U64
#undef X_SET_Bol
#undef X_SET_Str
  throw std::runtime_error("config: unknown key '" + key + "'");
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("config: cannot open: " + path);

  ExperimentConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line.erase(hash_pos);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config: expected 'key = value' at " + path + ":" +
                               std::to_string(line_no));
    try {
      cfg.apply(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const std::exception& e) {
      throw std::runtime_error(std::string(e.what()) + " at " + path + ":" +
                               std::to_string(line_no));
    }
  }
  cfg.validate();
  return cfg;
}

std::string ExperimentConfig::canonical_text() const {
  std::ostringstream os;
#define X(kind, name, field, hashed) os << #name << " = " << value_##kind(field) << "\n";
  HWADV_CONFIG_FIELDS(X)
#undef X
  return os.str();
}

std::string ExperimentConfig::config_hash() const {
  std::ostringstream os;
#define X(kind, name, field, hashed) \
  if (hashed) os << #name << " = " << value_##kind(field) << "\n";
  HWADV_CONFIG_FIELDS(X)
#undef X
  const std::string text = os.str();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void ExperimentConfig::save(const std::string& path) const {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("config: cannot write: " + path);
  os << canonical_text();
}

void ExperimentConfig::validate() const {
  const auto fail = [](const std::string& msg) {
    throw std::runtime_error("config: " + msg);
  };
  if (sim.road.lane_count != 3) fail("lane_count must be 3");
  if (sim.road.lane_width <= sim.road.vehicle_width)
    fail("lane_width must exceed vehicle_width");
  if (sim.road.speed_min >= sim.road.speed_max) fail("speed_min must be < speed_max");
  if (sim.road.road_length <= 4 * sim.road.vehicle_length) fail("road_length too short");
  if (sim.actions.lane_change_steps < 1) fail("lane_change_steps must be >= 1");
  if (rl.gamma < 0.0 || rl.gamma >= 1.0) fail("gamma must be in [0, 1)");
  if (rl.mix_fraction < 0.0 || rl.mix_fraction > 1.0)
    fail("mix_fraction must be in [0, 1]");
  if (rl.batch_size < 1) fail("batch_size must be >= 1");
  if (rl.steps_per_episode < 1) fail("steps_per_episode must be >= 1");
  if (reward.dx_safe_min <= 0.0) fail("dx_safe_min must be positive");
  if (reward.y_norm <= 0.0 || reward.v_norm <= 0.0)
    fail("reward normalizers must be positive");
  if (n_env_cars < 0) fail("n_env_cars must be >= 0");
  if (workers < 1) fail("workers must be >= 1");
  if (n_eval_episodes < 0) fail("n_eval_episodes must be >= 0");
}

namespace {

rl::TrainConfig build_train(const RlSharedKeys& rl_keys, const AgentTrainKeys& agent,
                            std::uint64_t seed) {
  rl::TrainConfig t;
  t.gamma = rl_keys.gamma;
  t.learning_rate = agent.learning_rate;
  t.epsilon0 = agent.epsilon0;
  t.epsilon_min = agent.epsilon_min;
  t.anneal_c = agent.anneal_c;
  t.steps_per_episode = rl_keys.steps_per_episode;
  t.episodes = agent.episodes;
  t.batch_size = rl_keys.batch_size;
  t.target_sync = rl_keys.target_sync;
  t.buffer_normal = rl_keys.buffer_normal;
  t.buffer_crash = rl_keys.buffer_crash;
  t.mix_fraction = rl_keys.mix_fraction;
  t.hidden = {rl_keys.hidden1, rl_keys.hidden2};
  t.seed = seed;
  return t;
}

} // namespace

rl::TrainConfig ExperimentConfig::av_train_config() const {
  return build_train(rl, av_train, sim::hash_u64(seed, 0x617655ULL));
}

rl::TrainConfig ExperimentConfig::attacker_train_config(int repeat) const {
  return build_train(rl, attacker_train,
                     sim::hash_u64(seed, 0x617474ULL, static_cast<std::uint64_t>(repeat)));
}

} // namespace hwadv::harness
