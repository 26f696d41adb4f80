#include "hwadv/harness/trace.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "hwadv/sim/world.hpp"

namespace hwadv::harness {

namespace {

constexpr const char* kHeader = "hwadv-trace 1";

void put_double(std::ostream& os, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  os << buf;
}

void put_vehicle(std::ostream& os, char tag, const sim::VehicleState& v) {
  os << tag << ' ' << v.id << ' ' << static_cast<int>(v.role) << ' ';
  put_double(os, v.x);
  os << ' ';
  put_double(os, v.y);
  os << ' ';
  put_double(os, v.vx);
  os << ' ' << static_cast<int>(v.phase) << ' ' << v.progress_steps << ' '
     << v.from_lane << ' ' << v.to_lane << ' ';
  put_double(os, v.desired_speed);
  os << '\n';
}

sim::VehicleState parse_vehicle(std::istringstream& ss) {
  sim::VehicleState v;
  int role = 0, phase = 0;
  ss >> v.id >> role >> v.x >> v.y >> v.vx >> phase >> v.progress_steps >> v.from_lane >>
      v.to_lane >> v.desired_speed;
  if (!ss) throw std::runtime_error("trace: malformed vehicle record");
  v.role = static_cast<sim::Role>(role);
  v.phase = static_cast<sim::LateralPhase>(phase);
  return v;
}

bool same_vehicle(const sim::VehicleState& a, const sim::VehicleState& b) {
  return a.id == b.id && a.x == b.x && a.y == b.y && a.vx == b.vx && a.phase == b.phase &&
         a.progress_steps == b.progress_steps && a.from_lane == b.from_lane &&
         a.to_lane == b.to_lane && a.role == b.role && a.desired_speed == b.desired_speed;
}

} // namespace

void EpisodeTrace::write(const std::string& path) const {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("trace: cannot write: " + path);

  os << kHeader << '\n';
  os << "hash " << config_hash << '\n';
  os << "seed " << episode_seed << '\n';
  os << "episode " << episode_id << '\n';
  os << "env_cars " << n_env_cars << '\n';
  os << "with_attacker " << (with_attacker ? 1 : 0) << '\n';
  os << "safety " << (safety_enabled ? 1 : 0) << '\n';
  os << "vehicles " << initial.size() << '\n';
  for (const auto& v : initial) put_vehicle(os, 'I', v);

  for (std::size_t k = 0; k < steps.size(); ++k) {
    const TraceStep& s = steps[k];
    os << "S " << k << '\n';
    for (const auto& [id, a] : s.actions)
      os << "A " << id << ' ' << static_cast<int>(a.ax) << ' ' << static_cast<int>(a.ay)
         << '\n';
    os << "R ";
    put_double(os, s.av_reward);
    os << ' ';
    put_double(os, s.attacker_reward);
    os << '\n';
    for (const auto& v : s.states_after) put_vehicle(os, 'V', v);
  }

  os << "E " << termination << ' ' << steps.size() << ' ';
  put_double(os, cumulative_attacker_reward);
  os << '\n';
  if (verdict) {
    const judge::Verdict& v = *verdict;
    os << "F " << v.failure_code << ' ' << static_cast<int>(v.situation) << ' '
       << v.responsible << ' ' << (v.principal_shared ? 1 : 0) << ' '
       << (v.av_at_fault ? 1 : 0) << ' ' << static_cast<int>(v.mee_expected) << ' '
       << (v.mee_used ? 1 : 0) << ' ';
    put_double(os, v.attacker_reward);
    os << '\n';
  }
  if (!os) throw std::runtime_error("trace: write failed: " + path);
}

EpisodeTrace EpisodeTrace::read(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("trace: cannot open: " + path);

  EpisodeTrace t;
  std::string line;
  if (!std::getline(is, line) || line != kHeader)
    throw std::runtime_error("trace: bad header in " + path);

  std::size_t n_vehicles = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "hash") {
      ss >> t.config_hash;
    } else if (tag == "seed") {
      ss >> t.episode_seed;
    } else if (tag == "episode") {
      ss >> t.episode_id;
    } else if (tag == "env_cars") {
      ss >> t.n_env_cars;
    } else if (tag == "with_attacker") {
      int b = 0;
      ss >> b;
      t.with_attacker = b != 0;
    } else if (tag == "safety") {
      int b = 0;
      ss >> b;
      t.safety_enabled = b != 0;
    } else if (tag == "vehicles") {
      ss >> n_vehicles;
    } else if (tag == "I") {
      t.initial.push_back(parse_vehicle(ss));
    } else if (tag == "S") {
      t.steps.emplace_back();
    } else if (tag == "A") {
      int id = 0, ax = 0, ay = 0;
      ss >> id >> ax >> ay;
      if (t.steps.empty()) throw std::runtime_error("trace: action before step");
      t.steps.back().actions[id] = {static_cast<sim::LongitudinalAction>(ax),
                                    static_cast<sim::LateralAction>(ay)};
    } else if (tag == "R") {
      if (t.steps.empty()) throw std::runtime_error("trace: reward before step");
      ss >> t.steps.back().av_reward >> t.steps.back().attacker_reward;
    } else if (tag == "V") {
      if (t.steps.empty()) throw std::runtime_error("trace: state before step");
      t.steps.back().states_after.push_back(parse_vehicle(ss));
    } else if (tag == "E") {
      std::size_t n_steps = 0;
      ss >> t.termination >> n_steps >> t.cumulative_attacker_reward;
      if (n_steps != t.steps.size())
        throw std::runtime_error("trace: step count mismatch in footer");
    } else if (tag == "F") {
      judge::Verdict v;
      int situation = 0, shared = 0, at_fault = 0, mee_kind = 0, mee_used = 0;
      ss >> v.failure_code >> situation >> v.responsible >> shared >> at_fault >>
          mee_kind >> mee_used >> v.attacker_reward;
      v.situation = static_cast<judge::PreCrashSituation>(situation);
      v.principal_shared = shared != 0;
      v.av_at_fault = at_fault != 0;
      v.mee_expected = static_cast<judge::MeeKind>(mee_kind);
      v.mee_used = mee_used != 0;
      t.verdict = v;
    } else {
      throw std::runtime_error("trace: unknown tag '" + tag + "' in " + path);
    }
    if (!ss) throw std::runtime_error("trace: malformed line in " + path + ": " + line);
  }
  if (t.initial.size() != n_vehicles)
    throw std::runtime_error("trace: vehicle count mismatch in " + path);
  return t;
}

bool replay_matches(const ExperimentConfig& config, const EpisodeTrace& trace,
                    std::string* why) {
  const auto mismatch = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };

  sim::WorldState world = sim::init_world(config.sim, trace.episode_seed,
                                          trace.n_env_cars, trace.with_attacker);
  if (world.vehicles.size() != trace.initial.size())
    return mismatch("initial vehicle count differs");
  for (std::size_t i = 0; i < world.vehicles.size(); ++i)
    if (!same_vehicle(world.vehicles[i], trace.initial[i]))
      return mismatch("initial state differs at vehicle " +
                      std::to_string(world.vehicles[i].id));

  for (std::size_t k = 0; k < trace.steps.size(); ++k) {
    auto [next, events] = sim::step(world, trace.steps[k].actions);
    const auto& expect = trace.steps[k].states_after;
    if (next.vehicles.size() != expect.size())
      return mismatch("vehicle count differs at step " + std::to_string(k));
    for (std::size_t i = 0; i < expect.size(); ++i)
      if (!same_vehicle(next.vehicles[i], expect[i]))
        return mismatch("state differs at step " + std::to_string(k) + ", vehicle " +
                        std::to_string(expect[i].id));
    world = std::move(next);
  }
  return true;
}

} // namespace hwadv::harness
