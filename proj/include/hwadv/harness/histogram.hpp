#pragma once

#include <array>
#include <numeric>
#include <string>

namespace hwadv::harness {

/// Crash counts of one evaluation cell (attacker presence x env-car count),
/// indexed by failure code, split into attacker-involved and total.
struct FcHistogram {
  std::string config_hash;
  bool with_attacker = false;
  int n_env_cars = 0;
  long episodes = 0;

  std::array<long, 8> fc_total{};
  std::array<long, 8> fc_attacker{}; // crash partner was the attacker
  long timeouts = 0;
  long attacker_crashes = 0; // episodes ended by the attacker crashing
  long av_left = 0;

  void add_crash(int failure_code, bool attacker_involved) {
    fc_total[failure_code] += 1;
    if (attacker_involved) fc_attacker[failure_code] += 1;
  }

  long total_crashes() const {
    return std::accumulate(fc_total.begin(), fc_total.end(), 0L);
  }
  long attacker_victim_crashes() const {
    return std::accumulate(fc_attacker.begin(), fc_attacker.end(), 0L);
  }
  long av_at_fault_crashes() const {
    return std::accumulate(fc_total.begin() + 2, fc_total.end(), 0L);
  }

  void merge(const FcHistogram& other) {
    episodes += other.episodes;
    for (int i = 0; i < 8; ++i) {
      fc_total[i] += other.fc_total[i];
      fc_attacker[i] += other.fc_attacker[i];
    }
    timeouts += other.timeouts;
    attacker_crashes += other.attacker_crashes;
    av_left += other.av_left;
  }

  friend bool operator==(const FcHistogram&, const FcHistogram&) = default;

  void write(const std::string& path) const;
  static FcHistogram read(const std::string& path);
};

} // namespace hwadv::harness
