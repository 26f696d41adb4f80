#include "hwadv/harness/histogram.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hwadv::harness {

void FcHistogram::write(const std::string& path) const {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("histogram: cannot write: " + path);
  os << "hwadv-histogram 1\n";
  os << "hash " << config_hash << '\n';
  os << "with_attacker " << (with_attacker ? 1 : 0) << '\n';
  os << "env_cars " << n_env_cars << '\n';
  os << "episodes " << episodes << '\n';
  os << "fc_total";
  for (const long c : fc_total) os << ' ' << c;
  os << '\n';
  os << "fc_attacker";
  for (const long c : fc_attacker) os << ' ' << c;
  os << '\n';
  os << "timeouts " << timeouts << '\n';
  os << "attacker_crashes " << attacker_crashes << '\n';
  os << "av_left " << av_left << '\n';
  if (!os) throw std::runtime_error("histogram: write failed: " + path);
}

FcHistogram FcHistogram::read(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("histogram: cannot open: " + path);
  std::string line;
  if (!std::getline(is, line) || line != "hwadv-histogram 1")
    throw std::runtime_error("histogram: bad header in " + path);

  FcHistogram h;
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "hash") {
      ss >> h.config_hash;
    } else if (tag == "with_attacker") {
      int b;
      ss >> b;
      h.with_attacker = b != 0;
    } else if (tag == "env_cars") {
      ss >> h.n_env_cars;
    } else if (tag == "episodes") {
      ss >> h.episodes;
    } else if (tag == "fc_total") {
      for (auto& c : h.fc_total) ss >> c;
    } else if (tag == "fc_attacker") {
      for (auto& c : h.fc_attacker) ss >> c;
    } else if (tag == "timeouts") {
      ss >> h.timeouts;
    } else if (tag == "attacker_crashes") {
      ss >> h.attacker_crashes;
    } else if (tag == "av_left") {
      ss >> h.av_left;
    } else {
      throw std::runtime_error("histogram: unknown tag '" + tag + "' at " + path + ":" +
                               std::to_string(line_no));
    }
    if (!ss)
      throw std::runtime_error("histogram: malformed line at " + path + ":" +
                               std::to_string(line_no));
  }
  return h;
}

} // namespace hwadv::harness
