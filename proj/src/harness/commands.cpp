#include "hwadv/harness/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "hwadv/harness/trace.hpp"
#include "hwadv/rl/checkpoint.hpp"
#include "hwadv/sim/hash_rng.hpp"

namespace hwadv::harness {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kEvalTag = 0x6576616cULL;
constexpr std::uint64_t kAuditTag = 0x61756454ULL;

std::string trace_path(const std::string& dir, long episode) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "ep_%06ld.trace", episode);
  return (fs::path(dir) / buf).string();
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void run_eval_episode(const ExperimentConfig& config, const av::FrozenPolicy& av_policy,
                      const attacker::AttackerGreedy* attacker_policy, long episode,
                      FcHistogram& hist, const std::string& trace_dir) {
  const std::uint64_t seed = sim::hash_u64(config.seed, kEvalTag, episode);
  sim::WorldState world =
      sim::init_world(config.sim, seed, config.n_env_cars, config.with_attacker);
  const sim::VehicleState* att = world.find_role(sim::Role::attacker);
  const int attacker_id = att ? att->id : sim::kNoVehicle;

  EpisodeTrace trace;
  const bool want_trace = !trace_dir.empty();
  attacker::StepRecorder recorder;
  if (want_trace) {
    trace.config_hash = config.config_hash();
    trace.episode_seed = seed;
    trace.episode_id = episode;
    trace.n_env_cars = config.n_env_cars;
    trace.with_attacker = config.with_attacker;
    trace.safety_enabled = config.sim.safety.enabled;
    trace.initial = world.vehicles;
    recorder = [&trace](const attacker::StepRecord& r) {
      trace.steps.push_back(
          {r.actions, r.world_after.vehicles, r.av_reward, r.attacker_reward});
    };
  }

  const attacker::AttackerEpisodeOutcome outcome =
      attacker::run_episode(std::move(world), av_policy, attacker_policy,
                            config.rl.steps_per_episode, config.reward, recorder);

  hist.episodes += 1;
  // Any verdict-carrying termination is an AV-involved crash; pure
  // attacker-env crashes have no verdict and only bump their counter.
  const bool crashed = outcome.verdict.has_value();
  if (crashed) {
    hist.add_crash(outcome.verdict->failure_code,
                   attacker_id != sim::kNoVehicle && outcome.crash_partner == attacker_id);
  }
  switch (outcome.termination) {
    case attacker::Termination::av_crashed: break;
    case attacker::Termination::attacker_crashed:
      if (!crashed) hist.attacker_crashes += 1;
      break;
    case attacker::Termination::av_left_neighborhood: hist.av_left += 1; break;
    case attacker::Termination::timeout: hist.timeouts += 1; break;
  }

  if (want_trace && (crashed || config.write_all_traces)) {
    trace.termination = attacker::termination_name(outcome.termination);
    trace.verdict = outcome.verdict;
    trace.cumulative_attacker_reward = outcome.cumulative_reward;
    trace.write(trace_path(trace_dir, episode));
  }
}

} // namespace

FcHistogram run_evaluation(const ExperimentConfig& config,
                           const av::FrozenPolicy& av_policy,
                           const attacker::AttackerGreedy* attacker_policy,
                           const std::string& trace_dir) {
  if (!trace_dir.empty()) fs::create_directories(trace_dir);

  const long n = config.n_eval_episodes;
  const int workers = std::max(1, config.workers);

  std::vector<FcHistogram> partial(static_cast<std::size_t>(workers));
  std::atomic<long> next_episode{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int wi = 0; wi < workers; ++wi) {
    pool.emplace_back([&, wi]() {
      for (;;) {
        const long ep = next_episode.fetch_add(1);
        if (ep >= n) return;
        run_eval_episode(config, av_policy, attacker_policy, ep, partial[wi], trace_dir);
      }
    });
  }
  for (auto& t : pool) t.join();

  FcHistogram hist;
  hist.config_hash = config.config_hash();
  hist.with_attacker = config.with_attacker;
  hist.n_env_cars = config.n_env_cars;
  for (const auto& p : partial) hist.merge(p);
  return hist;
}

int audit_traces(const ExperimentConfig& config, const std::string& trace_dir,
                 double fraction, std::string* first_error) {
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(trace_dir))
    if (entry.path().extension() == ".trace") files.push_back(entry.path().string());
  std::sort(files.begin(), files.end());
  if (files.empty()) return 0;

  int mismatches = 0;
  bool any = false;
  for (std::size_t i = 0; i < files.size(); ++i) {
    const bool pick =
        sim::unit_draw(config.seed, kAuditTag, i) < fraction || (!any && i + 1 == files.size());
    if (!pick) continue;
    any = true;
    std::string why;
    const EpisodeTrace trace = EpisodeTrace::read(files[i]);
    if (!replay_matches(config, trace, &why)) {
      ++mismatches;
      if (first_error && first_error->empty()) *first_error = files[i] + ": " + why;
    }
  }
  return mismatches;
}

namespace {

std::string cell(long attacker_involved, long total) {
  return std::to_string(attacker_involved) + "/" + std::to_string(total);
}

} // namespace

std::string render_report(const std::vector<FcHistogram>& cells, bool extended) {
  std::ostringstream os;
  const int fc_lo = extended ? 0 : 1;
  os << "environment      cars  episodes";
  for (int fc = fc_lo; fc < 8; ++fc) os << "      FC" << fc;
  os << "   att/vic    total\n";
  for (const auto& h : cells) {
    char head[40];
    std::snprintf(head, sizeof(head), "%-16s %4d  %8ld",
                  h.with_attacker ? "w. one attacker" : "w/o. attacker", h.n_env_cars,
                  h.episodes);
    os << head;
    for (int fc = fc_lo; fc < 8; ++fc) {
      char buf[24];
      std::snprintf(buf, sizeof(buf), " %8s", cell(h.fc_attacker[fc], h.fc_total[fc]).c_str());
      os << buf;
    }
    char tail[40];
    std::snprintf(tail, sizeof(tail), " %8ld %8ld\n", h.attacker_victim_crashes(),
                  h.total_crashes());
    os << tail;
  }
  return os.str();
}

std::string render_report_csv(const std::vector<FcHistogram>& cells) {
  std::ostringstream os;
  os << "config_hash,with_attacker,n_env_cars,episodes";
  for (int fc = 0; fc < 8; ++fc) os << ",fc" << fc << "_att,fc" << fc << "_total";
  os << ",attacker_victim_crashes,total_crashes,timeouts,attacker_crashes,av_left\n";
  for (const auto& h : cells) {
    os << h.config_hash << ',' << (h.with_attacker ? 1 : 0) << ',' << h.n_env_cars << ','
       << h.episodes;
    for (int fc = 0; fc < 8; ++fc) os << ',' << h.fc_attacker[fc] << ',' << h.fc_total[fc];
    os << ',' << h.attacker_victim_crashes() << ',' << h.total_crashes() << ','
       << h.timeouts << ',' << h.attacker_crashes << ',' << h.av_left << '\n';
  }
  return os.str();
}

std::vector<FcHistogram> parse_report_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("report: empty csv input");

  std::vector<FcHistogram> cells;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string field;
    const auto next_field = [&]() {
      if (!std::getline(ss, field, ','))
        throw std::runtime_error("report: truncated csv line " + std::to_string(line_no));
      return field;
    };
    FcHistogram h;
    h.config_hash = next_field();
    h.with_attacker = std::stoi(next_field()) != 0;
    h.n_env_cars = std::stoi(next_field());
    h.episodes = std::stol(next_field());
    for (int fc = 0; fc < 8; ++fc) {
      h.fc_attacker[fc] = std::stol(next_field());
      h.fc_total[fc] = std::stol(next_field());
    }
    next_field(); // attacker_victim_crashes (derived)
    next_field(); // total_crashes (derived)
    h.timeouts = std::stol(next_field());
    h.attacker_crashes = std::stol(next_field());
    h.av_left = std::stol(next_field());
    cells.push_back(std::move(h));
  }
  return cells;
}

void write_curve_csv(const std::string& path,
                     const std::vector<attacker::CurveRow>& rows) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("curve: cannot write: " + path);
  os << "episode,mean,std\n";
  for (const auto& r : rows)
    os << r.episode << ',' << fmt_double(r.mean_reward) << ','
       << fmt_double(r.std_reward) << '\n';
}

std::vector<attacker::CurveRow> read_curve_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("curve: cannot open: " + path);
  std::string line;
  if (!std::getline(is, line) || line != "episode,mean,std")
    throw std::runtime_error("curve: bad header in " + path);
  std::vector<attacker::CurveRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    attacker::CurveRow r;
    char c1 = 0, c2 = 0;
    ss >> r.episode >> c1 >> r.mean_reward >> c2 >> r.std_reward;
    if (!ss || c1 != ',' || c2 != ',')
      throw std::runtime_error("curve: malformed row in " + path + ": " + line);
    rows.push_back(r);
  }
  return rows;
}

int cmd_train_av(const ExperimentConfig& config) {
  fs::create_directories(config.out_dir);
  av::AvTrainSetup setup{config.sim, config.reward, config.av_train_config(),
                         config.n_env_cars};

  std::cout << "training AV policy: " << setup.train.episodes << " episodes, seed "
            << config.seed << "\n";
  const av::AvTrainResult result = av::train_av(setup);

  const std::string ckpt_path = (fs::path(config.out_dir) / "av.ckpt").string();
  rl::save_checkpoint(result.checkpoint, ckpt_path);

  const std::string csv_path = (fs::path(config.out_dir) / "av_train.csv").string();
  std::ofstream csv(csv_path, std::ios::trunc);
  csv << "episode,return,steps,crashed,failure_code,mean_loss,epsilon\n";
  long crashes = 0;
  for (const auto& row : result.log) {
    csv << row.episode << ',' << fmt_double(row.episode_return) << ',' << row.steps << ','
        << (row.crashed ? 1 : 0) << ',' << row.failure_code << ','
        << fmt_double(row.mean_loss) << ',' << fmt_double(row.epsilon) << '\n';
    crashes += row.crashed ? 1 : 0;
  }
  std::cout << "checkpoint: " << ckpt_path << "\ntraining log: " << csv_path
            << "\ncrash episodes during training: " << crashes << "/"
            << result.log.size() << "\n";
  return 0;
}

int cmd_train_attacker(const ExperimentConfig& config, const std::string& av_ckpt_path,
                       int repeats) {
  fs::create_directories(config.out_dir);
  const av::FrozenPolicy frozen(rl::load_checkpoint(av_ckpt_path));

  std::vector<std::vector<attacker::CurveRow>> curves;
  for (int r = 0; r < repeats; ++r) {
    attacker::AttackerTrainSetup setup{config.sim, config.attacker_train_config(r),
                                       config.n_env_cars};
    std::cout << "training attacker (repeat " << r << "): " << setup.train.episodes
              << " episodes\n";
    attacker::AttackerTrainResult result = attacker::train_attacker(setup, frozen);

    const std::string ckpt_path =
        (fs::path(config.out_dir) /
         (repeats == 1 ? std::string("attacker.ckpt")
                       : "attacker_r" + std::to_string(r) + ".ckpt"))
            .string();
    rl::save_checkpoint(result.checkpoint, ckpt_path);
    write_curve_csv((fs::path(config.out_dir) /
                     ("attacker_curve_r" + std::to_string(r) + ".csv"))
                        .string(),
                    result.curve);
    std::cout << "checkpoint: " << ckpt_path << "\n";
    curves.push_back(std::move(result.curve));
  }
  if (repeats > 1) {
    // repeat 0's checkpoint doubles as the default attacker.ckpt
    const auto src = fs::path(config.out_dir) / "attacker_r0.ckpt";
    fs::copy_file(src, fs::path(config.out_dir) / "attacker.ckpt",
                  fs::copy_options::overwrite_existing);
  }

  // Aggregate curve: mean and std across repeats at each logged episode.
  std::vector<attacker::CurveRow> aggregate;
  if (!curves.empty()) {
    const std::size_t points = curves.front().size();
    for (std::size_t i = 0; i < points; ++i) {
      double sum = 0.0, sum_sq = 0.0;
      for (const auto& c : curves) {
        sum += c[i].mean_reward;
        sum_sq += c[i].mean_reward * c[i].mean_reward;
      }
      const double n = static_cast<double>(curves.size());
      const double mean = sum / n;
      const double var = std::max(0.0, sum_sq / n - mean * mean);
      aggregate.push_back({curves.front()[i].episode, mean, std::sqrt(var)});
    }
  }
  const std::string mean_path =
      (fs::path(config.out_dir) / "attacker_curve_mean.csv").string();
  write_curve_csv(mean_path, aggregate);
  std::cout << "aggregate curve: " << mean_path << "\n";
  return 0;
}

int cmd_evaluate(const ExperimentConfig& config, const std::string& av_ckpt_path,
                 const std::string& attacker_ckpt_path) {
  fs::create_directories(config.out_dir);
  const av::FrozenPolicy frozen(rl::load_checkpoint(av_ckpt_path));

  std::optional<rl::Checkpoint> attacker_ckpt;
  std::optional<rl::QNetwork> attacker_net;
  std::optional<attacker::AttackerGreedy> attacker_policy;
  if (!attacker_ckpt_path.empty()) {
    attacker_ckpt = rl::load_checkpoint(attacker_ckpt_path);
    attacker_net = rl::network_from(*attacker_ckpt);
    attacker_policy.emplace(&*attacker_net, attacker_ckpt->scaling);
  }
  if (config.with_attacker && !attacker_policy)
    throw std::runtime_error("evaluate: with_attacker requires an attacker checkpoint");

  const std::string tag = std::string(config.with_attacker ? "att" : "base") + "_" +
                          std::to_string(config.n_env_cars) + "cars";
  const std::string trace_dir = (fs::path(config.out_dir) / ("traces_" + tag)).string();

  std::cout << "evaluating " << config.n_eval_episodes << " episodes ("
            << (config.with_attacker ? "with attacker" : "no attacker") << ", "
            << config.n_env_cars << " env cars, " << config.workers << " workers)\n";
  const FcHistogram hist = run_evaluation(
      config, frozen, config.with_attacker ? &*attacker_policy : nullptr, trace_dir);

  const std::string hist_path =
      (fs::path(config.out_dir) / ("eval_" + tag + ".hist")).string();
  hist.write(hist_path);
  std::cout << render_report({hist}, /*extended=*/true);
  std::cout << "histogram: " << hist_path << "\ntraces: " << trace_dir << "\n";

  std::string why;
  const int bad = audit_traces(config, trace_dir, 0.01, &why);
  if (bad > 0) {
    std::cerr << "determinism audit FAILED on " << bad << " trace(s): " << why << "\n";
    return 1;
  }
  std::cout << "determinism audit: ok\n";
  return 0;
}

int cmd_report(const std::vector<std::string>& histogram_paths, bool extended,
               const std::string& csv_out_path) {
  if (histogram_paths.empty()) throw std::runtime_error("report: no histogram files");
  std::vector<FcHistogram> cells;
  cells.reserve(histogram_paths.size());
  for (const auto& p : histogram_paths) cells.push_back(FcHistogram::read(p));

  for (const auto& h : cells) {
    if (h.config_hash != cells.front().config_hash)
      throw std::runtime_error(
          "report: refusing to mix histograms from different configs (" +
          cells.front().config_hash + " vs " + h.config_hash + ")");
  }

  // Table-shaped ordering: no-attacker rows first, then by car count.
  std::sort(cells.begin(), cells.end(), [](const FcHistogram& a, const FcHistogram& b) {
    if (a.with_attacker != b.with_attacker) return !a.with_attacker;
    return a.n_env_cars < b.n_env_cars;
  });

  std::cout << render_report(cells, extended);
  if (!csv_out_path.empty()) {
    std::ofstream os(csv_out_path, std::ios::trunc);
    os << render_report_csv(cells);
    std::cout << "csv: " << csv_out_path << "\n";
  }
  return 0;
}

} // namespace hwadv::harness
