#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "hwadv/attacker/agent.hpp"
#include "hwadv/av/agent.hpp"
#include "hwadv/harness/config.hpp"
#include "hwadv/harness/histogram.hpp"

namespace hwadv::harness {

/// Runs config.n_eval_episodes seeded episodes across config.workers
/// threads and aggregates the failure-code histogram. Crash episodes are
/// written as traces into `trace_dir` when non-empty (all episodes with
/// config.write_all_traces). The result is invariant to the worker count.
FcHistogram run_evaluation(const ExperimentConfig& config,
                           const av::FrozenPolicy& av_policy,
                           const attacker::AttackerGreedy* attacker_policy,
                           const std::string& trace_dir);

/// Replays a deterministic sample of the traces in `trace_dir` (about
/// `fraction` of them, at least one when any exist) against the config;
/// returns the number of mismatches.
int audit_traces(const ExperimentConfig& config, const std::string& trace_dir,
                 double fraction, std::string* first_error = nullptr);

std::string render_report(const std::vector<FcHistogram>& cells, bool extended);
std::string render_report_csv(const std::vector<FcHistogram>& cells);
std::vector<FcHistogram> parse_report_csv(std::istream& in);

void write_curve_csv(const std::string& path, const std::vector<attacker::CurveRow>& rows);
std::vector<attacker::CurveRow> read_curve_csv(const std::string& path);

int cmd_train_av(const ExperimentConfig& config);
int cmd_train_attacker(const ExperimentConfig& config, const std::string& av_ckpt_path,
                       int repeats);
int cmd_evaluate(const ExperimentConfig& config, const std::string& av_ckpt_path,
                 const std::string& attacker_ckpt_path); // empty: no attacker
int cmd_report(const std::vector<std::string>& histogram_paths, bool extended,
               const std::string& csv_out_path); // empty: stdout table only

} // namespace hwadv::harness
