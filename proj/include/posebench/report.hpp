#pragma once

#include <filesystem>

#include "posebench/metrics.hpp"
#include "posebench/process_sim.hpp"

namespace posebench {

// Writes report.json plus ap_ar.csv, sweep.csv, mde_distribution.csv and
// components.csv into `dir` (created by the caller).
void write_eval_report(const std::filesystem::path &dir,
                       const EvalReport &report);

void write_sweep_csv(const std::filesystem::path &path,
                     const std::vector<SweepPoint> &sweep);

void write_distribution_csv(const std::filesystem::path &path,
                            const std::vector<std::pair<int, double>> &rows);

// attempt_log.json plus summary.csv.
void write_process_outcome(const std::filesystem::path &dir,
                           const ProcessOutcome &outcome);

// Table-style percent with one decimal, e.g. 0.925 -> "92.5".
std::string format_percent(double fraction);

}  // namespace posebench
