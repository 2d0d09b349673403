#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kinocbs/cbs.hpp"

namespace kinocbs::bench {

struct TrialRow {
  std::string instance;
  int trial = 0;
  std::uint64_t seed = 0;
  bool success = false;  // decided by the end-to-end validator
  double t_first_s = -1.0;
  double j_first_s = -1.0;
  int iterations = 0;
  std::size_t expansions = 0;
};

struct Aggregate {
  std::string instance;
  int trials = 0;
  double p = 0.0;         // success rate
  double median_t = -1.0;  // over successful trials
  double median_j = -1.0;
};

struct BenchmarkReport {
  std::vector<TrialRow> rows;
  std::vector<Aggregate> aggregates;
  std::vector<std::string> config_errors;  // unusable instances, not failures
};

std::vector<Aggregate> aggregate_rows(const std::vector<TrialRow>& rows);

// Runs solve() per (instance, trial) with per-trial seeds; success is
// classified by the independent validator on emitted solutions.
BenchmarkReport run_benchmark(const std::vector<std::string>& instance_paths,
                              int trials, const cbs::PlannerConfig& config,
                              int parallelism);

void write_csv(const BenchmarkReport& report, const std::string& path);

}  // namespace kinocbs::bench
