#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "reachplan/baselines.hpp"

namespace reachplan {

struct TrialRecord {
  std::string scene;
  MethodId method = MethodId::ours;
  std::uint64_t seed = 0;
  bool success = false;
  /// Present exactly when success is true.
  std::optional<double> cost;
  double wall_time = 0.0;
  int iterations = 0;
  int commitments = 0;
  /// Full planner output, kept for audits.
  PlanOutcome outcome;
};

/// Runs trials i = 0..n_trials-1 with seed base_seed + i.
std::vector<TrialRecord> run_trials(const Scene& scene, MethodId method, int n_trials,
                                    std::uint64_t base_seed, const MethodSettings& settings = {},
                                    int workers = 0);

/// Every (scene, method) pair, n_trials each, on a shared worker pool. Records
/// come back sorted by (scene, method, seed). workers <= 0 picks
/// default_worker_count().
std::vector<TrialRecord> run_bench(const std::vector<Scene>& scenes,
                                   const std::vector<MethodId>& methods, int n_trials,
                                   std::uint64_t base_seed, const MethodSettings& settings = {},
                                   int workers = 0);

/// REACHPLAN_WORKERS when set to a positive integer, otherwise the hardware
/// thread count.
int default_worker_count();

struct CellSummary {
  std::string scene;
  MethodId method = MethodId::ours;
  int trials = 0;
  int successes = 0;
  double success_pct = 0.0;
  std::optional<double> cost_mean;
  std::optional<double> cost_std;
  double time_mean = 0.0;
  double time_std = 0.0;
};

struct BenchReport {
  std::uint64_t base_seed = 0;
  /// One cell per (scene, method), in record order.
  std::vector<CellSummary> cells;

  const CellSummary* find(const std::string& scene, MethodId method) const;
  std::vector<std::string> scenes() const;
  std::vector<MethodId> methods() const;
};

/// Sample standard deviation (n - 1 denominator); zero for a single value.
double sample_std(const std::vector<double>& values);
double mean(const std::vector<double>& values);

/// Throws std::invalid_argument on empty input.
BenchReport aggregate(const std::vector<TrialRecord>& records, std::uint64_t base_seed = 0);

}  // namespace reachplan
