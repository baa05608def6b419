#include "reachplan/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace reachplan {

namespace {

struct Task {
  std::size_t scene;
  MethodId method;
  std::uint64_t seed;
};

TrialRecord run_one(const Scene& scene, const Task& task, const MethodSettings& settings) {
  TrialRecord r;
  r.scene = scene.name;
  r.method = task.method;
  r.seed = task.seed;
  r.outcome = run_method(task.method, scene, task.seed, settings);
  r.success = r.outcome.success;
  if (r.success) r.cost = r.outcome.cost;
  r.wall_time = r.outcome.stats.wall_time;
  r.iterations = r.outcome.stats.iterations;
  r.commitments = r.outcome.stats.commitment_steps;
  return r;
}

}  // namespace

int default_worker_count() {
  if (const char* env = std::getenv("REACHPLAN_WORKERS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n > 0) return static_cast<int>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<TrialRecord> run_bench(const std::vector<Scene>& scenes,
                                   const std::vector<MethodId>& methods, int n_trials,
                                   std::uint64_t base_seed, const MethodSettings& settings,
                                   int workers) {
  if (n_trials < 1) throw std::invalid_argument("n_trials must be at least 1");
  std::vector<Task> tasks;
  for (std::size_t s = 0; s < scenes.size(); ++s)
    for (const MethodId m : methods)
      for (int i = 0; i < n_trials; ++i)
        tasks.push_back({s, m, base_seed + static_cast<std::uint64_t>(i)});

  std::vector<TrialRecord> records(tasks.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  const auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        records[i] = run_one(scenes[tasks[i].scene], tasks[i], settings);
      } catch (...) {
        const std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const int count = std::clamp(workers > 0 ? workers : default_worker_count(), 1,
                               static_cast<int>(tasks.size()));
  if (count == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < count; ++i) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
  // Tasks were generated in (scene, method, seed) order, so records already are.
  return records;
}

std::vector<TrialRecord> run_trials(const Scene& scene, MethodId method, int n_trials,
                                    std::uint64_t base_seed, const MethodSettings& settings,
                                    int workers) {
  return run_bench({scene}, {method}, n_trials, base_seed, settings, workers);
}

double mean(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double sample_std(const std::vector<double>& values) {
  if (values.size() < 2) return 0.0;
  const double m = mean(values);
  double ss = 0.0;
  for (const double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

BenchReport aggregate(const std::vector<TrialRecord>& records, std::uint64_t base_seed) {
  if (records.empty()) throw std::invalid_argument("cannot aggregate an empty record list");
  BenchReport report;
  report.base_seed = base_seed;
  std::size_t i = 0;
  while (i < records.size()) {
    const auto& head = records[i];
    std::vector<double> costs;
    std::vector<double> times;
    std::size_t j = i;
    for (; j < records.size() && records[j].scene == head.scene &&
           records[j].method == head.method;
         ++j) {
      if (records[j].success) costs.push_back(*records[j].cost);
      times.push_back(records[j].wall_time);
    }
    CellSummary cell;
    cell.scene = head.scene;
    cell.method = head.method;
    cell.trials = static_cast<int>(j - i);
    cell.successes = static_cast<int>(costs.size());
    cell.success_pct = 100.0 * cell.successes / cell.trials;
    if (!costs.empty()) {
      cell.cost_mean = mean(costs);
      cell.cost_std = sample_std(costs);
    }
    cell.time_mean = mean(times);
    cell.time_std = sample_std(times);
    report.cells.push_back(std::move(cell));
    i = j;
  }
  return report;
}

const CellSummary* BenchReport::find(const std::string& scene, MethodId method) const {
  for (const auto& c : cells)
    if (c.scene == scene && c.method == method) return &c;
  return nullptr;
}

std::vector<std::string> BenchReport::scenes() const {
  std::vector<std::string> out;
  for (const auto& c : cells)
    if (std::find(out.begin(), out.end(), c.scene) == out.end()) out.push_back(c.scene);
  return out;
}

std::vector<MethodId> BenchReport::methods() const {
  std::vector<MethodId> out;
  for (const MethodId m : kAllMethods)
    for (const auto& c : cells)
      if (c.method == m) {
        out.push_back(m);
        break;
      }
  return out;
}

}  // namespace reachplan
