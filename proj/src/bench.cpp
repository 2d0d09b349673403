#include "kinocbs/bench.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "kinocbs/log.hpp"
#include "kinocbs/scenario.hpp"
#include "kinocbs/validate.hpp"

namespace kinocbs::bench {

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return -1.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

TrialRow run_trial(const ProblemInstance& instance, const std::string& name,
                   int trial, const cbs::PlannerConfig& base) {
  TrialRow row;
  row.instance = name;
  row.trial = trial;
  cbs::PlannerConfig cfg = base;
  cfg.seed = mix_seed(base.seed, static_cast<std::uint64_t>(trial) + 1);
  row.seed = cfg.seed;
  try {
    auto report = cbs::solve(
        instance, cfg,
        [&](const TrajectorySet& ts, double cost, int /*iteration*/) {
          const auto check = validate::check(ts, instance);
          if (check.ok() && !row.success) {
            row.success = true;
            row.t_first_s = ts.wall_time_s;
            row.j_first_s = cost;
          }
        });
    row.iterations = static_cast<int>(report.iterations.size());
    for (const auto& it : report.iterations) row.expansions += it.hl_expansions;
  } catch (const std::exception& e) {
    // a crashed trial is a failure; the harness keeps going
    KINOCBS_LOG_INFO("trial crashed on " << name << ": " << e.what());
    row.success = false;
  }
  return row;
}

}  // namespace

std::vector<Aggregate> aggregate_rows(const std::vector<TrialRow>& rows) {
  std::map<std::string, std::vector<const TrialRow*>> by_instance;
  std::vector<std::string> order;
  for (const auto& r : rows) {
    if (!by_instance.count(r.instance)) order.push_back(r.instance);
    by_instance[r.instance].push_back(&r);
  }
  std::vector<Aggregate> out;
  for (const auto& name : order) {
    Aggregate a;
    a.instance = name;
    std::vector<double> ts, js;
    for (const TrialRow* r : by_instance[name]) {
      ++a.trials;
      if (r->success) {
        ts.push_back(r->t_first_s);
        js.push_back(r->j_first_s);
      }
    }
    a.p = a.trials > 0 ? static_cast<double>(ts.size()) / a.trials : 0.0;
    a.median_t = median(ts);
    a.median_j = median(js);
    out.push_back(std::move(a));
  }
  return out;
}

BenchmarkReport run_benchmark(const std::vector<std::string>& instance_paths,
                              int trials, const cbs::PlannerConfig& config,
                              int parallelism) {
  if (trials < 1) throw ContractError("run_benchmark: trials must be >= 1");
  BenchmarkReport report;

  struct Job {
    ProblemInstance instance;
    std::string name;
    int trial;
  };
  std::vector<Job> jobs;
  for (const auto& path : instance_paths) {
    ProblemInstance instance;
    try {
      instance = scenario::parse_instance(path);
    } catch (const std::exception& e) {
      report.config_errors.push_back(path + ": " + e.what());
      continue;
    }
    const std::string name = instance.name.empty() ? path : instance.name;
    for (int t = 0; t < trials; ++t) jobs.push_back({instance, name, t});
  }

  report.rows.resize(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) break;
      report.rows[i] =
          run_trial(jobs[i].instance, jobs[i].name, jobs[i].trial, config);
    }
  };
  const int n_threads = std::max(1, std::min<int>(parallelism, jobs.size()));
  std::vector<std::thread> threads;
  for (int i = 0; i < n_threads; ++i) threads.emplace_back(worker);
  for (auto& t : threads) t.join();

  report.aggregates = aggregate_rows(report.rows);
  return report;
}

void write_csv(const BenchmarkReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "instance,trial,seed,success,t_first_s,J_first_s,iterations,expansions\n";
  for (const auto& r : report.rows) {
    out << r.instance << "," << r.trial << "," << r.seed << ","
        << (r.success ? 1 : 0) << ",";
    if (r.success) out << r.t_first_s;
    out << ",";
    if (r.success) out << r.j_first_s;
    out << "," << r.iterations << "," << r.expansions << "\n";
  }
}

}  // namespace kinocbs::bench
