#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "puzznic/level_io.hpp"
#include "puzznic/planner.hpp"
#include "puzznic/sat_planner.hpp"

// Corpus benchmark: every (instance, method) pair under a per-row time limit.
// Outcome letters: Y solved and proved optimal on the method's measure,
// U proved unsolvable within the bound, N time budget exceeded, M memory
// budget exceeded, E instance could not be loaded.

namespace puzznic {

inline const std::vector<std::string>& bench_methods() {
  static const std::vector<std::string> all{"bfs", "astar", "iddfs", "sat-fixed", "sat-varmoves"};
  return all;
}

struct BenchRow {
  std::string instance;
  std::string method;
  char outcome = 'N';
  std::optional<int> cost;
  std::string measure;
  double seconds = 0.0;
};

struct BenchOptions {
  std::vector<std::string> methods = bench_methods();
  std::chrono::duration<double> timeout{60.0};
  int max_moves = kDefaultMaxMoves;
  unsigned workers = std::max(1u, std::min(4u, std::thread::hardware_concurrency()));
  /// Makes the SAT backend for one row; the default honours PUZZNIC_SAT_BACKEND.
  std::function<std::unique_ptr<sat::Backend>()> backend = sat::default_backend;
};

struct BenchInstance {
  std::string name;
  std::optional<Grid> grid;
  std::string error;
};

inline std::vector<BenchInstance> load_corpus(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".lvl") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<BenchInstance> out;
  for (const auto& f : files) {
    BenchInstance inst{f.stem().string(), std::nullopt, {}};
    try {
      std::ifstream in(f, std::ios::binary);
      if (!in) throw std::runtime_error("cannot read " + f.string());
      std::stringstream ss;
      ss << in.rdbuf();
      inst.grid = parse_level(ss.str()).grid;
    } catch (const std::exception& e) {
      inst.error = e.what();
    }
    out.push_back(std::move(inst));
  }
  return out;
}

inline BenchRow bench_one(const BenchInstance& inst, const std::string& method, const BenchOptions& opts) {
  BenchRow row{inst.name, method, 'E', std::nullopt, "-", 0.0};
  if (!inst.grid) {
    row.measure = "error: " + inst.error;
    return row;
  }
  const auto limit = std::chrono::duration_cast<std::chrono::steady_clock::duration>(opts.timeout);
  const auto start = std::chrono::steady_clock::now();
  QuiescentState state = QuiescentState::from(*inst.grid);
  if (auto algo = parse_algorithm(method)) {
    SearchLimits limits;
    limits.max_moves = opts.max_moves;
    limits.time_limit = limit;
    SearchResult r = solve(state, limits, *algo);
    row.measure = "moves";
    switch (r.outcome) {
      case Outcome::Solved:
        row.outcome = 'Y';
        row.cost = r.cost();
        break;
      case Outcome::ProvedUnsolvable: row.outcome = 'U'; break;
      case Outcome::BudgetExhausted: row.outcome = r.exhausted == Exhaustion::Memory ? 'M' : 'N'; break;
    }
  } else if (method == "sat-fixed" || method == "sat-varmoves") {
    const bool fixed = method == "sat-fixed";
    SatLimits limits;
    limits.time_limit = limit;
    limits.bound = fixed ? std::min(limits.encode.max_steps, opts.max_moves + max_matches(*inst.grid))
                         : opts.max_moves;
    auto backend = opts.backend();
    SatSearchResult r =
        solve_iterative(state, fixed ? EncodingMode::Fixed : EncodingMode::VarMoves, limits, *backend);
    row.measure = fixed ? "steps" : "moves";
    switch (r.outcome) {
      case Outcome::Solved:
        row.outcome = 'Y';
        row.cost = r.cost();
        break;
      case Outcome::ProvedUnsolvable: row.outcome = 'U'; break;
      case Outcome::BudgetExhausted: row.outcome = 'N'; break;
    }
  } else {
    row.measure = "error: unknown method";
    return row;
  }
  row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return row;
}

/// Rows sorted by instance, then by method in canonical order.
inline std::vector<BenchRow> run_bench(const std::vector<BenchInstance>& instances, const BenchOptions& opts) {
  struct Job {
    const BenchInstance* inst;
    std::string method;
  };
  std::vector<Job> jobs;
  for (const auto& inst : instances) {
    if (!inst.grid) {
      jobs.push_back({&inst, "-"});
      continue;
    }
    for (const auto& m : opts.methods) jobs.push_back({&inst, m});
  }
  std::vector<BenchRow> rows(jobs.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < jobs.size();) {
      try {
        rows[i] = bench_one(*jobs[i].inst, jobs[i].method, opts);
      } catch (const std::exception& e) {
        rows[i] = {jobs[i].inst->name, jobs[i].method, 'E', std::nullopt, std::string("error: ") + e.what(), 0.0};
      }
    }
  };
  std::vector<std::thread> pool;
  const unsigned n = std::max(1u, std::min<unsigned>(opts.workers, static_cast<unsigned>(jobs.size())));
  for (unsigned i = 1; i < n; ++i) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  auto rank = [](const std::string& m) {
    const auto& all = bench_methods();
    return std::find(all.begin(), all.end(), m) - all.begin();
  };
  std::sort(rows.begin(), rows.end(), [&](const BenchRow& a, const BenchRow& b) {
    if (a.instance != b.instance) return a.instance < b.instance;
    return rank(a.method) < rank(b.method);
  });
  return rows;
}

inline std::vector<std::string> bench_cells(const BenchRow& r) {
  char secs[32];
  std::snprintf(secs, sizeof secs, "%.3f", r.seconds);
  return {r.instance, r.method, std::string(1, r.outcome), r.cost ? std::to_string(*r.cost) : "-", r.measure, secs};
}

inline const std::vector<std::string>& bench_header() {
  static const std::vector<std::string> h{"instance", "method", "outcome", "cost", "measure", "seconds"};
  return h;
}

inline std::string format_bench_tsv(const std::vector<BenchRow>& rows) {
  auto line = [](const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "\t" : "") + cells[i];
    return out + "\n";
  };
  std::string out = line(bench_header());
  for (const auto& r : rows) out += line(bench_cells(r));
  return out;
}

inline std::string format_bench_table(const std::vector<BenchRow>& rows) {
  std::vector<std::vector<std::string>> table{bench_header()};
  for (const auto& r : rows) table.push_back(bench_cells(r));
  std::vector<std::size_t> width(bench_header().size(), 0);
  for (const auto& cells : table)
    for (std::size_t i = 0; i < cells.size(); ++i) width[i] = std::max(width[i], cells[i].size());
  std::string out;
  for (const auto& cells : table) {
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      line += cells[i];
      if (i + 1 < cells.size()) line += std::string(width[i] - cells[i].size() + 2, ' ');
    }
    out += line + "\n";
  }
  return out;
}

}  // namespace puzznic
