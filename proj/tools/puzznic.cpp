#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "puzznic.hpp"

using namespace puzznic;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitUnsolvable = 2;
constexpr int kExitBudget = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path);
}

LevelFile load_level(const std::string& path, bool pre_resolve = false) {
  ParseOptions opts;
  opts.pre_resolve = pre_resolve;
  LevelFile lf = parse_level(read_file(path), opts);
  if (lf.name.empty()) lf.name = std::filesystem::path(path).stem().string();
  return lf;
}

struct SolveArgs {
  std::string level;
  std::string algo = "astar";
  int max_moves = kDefaultMaxMoves;
  double timeout = 0;
  bool pre_resolve = false;
  bool iddfs_table = false;
};

int cmd_solve(const SolveArgs& a) {
  LevelFile lf = load_level(a.level, a.pre_resolve);
  QuiescentState state = QuiescentState::from(lf.grid);
  std::optional<std::chrono::steady_clock::duration> limit;
  if (a.timeout > 0)
    limit = std::chrono::duration_cast<std::chrono::steady_clock::duration>(std::chrono::duration<double>(a.timeout));

  Outcome outcome;
  Plan plan;
  if (auto algo = parse_algorithm(a.algo)) {
    SearchLimits limits;
    limits.max_moves = a.max_moves;
    limits.time_limit = limit;
    limits.iddfs_table = a.iddfs_table;
    SearchResult r = solve(state, limits, *algo);
    outcome = r.outcome;
    plan = r.plan;
    if (r.outcome == Outcome::ProvedUnsolvable)
      std::cerr << prove_unsolvable_report(r);
    else
      std::cerr << "algorithm: " << to_string(r.algorithm) << "\nexpanded: " << r.stats.expanded
                << "\ngenerated: " << r.stats.generated << "\nduplicates: " << r.stats.duplicates
                << "\ndead ends: " << r.stats.dead_ends << "\n";
    std::cerr << "seconds: " << r.stats.elapsed << "\n";
  } else if (a.algo == "sat-fixed" || a.algo == "sat-varmoves") {
    const bool fixed = a.algo == "sat-fixed";
    SatLimits limits;
    limits.time_limit = limit;
    limits.bound = fixed ? std::min(limits.encode.max_steps, a.max_moves + max_matches(lf.grid)) : a.max_moves;
    auto backend = sat::default_backend();
    SatSearchResult r = solve_iterative(state, fixed ? EncodingMode::Fixed : EncodingMode::VarMoves, limits, *backend);
    outcome = r.outcome;
    plan = r.plan();
    std::cerr << "backend: " << backend->name() << "\nbound: " << r.bound << "\nhorizon: " << r.horizon
              << "\nbackend calls: " << r.backend_calls << "\nseconds: " << r.elapsed << "\n";
    if (r.outcome == Outcome::Solved)
      std::cerr << (fixed ? "steps: " : "moves: ") << r.cost() << "\n";
  } else {
    throw std::runtime_error("unknown algorithm '" + a.algo + "'");
  }
  if (lf.pre_resolve_matches) std::cerr << "pre-resolve matches: " << lf.pre_resolve_matches << "\n";

  switch (outcome) {
    case Outcome::Solved:
      std::cerr << "solved in " << plan.moves.size() << " moves\n";
      std::cout << emit_plan(plan);
      return kExitOk;
    case Outcome::ProvedUnsolvable:
      std::cerr << "unsolvable within the bound\n";
      return kExitUnsolvable;
    case Outcome::BudgetExhausted:
      std::cerr << "budget exhausted\n";
      return kExitBudget;
  }
  return kExitError;
}

int cmd_encode(const std::string& level, const std::string& mode, int horizon, const std::string& out) {
  LevelFile lf = load_level(level);
  CnfInstance cnf;
  if (mode == "fixed")
    cnf = encode_fixed(lf.grid, horizon);
  else if (mode == "varmoves")
    cnf = encode_varmoves(lf.grid, horizon);
  else
    throw std::runtime_error("unknown mode '" + mode + "'");
  write_output(out, sat::emit_dimacs(cnf));
  (out.empty() || out == "-" ? std::cerr : std::cout)
      << "variables: " << cnf.num_vars << "\nclauses: " << cnf.clauses.size() << "\n";
  return kExitOk;
}

int cmd_check(const std::string& level, const std::string& plan_path) {
  LevelFile lf = load_level(level);
  Plan plan = parse_plan(read_file(plan_path));
  Replay r = replay(QuiescentState::from(lf.grid), plan.moves);
  if (r.illegal_at) {
    std::cout << "illegal move at step " << *r.illegal_at + 1 << ": " << to_string(plan.moves[*r.illegal_at]) << "\n";
    return kExitUnsolvable;
  }
  const int left = pattern_counts(r.final_state.grid()).total();
  if (left) {
    std::cout << "plan ends with " << left << " blocks remaining\n";
    return kExitUnsolvable;
  }
  std::cout << "ok: " << plan.moves.size() << " moves, " << r.match_events << " matches\n";
  return kExitOk;
}

int cmd_show(const std::string& level, const std::string& plan_path) {
  LevelFile lf = load_level(level);
  Plan plan;
  if (!plan_path.empty()) plan = parse_plan(read_file(plan_path));
  Replay r = replay(QuiescentState::from(lf.grid), plan.moves);
  std::cout << render_trace(r.trace, &lf);
  if (r.illegal_at) {
    std::cerr << "illegal move at step " << *r.illegal_at + 1 << ": " << to_string(plan.moves[*r.illegal_at]) << "\n";
    return kExitUnsolvable;
  }
  return kExitOk;
}

int cmd_sat(const std::string& path) {
  sat::Dimacs d = sat::parse_dimacs(read_file(path));
  sat::Solver s;
  s.ensure_vars(d.num_vars);
  for (const auto& c : d.clauses) s.add_clause(std::span<const int>(c));
  sat::Answer a;
  a.status = s.solve();
  if (a.status == sat::Status::Sat) {
    a.model = s.model();
    a.model.resize(static_cast<std::size_t>(d.num_vars));
  }
  std::cout << sat::emit_answer(a);
  return a.status == sat::Status::Sat ? 10 : a.status == sat::Status::Unsat ? 20 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Puzznic level solver"};
  app.require_subcommand(1);

  SolveArgs sa;
  auto* solve_cmd = app.add_subcommand("solve", "Find a minimum-move plan; exit 2 if unsolvable, 3 on budget exhaustion");
  solve_cmd->add_option("level", sa.level, "Level file")->required();
  solve_cmd->add_option("--algo", sa.algo, "bfs, astar, iddfs, sat-fixed or sat-varmoves")->capture_default_str();
  solve_cmd->add_option("--max-moves", sa.max_moves, "Move bound")->capture_default_str();
  solve_cmd->add_option("--timeout", sa.timeout, "Seconds (0 = unlimited)");
  solve_cmd->add_flag("--pre-resolve", sa.pre_resolve, "Resolve a non-quiescent level before solving");
  solve_cmd->add_flag("--iddfs-table", sa.iddfs_table, "Give IDDFS a transposition table");

  std::string enc_level, enc_mode = "fixed", enc_out;
  int enc_horizon = 1;
  auto* enc_cmd = app.add_subcommand("encode", "Write the level as DIMACS CNF");
  enc_cmd->add_option("level", enc_level, "Level file")->required();
  enc_cmd->add_option("--mode", enc_mode, "fixed or varmoves")->capture_default_str();
  enc_cmd->add_option("--horizon", enc_horizon, "Steps (fixed) or move bound (varmoves)")->capture_default_str();
  enc_cmd->add_option("-o,--output", enc_out, "Output file (default stdout)");

  std::string chk_level, chk_plan;
  auto* chk_cmd = app.add_subcommand("check", "Replay a plan; exit 0 iff it clears the level");
  chk_cmd->add_option("level", chk_level, "Level file")->required();
  chk_cmd->add_option("plan", chk_plan, "Plan file")->required();

  std::string show_level, show_plan;
  auto* show_cmd = app.add_subcommand("show", "Print the annotated playback of a plan");
  show_cmd->add_option("level", show_level, "Level file")->required();
  show_cmd->add_option("plan", show_plan, "Plan file");

  std::string exp_what, exp_level, exp_out;
  auto* exp_cmd = app.add_subcommand("export", "Write PDDL: 'export domain' or 'export problem <level>'");
  exp_cmd->add_option("what", exp_what, "domain or problem")->required()->check(CLI::IsMember({"domain", "problem"}));
  exp_cmd->add_option("level", exp_level, "Level file (problem only)");
  exp_cmd->add_option("-o,--output", exp_out, "Output file (default stdout)");

  std::string bench_dir, bench_methods_arg, bench_tsv;
  double bench_timeout = 60;
  int bench_max_moves = kDefaultMaxMoves;
  unsigned bench_workers = BenchOptions{}.workers;
  auto* bench_cmd = app.add_subcommand("bench", "Run every method on every level of a directory");
  bench_cmd->add_option("corpus", bench_dir, "Directory of .lvl files")->required();
  bench_cmd->add_option("--methods", bench_methods_arg, "Comma-separated subset of bfs,astar,iddfs,sat-fixed,sat-varmoves");
  bench_cmd->add_option("--timeout", bench_timeout, "Seconds per row")->capture_default_str();
  bench_cmd->add_option("--max-moves", bench_max_moves, "Move bound")->capture_default_str();
  bench_cmd->add_option("--workers", bench_workers, "Parallel rows")->capture_default_str();
  bench_cmd->add_option("--tsv", bench_tsv, "Also write TSV here ('-' for stdout instead of the table)");

  std::string sat_file;
  auto* sat_cmd = app.add_subcommand("sat", "Solve a DIMACS file with the built-in solver (exit 10 SAT, 20 UNSAT)");
  sat_cmd->add_option("cnf", sat_file, "DIMACS file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*solve_cmd) return cmd_solve(sa);
    if (*enc_cmd) return cmd_encode(enc_level, enc_mode, enc_horizon, enc_out);
    if (*chk_cmd) return cmd_check(chk_level, chk_plan);
    if (*show_cmd) return cmd_show(show_level, show_plan);
    if (*exp_cmd) {
      if (exp_what == "domain") {
        write_output(exp_out, export_pddl_domain());
      } else {
        if (exp_level.empty()) throw std::runtime_error("export problem needs a level file");
        LevelFile lf = load_level(exp_level);
        write_output(exp_out, export_pddl_problem(lf.grid, lf.name));
      }
      return kExitOk;
    }
    if (*bench_cmd) {
      BenchOptions opts;
      if (!bench_methods_arg.empty()) {
        opts.methods.clear();
        std::stringstream ss(bench_methods_arg);
        for (std::string m; std::getline(ss, m, ',');) {
          if (std::find(bench_methods().begin(), bench_methods().end(), m) == bench_methods().end())
            throw std::runtime_error("unknown method '" + m + "'");
          opts.methods.push_back(m);
        }
      }
      opts.timeout = std::chrono::duration<double>(bench_timeout);
      opts.max_moves = bench_max_moves;
      opts.workers = std::max(1u, bench_workers);
      auto rows = run_bench(load_corpus(bench_dir), opts);
      if (bench_tsv == "-") {
        std::cout << format_bench_tsv(rows);
      } else {
        std::cout << format_bench_table(rows);
        if (!bench_tsv.empty()) write_output(bench_tsv, format_bench_tsv(rows));
      }
      return kExitOk;
    }
    if (*sat_cmd) return cmd_sat(sat_file);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
