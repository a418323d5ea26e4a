#pragma once

#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "puzznic/encoder.hpp"
#include "puzznic/error.hpp"
#include "puzznic/sat/solver.hpp"

// DIMACS text, the SAT-competition answer format, and the two backends
// (in-process CDCL, or an external executable run on a DIMACS file).

namespace puzznic::sat {

/// `p cnf` file with a provenance comment and one `c map` line per named variable.
inline std::string emit_dimacs(const CnfInstance& cnf, std::span<const int> units = {}) {
  std::string out;
  out += "c puzznic " + std::string(to_string(cnf.mode)) + " horizon " + std::to_string(cnf.horizon);
  if (cnf.mode == EncodingMode::VarMoves) out += " max-moves " + std::to_string(cnf.max_moves);
  out += " level " + cnf.level_digest + "\n";
  for (int v = 1; v <= cnf.varmap.size(); ++v) {
    const VarMeaning& m = cnf.varmap.meaning(v);
    if (m.kind == VarMeaning::Kind::Aux) continue;
    out += "c map " + std::to_string(v) + " " + describe(m) + "\n";
  }
  out += "p cnf " + std::to_string(cnf.num_vars) + " " + std::to_string(cnf.clauses.size() + units.size()) + "\n";
  for (const auto& clause : cnf.clauses) {
    for (int lit : clause) {
      out += std::to_string(lit);
      out.push_back(' ');
    }
    out += "0\n";
  }
  for (int lit : units) out += std::to_string(lit) + " 0\n";
  return out;
}

struct Dimacs {
  int num_vars = 0;
  std::vector<std::vector<int>> clauses;
};

inline Dimacs parse_dimacs(std::string_view text) {
  Dimacs out;
  std::istringstream in{std::string(text)};
  std::string line;
  bool header = false;
  std::vector<int> clause;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == 'c' || line[0] == '%') continue;
    if (line[0] == 'p') {
      std::istringstream h(line);
      std::string p, fmt;
      std::size_t n = 0;
      if (!(h >> p >> fmt >> out.num_vars >> n) || fmt != "cnf")
        throw Error(ErrorKind::BackendFailure, "bad DIMACS header: " + line);
      header = true;
      continue;
    }
    if (!header) throw Error(ErrorKind::BackendFailure, "clause before DIMACS header");
    std::istringstream body(line);
    long lit = 0;
    while (body >> lit) {
      if (lit == 0) {
        out.clauses.push_back(std::move(clause));
        clause.clear();
      } else {
        clause.push_back(static_cast<int>(lit));
      }
    }
  }
  if (!header) throw Error(ErrorKind::BackendFailure, "missing DIMACS header");
  return out;
}

struct Answer {
  Status status = Status::Unknown;
  /// model[v - 1] for v in 1..num_vars (Sat only).
  std::vector<bool> model;
};

/// Competition output: `s` line, then `v` lines ending with 0.
inline std::string emit_answer(const Answer& a) {
  if (a.status == Status::Unknown) return "s UNKNOWN\n";
  if (a.status == Status::Unsat) return "s UNSATISFIABLE\n";
  std::string out = "s SATISFIABLE\n";
  std::string line = "v";
  for (std::size_t v = 0; v < a.model.size(); ++v) {
    std::string lit = " " + std::string(a.model[v] ? "" : "-") + std::to_string(v + 1);
    if (line.size() + lit.size() > 78) {
      out += line + "\n";
      line = "v";
    }
    line += lit;
  }
  return out + line + " 0\n";
}

inline Answer parse_answer(std::string_view text, int num_vars) {
  Answer out;
  bool seen_status = false;
  std::istringstream in{std::string(text)};
  std::string line;
  out.model.assign(static_cast<std::size_t>(num_vars), false);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind("s ", 0) == 0) {
      std::string s = line.substr(2);
      if (s == "SATISFIABLE") out.status = Status::Sat;
      else if (s == "UNSATISFIABLE") out.status = Status::Unsat;
      else if (s == "UNKNOWN") out.status = Status::Unknown;
      else throw Error(ErrorKind::BackendFailure, "unrecognised status line: " + line);
      seen_status = true;
    } else if (line.rfind("v", 0) == 0) {
      std::istringstream lits(line.substr(1));
      long lit = 0;
      while (lits >> lit) {
        if (lit == 0) continue;
        long v = lit < 0 ? -lit : lit;
        if (v > num_vars) throw Error(ErrorKind::BackendFailure, "literal " + std::to_string(lit) + " out of range");
        out.model[static_cast<std::size_t>(v - 1)] = lit > 0;
      }
    }
  }
  if (!seen_status) throw Error(ErrorKind::BackendFailure, "no 's' line in solver output");
  if (out.status != Status::Sat) out.model.clear();
  return out;
}

struct SolveBudget {
  std::optional<std::chrono::steady_clock::time_point> deadline;
  const std::atomic<bool>* stop = nullptr;
};

class Backend {
 public:
  virtual ~Backend() = default;
  /// Decides `cnf` plus the unit `assumptions`.
  virtual Answer solve(const CnfInstance& cnf, std::span<const int> assumptions, const SolveBudget& budget) = 0;
  virtual std::string name() const = 0;
};

/// In-process CDCL; keeps the solver of the last instance so that repeated
/// calls under different assumptions reuse learnt clauses.
class InternalBackend : public Backend {
 public:
  Answer solve(const CnfInstance& cnf, std::span<const int> assumptions, const SolveBudget& budget) override {
    if (cached_ != &cnf || !solver_) {
      solver_ = std::make_unique<Solver>();
      solver_->ensure_vars(cnf.num_vars);
      for (const auto& c : cnf.clauses) solver_->add_clause(std::span<const int>(c));
      cached_ = &cnf;
    }
    solver_->set_deadline(budget.deadline);
    solver_->set_stop(budget.stop);
    Answer a;
    a.status = solver_->solve(assumptions);
    if (a.status == Status::Sat) {
      a.model = solver_->model();
      a.model.resize(static_cast<std::size_t>(cnf.num_vars));
    }
    return a;
  }
  std::string name() const override { return "internal"; }

  /// Forget the cached solver (call when the instance it belongs to dies).
  void reset() {
    solver_.reset();
    cached_ = nullptr;
  }

 private:
  std::unique_ptr<Solver> solver_;
  const CnfInstance* cached_ = nullptr;
};

/// Runs `<command> <file.cnf>`; assumptions become unit clauses in the file.
class ExternalBackend : public Backend {
 public:
  explicit ExternalBackend(std::string command) : command_(std::move(command)) {}

  Answer solve(const CnfInstance& cnf, std::span<const int> assumptions, const SolveBudget& budget) override {
    namespace fs = std::filesystem;
    std::string pattern = (fs::temp_directory_path() / "puzznic-XXXXXX.cnf").string();
    std::vector<char> path(pattern.begin(), pattern.end());
    path.push_back('\0');
    int fd = ::mkstemps(path.data(), 4);
    if (fd < 0) throw Error(ErrorKind::BackendFailure, "cannot create temporary CNF file");
    ::close(fd);
    struct Cleanup {
      std::string p;
      ~Cleanup() {
        std::error_code ec;
        std::filesystem::remove(p, ec);
      }
    } cleanup{path.data()};
    {
      std::ofstream f(path.data(), std::ios::binary);
      f << emit_dimacs(cnf, assumptions);
      if (!f) throw Error(ErrorKind::BackendFailure, "cannot write temporary CNF file");
    }

    std::string cmd = command_;
    if (budget.deadline) {
      auto left = std::chrono::duration<double>(*budget.deadline - std::chrono::steady_clock::now()).count();
      if (left <= 0) return {};
      cmd = "timeout " + std::to_string(static_cast<long>(left) + 1) + " " + cmd;
    }
    cmd += " '" + std::string(path.data()) + "' 2>/dev/null";

    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (!pipe) throw Error(ErrorKind::BackendFailure, "cannot start " + command_);
    std::string output;
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) output.append(buf, n);
    int status = ::pclose(pipe);
    int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    if (budget.deadline && code == 124) return {};
    if (code != 0 && code != 10 && code != 20)
      throw Error(ErrorKind::BackendFailure, command_ + " exited with status " + std::to_string(code));
    Answer a = parse_answer(output, cnf.num_vars);
    if ((code == 10 && a.status != Status::Sat) || (code == 20 && a.status != Status::Unsat))
      throw Error(ErrorKind::BackendFailure, command_ + ": exit status contradicts the 's' line");
    return a;
  }
  std::string name() const override { return "external:" + command_; }

 private:
  std::string command_;
};

inline constexpr const char* kBackendEnv = "PUZZNIC_SAT_BACKEND";

/// External backend if PUZZNIC_SAT_BACKEND names one, otherwise the internal solver.
inline std::unique_ptr<Backend> default_backend() {
  if (const char* cmd = std::getenv(kBackendEnv); cmd && *cmd) return std::make_unique<ExternalBackend>(cmd);
  return std::make_unique<InternalBackend>();
}

}  // namespace puzznic::sat
