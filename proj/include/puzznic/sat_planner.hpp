#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <optional>
#include <vector>

#include "puzznic/encoder.hpp"
#include "puzznic/planner.hpp"
#include "puzznic/sat/dimacs.hpp"

// Planning as a sequence of SAT calls. Fixed mode walks the step count up by
// one (SAT at n says nothing about n + 1); variable-moves mode doubles the
// move bound, then tightens it with assumptions on the unary move counter.

namespace puzznic {

struct SatLimits {
  /// Step bound (fixed) or move bound (variable moves).
  int bound = kDefaultMaxMoves;
  std::optional<std::chrono::steady_clock::duration> time_limit;
  const std::atomic<bool>* stop = nullptr;
  EncodeOptions encode;
};

struct SatSearchResult {
  Outcome outcome = Outcome::BudgetExhausted;
  EncodingMode mode = EncodingMode::Fixed;
  DecodedPlan decoded;
  int bound = 0;
  /// Steps (fixed) or ministeps (variable moves) of the answering encoding.
  int horizon = 0;
  int backend_calls = 0;
  double elapsed = 0.0;

  const Plan& plan() const { return decoded.plan; }
  /// The mode's own measure: total steps (fixed) or player moves (variable moves).
  int cost() const {
    return mode == EncodingMode::Fixed ? decoded.total_steps : static_cast<int>(decoded.plan.moves.size());
  }
};

namespace detail {

class SatRun {
 public:
  SatRun(sat::Backend& backend, const SatLimits& limits)
      : backend_(backend), start_(std::chrono::steady_clock::now()) {
    if (limits.time_limit) budget_.deadline = start_ + *limits.time_limit;
    budget_.stop = limits.stop;
  }

  sat::Answer ask(const CnfInstance& cnf, std::span<const int> assumptions = {}) {
    ++calls_;
    if (budget_.stop && budget_.stop->load()) return {};
    if (budget_.deadline && std::chrono::steady_clock::now() >= *budget_.deadline) return {};
    return backend_.solve(cnf, assumptions, budget_);
  }

  void finish(SatSearchResult& r) const {
    r.backend_calls = calls_;
    r.elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  sat::Backend& backend_;
  std::chrono::steady_clock::time_point start_;
  sat::SolveBudget budget_;
  int calls_ = 0;
};

inline void forget(sat::Backend& backend) {
  if (auto* internal = dynamic_cast<sat::InternalBackend*>(&backend)) internal->reset();
}

inline void solve_fixed(const Grid& level, const SatLimits& limits, sat::Backend& backend, SatRun& run,
                        SatSearchResult& out) {
  const int last = std::min(limits.bound, limits.encode.max_steps);
  out.bound = last;
  for (int n = 1; n <= last; ++n) {
    CnfInstance cnf = encode_fixed(level, n, limits.encode);
    sat::Answer a = run.ask(cnf);
    forget(backend);
    if (a.status == sat::Status::Unknown) return;
    if (a.status == sat::Status::Sat) {
      out.decoded = decode_model(cnf, a.model);
      out.horizon = n;
      out.outcome = Outcome::Solved;
      return;
    }
  }
  out.outcome = Outcome::ProvedUnsolvable;
}

inline void solve_varmoves(const Grid& level, const SatLimits& limits, sat::Backend& backend, SatRun& run,
                           SatSearchResult& out) {
  const int bound = std::min(limits.bound, limits.encode.max_moves);
  out.bound = bound;
  for (int m = std::min(1, bound);; m = std::min(2 * m, bound)) {
    CnfInstance cnf = encode_varmoves(level, m, limits.encode);
    sat::Answer a = run.ask(cnf);
    if (a.status == sat::Status::Unknown) {
      forget(backend);
      return;
    }
    if (a.status == sat::Status::Sat) {
      out.decoded = decode_model(cnf, a.model);
      out.horizon = cnf.horizon;
      // Descend: ask for strictly fewer moves than the best model so far.
      const std::vector<int> at_least = cnf.varmap.move_count_literals();
      for (;;) {
        const int k = static_cast<int>(out.decoded.plan.moves.size());
        if (k == 0) break;
        const int tighter[] = {-at_least[static_cast<std::size_t>(k - 1)]};
        sat::Answer b = run.ask(cnf, tighter);
        if (b.status == sat::Status::Unknown) {
          forget(backend);
          out.outcome = Outcome::BudgetExhausted;
          return;
        }
        if (b.status == sat::Status::Unsat) break;
        a = std::move(b);
        out.decoded = decode_model(cnf, a.model);
      }
      forget(backend);
      out.outcome = Outcome::Solved;
      return;
    }
    forget(backend);
    if (m >= bound) break;
  }
  out.outcome = Outcome::ProvedUnsolvable;
}

}  // namespace detail

/// Optimal (on the mode's measure) plan within `limits.bound`, or a proof
/// that none exists within it. Decoded plans are engine-validated.
inline SatSearchResult solve_iterative(const QuiescentState& state, EncodingMode mode, const SatLimits& limits,
                                       sat::Backend& backend) {
  if (limits.bound < 0) throw Error(ErrorKind::InvalidBound, "bound " + std::to_string(limits.bound));
  SatSearchResult out;
  out.mode = mode;
  out.bound = limits.bound;
  detail::SatRun run(backend, limits);
  const Grid& level = state.grid();
  if (is_goal(level)) {
    out.outcome = Outcome::Solved;
    out.decoded.trace.initial = level;
  } else if (limits.bound == 0) {
    out.outcome = Outcome::ProvedUnsolvable;
  } else if (mode == EncodingMode::Fixed) {
    detail::solve_fixed(level, limits, backend, run, out);
  } else {
    detail::solve_varmoves(level, limits, backend, run, out);
  }
  run.finish(out);
  return out;
}

}  // namespace puzznic
