#pragma once

#include <algorithm>
#include <atomic>
#include <cassert>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <span>
#include <vector>

// A compact CDCL SAT solver: two watched literals with blockers, 1-UIP
// learning with clause minimization, VSIDS, phase saving, Luby restarts,
// LBD-based clause database reduction, and solving under assumptions.
//
// Literals are DIMACS integers at the interface (variable v > 0, negation -v).

namespace puzznic::sat {

enum class Status { Sat, Unsat, Unknown };

class Solver {
 public:
  Solver() = default;

  int num_vars() const { return static_cast<int>(assigns_.size()); }

  int new_var() {
    int v = num_vars();
    assigns_.push_back(kUndef);
    level_.push_back(0);
    reason_.push_back(kNoReason);
    activity_.push_back(0.0);
    polarity_.push_back(1);  // prefer false first
    seen_.push_back(0);
    heap_index_.push_back(-1);
    watches_.emplace_back();
    watches_.emplace_back();
    heap_insert(v);
    return v + 1;
  }

  void ensure_vars(int n) {
    while (num_vars() < n) new_var();
  }

  /// Adds a clause (DIMACS literals). Returns false once the formula is
  /// known unsatisfiable at the root.
  bool add_clause(std::span<const int> dimacs) {
    if (!ok_) return false;
    cancel_until(0);
    tmp_.clear();
    for (int d : dimacs) {
      assert(d != 0);
      ensure_vars(std::abs(d));
      tmp_.push_back(from_dimacs(d));
    }
    std::sort(tmp_.begin(), tmp_.end());
    std::size_t j = 0;
    Lit prev = kNoLit;
    for (Lit p : tmp_) {
      if (value(p) == kTrue || p == neg(prev)) return true;  // satisfied or tautology
      if (value(p) != kFalse && p != prev) tmp_[j++] = prev = p;
    }
    tmp_.resize(j);
    if (tmp_.empty()) return ok_ = false;
    if (tmp_.size() == 1) {
      enqueue(tmp_[0], kNoReason);
      return ok_ = (propagate() == kNoReason);
    }
    attach(make_clause(tmp_, false, 0));
    return true;
  }

  bool add_clause(std::initializer_list<int> lits) {
    return add_clause(std::span<const int>(lits.begin(), lits.size()));
  }

  void set_deadline(std::optional<std::chrono::steady_clock::time_point> d) { deadline_ = d; }
  void set_stop(const std::atomic<bool>* stop) { stop_ = stop; }

  Status solve(std::span<const int> assumptions = {}) {
    model_.clear();
    if (!ok_) return Status::Unsat;
    assumptions_.clear();
    for (int d : assumptions) {
      ensure_vars(std::abs(d));
      assumptions_.push_back(from_dimacs(d));
    }
    if (max_learnts_ == 0) max_learnts_ = std::max<std::size_t>(clauses_.size() / 3, 2000);
    Status status = Status::Unknown;
    for (int round = 0; status == Status::Unknown; ++round) {
      const std::uint64_t budget = static_cast<std::uint64_t>(luby(2.0, round) * 100.0);
      status = search(budget);
      if (status == Status::Unknown && interrupted()) break;
    }
    if (status == Status::Sat) {
      model_.resize(assigns_.size());
      for (std::size_t v = 0; v < assigns_.size(); ++v) model_[v] = assigns_[v] == kTrue;
    }
    cancel_until(0);
    return status;
  }

  /// Model value of DIMACS variable `var` after a Sat answer.
  bool model_value(int var) const { return model_[static_cast<std::size_t>(var - 1)]; }
  const std::vector<bool>& model() const { return model_; }

  std::uint64_t conflicts() const { return conflicts_; }
  std::uint64_t decisions() const { return decisions_; }

 private:
  using Lit = int;  // 2 * var + sign, sign 1 = negative
  using CRef = int;
  static constexpr Lit kNoLit = -2;
  static constexpr CRef kNoReason = -1;
  static constexpr std::int8_t kTrue = 1, kFalse = -1, kUndef = 0;

  struct Clause {
    std::vector<Lit> lits;
    bool learnt = false;
    bool deleted = false;
    int lbd = 0;
    double activity = 0.0;
  };
  struct Watcher {
    CRef cref;
    Lit blocker;
  };

  static Lit from_dimacs(int d) { return 2 * (std::abs(d) - 1) + (d < 0 ? 1 : 0); }
  static Lit neg(Lit p) { return p ^ 1; }
  static int var(Lit p) { return p >> 1; }
  static bool sign(Lit p) { return p & 1; }

  std::int8_t value(Lit p) const {
    std::int8_t v = assigns_[static_cast<std::size_t>(var(p))];
    return sign(p) ? static_cast<std::int8_t>(-v) : v;
  }
  int decision_level() const { return static_cast<int>(trail_lim_.size()); }

  CRef make_clause(const std::vector<Lit>& lits, bool learnt, int lbd) {
    CRef cr;
    if (!free_crefs_.empty()) {
      cr = free_crefs_.back();
      free_crefs_.pop_back();
    } else {
      cr = static_cast<CRef>(clauses_.size());
      clauses_.emplace_back();
    }
    Clause& c = clauses_[static_cast<std::size_t>(cr)];
    c.lits = lits;
    c.learnt = learnt;
    c.deleted = false;
    c.lbd = lbd;
    c.activity = 0.0;
    if (learnt) learnts_.push_back(cr);
    return cr;
  }

  void attach(CRef cr) {
    const Clause& c = clauses_[static_cast<std::size_t>(cr)];
    watches_[static_cast<std::size_t>(neg(c.lits[0]))].push_back({cr, c.lits[1]});
    watches_[static_cast<std::size_t>(neg(c.lits[1]))].push_back({cr, c.lits[0]});
  }

  void enqueue(Lit p, CRef from) {
    std::size_t v = static_cast<std::size_t>(var(p));
    assigns_[v] = sign(p) ? kFalse : kTrue;
    level_[v] = decision_level();
    reason_[v] = from;
    trail_.push_back(p);
  }

  CRef propagate() {
    CRef confl = kNoReason;
    while (qhead_ < trail_.size()) {
      Lit p = trail_[qhead_++];  // p is now true; visit clauses watching -p
      auto& ws = watches_[static_cast<std::size_t>(p)];
      std::size_t i = 0, j = 0;
      const Lit false_lit = neg(p);
      while (i < ws.size()) {
        Watcher w = ws[i];
        if (value(w.blocker) == kTrue) {
          ws[j++] = ws[i++];
          continue;
        }
        Clause& c = clauses_[static_cast<std::size_t>(w.cref)];
        if (c.deleted) {
          ++i;
          continue;
        }
        if (c.lits[0] == false_lit) std::swap(c.lits[0], c.lits[1]);
        ++i;
        Lit first = c.lits[0];
        if (first != w.blocker && value(first) == kTrue) {
          ws[j++] = {w.cref, first};
          continue;
        }
        bool moved = false;
        for (std::size_t k = 2; k < c.lits.size(); ++k) {
          if (value(c.lits[k]) != kFalse) {
            std::swap(c.lits[1], c.lits[k]);
            watches_[static_cast<std::size_t>(neg(c.lits[1]))].push_back({w.cref, first});
            moved = true;
            break;
          }
        }
        if (moved) continue;
        ws[j++] = {w.cref, first};
        if (value(first) == kFalse) {
          confl = w.cref;
          qhead_ = trail_.size();
          while (i < ws.size()) ws[j++] = ws[i++];
        } else {
          enqueue(first, w.cref);
        }
      }
      ws.resize(j);
      if (confl != kNoReason) break;
    }
    return confl;
  }

  void cancel_until(int lvl) {
    if (decision_level() <= lvl) return;
    for (std::size_t c = trail_.size(); c-- > static_cast<std::size_t>(trail_lim_[static_cast<std::size_t>(lvl)]);) {
      int v = var(trail_[c]);
      assigns_[static_cast<std::size_t>(v)] = kUndef;
      reason_[static_cast<std::size_t>(v)] = kNoReason;
      polarity_[static_cast<std::size_t>(v)] = sign(trail_[c]);
      if (heap_index_[static_cast<std::size_t>(v)] < 0) heap_insert(v);
    }
    trail_.resize(static_cast<std::size_t>(trail_lim_[static_cast<std::size_t>(lvl)]));
    trail_lim_.resize(static_cast<std::size_t>(lvl));
    qhead_ = trail_.size();
  }

  // --- VSIDS heap -------------------------------------------------------

  bool heap_less(int a, int b) const {
    return activity_[static_cast<std::size_t>(a)] > activity_[static_cast<std::size_t>(b)];
  }
  void heap_up(std::size_t i) {
    int v = heap_[i];
    while (i > 0) {
      std::size_t parent = (i - 1) / 2;
      if (!heap_less(v, heap_[parent])) break;
      heap_[i] = heap_[parent];
      heap_index_[static_cast<std::size_t>(heap_[i])] = static_cast<int>(i);
      i = parent;
    }
    heap_[i] = v;
    heap_index_[static_cast<std::size_t>(v)] = static_cast<int>(i);
  }
  void heap_down(std::size_t i) {
    int v = heap_[i];
    for (;;) {
      std::size_t child = 2 * i + 1;
      if (child >= heap_.size()) break;
      if (child + 1 < heap_.size() && heap_less(heap_[child + 1], heap_[child])) ++child;
      if (!heap_less(heap_[child], v)) break;
      heap_[i] = heap_[child];
      heap_index_[static_cast<std::size_t>(heap_[i])] = static_cast<int>(i);
      i = child;
    }
    heap_[i] = v;
    heap_index_[static_cast<std::size_t>(v)] = static_cast<int>(i);
  }
  void heap_insert(int v) {
    heap_.push_back(v);
    heap_up(heap_.size() - 1);
  }
  int heap_pop() {
    int top = heap_.front();
    heap_index_[static_cast<std::size_t>(top)] = -1;
    int last = heap_.back();
    heap_.pop_back();
    if (!heap_.empty()) {
      heap_[0] = last;
      heap_down(0);
    }
    return top;
  }

  void bump_var(int v) {
    double& a = activity_[static_cast<std::size_t>(v)];
    if ((a += var_inc_) > 1e100) {
      for (double& x : activity_) x *= 1e-100;
      var_inc_ *= 1e-100;
    }
    if (int i = heap_index_[static_cast<std::size_t>(v)]; i >= 0) heap_up(static_cast<std::size_t>(i));
  }
  void bump_clause(Clause& c) {
    if ((c.activity += cla_inc_) > 1e20) {
      for (CRef cr : learnts_) clauses_[static_cast<std::size_t>(cr)].activity *= 1e-20;
      cla_inc_ *= 1e-20;
    }
  }

  Lit pick_branch() {
    while (!heap_.empty()) {
      int v = heap_pop();
      if (assigns_[static_cast<std::size_t>(v)] == kUndef)
        return 2 * v + polarity_[static_cast<std::size_t>(v)];
    }
    return kNoLit;
  }

  // --- conflict analysis --------------------------------------------------

  bool redundant(Lit p, std::uint32_t abstract_levels) {
    analyze_stack_.clear();
    analyze_stack_.push_back(p);
    std::size_t top = analyze_toclear_.size();
    while (!analyze_stack_.empty()) {
      int v = var(analyze_stack_.back());
      analyze_stack_.pop_back();
      const Clause& c = clauses_[static_cast<std::size_t>(reason_[static_cast<std::size_t>(v)])];
      for (std::size_t i = 1; i < c.lits.size(); ++i) {
        Lit q = c.lits[i];
        int u = var(q);
        if (seen_[static_cast<std::size_t>(u)] || level_[static_cast<std::size_t>(u)] == 0) continue;
        if (reason_[static_cast<std::size_t>(u)] != kNoReason &&
            (abstract_level(u) & abstract_levels) != 0) {
          seen_[static_cast<std::size_t>(u)] = 1;
          analyze_stack_.push_back(q);
          analyze_toclear_.push_back(q);
        } else {
          for (std::size_t k = top; k < analyze_toclear_.size(); ++k)
            seen_[static_cast<std::size_t>(var(analyze_toclear_[k]))] = 0;
          analyze_toclear_.resize(top);
          return false;
        }
      }
    }
    return true;
  }
  std::uint32_t abstract_level(int v) const {
    return 1u << (level_[static_cast<std::size_t>(v)] & 31);
  }

  void analyze(CRef confl, std::vector<Lit>& learnt, int& bt_level) {
    int pending = 0;
    Lit p = kNoLit;
    learnt.clear();
    learnt.push_back(kNoLit);
    std::size_t index = trail_.size();
    do {
      Clause& c = clauses_[static_cast<std::size_t>(confl)];
      if (c.learnt) bump_clause(c);
      for (std::size_t i = (p == kNoLit ? 0 : 1); i < c.lits.size(); ++i) {
        Lit q = c.lits[i];
        int v = var(q);
        if (!seen_[static_cast<std::size_t>(v)] && level_[static_cast<std::size_t>(v)] > 0) {
          seen_[static_cast<std::size_t>(v)] = 1;
          bump_var(v);
          if (level_[static_cast<std::size_t>(v)] >= decision_level())
            ++pending;
          else
            learnt.push_back(q);
        }
      }
      while (!seen_[static_cast<std::size_t>(var(trail_[--index]))]) {
      }
      p = trail_[index];
      confl = reason_[static_cast<std::size_t>(var(p))];
      seen_[static_cast<std::size_t>(var(p))] = 0;
      --pending;
    } while (pending > 0);
    learnt[0] = neg(p);

    // Recursive minimization.
    analyze_toclear_.assign(learnt.begin(), learnt.end());
    std::uint32_t levels = 0;
    for (std::size_t i = 1; i < learnt.size(); ++i) levels |= abstract_level(var(learnt[i]));
    std::size_t j = 1;
    for (std::size_t i = 1; i < learnt.size(); ++i) {
      int v = var(learnt[i]);
      if (reason_[static_cast<std::size_t>(v)] == kNoReason || !redundant(learnt[i], levels))
        learnt[j++] = learnt[i];
    }
    learnt.resize(j);
    for (Lit q : analyze_toclear_) seen_[static_cast<std::size_t>(var(q))] = 0;

    if (learnt.size() == 1) {
      bt_level = 0;
    } else {
      std::size_t max_i = 1;
      for (std::size_t i = 2; i < learnt.size(); ++i)
        if (level_[static_cast<std::size_t>(var(learnt[i]))] >
            level_[static_cast<std::size_t>(var(learnt[max_i]))])
          max_i = i;
      std::swap(learnt[1], learnt[max_i]);
      bt_level = level_[static_cast<std::size_t>(var(learnt[1]))];
    }
  }

  int compute_lbd(const std::vector<Lit>& lits) {
    ++lbd_stamp_;
    if (lbd_seen_.size() < static_cast<std::size_t>(decision_level()) + 1)
      lbd_seen_.resize(static_cast<std::size_t>(decision_level()) + 1, 0);
    int n = 0;
    for (Lit p : lits) {
      std::size_t l = static_cast<std::size_t>(level_[static_cast<std::size_t>(var(p))]);
      if (lbd_seen_[l] != lbd_stamp_) {
        lbd_seen_[l] = lbd_stamp_;
        ++n;
      }
    }
    return n;
  }

  bool locked(CRef cr) const {
    const Clause& c = clauses_[static_cast<std::size_t>(cr)];
    int v = var(c.lits[0]);
    return value(c.lits[0]) == kTrue && reason_[static_cast<std::size_t>(v)] == cr;
  }

  void reduce_db() {
    std::sort(learnts_.begin(), learnts_.end(), [this](CRef a, CRef b) {
      const Clause& x = clauses_[static_cast<std::size_t>(a)];
      const Clause& y = clauses_[static_cast<std::size_t>(b)];
      if (x.lbd != y.lbd) return x.lbd > y.lbd;
      return x.activity < y.activity;
    });
    std::size_t half = learnts_.size() / 2;
    std::vector<CRef> kept;
    kept.reserve(learnts_.size());
    for (std::size_t i = 0; i < learnts_.size(); ++i) {
      CRef cr = learnts_[i];
      Clause& c = clauses_[static_cast<std::size_t>(cr)];
      if (i < half && c.lbd > 2 && c.lits.size() > 2 && !locked(cr)) {
        c.deleted = true;
        c.lits.clear();
        deleted_pending_.push_back(cr);
      } else {
        kept.push_back(cr);
      }
    }
    learnts_ = std::move(kept);
    // Purge watchers of deleted clauses, then recycle their slots.
    for (auto& ws : watches_)
      ws.erase(std::remove_if(ws.begin(), ws.end(),
                              [this](const Watcher& w) {
                                return clauses_[static_cast<std::size_t>(w.cref)].deleted;
                              }),
               ws.end());
    for (CRef cr : deleted_pending_) free_crefs_.push_back(cr);
    deleted_pending_.clear();
  }

  static double luby(double y, int x) {
    int size = 1, seq = 0;
    while (size < x + 1) {
      ++seq;
      size = 2 * size + 1;
    }
    while (size - 1 != x) {
      size = (size - 1) >> 1;
      --seq;
      x = x % size;
    }
    return std::pow(y, seq);
  }

  bool interrupted() {
    if (stop_ && stop_->load(std::memory_order_relaxed)) return true;
    return deadline_ && std::chrono::steady_clock::now() > *deadline_;
  }

  Status search(std::uint64_t conflict_budget) {
    std::uint64_t local_conflicts = 0;
    std::vector<Lit> learnt;
    for (;;) {
      CRef confl = propagate();
      if (confl != kNoReason) {
        ++conflicts_;
        ++local_conflicts;
        if (decision_level() == 0) {
          ok_ = false;
          return Status::Unsat;
        }
        int bt = 0;
        analyze(confl, learnt, bt);
        const int lbd = compute_lbd(learnt);
        cancel_until(bt);
        if (learnt.size() == 1) {
          enqueue(learnt[0], kNoReason);
        } else {
          CRef cr = make_clause(learnt, true, lbd);
          attach(cr);
          bump_clause(clauses_[static_cast<std::size_t>(cr)]);
          enqueue(learnt[0], cr);
        }
        var_inc_ /= 0.95;
        cla_inc_ /= 0.999;
        if ((conflicts_ & 1023u) == 0 && interrupted()) {
          cancel_until(0);
          return Status::Unknown;
        }
        continue;
      }
      if (local_conflicts >= conflict_budget) {
        cancel_until(0);
        return Status::Unknown;
      }
      if (learnts_.size() >= max_learnts_ + trail_.size()) {
        reduce_db();
        max_learnts_ = max_learnts_ + max_learnts_ / 10;
      }
      Lit next = kNoLit;
      while (decision_level() < static_cast<int>(assumptions_.size())) {
        Lit a = assumptions_[static_cast<std::size_t>(decision_level())];
        if (value(a) == kTrue) {
          trail_lim_.push_back(static_cast<int>(trail_.size()));  // dummy level
        } else if (value(a) == kFalse) {
          cancel_until(0);
          return Status::Unsat;  // under these assumptions
        } else {
          next = a;
          break;
        }
      }
      if (next == kNoLit) {
        ++decisions_;
        next = pick_branch();
        if (next == kNoLit) return Status::Sat;
      }
      trail_lim_.push_back(static_cast<int>(trail_.size()));
      enqueue(next, kNoReason);
    }
  }

  bool ok_ = true;
  std::vector<Clause> clauses_;
  std::vector<CRef> learnts_;
  std::vector<CRef> free_crefs_;
  std::vector<CRef> deleted_pending_;
  std::vector<std::vector<Watcher>> watches_;
  std::vector<std::int8_t> assigns_;
  std::vector<int> level_;
  std::vector<CRef> reason_;
  std::vector<double> activity_;
  std::vector<std::int8_t> polarity_;
  std::vector<char> seen_;
  std::vector<int> heap_;
  std::vector<int> heap_index_;
  std::vector<Lit> trail_;
  std::vector<int> trail_lim_;
  std::size_t qhead_ = 0;
  std::vector<Lit> assumptions_;
  std::vector<Lit> tmp_;
  std::vector<Lit> analyze_stack_;
  std::vector<Lit> analyze_toclear_;
  std::vector<std::uint64_t> lbd_seen_;
  std::uint64_t lbd_stamp_ = 0;
  std::vector<bool> model_;
  double var_inc_ = 1.0;
  double cla_inc_ = 1.0;
  std::size_t max_learnts_ = 0;
  std::uint64_t conflicts_ = 0;
  std::uint64_t decisions_ = 0;
  std::optional<std::chrono::steady_clock::time_point> deadline_;
  const std::atomic<bool>* stop_ = nullptr;
};

}  // namespace puzznic::sat
