#pragma once

#include <algorithm>
#include <climits>
#include <cstdint>
#include <cstdio>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "puzznic/engine.hpp"
#include "puzznic/error.hpp"
#include "puzznic/grid.hpp"

// Step-bounded CNF encodings of a level.
//
// Fixed mode: exactly `horizon` steps, each either one player move (with
// instantaneous gravity) or one simultaneous match (with gravity), ending
// with no pattern left. Variable-moves mode: `max_moves + floor(blocks / 2)`
// ministeps, each a move, a match, or a frozen dummy step; dummies form a
// tail, and a unary counter over the move steps bounds their number.
//
// Wall cells never change, so they are constants rather than variables.

namespace puzznic {

enum class EncodingMode { Fixed, VarMoves };

constexpr std::string_view to_string(EncodingMode m) {
  return m == EncodingMode::Fixed ? "fixed" : "varmoves";
}

struct VarMeaning {
  enum class Kind : std::uint8_t {
    CellVal,       // (step, row, col, cell code)
    MoveSel,       // (step, row, col, direction -1/+1)
    Matching,      // (step)
    MatchFlag,     // (step, row, col)
    MapsTo,        // (step, row, col, destination row or 0)
    Moving,        // (step)
    Dummy,         // (step)
    AtLeastMoves,  // (value = j): at least j move steps in the whole plan
    Aux,           // Tseitin / counter helper; value = origin group
  };
  Kind kind = Kind::Aux;
  int step = 0;
  int row = 0;
  int col = 0;
  int value = 0;
};

/// Origins of auxiliary variables.
enum class AuxOrigin : int { SourceColumn = 1, DestSegment, Carry, ColumnTouched, Counter };

inline std::string describe(const VarMeaning& m) {
  using K = VarMeaning::Kind;
  auto n = [](int x) { return std::to_string(x); };
  switch (m.kind) {
    case K::CellVal:
      return "cell " + n(m.step) + " " + n(m.row) + " " + n(m.col) + " " +
             (m.value == Cell::empty().code() ? std::string("E") : n(m.value - 1));
    case K::MoveSel:
      return "move " + n(m.step) + " " + n(m.row) + " " + n(m.col) + " " + (m.value < 0 ? "L" : "R");
    case K::Matching: return "matching " + n(m.step);
    case K::MatchFlag: return "matchflag " + n(m.step) + " " + n(m.row) + " " + n(m.col);
    case K::MapsTo: return "mapsto " + n(m.step) + " " + n(m.row) + " " + n(m.col) + " " + n(m.value);
    case K::Moving: return "moving " + n(m.step);
    case K::Dummy: return "dummy " + n(m.step);
    case K::AtLeastMoves: return "atleast " + n(m.value);
    case K::Aux: return "aux " + n(m.value);
  }
  return "?";
}

/// Bijection between CNF variables (1-based) and their meanings.
class VarMap {
 public:
  int add(const VarMeaning& m) {
    meanings_.push_back(m);
    int v = static_cast<int>(meanings_.size());
    if (m.kind != VarMeaning::Kind::Aux) index_.emplace(key(m), v);
    return v;
  }

  /// Variable for a non-Aux meaning, or 0 when absent.
  int find(const VarMeaning& m) const {
    auto it = index_.find(key(m));
    return it == index_.end() ? 0 : it->second;
  }
  int find(VarMeaning::Kind kind, int step, int row = 0, int col = 0, int value = 0) const {
    return find(VarMeaning{kind, step, row, col, value});
  }

  const VarMeaning& meaning(int var) const { return meanings_[static_cast<std::size_t>(var - 1)]; }
  int size() const { return static_cast<int>(meanings_.size()); }

  /// Literals AtLeastMoves(1..k) in order (variable-moves mode only).
  std::vector<int> move_count_literals() const {
    std::vector<int> out;
    for (int j = 1;; ++j) {
      int v = find(VarMeaning::Kind::AtLeastMoves, 0, 0, 0, j);
      if (!v) break;
      out.push_back(v);
    }
    return out;
  }

 private:
  static std::uint64_t key(const VarMeaning& m) {
    return (static_cast<std::uint64_t>(m.kind) << 56) |
           (static_cast<std::uint64_t>(m.step & 0xFFFF) << 40) |
           (static_cast<std::uint64_t>(m.row & 0xFF) << 32) |
           (static_cast<std::uint64_t>(m.col & 0xFF) << 24) |
           (static_cast<std::uint64_t>(m.value + 0x800000) & 0xFFFFFF);
  }
  std::vector<VarMeaning> meanings_;
  std::unordered_map<std::uint64_t, int> index_;
};

struct CnfInstance {
  int num_vars = 0;
  std::vector<std::vector<int>> clauses;
  VarMap varmap;
  EncodingMode mode = EncodingMode::Fixed;
  /// Steps (fixed) or ministeps (variable moves).
  int horizon = 0;
  /// Move bound (variable moves only).
  int max_moves = 0;
  Grid level;
  std::string level_digest;
};

struct EncodeOptions {
  /// Largest fixed-mode step count accepted.
  int max_steps = 64;
  /// Largest variable-moves move bound accepted.
  int max_moves = 100;
};

inline std::string level_digest(const Grid& g) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(state_key(g)));
  return buf;
}

namespace detail {

class CnfBuilder {
 public:
  static constexpr int kTrue = INT_MAX;
  static constexpr int kFalse = -INT_MAX;

  CnfBuilder(const Grid& level, EncodingMode mode, int horizon, int max_moves)
      : level_(level), mode_(mode), steps_(horizon), max_moves_(max_moves) {
    values_.push_back(Cell::empty().code());
    PatternCounts pc = pattern_counts(level);
    for (int id = 1; id <= kMaxPatterns; ++id)
      if (pc[id] > 0) values_.push_back(Cell::pattern(id).code());
    for (int r = 2; r < level.height(); ++r)
      for (int c = 2; c < level.width(); ++c)
        if (open(r, c)) cells_.push_back({r, c});
  }

  CnfInstance build() {
    declare_named();
    one_hot_cells();
    initial_and_goal();
    no_floating();
    for (int t = 1; t <= steps_; ++t) {
      match_flags(t - 1);
      mode_selection(t);
      maps_to(t);
      moves(t);
      column_frames(t);
      if (mode_ == EncodingMode::VarMoves) dummy_rules(t);
    }
    if (mode_ == EncodingMode::VarMoves) move_counter();
    if (is_dead_end(level_)) clauses_.emplace_back();  // a lone block can never be matched

    CnfInstance out;
    out.num_vars = vars_.size();
    out.clauses = std::move(clauses_);
    out.varmap = std::move(vars_);
    out.mode = mode_;
    out.horizon = steps_;
    out.max_moves = mode_ == EncodingMode::VarMoves ? max_moves_ : 0;
    out.level = level_;
    out.level_digest = level_digest(level_);
    return out;
  }

 private:
  using K = VarMeaning::Kind;

  bool open(int r, int c) const { return level_.is_interior(r, c) && !level_.at(r, c).is_wall(); }

  int seg_top(int r, int c) const {
    while (open(r - 1, c)) --r;
    return r;
  }
  int seg_bottom(int r, int c) const {
    while (open(r + 1, c)) ++r;
    return r;
  }

  // ---- literals ------------------------------------------------------------

  /// Literal for "cell (r, c) at step s holds `code`"; constants for walls.
  int cell(int s, int r, int c, std::uint8_t code) const {
    if (!open(r, c)) return code == Cell::wall().code() ? kTrue : kFalse;
    int v = vars_.find(K::CellVal, s, r, c, code);
    return v ? v : kFalse;
  }
  int empty(int s, int r, int c) const { return cell(s, r, c, Cell::empty().code()); }
  int sel(int t, int r, int c, int d) const { return vars_.find(K::MoveSel, t, r, c, d); }
  int matching(int t) const { return vars_.find(K::Matching, t); }
  int flag(int s, int r, int c) const { return vars_.find(K::MatchFlag, s, r, c); }
  int maps(int s, int r, int c, int dest) const { return vars_.find(K::MapsTo, s, r, c, dest); }
  int dummy(int t) const { return vars_.find(K::Dummy, t); }
  int moving(int t) const { return vars_.find(K::Moving, t); }

  static int neg(int lit) { return -lit; }

  /// Emits a clause, dropping false constants; skipped if any literal is true.
  void add(std::initializer_list<int> lits) { add(std::vector<int>(lits)); }
  void add(std::vector<int> lits) {
    std::vector<int> out;
    out.reserve(lits.size());
    for (int l : lits) {
      if (l == kTrue) return;
      if (l == kFalse) continue;
      out.push_back(l);
    }
    clauses_.push_back(std::move(out));
  }

  void exactly_one(const std::vector<int>& lits) {
    add(lits);
    for (std::size_t i = 0; i < lits.size(); ++i)
      for (std::size_t j = i + 1; j < lits.size(); ++j) add({-lits[i], -lits[j]});
  }

  int aux(AuxOrigin origin) { return vars_.add({K::Aux, 0, 0, 0, static_cast<int>(origin)}); }

  // ---- variables -----------------------------------------------------------

  std::vector<Move> candidate_moves() const {
    std::vector<Move> out;
    for (Position p : cells_)
      for (Direction d : {Direction::Left, Direction::Right})
        if (open(p.row, p.col + delta(d))) out.push_back({p.row, p.col, d});
    return out;
  }

  void declare_named() {
    for (int s = 0; s <= steps_; ++s)
      for (Position p : cells_)
        for (std::uint8_t v : values_) vars_.add({K::CellVal, s, p.row, p.col, v});
    moves_ = candidate_moves();
    for (int t = 1; t <= steps_; ++t)
      for (const Move& m : moves_) vars_.add({K::MoveSel, t, m.row, m.col, delta(m.dir)});
    for (int t = 1; t <= steps_; ++t) vars_.add({K::Matching, t});
    for (int s = 0; s < steps_; ++s)
      for (Position p : cells_) vars_.add({K::MatchFlag, s, p.row, p.col});
    for (int s = 0; s < steps_; ++s)
      for (Position p : cells_) {
        vars_.add({K::MapsTo, s, p.row, p.col, 0});
        for (int dest = p.row; dest <= seg_bottom(p.row, p.col); ++dest)
          vars_.add({K::MapsTo, s, p.row, p.col, dest});
      }
    if (mode_ == EncodingMode::VarMoves) {
      for (int t = 1; t <= steps_; ++t) vars_.add({K::Moving, t});
      for (int t = 1; t <= steps_; ++t) vars_.add({K::Dummy, t});
      for (int j = 1; j <= max_moves_ + 1; ++j) vars_.add({K::AtLeastMoves, 0, 0, 0, j});
    }
  }

  // ---- state constraints -----------------------------------------------------

  void one_hot_cells() {
    for (int s = 0; s <= steps_; ++s)
      for (Position p : cells_) {
        std::vector<int> lits;
        for (std::uint8_t v : values_) lits.push_back(cell(s, p.row, p.col, v));
        exactly_one(lits);
      }
  }

  void initial_and_goal() {
    for (Position p : cells_) add({cell(0, p.row, p.col, level_.at(p).code())});
    for (Position p : cells_) add({empty(steps_, p.row, p.col)});
  }

  void no_floating() {
    for (int s = 0; s <= steps_; ++s)
      for (Position p : cells_)
        if (open(p.row + 1, p.col)) add({empty(s, p.row, p.col), -empty(s, p.row + 1, p.col)});
  }

  /// MatchFlag(s, cell) <-> cell holds a pattern shared by an orthogonal neighbour.
  void match_flags(int s) {
    for (Position p : cells_) {
      const int f = flag(s, p.row, p.col);
      std::vector<Position> nbrs;
      for (auto [dr, dc] : {std::pair{-1, 0}, {1, 0}, {0, 1}, {0, -1}})
        if (open(p.row + dr, p.col + dc)) nbrs.push_back({p.row + dr, p.col + dc});
      add({-f, -empty(s, p.row, p.col)});
      for (std::size_t i = 1; i < values_.size(); ++i) {
        const std::uint8_t v = values_[i];
        std::vector<int> back{-f, -cell(s, p.row, p.col, v)};
        for (Position n : nbrs) {
          add({-cell(s, p.row, p.col, v), -cell(s, n.row, n.col, v), f});
          back.push_back(cell(s, n.row, n.col, v));
        }
        add(back);
      }
    }
  }

  /// Matching(t) <-> some flag at t-1; then exactly one of the step kinds.
  void mode_selection(int t) {
    std::vector<int> any{-matching(t)};
    for (Position p : cells_) {
      add({-flag(t - 1, p.row, p.col), matching(t)});
      any.push_back(flag(t - 1, p.row, p.col));
    }
    add(any);

    std::vector<int> kinds;
    for (const Move& m : moves_) kinds.push_back(sel(t, m.row, m.col, delta(m.dir)));
    kinds.push_back(matching(t));
    if (mode_ == EncodingMode::VarMoves) kinds.push_back(dummy(t));
    exactly_one(kinds);
  }

  /// Matching steps: each surviving block maps to its row after gravity.
  void maps_to(int t) {
    const int s = t - 1;
    for (Position p : cells_) {
      std::vector<int> dom{maps(s, p.row, p.col, 0)};
      for (int dest = p.row; dest <= seg_bottom(p.row, p.col); ++dest)
        dom.push_back(maps(s, p.row, p.col, dest));
      exactly_one(dom);
      const int unmapped = dom[0];
      add({matching(t), unmapped});                             // player steps map nothing
      add({-empty(s, p.row, p.col), unmapped});                 // empty cells unmapped
      add({-flag(s, p.row, p.col), unmapped});                  // matched blocks unmapped
      add({-matching(t), flag(s, p.row, p.col), empty(s, p.row, p.col), -unmapped});
      // Order preservation against every lower cell of the same segment.
      for (int below = p.row + 1; below <= seg_bottom(p.row, p.col); ++below)
        for (int d1 = p.row; d1 <= seg_bottom(p.row, p.col); ++d1)
          for (int d2 = below; d2 <= d1; ++d2)
            add({-maps(s, p.row, p.col, d1), -maps(s, below, p.col, d2)});
      // Next state: mapped blocks arrive with their pattern.
      for (int dest = p.row; dest <= seg_bottom(p.row, p.col); ++dest)
        for (std::size_t i = 1; i < values_.size(); ++i)
          add({-maps(s, p.row, p.col, dest), -cell(s, p.row, p.col, values_[i]),
               cell(t, dest, p.col, values_[i])});
    }
    // Cells outside the image become empty.
    for (Position p : cells_) {
      std::vector<int> c{-matching(t)};
      for (int src = seg_top(p.row, p.col); src <= p.row; ++src) c.push_back(maps(s, src, p.col, p.row));
      c.push_back(empty(t, p.row, p.col));
      add(c);
    }
  }

  /// Player steps: legality, landing in the destination column, and the
  /// source column's stack dropping by one.
  void moves(int t) {
    const int s = t - 1;
    const int nvals = static_cast<int>(values_.size());
    std::unordered_map<int, int> src_aux;   // key r*64+c
    std::unordered_map<int, int> dest_aux;  // key segment top*64+c
    std::vector<int> carry(values_.size(), 0);
    for (int i = 1; i < nvals; ++i) carry[static_cast<std::size_t>(i)] = aux(AuxOrigin::Carry);

    for (const Move& m : moves_) {
      const int x = sel(t, m.row, m.col, delta(m.dir));
      const int tc = m.target_col();
      add({-x, -empty(s, m.row, m.col)});  // selects a block
      add({-x, empty(s, m.row, tc)});      // into clear space
      for (int i = 1; i < nvals; ++i)
        add({-x, -cell(s, m.row, m.col, values_[static_cast<std::size_t>(i)]),
             carry[static_cast<std::size_t>(i)]});

      const int skey = m.row * 64 + m.col;
      if (!src_aux.count(skey)) src_aux[skey] = aux(AuxOrigin::SourceColumn);
      add({-x, src_aux[skey]});
      const int dkey = seg_top(m.row, tc) * 64 + tc;
      if (!dest_aux.count(dkey)) dest_aux[dkey] = aux(AuxOrigin::DestSegment);
      add({-x, dest_aux[dkey]});
    }

    for (auto [key, a] : src_aux) source_column(t, key / 64, key % 64, a);
    for (auto [key, a] : dest_aux) dest_segment(t, key / 64, key % 64, a, carry);
  }

  void keep(int s, int r, int c, int guard) {
    for (std::uint8_t v : values_) add({-guard, -cell(s, r, c, v), cell(s + 1, r, c, v)});
  }

  /// Block removed from (r, c): the contiguous stack above drops one row,
  /// everything else in the column stays.
  void source_column(int t, int r, int c, int a) {
    const int s = t - 1;
    const int top = seg_top(r, c);
    for (int k = 2; k < level_.height(); ++k) {
      if (!open(k, c)) continue;
      if (k < top || k > r) {
        keep(s, k, c, a);
        continue;
      }
      // Rows top..r: a block (or the source itself) takes what was above it.
      const int held = k == r ? kTrue : -empty(s, k, c);  // "k is part of the stack"
      if (!open(k - 1, c)) {
        add({-a, neg(held), empty(t, k, c)});
      } else {
        for (std::uint8_t v : values_) add({-a, neg(held), -cell(s, k - 1, c, v), cell(t, k, c, v)});
      }
      if (k != r) add({-a, -empty(s, k, c), empty(t, k, c)});
    }
  }

  /// The moved block lands on the first support below in this segment;
  /// every other cell of the column stays.
  void dest_segment(int t, int top, int c, int a, const std::vector<int>& carry) {
    const int s = t - 1;
    const int bottom = seg_bottom(top, c);
    for (int k = 2; k < level_.height(); ++k) {
      if (!open(k, c)) continue;
      if (k < top || k > bottom) {
        keep(s, k, c, a);
        continue;
      }
      for (std::size_t i = 1; i < values_.size(); ++i)
        add({-a, -cell(s, k, c, values_[i]), cell(t, k, c, values_[i])});
      const int below_empty = open(k + 1, c) ? empty(s, k + 1, c) : kFalse;
      // k is not the landing row when the cell below is also empty.
      add({-a, -empty(s, k, c), neg(below_empty), empty(t, k, c)});
      for (std::size_t i = 1; i < values_.size(); ++i)
        add({-a, -empty(s, k, c), below_empty, -carry[i], cell(t, k, c, values_[i])});
    }
  }

  /// Columns no selected move touches are copied during player steps.
  void column_frames(int t) {
    const int s = t - 1;
    for (int c = 2; c < level_.width(); ++c) {
      const int touched = aux(AuxOrigin::ColumnTouched);
      std::vector<int> why{-touched, matching(t)};
      for (const Move& m : moves_)
        if (m.col == c || m.target_col() == c) why.push_back(sel(t, m.row, m.col, delta(m.dir)));
      add(why);
      for (int r = 2; r < level_.height(); ++r)
        if (open(r, c)) {
          for (std::uint8_t v : values_) add({touched, -cell(s, r, c, v), cell(t, r, c, v)});
        }
    }
  }

  void dummy_rules(int t) {
    const int s = t - 1;
    std::vector<int> any{-moving(t)};
    for (const Move& m : moves_) {
      add({-sel(t, m.row, m.col, delta(m.dir)), moving(t)});
      any.push_back(sel(t, m.row, m.col, delta(m.dir)));
    }
    add(any);
    if (t < steps_) add({-dummy(t), dummy(t + 1)});
    for (Position p : cells_) keep(s, p.row, p.col, dummy(t));
  }

  /// Sequential counter: count[t][j] is implied by "at least j moves among
  /// steps 1..t". The last column is exposed as AtLeastMoves(j).
  void move_counter() {
    const int k = max_moves_ + 1;
    std::vector<int> prev(static_cast<std::size_t>(k + 1), kFalse);
    for (int t = 1; t <= steps_; ++t) {
      std::vector<int> cur(static_cast<std::size_t>(k + 1), kFalse);
      for (int j = 1; j <= std::min(t, k); ++j)
        cur[static_cast<std::size_t>(j)] =
            t == steps_ ? vars_.find(K::AtLeastMoves, 0, 0, 0, j) : aux(AuxOrigin::Counter);
      for (int j = 1; j <= std::min(t, k); ++j) {
        const int here = cur[static_cast<std::size_t>(j)];
        add({neg(prev[static_cast<std::size_t>(j)]), here});
        add({-moving(t), j == 1 ? kFalse : neg(prev[static_cast<std::size_t>(j - 1)]), here});
      }
      prev = std::move(cur);
    }
    if (k <= steps_) add({-vars_.find(K::AtLeastMoves, 0, 0, 0, k)});
  }

  const Grid& level_;
  EncodingMode mode_;
  int steps_;
  int max_moves_;
  std::vector<std::uint8_t> values_;
  std::vector<Position> cells_;
  std::vector<Move> moves_;
  VarMap vars_;
  std::vector<std::vector<int>> clauses_;
};

inline void check_level(const Grid& level) {
  if (!level.has_wall_perimeter()) throw Error(ErrorKind::LevelInvalid, "grid lacks a wall perimeter");
  if (auto p = first_non_quiescent(level))
    throw Error(ErrorKind::LevelInvalid, "grid is not quiescent at row " + std::to_string(p->row) +
                                             ", col " + std::to_string(p->col));
}

}  // namespace detail

/// CNF satisfiable iff exactly `steps` steps (moves plus match steps) clear the level.
inline CnfInstance encode_fixed(const Grid& level, int steps, const EncodeOptions& opts = {}) {
  detail::check_level(level);
  if (steps < 1 || steps > opts.max_steps)
    throw Error(ErrorKind::HorizonTooLarge,
                "step count " + std::to_string(steps) + " outside 1.." + std::to_string(opts.max_steps));
  return detail::CnfBuilder(level, EncodingMode::Fixed, steps, 0).build();
}

/// Upper bound on match steps: each removes at least two blocks.
inline int max_matches(const Grid& level) { return pattern_counts(level).total() / 2; }

/// CNF satisfiable iff some plan with at most `max_moves` moves clears the level.
inline CnfInstance encode_varmoves(const Grid& level, int max_moves, const EncodeOptions& opts = {}) {
  detail::check_level(level);
  if (max_moves < 0 || max_moves > opts.max_moves)
    throw Error(ErrorKind::HorizonTooLarge,
                "move bound " + std::to_string(max_moves) + " outside 0.." + std::to_string(opts.max_moves));
  const int horizon = max_moves + max_matches(level);
  if (horizon < 1) {
    // Nothing to place a step in: only the goal grid itself qualifies.
    CnfInstance out = detail::CnfBuilder(level, EncodingMode::VarMoves, 1, 0).build();
    out.max_moves = 0;
    return out;
  }
  return detail::CnfBuilder(level, EncodingMode::VarMoves, horizon, max_moves).build();
}

enum class StepKind { MoveStep, MatchStep, DummyStep };

constexpr char step_tag(StepKind k) {
  return k == StepKind::MoveStep ? 'M' : k == StepKind::MatchStep ? '*' : '-';
}

struct DecodedPlan {
  Plan plan;
  std::vector<StepKind> step_kinds;
  /// Non-dummy steps.
  int total_steps = 0;
  /// Engine replay of `plan`.
  Trace trace;
};

namespace detail {

inline Grid model_grid(const CnfInstance& cnf, const std::vector<bool>& model, int s) {
  Grid g = cnf.level;
  auto truth = [&](int var) { return var > 0 && static_cast<std::size_t>(var) <= model.size() && model[static_cast<std::size_t>(var - 1)]; };
  for (int r = 2; r < g.height(); ++r)
    for (int c = 2; c < g.width(); ++c) {
      if (cnf.level.at(r, c).is_wall()) continue;
      int hits = 0;
      for (std::uint8_t code = Cell::empty().code(); code <= Cell::pattern(kMaxPatterns).code(); ++code) {
        int v = cnf.varmap.find(VarMeaning::Kind::CellVal, s, r, c, code);
        if (truth(v)) {
          g.set(r, c, Cell::from_code(code));
          ++hits;
        }
      }
      if (hits != 1)
        throw Error(ErrorKind::ModelInconsistent, "step " + std::to_string(s) + " cell (" + std::to_string(r) + "," +
                                                      std::to_string(c) + ") has " + std::to_string(hits) + " values");
    }
  return g;
}

}  // namespace detail

/// Reads the step sequence out of a model and checks it, step by step,
/// against the engine. `model[v - 1]` is the value of variable v.
inline DecodedPlan decode_model(const CnfInstance& cnf, const std::vector<bool>& model) {
  using K = VarMeaning::Kind;
  auto truth = [&](int var) { return var > 0 && static_cast<std::size_t>(var) <= model.size() && model[static_cast<std::size_t>(var - 1)]; };
  auto fail = [](int t, const std::string& why) {
    return Error(ErrorKind::ModelInconsistent, "step " + std::to_string(t) + ": " + why);
  };

  DecodedPlan out;
  Grid engine = cnf.level;
  if (detail::model_grid(cnf, model, 0) != engine) throw fail(0, "initial grid differs from the level");
  for (int t = 1; t <= cnf.horizon; ++t) {
    std::vector<Move> chosen;
    for (int v = 1; v <= cnf.varmap.size(); ++v) {
      const VarMeaning& m = cnf.varmap.meaning(v);
      if (m.kind == K::MoveSel && m.step == t && truth(v))
        chosen.push_back({m.row, m.col, m.value < 0 ? Direction::Left : Direction::Right});
    }
    const bool match = truth(cnf.varmap.find(K::Matching, t));
    const bool dummy = truth(cnf.varmap.find(K::Dummy, t));
    if (chosen.size() + match + dummy != 1) throw fail(t, "not exactly one step kind selected");
    const bool pending = !find_matches(engine).empty();
    if (match) {
      if (!pending) throw fail(t, "match step without a match");
      engine = match_step(engine);
      out.step_kinds.push_back(StepKind::MatchStep);
    } else if (pending) {
      throw fail(t, "pending match skipped");
    } else if (dummy) {
      out.step_kinds.push_back(StepKind::DummyStep);
    } else {
      if (!is_legal(engine, chosen.front())) throw fail(t, "illegal move " + to_string(chosen.front()));
      engine = move_step(engine, chosen.front());
      out.plan.moves.push_back(chosen.front());
      out.step_kinds.push_back(StepKind::MoveStep);
    }
    if (detail::model_grid(cnf, model, t) != engine) throw fail(t, "grid differs from the engine");
  }
  if (!is_goal(engine)) throw fail(cnf.horizon, "final grid still holds patterns");

  Replay r = replay(QuiescentState::from(cnf.level), out.plan.moves);
  const int match_steps = static_cast<int>(std::count(out.step_kinds.begin(), out.step_kinds.end(), StepKind::MatchStep));
  if (!r.solved() || r.match_events != match_steps)
    throw fail(cnf.horizon, "plan replay disagrees with the step sequence");
  out.total_steps = static_cast<int>(out.plan.moves.size()) + match_steps;
  out.trace = std::move(r.trace);
  return out;
}

}  // namespace puzznic
