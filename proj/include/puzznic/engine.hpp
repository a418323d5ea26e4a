#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "puzznic/error.hpp"
#include "puzznic/grid.hpp"

// Transition semantics of static-grid Puzznic: single-cell moves, per-column
// gravity, simultaneous matching, and the settle/match cascade.

namespace puzznic {

/// Result of one gravity pass.
struct Settled {
  Grid grid;
  bool fell = false;
};

/// Instantaneous gravity: every Pattern block drops within its wall-delimited
/// column segment until supported. Relative order within a column is kept.
inline Settled settle(const Grid& grid) {
  Grid out = grid;
  bool fell = false;
  for (int c = 1; c <= grid.width(); ++c) {
    int bottom = grid.height();
    while (bottom >= 1) {
      if (grid.at(bottom, c).is_wall()) {
        --bottom;
        continue;
      }
      // Segment [top, bottom] of non-wall cells.
      int top = bottom;
      while (top - 1 >= 1 && !grid.at(top - 1, c).is_wall()) --top;
      int write = bottom;
      for (int r = bottom; r >= top; --r) {
        Cell cell = grid.at(r, c);
        if (cell.is_pattern()) {
          if (write != r) fell = true;
          out.set(write--, c, cell);
        }
      }
      for (int r = write; r >= top; --r) out.set(r, c, Cell::empty());
      bottom = top - 1;
    }
  }
  return {std::move(out), fell};
}

inline bool is_settled(const Grid& grid) {
  for (int r = 1; r < grid.height(); ++r)
    for (int c = 1; c <= grid.width(); ++c)
      if (grid.at(r, c).is_pattern() && grid.at(r + 1, c).is_empty()) return false;
  return true;
}

/// Positions holding a Pattern with an orthogonal neighbour of the same
/// pattern, in row-major order.
inline std::vector<Position> find_matches(const Grid& grid) {
  std::vector<Position> out;
  for (int r = 1; r <= grid.height(); ++r) {
    for (int c = 1; c <= grid.width(); ++c) {
      Cell cell = grid.at(r, c);
      if (!cell.is_pattern()) continue;
      auto same = [&](int rr, int cc) { return grid.in_bounds(rr, cc) && grid.at(rr, cc) == cell; };
      if (same(r - 1, c) || same(r + 1, c) || same(r, c - 1) || same(r, c + 1)) out.push_back({r, c});
    }
  }
  return out;
}

/// Simultaneous removal of `positions`; each must hold a Pattern.
inline Grid remove_matches(const Grid& grid, const std::vector<Position>& positions) {
  Grid out = grid;
  for (const Position& p : positions) {
    if (!grid.in_bounds(p.row, p.col) || !grid.at(p).is_pattern())
      throw Error(ErrorKind::PositionNotPatterned,
                  "(" + std::to_string(p.row) + "," + std::to_string(p.col) + ") holds no pattern");
    out.set(p, Cell::empty());
  }
  return out;
}

inline bool is_goal(const Grid& grid) {
  return std::none_of(grid.cells().begin(), grid.cells().end(),
                      [](Cell c) { return c.is_pattern(); });
}

/// Census of Pattern cells; index 0 is unused.
struct PatternCounts {
  std::array<int, kMaxPatterns + 1> count{};

  int operator[](int id) const { return count[static_cast<std::size_t>(id)]; }
  int total() const {
    int t = 0;
    for (int id = 1; id <= kMaxPatterns; ++id) t += count[static_cast<std::size_t>(id)];
    return t;
  }
  int distinct() const {
    int d = 0;
    for (int id = 1; id <= kMaxPatterns; ++id) d += count[static_cast<std::size_t>(id)] > 0;
    return d;
  }
  friend bool operator==(const PatternCounts&, const PatternCounts&) = default;
};

inline PatternCounts pattern_counts(const Grid& grid) {
  PatternCounts pc;
  for (Cell c : grid.cells())
    if (c.is_pattern()) ++pc.count[static_cast<std::size_t>(c.pattern_id())];
  return pc;
}

/// A pattern with exactly one block left can never be matched.
inline bool is_dead_end(const Grid& grid) {
  PatternCounts pc = pattern_counts(grid);
  for (int id = 1; id <= kMaxPatterns; ++id)
    if (pc[id] == 1) return true;
  return false;
}

/// 64-bit digest of the full grid, stable across runs and platforms.
inline std::uint64_t state_key(const Grid& grid) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t byte) {
    h ^= byte;
    h *= 0x100000001b3ULL;
  };
  mix(static_cast<std::uint64_t>(grid.height()));
  mix(static_cast<std::uint64_t>(grid.width()));
  for (Cell c : grid.cells()) mix(c.code());
  // splitmix64 finalizer spreads the FNV state over all bits.
  h ^= h >> 30;
  h *= 0xbf58476d1ce4e5b9ULL;
  h ^= h >> 27;
  h *= 0x94d049bb133111ebULL;
  h ^= h >> 31;
  return h;
}

struct GridHash {
  std::size_t operator()(const Grid& g) const { return static_cast<std::size_t>(state_key(g)); }
};

/// First position violating quiescence (a floating block, else a block with
/// a pending match), if any.
inline std::optional<Position> first_non_quiescent(const Grid& grid) {
  for (int r = 1; r < grid.height(); ++r)
    for (int c = 1; c <= grid.width(); ++c)
      if (grid.at(r, c).is_pattern() && grid.at(r + 1, c).is_empty()) return Position{r, c};
  auto m = find_matches(grid);
  if (!m.empty()) return m.front();
  return std::nullopt;
}

/// A settled grid with no pending matches: the only states where the player acts.
class QuiescentState {
 public:
  /// Throws NotQuiescent (or NoPerimeter) if `grid` does not qualify.
  static QuiescentState from(Grid grid) {
    if (!grid.has_wall_perimeter())
      throw Error(ErrorKind::NoPerimeter, "grid lacks a wall perimeter");
    if (auto p = first_non_quiescent(grid))
      throw Error(ErrorKind::NotQuiescent,
                  "row " + std::to_string(p->row) + ", col " + std::to_string(p->col));
    return QuiescentState(std::move(grid));
  }

  const Grid& grid() const { return grid_; }
  friend bool operator==(const QuiescentState&, const QuiescentState&) = default;

 private:
  explicit QuiescentState(Grid g) : grid_(std::move(g)) {}
  Grid grid_;

  friend struct ResolveResult resolve(const Grid& grid);
};

enum class EventKind { Move, Fall, Match };

struct Event {
  EventKind kind = EventKind::Fall;
  Move move{};                     // Move events only
  std::vector<Position> removed;   // Match events only
  Grid after;
};

struct Trace {
  Grid initial;
  std::vector<Event> events;

  int count(EventKind kind) const {
    return static_cast<int>(std::count_if(events.begin(), events.end(),
                                          [kind](const Event& e) { return e.kind == kind; }));
  }
};

struct ResolveResult {
  QuiescentState state;
  std::vector<Event> events;
  int match_events = 0;
};

/// Settle to fixpoint, remove every match at once, repeat until quiescent.
/// Terminates: each match strictly decreases the number of Pattern cells.
inline ResolveResult resolve(const Grid& grid) {
  std::vector<Event> events;
  int matches = 0;
  Grid g = grid;
  for (;;) {
    Settled s = settle(g);
    if (s.fell) {
      g = std::move(s.grid);
      events.push_back({EventKind::Fall, {}, {}, g});
    }
    std::vector<Position> m = find_matches(g);
    if (m.empty()) break;
    g = remove_matches(g, m);
    events.push_back({EventKind::Match, {}, std::move(m), g});
    ++matches;
  }
  return {QuiescentState(std::move(g)), std::move(events), matches};
}

/// Moves (r, c, d) where (r, c) holds a Pattern and (r, c+d) is Empty;
/// row-major by source, Left before Right.
inline std::vector<Move> legal_moves(const QuiescentState& state) {
  const Grid& g = state.grid();
  std::vector<Move> out;
  for (int r = 2; r < g.height(); ++r) {
    for (int c = 2; c < g.width(); ++c) {
      if (!g.at(r, c).is_pattern()) continue;
      if (g.at(r, c - 1).is_empty()) out.push_back({r, c, Direction::Left});
      if (g.at(r, c + 1).is_empty()) out.push_back({r, c, Direction::Right});
    }
  }
  return out;
}

inline bool is_legal(const Grid& g, const Move& m) {
  if (!g.is_interior(m.row, m.col) || !g.is_interior(m.row, m.target_col())) return false;
  return g.at(m.row, m.col).is_pattern() && g.at(m.row, m.target_col()).is_empty();
}

/// Relocates the selected block one column, no gravity.
inline Grid relocate(const Grid& g, const Move& m) {
  if (!is_legal(g, m)) throw Error(ErrorKind::IllegalMove, "move " + to_string(m));
  Grid out = g;
  out.set(m.row, m.target_col(), g.at(m.row, m.col));
  out.set(m.row, m.col, Cell::empty());
  return out;
}

struct MoveResult {
  QuiescentState state;
  Trace trace;
  int match_events = 0;
};

inline MoveResult apply_move(const QuiescentState& state, const Move& move) {
  Grid moved = relocate(state.grid(), move);
  Trace trace{state.grid(), {}};
  trace.events.push_back({EventKind::Move, move, {}, moved});
  ResolveResult r = resolve(moved);
  for (Event& e : r.events) trace.events.push_back(std::move(e));
  return {std::move(r.state), std::move(trace), r.match_events};
}

// One "step" of the fixed-step view: a move with instantaneous gravity, or a
// single simultaneous match followed by gravity.

inline Grid move_step(const Grid& g, const Move& m) { return settle(relocate(g, m)).grid; }

inline Grid match_step(const Grid& g) { return settle(remove_matches(g, find_matches(g))).grid; }

/// A solution: player moves in order. Falls and matches are implied.
struct Plan {
  std::vector<Move> moves;
  friend bool operator==(const Plan&, const Plan&) = default;
};

struct Replay {
  QuiescentState final_state;
  Trace trace;
  int match_events = 0;
  /// Index of the first illegal move, if the replay stopped early.
  std::optional<std::size_t> illegal_at;
  bool solved() const { return !illegal_at && is_goal(final_state.grid()); }
};

/// Plays `moves` from `start`, stopping at the first illegal one.
inline Replay replay(const QuiescentState& start, const std::vector<Move>& moves) {
  Replay out{start, Trace{start.grid(), {}}, 0, std::nullopt};
  for (std::size_t i = 0; i < moves.size(); ++i) {
    if (!is_legal(out.final_state.grid(), moves[i])) {
      out.illegal_at = i;
      break;
    }
    MoveResult r = apply_move(out.final_state, moves[i]);
    out.match_events += r.match_events;
    for (Event& e : r.trace.events) out.trace.events.push_back(std::move(e));
    out.final_state = std::move(r.state);
  }
  return out;
}

}  // namespace puzznic
