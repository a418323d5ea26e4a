#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <climits>
#include <cstdint>
#include <deque>
#include <optional>
#include <queue>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "puzznic/engine.hpp"
#include "puzznic/error.hpp"

// Optimal forward search over quiescent states. Cost is the number of player
// moves; falls and matches are free.

namespace puzznic {

inline constexpr int kNoSolution = INT_MAX;
inline constexpr int kDefaultMaxMoves = 100;

/// Lower bound on remaining moves: for every pattern with at least two
/// blocks, its closest pair must be brought within one column of each other,
/// and each move shifts one block of one pattern by one column. Returns
/// kNoSolution when some pattern has a single block left.
inline int heuristic_column_gap(const Grid& grid) {
  std::array<std::vector<int>, kMaxPatterns + 1> cols;
  for (int r = 1; r <= grid.height(); ++r)
    for (int c = 1; c <= grid.width(); ++c)
      if (Cell cell = grid.at(r, c); cell.is_pattern())
        cols[static_cast<std::size_t>(cell.pattern_id())].push_back(c);
  int h = 0;
  for (int id = 1; id <= kMaxPatterns; ++id) {
    auto& v = cols[static_cast<std::size_t>(id)];
    if (v.empty()) continue;
    if (v.size() == 1) return kNoSolution;
    std::sort(v.begin(), v.end());
    int gap = INT_MAX;
    for (std::size_t i = 1; i < v.size(); ++i) gap = std::min(gap, v[i] - v[i - 1]);
    h += std::max(0, gap - 1);
  }
  return h;
}

enum class Algorithm { Bfs, AStar, Iddfs };

constexpr std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Bfs: return "bfs";
    case Algorithm::AStar: return "astar";
    case Algorithm::Iddfs: return "iddfs";
  }
  return "?";
}

inline std::optional<Algorithm> parse_algorithm(std::string_view s) {
  if (s == "bfs") return Algorithm::Bfs;
  if (s == "astar") return Algorithm::AStar;
  if (s == "iddfs") return Algorithm::Iddfs;
  return std::nullopt;
}

struct SearchLimits {
  int max_moves = kDefaultMaxMoves;
  /// Wall-clock budget; unlimited when empty.
  std::optional<std::chrono::steady_clock::duration> time_limit;
  /// Cap on stored states (BFS/A*); exceeding it reports memory exhaustion.
  std::size_t max_states = 20'000'000;
  /// Cooperative cancellation.
  const std::atomic<bool>* stop = nullptr;
  /// IDDFS: per-pass transposition table instead of path-only duplicate checks.
  bool iddfs_table = false;
};

struct SearchStats {
  std::uint64_t expanded = 0;
  std::uint64_t generated = 0;
  std::uint64_t duplicates = 0;
  std::uint64_t dead_ends = 0;
  std::uint64_t max_frontier = 0;
  double elapsed = 0.0;  // seconds
};

enum class Outcome { Solved, ProvedUnsolvable, BudgetExhausted };
enum class Exhaustion { None, Time, Memory };

struct SearchResult {
  Outcome outcome = Outcome::BudgetExhausted;
  Algorithm algorithm = Algorithm::Bfs;
  Plan plan;
  Trace trace;
  /// Move bound the result is relative to.
  int bound = 0;
  bool dead_end_at_root = false;
  Exhaustion exhausted = Exhaustion::None;
  SearchStats stats;

  int cost() const { return static_cast<int>(plan.moves.size()); }
};

namespace detail {

class Budget {
 public:
  explicit Budget(const SearchLimits& limits)
      : limits_(limits), start_(std::chrono::steady_clock::now()) {}

  /// True once time or cancellation runs out. Polled cheaply.
  bool out_of_time() {
    if (++tick_ & 255u) return timed_out_;
    if (limits_.stop && limits_.stop->load(std::memory_order_relaxed)) timed_out_ = true;
    if (limits_.time_limit && std::chrono::steady_clock::now() - start_ > *limits_.time_limit)
      timed_out_ = true;
    return timed_out_;
  }
  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  const SearchLimits& limits_;
  std::chrono::steady_clock::time_point start_;
  std::uint32_t tick_ = 0;
  bool timed_out_ = false;
};

struct Node {
  Grid grid;
  int parent = -1;
  Move move{};
  int g = 0;
};

/// Closed set of node indices keyed by full grid equality.
class NodeTable {
 public:
  NodeTable() : index_(64, Hash{&nodes_}, Eq{&nodes_}) {}

  /// Adds the node unless its grid is already present; returns the index of
  /// the stored node and whether it was inserted.
  std::pair<int, bool> insert(Node node) {
    nodes_.push_back(std::move(node));
    int id = static_cast<int>(nodes_.size()) - 1;
    auto [it, inserted] = index_.insert(id);
    if (!inserted) {
      nodes_.pop_back();
      return {*it, false};
    }
    return {id, true};
  }
  Node& operator[](int id) { return nodes_[static_cast<std::size_t>(id)]; }
  std::size_t size() const { return nodes_.size(); }

  Plan plan_to(int id) const {
    Plan plan;
    for (int n = id; nodes_[static_cast<std::size_t>(n)].parent >= 0;
         n = nodes_[static_cast<std::size_t>(n)].parent)
      plan.moves.push_back(nodes_[static_cast<std::size_t>(n)].move);
    std::reverse(plan.moves.begin(), plan.moves.end());
    return plan;
  }

 private:
  struct Hash {
    const std::vector<Node>* nodes;
    std::size_t operator()(int id) const {
      return GridHash{}((*nodes)[static_cast<std::size_t>(id)].grid);
    }
  };
  struct Eq {
    const std::vector<Node>* nodes;
    bool operator()(int a, int b) const {
      return (*nodes)[static_cast<std::size_t>(a)].grid == (*nodes)[static_cast<std::size_t>(b)].grid;
    }
  };
  std::vector<Node> nodes_;
  std::unordered_set<int, Hash, Eq> index_;
};

inline void finish_solved(SearchResult& r, const QuiescentState& root, Plan plan) {
  Replay rp = replay(root, plan.moves);
  r.outcome = Outcome::Solved;
  r.plan = std::move(plan);
  r.trace = std::move(rp.trace);
}

inline SearchResult solve_bfs(const QuiescentState& root, const SearchLimits& limits, Budget& budget) {
  SearchResult r;
  NodeTable table;
  table.insert({root.grid(), -1, {}, 0});
  std::deque<int> open{0};
  while (!open.empty()) {
    if (budget.out_of_time()) {
      r.exhausted = Exhaustion::Time;
      return r;
    }
    int id = open.front();
    open.pop_front();
    if (is_goal(table[id].grid)) {
      finish_solved(r, root, table.plan_to(id));
      return r;
    }
    if (table[id].g >= limits.max_moves) continue;
    ++r.stats.expanded;
    QuiescentState state = QuiescentState::from(table[id].grid);
    const int g = table[id].g + 1;
    for (const Move& m : legal_moves(state)) {
      ++r.stats.generated;
      MoveResult child = apply_move(state, m);
      if (is_dead_end(child.state.grid())) {
        ++r.stats.dead_ends;
        continue;
      }
      auto [cid, inserted] = table.insert({child.state.grid(), id, m, g});
      if (!inserted) {
        ++r.stats.duplicates;
        continue;
      }
      open.push_back(cid);
    }
    r.stats.max_frontier = std::max<std::uint64_t>(r.stats.max_frontier, open.size());
    if (table.size() > limits.max_states) {
      r.exhausted = Exhaustion::Memory;
      return r;
    }
  }
  r.outcome = Outcome::ProvedUnsolvable;
  return r;
}

inline SearchResult solve_astar(const QuiescentState& root, const SearchLimits& limits, Budget& budget) {
  SearchResult r;
  struct Entry {
    int f;
    int g;
    std::uint64_t seq;
    int id;
    // priority_queue pops the largest: smallest f, then largest g, then oldest.
    bool operator<(const Entry& o) const {
      if (f != o.f) return f > o.f;
      if (g != o.g) return g < o.g;
      return seq > o.seq;
    }
  };
  NodeTable table;
  std::vector<char> closed;
  std::priority_queue<Entry> open;
  std::uint64_t seq = 0;
  int incumbent = -1;  // cheapest goal node generated so far

  const int h0 = heuristic_column_gap(root.grid());
  if (h0 > limits.max_moves) {
    r.outcome = Outcome::ProvedUnsolvable;
    return r;
  }
  table.insert({root.grid(), -1, {}, 0});
  closed.push_back(0);
  open.push({h0, 0, seq++, 0});
  while (!open.empty()) {
    if (budget.out_of_time()) {
      r.exhausted = Exhaustion::Time;
      return r;
    }
    Entry e = open.top();
    open.pop();
    if (incumbent >= 0 && e.f >= table[incumbent].g) break;
    Node& node = table[e.id];
    if (closed[static_cast<std::size_t>(e.id)] || e.g != node.g) continue;  // stale
    if (is_goal(node.grid)) {
      incumbent = e.id;
      break;
    }
    closed[static_cast<std::size_t>(e.id)] = 1;
    if (node.g >= limits.max_moves) continue;
    ++r.stats.expanded;
    QuiescentState state = QuiescentState::from(node.grid);
    const int g = node.g + 1;
    for (const Move& m : legal_moves(state)) {
      ++r.stats.generated;
      MoveResult child = apply_move(state, m);
      const int h = heuristic_column_gap(child.state.grid());
      if (h == kNoSolution) {
        ++r.stats.dead_ends;
        continue;
      }
      if (g + h > limits.max_moves) continue;
      auto [cid, inserted] = table.insert({child.state.grid(), e.id, m, g});
      if (!inserted) {
        Node& old = table[cid];
        if (closed[static_cast<std::size_t>(cid)] || old.g <= g) {
          ++r.stats.duplicates;
          continue;
        }
        old.g = g;
        old.parent = e.id;
        old.move = m;
      } else {
        closed.push_back(0);
      }
      if (h == 0 && is_goal(table[cid].grid) &&
          (incumbent < 0 || g < table[incumbent].g))
        incumbent = cid;
      open.push({g + h, g, seq++, cid});
    }
    r.stats.max_frontier = std::max<std::uint64_t>(r.stats.max_frontier, open.size());
    if (table.size() > limits.max_states) {
      r.exhausted = Exhaustion::Memory;
      return r;
    }
  }
  if (incumbent >= 0) {
    finish_solved(r, root, table.plan_to(incumbent));
    return r;
  }
  r.outcome = Outcome::ProvedUnsolvable;
  return r;
}

class Iddfs {
 public:
  Iddfs(SearchResult& r, Budget& budget, const SearchLimits& limits)
      : r_(r), budget_(budget), limits_(limits) {}

  /// Depth-limited pass. Sets `cut_` when a node was left unexpanded because
  /// of the limit. Path mode skips states already on the current path; table
  /// mode skips states entered this pass with at least as much depth left.
  bool dfs(const QuiescentState& state, int depth, int limit) {
    if (is_goal(state.grid())) return true;
    if (depth == limit) {
      cut_ = true;
      return false;
    }
    if (budget_.out_of_time()) {
      timed_out_ = true;
      return false;
    }
    ++r_.stats.expanded;
    for (const Move& m : legal_moves(state)) {
      ++r_.stats.generated;
      MoveResult child = apply_move(state, m);
      const Grid& cg = child.state.grid();
      if (is_dead_end(cg)) {
        ++r_.stats.dead_ends;
        continue;
      }
      if (limits_.iddfs_table) {
        const int remaining = limit - depth - 1;
        auto [it, fresh] = seen_.try_emplace(cg, remaining);
        if (!fresh && it->second >= remaining) {
          ++r_.stats.duplicates;
          continue;
        }
        it->second = remaining;
        if (seen_.size() > limits_.max_states) {
          out_of_memory_ = true;
          return false;
        }
      } else if (std::any_of(path_.begin(), path_.end(), [&](const Grid* p) { return *p == cg; })) {
        ++r_.stats.duplicates;
        continue;
      }
      path_.push_back(&cg);
      moves_.push_back(m);
      r_.stats.max_frontier = std::max<std::uint64_t>(r_.stats.max_frontier, path_.size());
      bool found = dfs(child.state, depth + 1, limit);
      path_.pop_back();
      if (found) return true;
      moves_.pop_back();
      if (timed_out_ || out_of_memory_) return false;
    }
    return false;
  }

  SearchResult& r_;
  Budget& budget_;
  const SearchLimits& limits_;
  std::vector<const Grid*> path_;
  std::unordered_map<Grid, int, GridHash> seen_;
  std::vector<Move> moves_;
  bool cut_ = false;
  bool timed_out_ = false;
  bool out_of_memory_ = false;
};

inline SearchResult solve_iddfs(const QuiescentState& root, const SearchLimits& limits, Budget& budget) {
  SearchResult r;
  Iddfs search(r, budget, limits);
  std::size_t reached = 0;
  for (int limit = 0; limit <= limits.max_moves; ++limit) {
    search.cut_ = false;
    search.path_.assign(1, &root.grid());
    search.seen_.clear();
    search.seen_.emplace(root.grid(), limit);
    search.moves_.clear();
    if (search.dfs(root, 0, limit)) {
      finish_solved(r, root, Plan{search.moves_});
      return r;
    }
    if (search.timed_out_) {
      r.exhausted = Exhaustion::Time;
      return r;
    }
    if (search.out_of_memory_) {
      r.exhausted = Exhaustion::Memory;
      return r;
    }
    if (!search.cut_) break;  // the whole search tree fits under the limit
    // In table mode, a deeper pass reaching no new state has closed the reachable set.
    if (limits.iddfs_table && search.seen_.size() == reached) break;
    reached = search.seen_.size();
  }
  r.outcome = Outcome::ProvedUnsolvable;
  return r;
}

}  // namespace detail

/// Minimum-move plan with at most `limits.max_moves` moves, if one exists.
inline SearchResult solve(const QuiescentState& state, const SearchLimits& limits,
                          Algorithm algo = Algorithm::AStar) {
  if (limits.max_moves < 0)
    throw Error(ErrorKind::InvalidBound, "max moves must be non-negative, got " +
                                             std::to_string(limits.max_moves));
  detail::Budget budget(limits);
  SearchResult r;
  if (is_goal(state.grid())) {
    r.outcome = Outcome::Solved;
    r.trace = Trace{state.grid(), {}};
  } else if (is_dead_end(state.grid())) {
    r.outcome = Outcome::ProvedUnsolvable;
    r.dead_end_at_root = true;
    r.stats.dead_ends = 1;
  } else {
    switch (algo) {
      case Algorithm::Bfs: r = detail::solve_bfs(state, limits, budget); break;
      case Algorithm::AStar: r = detail::solve_astar(state, limits, budget); break;
      case Algorithm::Iddfs: r = detail::solve_iddfs(state, limits, budget); break;
    }
  }
  r.algorithm = algo;
  r.bound = limits.max_moves;
  r.stats.elapsed = budget.elapsed();
  return r;
}

inline SearchResult solve(const QuiescentState& state, int max_moves = kDefaultMaxMoves,
                          Algorithm algo = Algorithm::AStar) {
  SearchLimits limits;
  limits.max_moves = max_moves;
  return solve(state, limits, algo);
}

/// Human-readable certificate for a ProvedUnsolvable result.
inline std::string prove_unsolvable_report(const SearchResult& r) {
  if (r.outcome != Outcome::ProvedUnsolvable)
    throw Error(ErrorKind::WrongOutcome, "result is not ProvedUnsolvable");
  std::string out = "unsolvable within " + std::to_string(r.bound) + " moves\n";
  out += "algorithm: " + std::string(to_string(r.algorithm)) + "\n";
  if (r.dead_end_at_root)
    out += "reason: dead end at root (a pattern has a single block)\n";
  else
    out += "reason: every duplicate-free move sequence of length <= " + std::to_string(r.bound) +
           " was exhausted\n";
  out += "expanded: " + std::to_string(r.stats.expanded) + "\n";
  out += "generated: " + std::to_string(r.stats.generated) + "\n";
  out += "duplicates: " + std::to_string(r.stats.duplicates) + "\n";
  out += "dead ends: " + std::to_string(r.stats.dead_ends) + "\n";
  return out;
}

}  // namespace puzznic
