#pragma once

#include <algorithm>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "puzznic.hpp"

namespace testing_support {

using namespace puzznic;

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CorpusLevel {
  std::string name;
  LevelFile file;
};

inline std::vector<CorpusLevel> corpus() {
  std::vector<CorpusLevel> out;
  for (const auto& inst : load_corpus(PUZZNIC_CORPUS_DIR)) {
    std::string text = read_file(std::filesystem::path(PUZZNIC_CORPUS_DIR) / (inst.name + ".lvl"));
    out.push_back({inst.name, parse_level(text)});
  }
  return out;
}

inline Grid level(const std::vector<std::string>& rows) {
  std::string text;
  for (const auto& r : rows) text += r + "\n";
  return parse_level(text).grid;
}

/// Perimeter-walled grid with random interior walls, empties and up to
/// `patterns` pattern ids; not necessarily settled.
inline Grid random_grid(std::mt19937& rng, int h, int w, int patterns = 3) {
  Grid g(h, w, Cell::wall());
  std::uniform_int_distribution<int> roll(0, 99);
  std::uniform_int_distribution<int> pat(1, patterns);
  for (int r = 2; r < h; ++r)
    for (int c = 2; c < w; ++c) {
      int x = roll(rng);
      g.set(r, c, x < 12 ? Cell::wall() : x < 60 ? Cell::empty() : Cell::pattern(pat(rng)));
    }
  return g;
}

// ---- single-action oracles (one block falls one cell per action) -----------

/// First (row-major) block resting on an empty cell, moved down one cell.
inline bool fall_block(Grid& g) {
  for (int r = 1; r < g.height(); ++r)
    for (int c = 1; c <= g.width(); ++c)
      if (g.at(r, c).is_pattern() && g.at(r + 1, c).is_empty()) {
        g.set(r + 1, c, g.at(r, c));
        g.set(r, c, Cell::empty());
        return true;
      }
  return false;
}

inline Grid fall_fixpoint(Grid g) {
  while (fall_block(g)) {
  }
  return g;
}

/// Removes every block with a same-pattern orthogonal neighbour at once.
inline bool match_blocks(Grid& g) {
  std::vector<std::pair<int, int>> doomed;
  for (int r = 1; r <= g.height(); ++r)
    for (int c = 1; c <= g.width(); ++c) {
      Cell x = g.at(r, c);
      if (!x.is_pattern()) continue;
      const int dr[] = {-1, 1, 0, 0}, dc[] = {0, 0, -1, 1};
      for (int k = 0; k < 4; ++k) {
        int rr = r + dr[k], cc = c + dc[k];
        if (rr >= 1 && rr <= g.height() && cc >= 1 && cc <= g.width() && g.at(rr, cc) == x) {
          doomed.emplace_back(r, c);
          break;
        }
      }
    }
  for (auto [r, c] : doomed) g.set(r, c, Cell::empty());
  return !doomed.empty();
}

struct Simulated {
  Grid grid;
  int matches = 0;
};

/// while blocks fall: fall_block; elif something matches: match_blocks; else stop.
inline Simulated simulate(Grid g) {
  int matches = 0;
  for (;;) {
    if (fall_block(g)) continue;
    if (match_blocks(g)) {
      ++matches;
      continue;
    }
    return {g, matches};
  }
}

// ---- graph oracles ---------------------------------------------------------

/// Successors by plain engine moves, no pruning at all.
inline std::vector<std::pair<Grid, int>> successors(const Grid& g) {
  std::vector<std::pair<Grid, int>> out;
  QuiescentState s = QuiescentState::from(g);
  for (const Move& m : legal_moves(s)) {
    MoveResult r = apply_move(s, m);
    out.emplace_back(r.state.grid(), r.match_events);
  }
  return out;
}

/// Plain BFS distance to the goal without dead-end pruning; -1 if unreachable.
inline int plain_bfs(const Grid& start, int cap = 1000) {
  std::unordered_map<Grid, int, GridHash> dist{{start, 0}};
  std::deque<Grid> q{start};
  while (!q.empty()) {
    Grid g = q.front();
    q.pop_front();
    const int d = dist[g];
    if (is_goal(g)) return d;
    if (d >= cap) continue;
    for (auto& [n, _] : successors(g))
      if (dist.emplace(n, d + 1).second) q.push_back(n);
  }
  return -1;
}

struct StateGraph {
  std::vector<Grid> states;
  std::vector<std::vector<std::pair<int, int>>> edges;  // (target, match events)
  /// Optimal remaining moves per state, -1 when the goal is unreachable.
  std::vector<int> to_goal;
};

/// Full reachable state graph from `start`, with exact goal distances by
/// backward BFS over reversed edges.
inline StateGraph explore(const Grid& start) {
  StateGraph sg;
  std::unordered_map<Grid, int, GridHash> id{{start, 0}};
  sg.states.push_back(start);
  for (std::size_t i = 0; i < sg.states.size(); ++i) {
    std::vector<std::pair<int, int>> out;
    for (auto& [n, matches] : successors(sg.states[i])) {
      auto [it, fresh] = id.emplace(n, static_cast<int>(sg.states.size()));
      if (fresh) sg.states.push_back(n);
      out.emplace_back(it->second, matches);
    }
    sg.edges.push_back(std::move(out));
  }
  const std::size_t n = sg.states.size();
  std::vector<std::vector<int>> rev(n);
  for (std::size_t i = 0; i < n; ++i)
    for (auto [j, _] : sg.edges[i]) rev[static_cast<std::size_t>(j)].push_back(static_cast<int>(i));
  sg.to_goal.assign(n, -1);
  std::deque<int> q;
  for (std::size_t i = 0; i < n; ++i)
    if (is_goal(sg.states[i])) {
      sg.to_goal[i] = 0;
      q.push_back(static_cast<int>(i));
    }
  while (!q.empty()) {
    int v = q.front();
    q.pop_front();
    for (int u : rev[static_cast<std::size_t>(v)])
      if (sg.to_goal[static_cast<std::size_t>(u)] < 0) {
        sg.to_goal[static_cast<std::size_t>(u)] = sg.to_goal[static_cast<std::size_t>(v)] + 1;
        q.push_back(u);
      }
  }
  return sg;
}

/// Fixed-step oracle: does some sequence of exactly `n` steps (a move with
/// gravity when nothing matches, else the forced match) clear the grid?
inline bool clears_in_exactly(const Grid& start, int n) {
  std::unordered_set<Grid, GridHash> layer{start};
  for (int t = 0; t < n; ++t) {
    std::unordered_set<Grid, GridHash> next;
    for (const Grid& g : layer) {
      if (!find_matches(g).empty()) {
        next.insert(match_step(g));
        continue;
      }
      for (int r = 2; r < g.height(); ++r)
        for (int c = 2; c < g.width(); ++c)
          for (Direction d : {Direction::Left, Direction::Right})
            if (is_legal(g, {r, c, d})) next.insert(move_step(g, {r, c, d}));
    }
    layer = std::move(next);
  }
  return std::any_of(layer.begin(), layer.end(), [](const Grid& g) { return is_goal(g); });
}

/// Exhaustive quiescent 5x5 grids: each interior cell is wall, empty, or a
/// block of pattern 1 or 2; at most `max_blocks` blocks.
inline std::vector<Grid> all_small_quiescent(int max_blocks = 4) {
  std::vector<Grid> out;
  const Cell options[] = {Cell::wall(), Cell::empty(), Cell::pattern(1), Cell::pattern(2)};
  int total = 1;
  for (int i = 0; i < 9; ++i) total *= 4;
  for (int code = 0; code < total; ++code) {
    Grid g(5, 5, Cell::wall());
    int x = code, blocks = 0;
    for (int k = 0; k < 9; ++k) {
      Cell c = options[x % 4];
      x /= 4;
      blocks += c.is_pattern();
      g.set(2 + k / 3, 2 + k % 3, c);
    }
    if (blocks > max_blocks) continue;
    if (first_non_quiescent(g)) continue;
    out.push_back(g);
  }
  return out;
}

}  // namespace testing_support
