#pragma once

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "puzznic/engine.hpp"
#include "puzznic/error.hpp"
#include "puzznic/grid.hpp"

// Text formats for levels, plans and traces.
//
// Level: one line per grid row. '#' wall, '.' or ' ' empty, pattern symbols
// R O Y G B V P C L or 1-9. Short lines are padded with '#'. Lines starting
// with ';' are comments; "; name: <text>" names the level.
//
// Plan: one "<row> <col> <L|R>" per line, 1-indexed; blank and '#' lines skipped.

namespace puzznic {

inline constexpr std::string_view kPatternLetters = "ROYGBVPCL";

struct ParseOptions {
  /// Resolve a non-quiescent grid instead of rejecting it.
  bool pre_resolve = false;
  /// Pad short lines with walls (bounding-rectangle rule). When false,
  /// unequal line lengths raise RaggedRows.
  bool pad_ragged = true;
};

struct LevelFile {
  std::string name;
  Grid grid;
  /// (symbol, pattern id), ids dense in order of first appearance.
  std::vector<std::pair<char, int>> symbols;
  /// Match events consumed by pre-resolve (0 unless requested).
  int pre_resolve_matches = 0;

  char symbol_for(int id) const {
    for (auto [ch, sid] : symbols)
      if (sid == id) return ch;
    return kPatternLetters[static_cast<std::size_t>(id - 1)];
  }
};

namespace detail {

inline bool is_pattern_symbol(char ch) {
  return kPatternLetters.find(ch) != std::string_view::npos || (ch >= '1' && ch <= '9');
}

inline std::string at_line(std::size_t line, std::size_t col) {
  return "line " + std::to_string(line) + ", col " + std::to_string(col);
}

inline std::vector<std::string> split_lines(std::string_view text) {
  if (text.size() >= 3 && static_cast<unsigned char>(text[0]) == 0xEF &&
      static_cast<unsigned char>(text[1]) == 0xBB && static_cast<unsigned char>(text[2]) == 0xBF)
    text.remove_prefix(3);
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(start, end - start));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    if (end == text.size()) break;
    start = end + 1;
  }
  return lines;
}

inline char cell_char(Cell c, const LevelFile* symbols) {
  if (c.is_wall()) return '#';
  if (c.is_empty()) return '.';
  if (symbols) return symbols->symbol_for(c.pattern_id());
  return kPatternLetters[static_cast<std::size_t>(c.pattern_id() - 1)];
}

}  // namespace detail

inline LevelFile parse_level(std::string_view text, const ParseOptions& opts = {}) {
  LevelFile out;
  std::vector<std::string> rows;
  std::vector<std::size_t> row_line;  // 1-based source line of each row
  auto lines = detail::split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    if (!line.empty() && line[0] == ';') {
      std::string_view body(line);
      body.remove_prefix(1);
      while (!body.empty() && body.front() == ' ') body.remove_prefix(1);
      if (body.substr(0, 5) == "name:") {
        body.remove_prefix(5);
        while (!body.empty() && body.front() == ' ') body.remove_prefix(1);
        out.name = std::string(body);
      }
      continue;
    }
    rows.push_back(line);
    row_line.push_back(i + 1);
  }
  // Blank lines at either end are layout, not rows.
  while (!rows.empty() && rows.back().empty()) {
    rows.pop_back();
    row_line.pop_back();
  }
  std::size_t first = 0;
  while (first < rows.size() && rows[first].empty()) ++first;
  rows.erase(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(first));
  row_line.erase(row_line.begin(), row_line.begin() + static_cast<std::ptrdiff_t>(first));

  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      char ch = rows[r][c];
      if (ch == '#' || ch == '.' || ch == ' ' || detail::is_pattern_symbol(ch)) continue;
      char shown[8];
      std::snprintf(shown, sizeof shown, "0x%02X", static_cast<unsigned char>(ch));
      throw Error(ErrorKind::BadChar,
                  detail::at_line(row_line[r], c + 1) + ": unexpected byte " + shown);
    }
  }

  std::size_t width = 0;
  for (const auto& row : rows) width = std::max(width, row.size());
  if (rows.size() > static_cast<std::size_t>(kMaxDim) || width > static_cast<std::size_t>(kMaxDim))
    throw Error(ErrorKind::TooLarge, std::to_string(width) + " wide x " +
                                         std::to_string(rows.size()) + " tall exceeds " +
                                         std::to_string(kMaxDim));
  if (rows.size() < static_cast<std::size_t>(kMinDim) || width < static_cast<std::size_t>(kMinDim))
    throw Error(ErrorKind::TooSmall, std::to_string(width) + " wide x " +
                                         std::to_string(rows.size()) + " tall is below " +
                                         std::to_string(kMinDim));
  if (!opts.pad_ragged) {
    for (std::size_t r = 0; r < rows.size(); ++r)
      if (rows[r].size() != width)
        throw Error(ErrorKind::RaggedRows, detail::at_line(row_line[r], rows[r].size() + 1) +
                                               ": row has " + std::to_string(rows[r].size()) +
                                               " cells, expected " + std::to_string(width));
  }

  const int h = static_cast<int>(rows.size());
  const int w = static_cast<int>(width);
  Grid grid(h, w, Cell::wall());
  for (int r = 1; r <= h; ++r) {
    const std::string& row = rows[static_cast<std::size_t>(r - 1)];
    for (int c = 1; c <= w; ++c) {
      char ch = static_cast<std::size_t>(c - 1) < row.size() ? row[static_cast<std::size_t>(c - 1)] : '#';
      if (ch == '#') continue;
      if (ch == '.' || ch == ' ') {
        grid.set(r, c, Cell::empty());
        continue;
      }
      auto it = std::find_if(out.symbols.begin(), out.symbols.end(),
                             [ch](const auto& s) { return s.first == ch; });
      int id;
      if (it != out.symbols.end()) {
        id = it->second;
      } else {
        if (out.symbols.size() == static_cast<std::size_t>(kMaxPatterns))
          throw Error(ErrorKind::TooManyPatterns,
                      detail::at_line(row_line[static_cast<std::size_t>(r - 1)],
                                      static_cast<std::size_t>(c)) +
                          ": more than " + std::to_string(kMaxPatterns) + " pattern symbols");
        id = static_cast<int>(out.symbols.size()) + 1;
        out.symbols.emplace_back(ch, id);
      }
      grid.set(r, c, Cell::pattern(id));
    }
  }

  for (int r = 1; r <= h; ++r)
    for (int c = 1; c <= w; ++c)
      if (grid.on_perimeter(r, c) && !grid.at(r, c).is_wall())
        throw Error(ErrorKind::NoPerimeter,
                    detail::at_line(row_line[static_cast<std::size_t>(r - 1)],
                                    static_cast<std::size_t>(c)) +
                        ": border cell is not a wall");

  if (auto p = first_non_quiescent(grid)) {
    if (!opts.pre_resolve)
      throw Error(ErrorKind::NotQuiescent,
                  detail::at_line(row_line[static_cast<std::size_t>(p->row - 1)],
                                  static_cast<std::size_t>(p->col)) +
                      (p->row < h && grid.at(p->row + 1, p->col).is_empty()
                           ? ": block is floating"
                           : ": block has a pending match"));
    ResolveResult res = resolve(grid);
    grid = res.state.grid();
    out.pre_resolve_matches = res.match_events;
  }
  out.grid = std::move(grid);
  return out;
}

namespace detail {

inline std::string emit_rows(const Grid& grid, const LevelFile* symbols) {
  std::string out;
  out.reserve(static_cast<std::size_t>((grid.width() + 1) * grid.height()));
  for (int r = 1; r <= grid.height(); ++r) {
    for (int c = 1; c <= grid.width(); ++c) out.push_back(cell_char(grid.at(r, c), symbols));
    out.push_back('\n');
  }
  return out;
}

}  // namespace detail

/// Canonical text: '.' for empty, pattern id k as the k-th of R O Y G B V P C L.
inline std::string emit_level(const Grid& grid) { return detail::emit_rows(grid, nullptr); }

/// Canonical text using the level's own symbols and name.
inline std::string emit_level(const LevelFile& level) {
  std::string out;
  if (!level.name.empty()) out += "; name: " + level.name + "\n";
  return out + detail::emit_rows(level.grid, &level);
}

inline Plan parse_plan(std::string_view text) {
  Plan plan;
  auto lines = detail::split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line(lines[i]);
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.front()))) line.remove_prefix(1);
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    std::istringstream in{std::string(line)};
    long row = 0, col = 0;
    std::string dir, extra;
    bool ok = static_cast<bool>(in >> row >> col >> dir) && !(in >> extra) && row >= 1 &&
              col >= 1 && row <= kMaxDim && col <= kMaxDim && (dir == "L" || dir == "R");
    if (!ok)
      throw Error(ErrorKind::BadMoveLine, "line " + std::to_string(i + 1) + ": expected '<row> <col> <L|R>', got '" +
                                              std::string(line) + "'");
    plan.moves.push_back({static_cast<int>(row), static_cast<int>(col),
                          dir == "L" ? Direction::Left : Direction::Right});
  }
  return plan;
}

inline std::string emit_plan(const Plan& plan) {
  std::string out;
  for (const Move& m : plan.moves) out += to_string(m) + "\n";
  return out;
}

inline char event_tag(EventKind kind) {
  switch (kind) {
    case EventKind::Move: return 'M';
    case EventKind::Fall: return 'F';
    case EventKind::Match: return '*';
  }
  return '?';
}

/// One grid block per state. Each block is tagged with the event that
/// follows it (M move, F fall, * match) and its 1-based step index; the
/// final state carries no tag.
inline std::string render_trace(const Trace& trace, const LevelFile* symbols = nullptr) {
  std::string out;
  const std::size_t n = trace.events.size();
  for (std::size_t i = 0; i <= n; ++i) {
    const Grid& g = i == 0 ? trace.initial : trace.events[i - 1].after;
    char tag = i < n ? event_tag(trace.events[i].kind) : ' ';
    if (i > 0) out.push_back('\n');
    for (int r = 1; r <= g.height(); ++r) {
      char prefix[16];
      std::snprintf(prefix, sizeof prefix, "%c%4zu ", tag, i + 1);
      out += prefix;
      for (int c = 1; c <= g.width(); ++c) out.push_back(detail::cell_char(g.at(r, c), symbols));
      out.push_back('\n');
    }
  }
  return out;
}

}  // namespace puzznic
