#pragma once

#include <cassert>
#include <compare>
#include <cstdint>
#include <string>
#include <vector>

#include "puzznic/error.hpp"

namespace puzznic {

inline constexpr int kMinDim = 3;
inline constexpr int kMaxDim = 32;
inline constexpr int kMaxPatterns = 9;

/// One grid cell: Wall, Empty or Pattern(1..9). The raw code follows the
/// classic integer encoding (0 = wall, 1 = empty, 2.. = patterns) so that
/// cells order as WALL < EMPTY < patterns.
class Cell {
 public:
  constexpr Cell() = default;

  static constexpr Cell wall() { return Cell(0); }
  static constexpr Cell empty() { return Cell(1); }
  static constexpr Cell pattern(int id) {
    assert(id >= 1 && id <= kMaxPatterns);
    return Cell(static_cast<std::uint8_t>(id + 1));
  }
  static constexpr Cell from_code(std::uint8_t code) { return Cell(code); }

  constexpr bool is_wall() const { return code_ == 0; }
  constexpr bool is_empty() const { return code_ == 1; }
  constexpr bool is_pattern() const { return code_ >= 2; }
  /// Pattern id, or 0 for Wall / Empty.
  constexpr int pattern_id() const { return is_pattern() ? code_ - 1 : 0; }
  constexpr std::uint8_t code() const { return code_; }

  friend constexpr auto operator<=>(Cell, Cell) = default;

 private:
  constexpr explicit Cell(std::uint8_t code) : code_(code) {}
  std::uint8_t code_ = 1;
};

/// 1-indexed (row, col); row 1 is the top.
struct Position {
  int row = 0;
  int col = 0;
  friend constexpr auto operator<=>(const Position&, const Position&) = default;
};

enum class Direction : int { Left = -1, Right = 1 };

constexpr int delta(Direction d) { return static_cast<int>(d); }
constexpr char to_char(Direction d) { return d == Direction::Left ? 'L' : 'R'; }

struct Move {
  int row = 0;
  int col = 0;
  Direction dir = Direction::Left;

  constexpr int target_col() const { return col + delta(dir); }
  friend constexpr bool operator==(const Move&, const Move&) = default;
};

inline std::string to_string(const Move& m) {
  return std::to_string(m.row) + " " + std::to_string(m.col) + " " + to_char(m.dir);
}

/// Rectangular board. Dimensions are bounded to [3, 32]; every constructor
/// path checks that. The wall perimeter is checked by `has_wall_perimeter`
/// (parsers and the engine entry points require it).
class Grid {
 public:
  Grid() : Grid(kMinDim, kMinDim, Cell::wall()) {}

  Grid(int height, int width, Cell fill = Cell::empty()) : height_(height), width_(width) {
    check_dims(height, width);
    cells_.assign(static_cast<std::size_t>(height * width), fill);
  }

  Grid(int height, int width, std::vector<Cell> cells)
      : height_(height), width_(width), cells_(std::move(cells)) {
    check_dims(height, width);
    if (cells_.size() != static_cast<std::size_t>(height * width))
      throw Error(ErrorKind::LevelInvalid, "cell matrix is not height x width");
  }

  /// Interior filled with `fill`, perimeter walls.
  static Grid walled(int height, int width, Cell fill = Cell::empty()) {
    Grid g(height, width, fill);
    for (int r = 1; r <= height; ++r)
      for (int c = 1; c <= width; ++c)
        if (g.on_perimeter(r, c)) g.set(r, c, Cell::wall());
    return g;
  }

  int height() const { return height_; }
  int width() const { return width_; }

  Cell at(int row, int col) const { return cells_[index(row, col)]; }
  Cell at(Position p) const { return at(p.row, p.col); }
  void set(int row, int col, Cell cell) { cells_[index(row, col)] = cell; }
  void set(Position p, Cell cell) { set(p.row, p.col, cell); }

  bool in_bounds(int row, int col) const {
    return row >= 1 && row <= height_ && col >= 1 && col <= width_;
  }
  bool on_perimeter(int row, int col) const {
    return row == 1 || row == height_ || col == 1 || col == width_;
  }
  bool is_interior(int row, int col) const {
    return row > 1 && row < height_ && col > 1 && col < width_;
  }

  bool has_wall_perimeter() const {
    for (int r = 1; r <= height_; ++r)
      for (int c = 1; c <= width_; ++c)
        if (on_perimeter(r, c) && !at(r, c).is_wall()) return false;
    return true;
  }

  const std::vector<Cell>& cells() const { return cells_; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  static void check_dims(int height, int width) {
    if (height > kMaxDim || width > kMaxDim)
      throw Error(ErrorKind::TooLarge, std::to_string(height) + "x" + std::to_string(width) +
                                           " exceeds " + std::to_string(kMaxDim) + "x" +
                                           std::to_string(kMaxDim));
    if (height < kMinDim || width < kMinDim)
      throw Error(ErrorKind::TooSmall, std::to_string(height) + "x" + std::to_string(width) +
                                           " is below " + std::to_string(kMinDim) + "x" +
                                           std::to_string(kMinDim));
  }

  std::size_t index(int row, int col) const {
    assert(in_bounds(row, col));
    return static_cast<std::size_t>((row - 1) * width_ + (col - 1));
  }

  int height_;
  int width_;
  std::vector<Cell> cells_;
};

}  // namespace puzznic
