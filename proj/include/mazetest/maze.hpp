#pragma once

#include <algorithm>
#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "mazetest/error.hpp"

namespace mazetest {

/// Row-major cell index, row 0 on top.
using Cell = int;

/// Compass heading. North points toward row 0.
enum class Heading : std::uint8_t { North = 0, East = 1, South = 2, West = 3 };

enum class TurnDirection : std::uint8_t { Left, Right };

inline constexpr std::array<Heading, 4> kAllHeadings = {Heading::North, Heading::East, Heading::South,
                                                        Heading::West};

/// Left is counterclockwise seen from above.
constexpr Heading rotate(Heading h, TurnDirection dir) noexcept {
  const int step = dir == TurnDirection::Right ? 1 : 3;
  return static_cast<Heading>((static_cast<int>(h) + step) % 4);
}

constexpr Heading opposite(Heading h) noexcept {
  return static_cast<Heading>((static_cast<int>(h) + 2) % 4);
}

constexpr char heading_letter(Heading h) noexcept {
  switch (h) {
    case Heading::North: return 'N';
    case Heading::East: return 'E';
    case Heading::South: return 'S';
    case Heading::West: return 'W';
  }
  return '?';
}

inline Heading heading_from_letter(char c) {
  switch (c) {
    case 'N': case 'n': return Heading::North;
    case 'E': case 'e': return Heading::East;
    case 'S': case 's': return Heading::South;
    case 'W': case 'w': return Heading::West;
    default: throw DomainError(std::string("not a heading: ") + c);
  }
}

constexpr const char* turn_name(TurnDirection d) noexcept {
  return d == TurnDirection::Left ? "left" : "right";
}

/// A gap in the outer boundary: `side` faces off-grid from `cell`.
struct Opening {
  Cell cell = 0;
  Heading side = Heading::North;

  friend auto operator<=>(const Opening&, const Opening&) = default;
};

/// Unordered pair of adjacent cells, stored with a < b.
struct Wall {
  Cell a = 0;
  Cell b = 0;

  Wall() = default;
  Wall(Cell x, Cell y) : a(std::min(x, y)), b(std::max(x, y)) {}

  friend auto operator<=>(const Wall&, const Wall&) = default;
};

struct Pose {
  Cell cell = 0;
  Heading heading = Heading::North;

  friend auto operator<=>(const Pose&, const Pose&) = default;
};

/// Immutable rectangular maze. The constructor validates every invariant and
/// throws DomainError on violation.
class Maze {
 public:
  Maze(int rows, int cols, const std::vector<Wall>& walls, Opening entrance, Opening exit)
      : rows_(rows), cols_(cols), entrance_(entrance), exit_(exit) {
    if (rows <= 0 || cols <= 0) throw DomainError("maze dimensions must be positive");
    for (const Wall& w : walls) {
      if (!in_bounds(w.a) || !in_bounds(w.b))
        throw DomainError("wall " + std::to_string(w.a) + "-" + std::to_string(w.b) + " is out of bounds");
      if (!orthogonally_adjacent(w.a, w.b))
        throw DomainError("wall " + std::to_string(w.a) + "-" + std::to_string(w.b) + " joins non-adjacent cells");
      if (!walls_.insert(w).second)
        throw DomainError("duplicate wall " + std::to_string(w.a) + "-" + std::to_string(w.b));
    }
    check_opening(entrance, "entrance");
    check_opening(exit, "exit");
    if (entrance == exit) throw DomainError("entrance and exit are the same opening");
  }

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  int cell_count() const noexcept { return rows_ * cols_; }
  const std::set<Wall>& walls() const noexcept { return walls_; }
  Opening entrance() const noexcept { return entrance_; }
  Opening exit() const noexcept { return exit_; }

  bool in_bounds(Cell c) const noexcept { return c >= 0 && c < cell_count(); }
  int row_of(Cell c) const noexcept { return c / cols_; }
  int col_of(Cell c) const noexcept { return c % cols_; }
  Cell cell_at(int row, int col) const noexcept { return row * cols_ + col; }

  bool orthogonally_adjacent(Cell a, Cell b) const noexcept {
    const int dr = row_of(a) - row_of(b);
    const int dc = col_of(a) - col_of(b);
    return (dr == 0 && (dc == 1 || dc == -1)) || (dc == 0 && (dr == 1 || dr == -1));
  }

  bool has_wall(Cell a, Cell b) const { return walls_.contains(Wall(a, b)); }

  /// The in-grid cell one step from `c` toward `h`, ignoring walls.
  std::optional<Cell> adjacent(Cell c, Heading h) const noexcept {
    int r = row_of(c);
    int col = col_of(c);
    switch (h) {
      case Heading::North: --r; break;
      case Heading::South: ++r; break;
      case Heading::East: ++col; break;
      case Heading::West: --col; break;
    }
    if (r < 0 || r >= rows_ || col < 0 || col >= cols_) return std::nullopt;
    return cell_at(r, col);
  }

  /// True when `side` of `c` is part of the outer boundary.
  bool faces_boundary(Cell c, Heading side) const noexcept {
    return in_bounds(c) && !adjacent(c, side).has_value();
  }

  Maze with_walls(const std::vector<Wall>& walls) const { return Maze(rows_, cols_, walls, entrance_, exit_); }

  friend bool operator==(const Maze&, const Maze&) = default;
  friend auto operator<=>(const Maze&, const Maze&) = default;

 private:
  void check_opening(Opening o, const char* what) const {
    if (!in_bounds(o.cell)) throw DomainError(std::string(what) + " cell is out of bounds");
    if (!faces_boundary(o.cell, o.side))
      throw DomainError(std::string(what) + " side " + heading_letter(o.side) +
                        " does not face off-grid from cell " + std::to_string(o.cell));
  }

  int rows_;
  int cols_;
  std::set<Wall> walls_;
  Opening entrance_;
  Opening exit_;
};

/// Direction of the single step a -> b, if they are orthogonal neighbours.
inline std::optional<Heading> direction_between(const Maze& maze, Cell a, Cell b) {
  for (Heading h : kAllHeadings)
    if (maze.adjacent(a, h) == b) return h;
  return std::nullopt;
}

inline bool passable(const Maze& maze, Cell a, Cell b) {
  if (!maze.in_bounds(a) || !maze.in_bounds(b))
    throw DomainError("cell out of bounds: " + std::to_string(maze.in_bounds(a) ? b : a));
  return maze.orthogonally_adjacent(a, b) && !maze.has_wall(a, b);
}

/// Passable orthogonal neighbours of `c`, ascending.
inline std::vector<Cell> neighbors(const Maze& maze, Cell c) {
  if (!maze.in_bounds(c)) throw DomainError("cell out of bounds: " + std::to_string(c));
  std::vector<Cell> out;
  for (Heading h : kAllHeadings) {
    if (auto n = maze.adjacent(c, h); n && !maze.has_wall(c, *n)) out.push_back(*n);
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Every unordered adjacent pair of a rows x cols grid, ascending.
inline std::vector<Wall> internal_adjacencies(int rows, int cols) {
  std::vector<Wall> out;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const Cell cell = r * cols + c;
      if (c + 1 < cols) out.emplace_back(cell, cell + 1);
      if (r + 1 < rows) out.emplace_back(cell, cell + cols);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Boundary openings of a rows x cols grid, ordered by (cell, side).
inline std::vector<Opening> boundary_openings(int rows, int cols) {
  std::vector<Opening> out;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const Cell cell = r * cols + c;
      if (r == 0) out.push_back({cell, Heading::North});
      if (c == cols - 1) out.push_back({cell, Heading::East});
      if (r == rows - 1) out.push_back({cell, Heading::South});
      if (c == 0) out.push_back({cell, Heading::West});
    }
  }
  return out;
}

/// BFS distance (in moves) between two cells, or nullopt if unreachable.
inline std::optional<int> distance(const Maze& maze, Cell from, Cell to) {
  std::vector<int> dist(maze.cell_count(), -1);
  std::vector<Cell> frontier{from};
  dist[from] = 0;
  for (std::size_t i = 0; i < frontier.size(); ++i) {
    const Cell c = frontier[i];
    if (c == to) return dist[c];
    for (Cell n : neighbors(maze, c)) {
      if (dist[n] < 0) {
        dist[n] = dist[c] + 1;
        frontier.push_back(n);
      }
    }
  }
  return std::nullopt;
}

}  // namespace mazetest
