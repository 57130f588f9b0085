#pragma once

#include <algorithm>
#include <vector>

#include "mazetest/instruction.hpp"
#include "mazetest/maze.hpp"
#include "mazetest/navsim.hpp"

namespace mazetest {

struct Solution {
  std::vector<Cell> cells;
  std::vector<Instruction> instructions;
  int turn_count = 0;
  friend bool operator==(const Solution&, const Solution&) = default;
};

/// All minimum-length cell paths from the entrance cell to the exit cell,
/// in lexicographic order. Throws UnsolvableMazeError.
inline std::vector<std::vector<Cell>> shortest_cell_paths(const Maze& maze) {
  const Cell start = maze.entrance().cell;
  const Cell goal = maze.exit().cell;
  std::vector<int> dist(maze.cell_count(), -1);
  std::vector<Cell> frontier{start};
  dist[start] = 0;
  for (std::size_t i = 0; i < frontier.size(); ++i) {
    for (Cell n : neighbors(maze, frontier[i])) {
      if (dist[n] < 0) {
        dist[n] = dist[frontier[i]] + 1;
        frontier.push_back(n);
      }
    }
  }
  if (dist[goal] < 0) throw UnsolvableMazeError();

  // Back-walk from the goal through strictly decreasing BFS layers.
  std::vector<std::vector<Cell>> out;
  std::vector<Cell> reversed{goal};
  auto walk = [&](auto&& self, Cell c) -> void {
    if (c == start) {
      out.emplace_back(reversed.rbegin(), reversed.rend());
      return;
    }
    for (Cell p : neighbors(maze, c)) {
      if (dist[p] == dist[c] - 1) {
        reversed.push_back(p);
        self(self, p);
        reversed.pop_back();
      }
    }
  };
  walk(walk, goal);
  std::sort(out.begin(), out.end());
  return out;
}

namespace detail {

inline void append_turns(std::vector<Instruction>& out, Heading from, Heading to) {
  if (from == to) return;
  if (rotate(from, TurnDirection::Left) == to) {
    out.emplace_back(Turn{TurnDirection::Left});
  } else if (rotate(from, TurnDirection::Right) == to) {
    out.emplace_back(Turn{TurnDirection::Right});
  } else {
    out.emplace_back(Turn{TurnDirection::Right});
    out.emplace_back(Turn{TurnDirection::Right});
  }
}

}  // namespace detail

/// First-person instructions for a cell path, with straight runs merged into
/// one Forward. Throws DomainError if `cells` is not an entrance-to-exit
/// passable path.
inline std::vector<Instruction> emit_instructions(const Maze& maze, const std::vector<Cell>& cells) {
  if (cells.empty()) throw DomainError("empty cell path");
  if (cells.front() != maze.entrance().cell) throw DomainError("path does not start at the entrance cell");
  if (cells.back() != maze.exit().cell) throw DomainError("path does not end at the exit cell");

  std::vector<Instruction> out{StepIn{cells.front()}};
  Heading heading = initial_heading(maze);
  for (std::size_t i = 1; i < cells.size(); ++i) {
    if (!maze.in_bounds(cells[i]) || !passable(maze, cells[i - 1], cells[i]))
      throw DomainError("cells " + std::to_string(cells[i - 1]) + " and " + std::to_string(cells[i]) +
                        " are not connected");
    const Heading dir = *direction_between(maze, cells[i - 1], cells[i]);
    if (dir != heading || i == 1) {
      detail::append_turns(out, heading, dir);
      heading = dir;
      out.emplace_back(Forward{cells[i]});
    } else {
      std::get<Forward>(out.back()).cell = cells[i];
    }
  }
  detail::append_turns(out, heading, maze.exit().side);
  out.emplace_back(ExitAt{cells.back()});
  return out;
}

inline int count_turns(const std::vector<Instruction>& instrs) {
  return static_cast<int>(
      std::count_if(instrs.begin(), instrs.end(), [](const Instruction& i) { return std::holds_alternative<Turn>(i); }));
}

/// Minimum-instruction solutions among all shortest cell paths, ordered by
/// (turn count, cell path). The first element is the reference solution.
inline std::vector<Solution> optimal_solutions(const Maze& maze) {
  std::vector<Solution> all;
  for (auto& cells : shortest_cell_paths(maze)) {
    auto instrs = emit_instructions(maze, cells);
    const int turns = count_turns(instrs);
    all.push_back({std::move(cells), std::move(instrs), turns});
  }
  std::size_t best = all.front().instructions.size();
  for (const auto& s : all) best = std::min(best, s.instructions.size());
  std::erase_if(all, [best](const Solution& s) { return s.instructions.size() != best; });
  std::sort(all.begin(), all.end(), [](const Solution& a, const Solution& b) {
    if (a.turn_count != b.turn_count) return a.turn_count < b.turn_count;
    return a.cells < b.cells;
  });
  return all;
}

inline Solution reference_solution(const Maze& maze) { return optimal_solutions(maze).front(); }

}  // namespace mazetest
