#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "mazetest/maze.hpp"
#include "mazetest/oracle.hpp"

namespace mazetest {

struct GenConfig {
  int rows = 2;
  int cols = 5;
  int wall_count = 4;
  /// Bounds on the BFS distance (moves) from entrance cell to exit cell.
  int min_path = 3;
  int max_path = 6;
  bool require_unique_optimal = true;
  /// Entrance and exit on opposite long sides of the grid.
  bool opposite_sides = true;
  std::uint64_t seed = 0;
  std::uint64_t max_attempts = 100'000;

  void validate() const {
    if (rows <= 0 || cols <= 0) throw DomainError("grid dimensions must be positive");
    const auto adjacencies = static_cast<int>(internal_adjacencies(rows, cols).size());
    if (wall_count < 0 || wall_count > adjacencies)
      throw DomainError("wall_count must be in [0, " + std::to_string(adjacencies) + "]");
    if (min_path < 1 || min_path > max_path) throw DomainError("need 1 <= min_path <= max_path");
    if (max_attempts == 0) throw DomainError("max_attempts must be positive");
  }
};

namespace detail {

/// Unbiased draw in [0, n) from a 64-bit engine. Avoids
/// std::uniform_int_distribution, whose output is implementation-defined.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t r = rng();
  while (r >= limit) r = rng();
  return r % n;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline Opening random_opening_on(std::mt19937_64& rng, const std::vector<Opening>& candidates) {
  return candidates[uniform_below(rng, candidates.size())];
}

}  // namespace detail

/// Seed for the `index`-th maze drawn from a corpus seed.
inline std::uint64_t derive_seed(std::uint64_t corpus_seed, std::uint64_t index) {
  return detail::splitmix64(corpus_seed ^ detail::splitmix64(index + 1));
}

/// Checks the acceptance rules generate() applies to a candidate.
inline bool satisfies(const Maze& maze, const GenConfig& cfg) {
  const auto d = distance(maze, maze.entrance().cell, maze.exit().cell);
  if (!d || *d < cfg.min_path || *d > cfg.max_path) return false;
  if (cfg.require_unique_optimal && optimal_solutions(maze).size() != 1) return false;
  return true;
}

/// Rejection-samples a maze: uniform random wall subset of size wall_count
/// plus random boundary openings. Deterministic in cfg (including seed).
inline Maze generate(const GenConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  auto adjacencies = internal_adjacencies(cfg.rows, cfg.cols);
  const auto openings = boundary_openings(cfg.rows, cfg.cols);

  const bool vertical_long = cfg.cols >= cfg.rows;
  const Heading side_a = vertical_long ? Heading::North : Heading::West;
  auto on_side = [&](Heading side) {
    std::vector<Opening> out;
    for (const Opening& o : openings)
      if (o.side == side) out.push_back(o);
    return out;
  };
  const auto first_side = on_side(side_a);
  const auto second_side = on_side(opposite(side_a));

  for (std::uint64_t attempt = 0; attempt < cfg.max_attempts; ++attempt) {
    // Partial Fisher-Yates over the adjacency list.
    for (int i = 0; i < cfg.wall_count; ++i) {
      const auto j = i + detail::uniform_below(rng, adjacencies.size() - i);
      std::swap(adjacencies[i], adjacencies[j]);
    }
    std::vector<Wall> walls(adjacencies.begin(), adjacencies.begin() + cfg.wall_count);

    Opening entrance;
    Opening exit;
    if (cfg.opposite_sides) {
      const bool flip = detail::uniform_below(rng, 2) == 1;
      entrance = detail::random_opening_on(rng, flip ? second_side : first_side);
      exit = detail::random_opening_on(rng, flip ? first_side : second_side);
    } else {
      entrance = detail::random_opening_on(rng, openings);
      exit = detail::random_opening_on(rng, openings);
    }
    if (entrance == exit) continue;

    Maze maze(cfg.rows, cfg.cols, walls, entrance, exit);
    if (satisfies(maze, cfg)) return maze;
  }
  throw ExhaustionError("no maze satisfied the configuration within " + std::to_string(cfg.max_attempts) +
                        " attempts");
}

enum class MazeRole { Test, Shot };

inline const char* role_name(MazeRole r) { return r == MazeRole::Test ? "test" : "shot"; }

struct CorpusEntry {
  std::string id;
  std::uint64_t seed = 0;
  MazeRole role = MazeRole::Test;
  Maze maze;
};

struct Corpus {
  GenConfig config;
  std::vector<CorpusEntry> entries;

  std::vector<const CorpusEntry*> with_role(MazeRole role) const {
    std::vector<const CorpusEntry*> out;
    for (const auto& e : entries)
      if (e.role == role) out.push_back(&e);
    return out;
  }
};

inline std::string corpus_id(MazeRole role, std::size_t index) {
  std::string n = std::to_string(index);
  if (n.size() < 2) n.insert(0, 2 - n.size(), '0');
  return std::string(role_name(role)) + "-" + n;
}

/// n_test + n_shot structurally distinct mazes. Each maze is generate() of a
/// per-maze seed derived from cfg.seed, so any entry can be rebuilt alone.
inline Corpus generate_corpus(const GenConfig& cfg, std::size_t n_test, std::size_t n_shot) {
  cfg.validate();
  Corpus corpus{cfg, {}};
  const std::size_t total = n_test + n_shot;
  const std::uint64_t max_draws = 1000 + 100 * static_cast<std::uint64_t>(total);
  std::set<Maze> seen;
  std::uint64_t index = 0;
  while (corpus.entries.size() < total) {
    if (index >= max_draws)
      throw ExhaustionError("could not find " + std::to_string(total) + " distinct mazes");
    GenConfig one = cfg;
    one.seed = derive_seed(cfg.seed, index++);
    Maze maze = generate(one);
    if (!seen.insert(maze).second) continue;
    const std::size_t k = corpus.entries.size();
    const MazeRole role = k < n_test ? MazeRole::Test : MazeRole::Shot;
    const std::size_t role_index = role == MazeRole::Test ? k : k - n_test;
    corpus.entries.push_back({corpus_id(role, role_index), one.seed, role, std::move(maze)});
  }
  return corpus;
}

}  // namespace mazetest
