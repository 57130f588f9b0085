#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "mazetest/generator.hpp"
#include "mazetest/text.hpp"

namespace mazetest {

namespace fs = std::filesystem;

inline std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Writes via a sibling temp file and rename so readers never see a torn file.
inline void write_text_file(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

inline Maze load_maze_file(const fs::path& path) {
  try {
    return parse_description(read_text_file(path));
  } catch (const MalformedDescription& e) {
    throw MalformedDescription(e.line(), path.string() + ": " + e.message());
  }
}

inline nlohmann::ordered_json gen_config_to_json(const GenConfig& c) {
  return {{"rows", c.rows},
          {"cols", c.cols},
          {"wall_count", c.wall_count},
          {"min_path", c.min_path},
          {"max_path", c.max_path},
          {"require_unique_optimal", c.require_unique_optimal},
          {"opposite_sides", c.opposite_sides},
          {"seed", c.seed},
          {"max_attempts", c.max_attempts}};
}

inline GenConfig gen_config_from_json(const nlohmann::json& j) {
  GenConfig c;
  c.rows = j.value("rows", c.rows);
  c.cols = j.value("cols", c.cols);
  c.wall_count = j.value("wall_count", c.wall_count);
  c.min_path = j.value("min_path", c.min_path);
  c.max_path = j.value("max_path", c.max_path);
  c.require_unique_optimal = j.value("require_unique_optimal", c.require_unique_optimal);
  c.opposite_sides = j.value("opposite_sides", c.opposite_sides);
  c.seed = j.value("seed", c.seed);
  c.max_attempts = j.value("max_attempts", c.max_attempts);
  c.validate();
  return c;
}

inline MazeRole role_from_name(std::string_view s) {
  if (s == "test") return MazeRole::Test;
  if (s == "shot") return MazeRole::Shot;
  throw DomainError("unknown maze role: " + std::string(s));
}

/// Layout: <dir>/corpus.json plus one description file per maze under
/// <dir>/mazes/<id>.maze.
inline fs::path save_corpus(const Corpus& corpus, const fs::path& dir) {
  nlohmann::ordered_json manifest;
  manifest["config"] = gen_config_to_json(corpus.config);
  manifest["mazes"] = nlohmann::ordered_json::array();
  for (const auto& e : corpus.entries) {
    const std::string file = "mazes/" + e.id + ".maze";
    write_text_file(dir / file, serialize_text(e.maze));
    manifest["mazes"].push_back({{"id", e.id}, {"role", role_name(e.role)}, {"seed", e.seed}, {"file", file}});
  }
  const fs::path path = dir / "corpus.json";
  write_text_file(path, manifest.dump(2) + "\n");
  return path;
}

inline Corpus load_corpus(const fs::path& manifest_path) {
  const auto j = nlohmann::json::parse(read_text_file(manifest_path));
  const fs::path base = manifest_path.parent_path();
  Corpus corpus;
  if (j.contains("config")) corpus.config = gen_config_from_json(j.at("config"));
  std::set<std::string> ids;
  for (const auto& m : j.at("mazes")) {
    CorpusEntry e{m.at("id").get<std::string>(), m.value("seed", std::uint64_t{0}),
                  role_from_name(m.at("role").get<std::string>()),
                  load_maze_file(base / m.at("file").get<std::string>())};
    if (!ids.insert(e.id).second) throw DomainError("duplicate maze id in corpus: " + e.id);
    corpus.entries.push_back(std::move(e));
  }
  return corpus;
}

}  // namespace mazetest
