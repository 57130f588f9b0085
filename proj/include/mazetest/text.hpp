#pragma once

#include <algorithm>
#include <charconv>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mazetest/error.hpp"
#include "mazetest/maze.hpp"

namespace mazetest {

struct MazeDescription {
  std::string maze_id;
  std::string text;
};

namespace text_detail {

inline constexpr char kHeader[] = "Here is the text description of a maze:";
inline constexpr char kTopologyIntro[] = "- From a bird's eye perspective, the room has the following zone topology:";
inline constexpr char kWallRule[] =
    "- Walls cannot be traversed. For example, if there was a wall between zones 1 and 2, you would not be able to "
    "move from 1 to 2";
inline constexpr char kWallListIntro[] = "- Furthermore there are internal walls BETWEEN the following zones:";
inline constexpr char kNoWalls[] = "* none";
inline constexpr char kEntranceMarker = '^';
inline constexpr char kExitMarker = 'x';

inline std::string ordinal_row(int index) {
  static const char* const words[] = {"First",   "second", "third",  "fourth", "fifth",
                                      "sixth",   "seventh", "eighth", "ninth",  "tenth"};
  if (index < 10) return words[index];
  const int n = index + 1;
  const char* suffix = (n % 100 >= 11 && n % 100 <= 13) ? "th" : n % 10 == 1 ? "st" : n % 10 == 2 ? "nd"
                                                                 : n % 10 == 3 ? "rd" : "th";
  return std::to_string(n) + suffix;
}

inline std::string numbering_sentence(int rows, int cols) {
  std::string s = "- The zones are always numbered from ";
  for (int r = 0; r < rows; ++r) {
    if (r > 0) s += r + 1 == rows ? " and " : ", ";
    s += std::to_string(r * cols) + " to " + std::to_string(r * cols + cols - 1) + " (" + ordinal_row(r) + " row)";
  }
  return s;
}

inline std::string entry_sentence(Cell entrance, Cell exit) {
  return "- You enter the maze from the direction of the \"^\" symbol into position " + std::to_string(entrance) +
         " and exit at position " + std::to_string(exit) + " in the direction of the \"x\" symbol, so:";
}

inline int digits(int n) { return static_cast<int>(std::to_string(n).size()); }

inline std::string pad_left(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

inline std::string rstrip(std::string s) {
  while (!s.empty() && s.back() == ' ') s.pop_back();
  return s;
}

inline std::optional<char> marker_at(const Maze& maze, Cell c, Heading side) {
  if (maze.entrance() == Opening{c, side}) return kEntranceMarker;
  if (maze.exit() == Opening{c, side}) return kExitMarker;
  return std::nullopt;
}

/// Topology sketch: boundary tokens over/under each column, cell numbers in
/// between, W/E markers in a one-character gutter.
inline std::vector<std::string> topology_lines(const Maze& maze) {
  const auto width = static_cast<std::size_t>(std::max(2, digits(maze.cell_count() - 1)));
  const bool west_gutter = maze.entrance().side == Heading::West || maze.exit().side == Heading::West;
  const bool east_gutter = maze.entrance().side == Heading::East || maze.exit().side == Heading::East;

  auto boundary = [&](int row, Heading side) {
    std::string line = west_gutter ? "  " : "";
    for (int c = 0; c < maze.cols(); ++c) {
      if (c > 0) line += ' ';
      auto m = marker_at(maze, maze.cell_at(row, c), side);
      line += m ? pad_left(std::string(1, *m), width) : std::string(width, '-');
    }
    return line;
  };

  std::vector<std::string> lines{boundary(0, Heading::North)};
  for (int r = 0; r < maze.rows(); ++r) {
    std::string line;
    if (west_gutter) {
      auto m = marker_at(maze, maze.cell_at(r, 0), Heading::West);
      line += m ? std::string(1, *m) + " " : "  ";
    }
    for (int c = 0; c < maze.cols(); ++c) {
      if (c > 0) line += ' ';
      line += pad_left(std::to_string(maze.cell_at(r, c)), width);
    }
    if (east_gutter) {
      auto m = marker_at(maze, maze.cell_at(r, maze.cols() - 1), Heading::East);
      if (m) line += std::string(" ") + *m;
    }
    lines.push_back(rstrip(line));
  }
  lines.push_back(boundary(maze.rows() - 1, Heading::South));
  return lines;
}

inline std::string collapse_spaces(std::string_view s) {
  std::string out;
  bool space = false;
  for (char ch : s) {
    if (ch == ' ' || ch == '\t' || ch == '\r') {
      space = !out.empty();
      continue;
    }
    if (space) out.push_back(' ');
    space = false;
    out.push_back(ch);
  }
  return out;
}

/// Maps the quote variants a typeset copy may contain to '"'.
inline std::string normalize_quotes(std::string s) {
  const std::pair<std::string_view, std::string_view> table[] = {
      {"``", "\""}, {"''", "\""}, {"\xe2\x80\x9c", "\""}, {"\xe2\x80\x9d", "\""}};
  for (const auto& [from, to] : table) {
    for (std::size_t p = s.find(from); p != std::string::npos; p = s.find(from, p + to.size()))
      s.replace(p, from.size(), to);
  }
  return s;
}

inline std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

inline std::optional<int> to_int(std::string_view s) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

/// Line-oriented recursive-descent reader over the description template.
class DescriptionReader {
 public:
  explicit DescriptionReader(std::string_view text) {
    std::size_t begin = 0;
    while (begin <= text.size()) {
      std::size_t end = text.find('\n', begin);
      if (end == std::string_view::npos) end = text.size();
      raw_.emplace_back(text.substr(begin, end - begin));
      if (end == text.size()) break;
      begin = end + 1;
    }
  }

  Maze read() {
    expect_exact(kHeader, "expected the description header");
    const auto zones = expect_match(R"(- The floor is always composed of (\d+) squared zones or positions, in a chess-board-like pattern)",
                                    "expected the floor-composition line");
    const auto size = expect_match(R"(- Size is (\d+) rows by (\d+) columns)", "expected the size line");
    const int rows = number(size, 1);
    const int cols = number(size, 2);
    if (rows <= 0 || cols <= 0 || rows > 1000 || cols > 1000) fail(last_, "unsupported grid size");
    if (number(zones, 1) != rows * cols) fail(last_, "zone count does not equal rows x columns");

    const auto numbering = expect_match(R"(- The zones are always numbered from (.*))", "expected the numbering line");
    if (collapse_spaces(numbering.text) != numbering_sentence(rows, cols))
      fail(numbering.line, "zone numbering does not match a " + std::to_string(rows) + "x" + std::to_string(cols) +
                               " grid");

    expect_exact(kTopologyIntro, "expected the topology introduction");
    auto sides = read_topology(rows, cols);

    const auto entry = expect_match(
        R"(- You enter the maze from the direction of the "\^" symbol into position (\d+) and exit at position (\d+) in the direction of the "x" symbol, so:)",
        "expected the entrance/exit sentence");
    const auto entrance_line = expect_match(R"(\* ENTRANCE at (\d+))", "expected the ENTRANCE line");
    const auto exit_line = expect_match(R"(\* EXIT at (\d+))", "expected the EXIT line");
    const int entrance_cell = number(entrance_line, 1);
    const int exit_cell = number(exit_line, 1);
    if (number(entry, 1) != entrance_cell || number(entry, 2) != exit_cell)
      fail(entry.line, "entrance/exit sentence disagrees with the ENTRANCE/EXIT lines");
    if (sides.entrance.cell != entrance_cell)
      fail(entrance_line.line, "ENTRANCE does not match the \"^\" marker in the topology");
    if (sides.exit.cell != exit_cell) fail(exit_line.line, "EXIT does not match the \"x\" marker in the topology");

    expect_exact(kWallRule, "expected the wall rule sentence");
    expect_exact(kWallListIntro, "expected the wall list introduction");

    std::vector<Wall> walls;
    std::size_t first_wall_line = 0;
    bool none = false;
    while (auto l = next_logical()) {
      if (first_wall_line == 0) first_wall_line = l->line;
      if (l->text == kNoWalls && walls.empty() && !none) {
        none = true;
        continue;
      }
      std::smatch m;
      static const std::regex wall_re(R"(\* (\d+) and (\d+))");
      if (none || !std::regex_match(l->text, m, wall_re)) fail(l->line, "expected a wall line \"* a and b\"");
      walls.emplace_back(*to_int(m[1].str()), *to_int(m[2].str()));
      wall_lines_.push_back(l->line);
    }
    if (walls.empty() && !none) fail(raw_.size(), "missing wall list");

    try {
      return Maze(rows, cols, walls, sides.entrance, sides.exit);
    } catch (const DomainError& e) {
      // Attribute the failure to a wall line when one is to blame.
      std::set<Wall> unique;
      for (std::size_t i = 0; i < walls.size(); ++i) {
        const Wall& w = walls[i];
        const bool bad = w.a < 0 || w.b >= rows * cols || !unique.insert(w).second ||
                         !(w.b - w.a == cols || (w.b - w.a == 1 && w.a / cols == w.b / cols));
        if (bad) fail(wall_lines_[i], e.what());
      }
      fail(first_wall_line, e.what());
    }
  }

 private:
  struct Logical {
    std::size_t line;  // 1-based line of the first physical line
    std::string text;
  };

  struct Sides {
    Opening entrance;
    Opening exit;
  };

  [[noreturn]] void fail(std::size_t line, const std::string& msg) const {
    throw MalformedDescription(std::max<std::size_t>(line, 1), msg);
  }

  std::optional<std::size_t> next_nonblank_raw() {
    while (pos_ < raw_.size() && collapse_spaces(raw_[pos_]).empty()) ++pos_;
    if (pos_ >= raw_.size()) return std::nullopt;
    return pos_;
  }

  /// A bullet line plus any continuation lines (wrapped text that does not
  /// start a new "-" or "*" item).
  std::optional<Logical> next_logical() {
    auto start = next_nonblank_raw();
    if (!start) return std::nullopt;
    Logical l{*start + 1, collapse_spaces(raw_[*start])};
    ++pos_;
    if (l.text == kHeader || l.text == kTopologyIntro) return finish(l);
    while (pos_ < raw_.size()) {
      std::string cont = collapse_spaces(raw_[pos_]);
      if (cont.empty() || cont.front() == '-' || cont.front() == '*') break;
      l.text += " " + cont;
      ++pos_;
    }
    return finish(l);
  }

  Logical finish(Logical l) {
    l.text = normalize_quotes(l.text);
    last_ = l.line;
    return l;
  }

  void expect_exact(std::string_view expected, const std::string& msg) {
    auto l = next_logical();
    if (!l) fail(raw_.size(), msg + " (end of text)");
    if (l->text != expected) fail(l->line, msg);
  }

  struct Match {
    std::size_t line;
    std::string text;
    std::vector<std::string> groups;
  };

  Match expect_match(const char* pattern, const std::string& msg) {
    auto l = next_logical();
    if (!l) fail(raw_.size(), msg + " (end of text)");
    const std::regex re(pattern);
    std::smatch sm;
    if (!std::regex_match(l->text, sm, re)) fail(l->line, msg);
    Match m{l->line, l->text, {}};
    for (const auto& g : sm) m.groups.push_back(g.str());
    return m;
  }

  int number(const Match& m, std::size_t group) const {
    auto v = to_int(m.groups.at(group));
    if (!v) fail(m.line, "number out of range");
    return *v;
  }

  Sides read_topology(int rows, int cols) {
    std::optional<Opening> entrance;
    std::optional<Opening> exit;
    auto place = [&](char marker, Opening o, std::size_t line) {
      auto& slot = marker == kEntranceMarker ? entrance : exit;
      if (slot) fail(line, std::string("more than one \"") + marker + "\" marker");
      slot = o;
    };
    auto take_raw = [&](const char* what) {
      auto p = next_nonblank_raw();
      if (!p) fail(raw_.size(), std::string("topology: missing ") + what);
      ++pos_;
      return std::pair{*p + 1, normalize_quotes(std::string(raw_[*p]))};
    };
    auto boundary = [&](int row, Heading side, const char* what) {
      auto [line, text] = take_raw(what);
      auto toks = split_ws(text);
      if (static_cast<int>(toks.size()) != cols) fail(line, std::string("topology: ") + what + " needs one token per column");
      for (int c = 0; c < cols; ++c) {
        const std::string& t = toks[c];
        if (t.size() == 1 && (t[0] == kEntranceMarker || t[0] == kExitMarker)) {
          place(t[0], {row * cols + c, side}, line);
        } else if (t.find_first_not_of('-') != std::string::npos) {
          fail(line, "topology: unexpected token \"" + t + "\"");
        }
      }
    };

    boundary(0, Heading::North, "top boundary");
    for (int r = 0; r < rows; ++r) {
      auto [line, text] = take_raw("cell row");
      auto toks = split_ws(text);
      auto is_marker = [](const std::string& t) {
        return t.size() == 1 && (t[0] == kEntranceMarker || t[0] == kExitMarker);
      };
      std::size_t lo = 0;
      std::size_t hi = toks.size();
      if (!toks.empty() && is_marker(toks.front())) {
        place(toks.front()[0], {r * cols, Heading::West}, line);
        ++lo;
      }
      if (hi > lo && is_marker(toks.back())) {
        place(toks.back()[0], {r * cols + cols - 1, Heading::East}, line);
        --hi;
      }
      if (static_cast<int>(hi - lo) != cols) fail(line, "topology: cell row has the wrong number of zones");
      for (int c = 0; c < cols; ++c) {
        if (to_int(toks[lo + c]) != r * cols + c) fail(line, "topology: expected zone " + std::to_string(r * cols + c));
      }
    }
    boundary(rows - 1, Heading::South, "bottom boundary");

    if (!entrance) fail(last_raw(), "topology: no \"^\" entrance marker");
    if (!exit) fail(last_raw(), "topology: no \"x\" exit marker");
    return {*entrance, *exit};
  }

  std::size_t last_raw() const { return pos_; }

  std::vector<std::string_view> raw_;
  std::size_t pos_ = 0;
  std::size_t last_ = 1;
  std::vector<std::size_t> wall_lines_;
};

}  // namespace text_detail

/// The fixed-template textual description of `maze`. Byte-stable.
inline std::string serialize_text(const Maze& maze) {
  using namespace text_detail;
  const std::string item = "  ";
  const std::string sub = "    ";
  const std::string sketch = "      ";
  std::string out;
  auto line = [&out](const std::string& indent, const std::string& s) { out += indent + s + "\n"; };

  line("", kHeader);
  line(item, "- The floor is always composed of " + std::to_string(maze.cell_count()) +
                 " squared zones or positions, in a chess-board-like pattern");
  line(item, "- Size is " + std::to_string(maze.rows()) + " rows by " + std::to_string(maze.cols()) + " columns");
  line(item, numbering_sentence(maze.rows(), maze.cols()));
  line(item, kTopologyIntro);
  for (const auto& t : topology_lines(maze)) line(sketch, t);
  line(item, entry_sentence(maze.entrance().cell, maze.exit().cell));
  line(sub, "* ENTRANCE at " + std::to_string(maze.entrance().cell));
  line(sub, "* EXIT at " + std::to_string(maze.exit().cell));
  line(item, kWallRule);
  line(item, kWallListIntro);
  if (maze.walls().empty()) line(sub, kNoWalls);
  for (const Wall& w : maze.walls()) line(sub, "* " + std::to_string(w.a) + " and " + std::to_string(w.b));
  return out;
}

inline MazeDescription serialize(const Maze& maze, std::string maze_id = {}) {
  return {std::move(maze_id), serialize_text(maze)};
}

/// Inverse of serialize. Tolerates indentation, blank lines, wrapped lines
/// and typeset quotes; throws MalformedDescription otherwise.
inline Maze parse_description(std::string_view text) {
  return text_detail::DescriptionReader(text).read();
}

/// Box-drawing view of the maze for humans. Cells on `path` are bracketed.
inline std::string render_ascii(const Maze& maze, const std::vector<Cell>& path = {}) {
  using text_detail::marker_at;
  const int width = std::max(3, text_detail::digits(maze.cell_count() - 1) + 2);
  std::set<Cell> on_path;
  for (Cell c : path) {
    if (!maze.in_bounds(c)) throw DomainError("path cell out of bounds: " + std::to_string(c));
    on_path.insert(c);
  }

  auto border = [&](int row_above, int row_below) {
    std::string s = "+";
    for (int c = 0; c < maze.cols(); ++c) {
      std::string seg(width, '-');
      std::optional<char> m;
      if (row_above < 0) m = marker_at(maze, maze.cell_at(row_below, c), Heading::North);
      else if (row_below >= maze.rows()) m = marker_at(maze, maze.cell_at(row_above, c), Heading::South);
      else if (!maze.has_wall(maze.cell_at(row_above, c), maze.cell_at(row_below, c))) seg.assign(width, ' ');
      if (m) {
        seg.assign(width, ' ');
        seg[width / 2] = *m;
      }
      s += seg + "+";
    }
    return s;
  };

  std::string out = border(-1, 0) + "\n";
  for (int r = 0; r < maze.rows(); ++r) {
    const Cell first = maze.cell_at(r, 0);
    const Cell last = maze.cell_at(r, maze.cols() - 1);
    std::string s(1, marker_at(maze, first, Heading::West).value_or('|'));
    for (int c = 0; c < maze.cols(); ++c) {
      const Cell cell = maze.cell_at(r, c);
      const std::string num = text_detail::pad_left(std::to_string(cell), width - 2);
      s += on_path.contains(cell) ? "[" + num + "]" : " " + num + " ";
      if (c + 1 < maze.cols()) s += maze.has_wall(cell, cell + 1) ? '|' : ' ';
    }
    s += marker_at(maze, last, Heading::East).value_or('|');
    out += s + "\n";
    out += border(r, r + 1) + "\n";
  }
  return out;
}

}  // namespace mazetest
