#pragma once

#include <cctype>
#include <charconv>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mazetest/maze.hpp"

namespace mazetest {

struct StepIn {
  Cell cell = 0;
  friend bool operator==(const StepIn&, const StepIn&) = default;
};

struct Turn {
  TurnDirection direction = TurnDirection::Left;
  friend bool operator==(const Turn&, const Turn&) = default;
};

struct Forward {
  Cell cell = 0;
  friend bool operator==(const Forward&, const Forward&) = default;
};

struct ExitAt {
  Cell cell = 0;
  friend bool operator==(const ExitAt&, const ExitAt&) = default;
};

/// One first-person navigation step. Cells are not bounds-checked here.
using Instruction = std::variant<StepIn, Turn, Forward, ExitAt>;

/// The canonical phrasing of each step; parse_line accepts it back.
inline std::string canonical_render(const Instruction& instr) {
  struct Visitor {
    std::string operator()(const StepIn& s) const {
      return "Start facing into the maze entrance and step into position " + std::to_string(s.cell);
    }
    std::string operator()(const Turn& t) const { return std::string("Turn ") + turn_name(t.direction); }
    std::string operator()(const Forward& f) const { return "Walk forward to position " + std::to_string(f.cell); }
    std::string operator()(const ExitAt& e) const { return "Exit the maze from position " + std::to_string(e.cell); }
  };
  return std::visit(Visitor{}, instr);
}

/// Numbered one-step-per-line text ("1. ...\n2. ...\n").
inline std::string render_solution_text(const std::vector<Instruction>& instrs) {
  std::string out;
  for (std::size_t i = 0; i < instrs.size(); ++i) {
    out += std::to_string(i + 1) + ". " + canonical_render(instrs[i]) + "\n";
  }
  return out;
}

enum class RejectReason { NoVerbMatch, NoPositionNumber, AmbiguousDirection };

constexpr const char* reject_reason_name(RejectReason r) noexcept {
  switch (r) {
    case RejectReason::NoVerbMatch: return "no-verb-match";
    case RejectReason::NoPositionNumber: return "no-position-number";
    case RejectReason::AmbiguousDirection: return "ambiguous-direction";
  }
  return "unknown";
}

class UnparseableLine : public std::runtime_error {
 public:
  UnparseableLine(RejectReason reason, const std::string& line)
      : std::runtime_error(std::string(reject_reason_name(reason)) + ": " + line), reason_(reason) {}
  RejectReason reason() const noexcept { return reason_; }

 private:
  RejectReason reason_;
};

struct RejectedLine {
  std::size_t line = 0;  // 1-based
  std::string text;
  RejectReason reason = RejectReason::NoVerbMatch;
  friend bool operator==(const RejectedLine&, const RejectedLine&) = default;
};

struct ParsedResponse {
  std::vector<Instruction> instructions;
  /// 1-based source line of each entry in `instructions`.
  std::vector<std::size_t> instruction_lines;
  /// Rejected lines inside the instruction block (first to last accepted line).
  std::vector<RejectedLine> rejected_lines;
  std::size_t preamble_lines = 0;
  std::size_t epilogue_lines = 0;

  /// Instructions before the first rejected line; only these can be scored.
  std::vector<Instruction> usable_prefix() const {
    if (rejected_lines.empty()) return instructions;
    const std::size_t cut = rejected_lines.front().line;
    std::vector<Instruction> out;
    for (std::size_t i = 0; i < instructions.size() && instruction_lines[i] < cut; ++i)
      out.push_back(instructions[i]);
    return out;
  }

  bool has_rejected_inside() const noexcept { return !rejected_lines.empty(); }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline bool is_digit(char c) { return c >= '0' && c <= '9'; }

/// Drops list markers: "- ", "* ", "3.", "3)", "(3)", "#3", "Step 3:".
inline std::string_view strip_enumeration(std::string_view s) {
  for (;;) {
    s = trim(s);
    if (s.empty()) return s;
    if ((s.front() == '-' || s.front() == '+') && s.size() > 1 && s[1] == ' ') {
      s.remove_prefix(2);
      continue;
    }
    if (s.starts_with("\xe2\x80\xa2")) {  // bullet
      s.remove_prefix(3);
      continue;
    }
    std::size_t i = 0;
    if (s.front() == '(' || s.front() == '#') i = 1;
    std::size_t digits = i;
    while (digits < s.size() && is_digit(s[digits])) ++digits;
    if (digits > i && digits < s.size() && (s[digits] == '.' || s[digits] == ')' || s[digits] == ':')) {
      s.remove_prefix(digits + 1);
      continue;
    }
    if (s.front() == '#' && digits > i) {
      s.remove_prefix(digits);
      continue;
    }
    if (s.size() > 4 && std::tolower(static_cast<unsigned char>(s[0])) == 's' &&
        std::tolower(static_cast<unsigned char>(s[1])) == 't' && std::tolower(static_cast<unsigned char>(s[2])) == 'e' &&
        std::tolower(static_cast<unsigned char>(s[3])) == 'p') {
      std::size_t j = 4;
      while (j < s.size() && s[j] == ' ') ++j;
      std::size_t k = j;
      while (k < s.size() && is_digit(s[k])) ++k;
      if (k > j && (k == s.size() || s[k] == ':' || s[k] == '.' || s[k] == ')' || s[k] == ' ' || s[k] == '-')) {
        s.remove_prefix(k < s.size() ? k + 1 : k);
        continue;
      }
    }
    return s;
  }
}

/// Lowercase alphanumeric words; everything else separates words.
inline std::vector<std::string> words_of(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    const auto u = static_cast<unsigned char>(ch);
    if (std::isalnum(u)) {
      cur.push_back(static_cast<char>(std::tolower(u)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

inline bool is_number(const std::string& w) {
  return !w.empty() && std::all_of(w.begin(), w.end(), [](char c) { return is_digit(c); });
}

/// Recursive-descent matcher over a word list.
class WordCursor {
 public:
  explicit WordCursor(const std::vector<std::string>& words) : words_(words) {}

  bool done() const { return pos_ == words_.size(); }
  bool accept(std::string_view w) {
    if (!done() && words_[pos_] == w) {
      ++pos_;
      return true;
    }
    return false;
  }
  template <typename... Ws>
  bool accept_any(Ws... ws) {
    return (accept(ws) || ...);
  }
  std::optional<Cell> number() {
    if (done() || !is_number(words_[pos_])) return std::nullopt;
    Cell value = 0;
    const std::string& w = words_[pos_];
    auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), value);
    if (ec != std::errc() || ptr != w.data() + w.size()) return std::nullopt;
    ++pos_;
    return value;
  }
  std::size_t position() const { return pos_; }
  void seek(std::size_t p) { pos_ = p; }

 private:
  const std::vector<std::string>& words_;
  std::size_t pos_ = 0;
};

inline bool has_word(const std::vector<std::string>& words, std::string_view w) {
  return std::find(words.begin(), words.end(), w) != words.end();
}

// position_ref := "position" NUMBER
inline std::optional<Cell> position_ref(WordCursor& cur) {
  const std::size_t save = cur.position();
  if (cur.accept("position")) {
    if (auto n = cur.number()) return n;
  }
  cur.seek(save);
  return std::nullopt;
}

// step_in := ["start" {word} "and"] "step" ("into" | "in" "to") position_ref
inline std::optional<Instruction> match_step_in(const std::vector<std::string>& words, RejectReason& why) {
  std::size_t start = 0;
  if (!words.empty() && words[0] == "start") {
    // The filler between "start" and "and" is free text; take the last "and step".
    std::size_t found = words.size();
    for (std::size_t i = 1; i + 1 < words.size(); ++i)
      if (words[i] == "and" && words[i + 1] == "step") found = i + 1;
    if (found == words.size()) return std::nullopt;
    start = found;
  }
  if (start >= words.size() || words[start] != "step") return std::nullopt;
  std::vector<std::string> tail(words.begin() + static_cast<std::ptrdiff_t>(start), words.end());
  WordCursor cur(tail);
  cur.accept("step");
  if (!(cur.accept("into") || (cur.accept("in") && cur.accept("to")))) return std::nullopt;
  auto n = position_ref(cur);
  if (!n) {
    why = RejectReason::NoPositionNumber;
    return std::nullopt;
  }
  if (!cur.done()) return std::nullopt;
  return StepIn{*n};
}

// turn := "turn" ["to" ("my" | "the")] ("left" | "right")
inline std::optional<Instruction> match_turn(const std::vector<std::string>& words, RejectReason& why) {
  if (words.empty() || words[0] != "turn") return std::nullopt;
  const bool left = has_word(words, "left");
  const bool right = has_word(words, "right");
  if (left == right) {
    why = RejectReason::AmbiguousDirection;
    return std::nullopt;
  }
  WordCursor cur(words);
  cur.accept("turn");
  if (cur.accept("to") && !cur.accept_any("my", "the")) return std::nullopt;
  std::optional<Instruction> out;
  if (cur.accept("left")) out = Turn{TurnDirection::Left};
  else if (cur.accept("right")) out = Turn{TurnDirection::Right};
  if (!out || !cur.done()) return std::nullopt;
  return out;
}

// forward := ("walk" | "move" | "go") "forward" ("to" | "into") position_ref
inline std::optional<Instruction> match_forward(const std::vector<std::string>& words, RejectReason& why) {
  WordCursor cur(words);
  if (!cur.accept_any("walk", "move", "go")) return std::nullopt;
  if (!cur.accept("forward")) return std::nullopt;
  if (!cur.accept_any("to", "into")) {
    why = RejectReason::NoPositionNumber;
    return std::nullopt;
  }
  auto n = position_ref(cur);
  if (!n) {
    why = RejectReason::NoPositionNumber;
    return std::nullopt;
  }
  if (!cur.done()) return std::nullopt;
  return Forward{*n};
}

// exit := ("exit" | "leave") ["the" "maze"] ("from" | "at") position_ref
inline std::optional<Instruction> match_exit(const std::vector<std::string>& words, RejectReason& why) {
  WordCursor cur(words);
  if (!cur.accept_any("exit", "leave")) return std::nullopt;
  if (cur.accept("the") && !cur.accept("maze")) return std::nullopt;
  if (!cur.accept_any("from", "at")) {
    why = RejectReason::NoPositionNumber;
    return std::nullopt;
  }
  auto n = position_ref(cur);
  if (!n) {
    why = RejectReason::NoPositionNumber;
    return std::nullopt;
  }
  if (!cur.done()) return std::nullopt;
  return ExitAt{*n};
}

}  // namespace detail

/// Parses one response line. Throws UnparseableLine.
inline Instruction parse_line(std::string_view line) {
  std::string cleaned;
  for (char c : line)
    if (c != '*' && c != '`' && c != '_') cleaned.push_back(c);
  const auto body = detail::strip_enumeration(cleaned);
  const auto words = detail::words_of(body);
  RejectReason why = RejectReason::NoVerbMatch;
  if (auto i = detail::match_step_in(words, why)) return *i;
  if (auto i = detail::match_turn(words, why)) return *i;
  if (auto i = detail::match_forward(words, why)) return *i;
  if (auto i = detail::match_exit(words, why)) return *i;
  throw UnparseableLine(why, std::string(detail::trim(line)));
}

inline std::optional<Instruction> try_parse_line(std::string_view line, RejectReason* why = nullptr) {
  try {
    return parse_line(line);
  } catch (const UnparseableLine& e) {
    if (why) *why = e.reason();
    return std::nullopt;
  }
}

/// Splits a whole model response into instructions. Never throws for any
/// input text; prose before the first and after the last recognised
/// instruction is skipped.
inline ParsedResponse parse_response(std::string_view text) {
  struct Line {
    std::size_t number;
    std::string_view text;
    std::optional<Instruction> instr;
    RejectReason why;
  };
  std::vector<Line> lines;
  std::size_t number = 0;
  std::size_t begin = 0;
  while (begin <= text.size()) {
    std::size_t end = text.find('\n', begin);
    if (end == std::string_view::npos) end = text.size();
    ++number;
    std::string_view raw = text.substr(begin, end - begin);
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    if (!detail::trim(raw).empty()) {
      RejectReason why = RejectReason::NoVerbMatch;
      auto instr = try_parse_line(raw, &why);
      lines.push_back({number, raw, std::move(instr), why});
    }
    if (end == text.size()) break;
    begin = end + 1;
  }

  ParsedResponse out;
  std::size_t first = lines.size();
  std::size_t last = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].instr) {
      if (first == lines.size()) first = i;
      last = i;
    }
  }
  if (first == lines.size()) {
    out.preamble_lines = lines.size();
    return out;
  }
  out.preamble_lines = first;
  out.epilogue_lines = lines.size() - last - 1;
  for (std::size_t i = first; i <= last; ++i) {
    if (lines[i].instr) {
      out.instructions.push_back(*lines[i].instr);
      out.instruction_lines.push_back(lines[i].number);
    } else {
      out.rejected_lines.push_back({lines[i].number, std::string(detail::trim(lines[i].text)), lines[i].why});
    }
  }
  return out;
}

}  // namespace mazetest
