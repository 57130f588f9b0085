#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include "mazetest/oracle.hpp"
#include "mazetest/text.hpp"

namespace mazetest {

inline constexpr char kSystemPrompt[] =
    "You are an expert maze navigator. Your task is to provide clear, step-by-step instructions to solve mazes "
    "from a first-person perspective.\n"
    "\n"
    "When presented with a bird's-eye view text description of a maze do the following first:\n"
    "  Locate — Identify the entrance (\"^\" symbol) and exit (\"x\" symbol).\n"
    "  Analyze — Mentally visualize the maze from the entrance, evaluating all paths to the exit, avoiding "
    "any walls.\n"
    "  Optimize — Determine the shortest, most efficient route, favoring straight paths.\n"
    "  Instruct — Describe the optimal route as if you are walking it, using precise language.\n"
    "\n"
    "Instruction Guidelines:\n"
    "  Perspective — Maintain a strict first-person perspective throughout.\n"
    "  Directions — Use only \"forward\", \"left\", and \"right\".\n"
    "  Verbs — Begin each instruction with an action verb (e.g., \"Walk\", \"Turn\").\n"
    "  Positions — Reference numbered positions for orientation.\n"
    "\n"
    "Use the following format to describe the best path through the maze:\n"
    "  First instruction — \"Start facing into the maze at the \"^\" symbol and step into position "
    "[number].\"\n"
    "  Subsequent instructions — \"Turn to my [left/right]\" or \"Walk forward to position [number].\"\n"
    "  Final instruction — \"Exit the maze from position [number].\"\n"
    "\n"
    "Key Points:\n"
    "Describe the path as if you were in the maze, not observing it from above.\n"
    "Assume you can only see your immediate surroundings.\n"
    "Focus solely on navigation, omitting unnecessary details.\n"
    "Make sure to output one line per navigation step.";

inline constexpr char kTestQuestion[] =
    "Please provide step-by-step instructions to navigate the maze described below. Do it from a first-person "
    "perspective.";

enum class Role { System, User, Assistant };

inline const char* role_name(Role r) {
  switch (r) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Assistant: return "assistant";
  }
  return "?";
}

struct ChatMessage {
  Role role = Role::User;
  std::string content;
  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

/// `k` solved examples drawn from the shot pool starting at `offset`.
struct Scenario {
  std::string name;
  std::size_t k = 0;
  std::size_t offset = 0;
  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// zero-shot uses no examples, one-shot the first shot maze, few-shot the
/// next five, so the two example sets are disjoint.
inline Scenario scenario_from_name(std::string_view s) {
  if (s == "zero" || s == "zero-shot") return {"zero-shot", 0, 0};
  if (s == "one" || s == "one-shot") return {"one-shot", 1, 0};
  if (s == "few" || s == "few-shot") return {"few-shot", 5, 1};
  throw DomainError("unknown scenario: " + std::string(s));
}

inline std::vector<Scenario> default_scenarios() {
  return {scenario_from_name("zero"), scenario_from_name("one"), scenario_from_name("few")};
}

struct Shot {
  Maze maze;
  Solution solution;
};

inline std::string test_question(const Maze& maze) { return std::string(kTestQuestion) + "\n\n" + serialize_text(maze); }

inline std::vector<ChatMessage> build_messages(const Maze& test, const std::vector<Shot>& shots,
                                               const Scenario& scenario) {
  if (shots.size() != scenario.k)
    throw DomainError(scenario.name + " needs " + std::to_string(scenario.k) + " shots, got " +
                      std::to_string(shots.size()));
  std::vector<ChatMessage> out;
  out.reserve(2 + 2 * shots.size());
  out.push_back({Role::System, kSystemPrompt});
  for (const Shot& s : shots) {
    if (s.maze == test) throw DomainError("a shot maze equals the test maze");
    out.push_back({Role::User, test_question(s.maze)});
    out.push_back({Role::Assistant, render_solution_text(s.solution.instructions)});
  }
  out.push_back({Role::User, test_question(test)});
  return out;
}

inline std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 failed");
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

/// Digest over roles and contents; each part is length-prefixed so no two
/// message lists share an encoding.
inline std::string prompt_hash(const std::vector<ChatMessage>& messages) {
  std::string buf;
  for (const ChatMessage& m : messages) {
    buf += role_name(m.role);
    buf += ':';
    buf += std::to_string(m.content.size());
    buf += ':';
    buf += m.content;
    buf += '\n';
  }
  return sha256_hex(buf);
}

}  // namespace mazetest
