#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mazetest/instruction.hpp"
#include "mazetest/maze.hpp"

namespace mazetest {

/// ProviderError is never produced by the simulator; the harness uses it for
/// trials whose model call failed after retries.
enum class FaultKind {
  WallBlocked,
  OffGrid,
  NotOnRay,
  NotStarted,
  AlreadyExited,
  WrongStartCell,
  WrongExitCell,
  WrongExitHeading,
  UnparseableStep,
  OffReference,
  ProviderError,
};

inline constexpr std::array<FaultKind, 11> kAllFaultKinds = {
    FaultKind::WallBlocked,     FaultKind::OffGrid,         FaultKind::NotOnRay,      FaultKind::NotStarted,
    FaultKind::AlreadyExited,   FaultKind::WrongStartCell,  FaultKind::WrongExitCell, FaultKind::WrongExitHeading,
    FaultKind::UnparseableStep, FaultKind::OffReference,    FaultKind::ProviderError,
};

constexpr const char* fault_kind_name(FaultKind k) noexcept {
  switch (k) {
    case FaultKind::WallBlocked: return "WallBlocked";
    case FaultKind::OffGrid: return "OffGrid";
    case FaultKind::NotOnRay: return "NotOnRay";
    case FaultKind::NotStarted: return "NotStarted";
    case FaultKind::AlreadyExited: return "AlreadyExited";
    case FaultKind::WrongStartCell: return "WrongStartCell";
    case FaultKind::WrongExitCell: return "WrongExitCell";
    case FaultKind::WrongExitHeading: return "WrongExitHeading";
    case FaultKind::UnparseableStep: return "UnparseableStep";
    case FaultKind::OffReference: return "OffReference";
    case FaultKind::ProviderError: return "ProviderError";
  }
  return "Unknown";
}

inline FaultKind fault_kind_from_name(std::string_view name) {
  for (FaultKind k : kAllFaultKinds)
    if (name == fault_kind_name(k)) return k;
  throw DomainError("unknown fault kind: " + std::string(name));
}

struct Fault {
  FaultKind kind = FaultKind::NotStarted;
  std::string detail;
  friend bool operator==(const Fault&, const Fault&) = default;
};

using StepOutcome = std::variant<Pose, Fault>;

inline bool is_ok(const StepOutcome& o) noexcept { return std::holds_alternative<Pose>(o); }

struct SimOptions {
  /// Accept ExitAt at the exit cell regardless of heading.
  bool lenient_exit = false;
};

/// Heading that points from the entrance side into the grid.
inline Heading initial_heading(const Maze& maze) noexcept { return opposite(maze.entrance().side); }

/// Executes a single instruction. `pose` is empty before the navigator has
/// stepped in. Never throws; violations come back as Fault values.
inline StepOutcome step(const Maze& maze, const std::optional<Pose>& pose, const Instruction& instr,
                        const SimOptions& options = {}) {
  auto fault = [](FaultKind k, std::string detail) -> StepOutcome { return Fault{k, std::move(detail)}; };

  if (const auto* s = std::get_if<StepIn>(&instr)) {
    if (pose) return fault(FaultKind::WrongStartCell, "already inside the maze");
    if (s->cell != maze.entrance().cell)
      return fault(FaultKind::WrongStartCell, "entrance is position " + std::to_string(maze.entrance().cell) +
                                                  ", not " + std::to_string(s->cell));
    return Pose{s->cell, initial_heading(maze)};
  }

  if (!pose) return fault(FaultKind::NotStarted, "no step into the maze yet");

  if (const auto* t = std::get_if<Turn>(&instr)) return Pose{pose->cell, rotate(pose->heading, t->direction)};

  if (const auto* f = std::get_if<Forward>(&instr)) {
    if (!maze.in_bounds(f->cell)) return fault(FaultKind::OffGrid, "position " + std::to_string(f->cell) + " does not exist");
    Cell cur = pose->cell;
    auto next = maze.adjacent(cur, pose->heading);
    if (!next)
      return fault(FaultKind::OffGrid, std::string("facing ") + heading_letter(pose->heading) + " at the boundary of " +
                                           std::to_string(cur));
    // Walk the ray until the target, checking each pair.
    std::vector<Cell> ray;
    for (auto c = next; c; c = maze.adjacent(*c, pose->heading)) ray.push_back(*c);
    if (std::find(ray.begin(), ray.end(), f->cell) == ray.end())
      return fault(FaultKind::NotOnRay, "position " + std::to_string(f->cell) + " is not straight ahead (" +
                                            heading_letter(pose->heading) + ") of " + std::to_string(cur));
    for (Cell c : ray) {
      if (maze.has_wall(cur, c))
        return fault(FaultKind::WallBlocked, "wall between " + std::to_string(std::min(cur, c)) + " and " +
                                                 std::to_string(std::max(cur, c)));
      cur = c;
      if (c == f->cell) break;
    }
    return Pose{f->cell, pose->heading};
  }

  const auto& e = std::get<ExitAt>(instr);
  if (e.cell != maze.exit().cell || pose->cell != e.cell)
    return fault(FaultKind::WrongExitCell, "exit is position " + std::to_string(maze.exit().cell) + ", standing at " +
                                               std::to_string(pose->cell));
  if (!options.lenient_exit && pose->heading != maze.exit().side)
    return fault(FaultKind::WrongExitHeading, std::string("facing ") + heading_letter(pose->heading) +
                                                  ", exit is to the " + heading_letter(maze.exit().side));
  return *pose;
}

struct Complete {
  friend bool operator==(const Complete&, const Complete&) = default;
};

struct FailedAt {
  std::size_t index = 0;
  Fault fault;
  friend bool operator==(const FailedAt&, const FailedAt&) = default;
};

using TraceOutcome = std::variant<Complete, FailedAt>;

struct ExecutionTrace {
  /// Pose after each executed in-maze step. A successful exit adds no pose.
  std::vector<Pose> poses;
  TraceOutcome outcome = Complete{};
  /// Steps that executed without a fault.
  std::size_t ok_steps = 0;

  bool complete() const noexcept { return std::holds_alternative<Complete>(outcome); }
  const FailedAt* failure() const noexcept { return std::get_if<FailedAt>(&outcome); }

  friend bool operator==(const ExecutionTrace&, const ExecutionTrace&) = default;
};

/// Runs instructions in order, stopping at the first fault.
inline ExecutionTrace execute(const Maze& maze, const std::vector<Instruction>& instrs,
                              const SimOptions& options = {}) {
  ExecutionTrace trace;
  std::optional<Pose> pose;
  bool exited = false;
  for (std::size_t i = 0; i < instrs.size(); ++i) {
    if (exited) {
      trace.outcome = FailedAt{i, {FaultKind::AlreadyExited, "instruction after leaving the maze"}};
      return trace;
    }
    StepOutcome out = step(maze, pose, instrs[i], options);
    if (auto* f = std::get_if<Fault>(&out)) {
      trace.outcome = FailedAt{i, std::move(*f)};
      return trace;
    }
    ++trace.ok_steps;
    if (std::holds_alternative<ExitAt>(instrs[i])) {
      exited = true;
    } else {
      pose = std::get<Pose>(out);
      trace.poses.push_back(*pose);
    }
  }
  if (instrs.empty()) {
    trace.outcome = FailedAt{0, {FaultKind::NotStarted, "no instructions"}};
  } else if (!exited) {
    trace.outcome = FailedAt{instrs.size(), {FaultKind::WrongExitCell, "instructions ended inside the maze"}};
  }
  return trace;
}

}  // namespace mazetest
