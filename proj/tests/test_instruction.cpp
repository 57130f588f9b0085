#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "mazetest/instruction.hpp"
#include "test_support.hpp"

namespace mazetest {
namespace {

RejectReason reason_of(std::string_view line) {
  try {
    parse_line(line);
  } catch (const UnparseableLine& e) {
    return e.reason();
  }
  ADD_FAILURE() << "line parsed unexpectedly: " << line;
  return RejectReason::NoVerbMatch;
}

TEST(ParseLine, SolutionPhrasings) {
  EXPECT_EQ(parse_line("2. Turn to my left"), Instruction(Turn{TurnDirection::Left}));
  EXPECT_EQ(parse_line("Walk forward to position 7"), Instruction(Forward{7}));
  EXPECT_EQ(parse_line("Exit the maze from position 1."), Instruction(ExitAt{1}));
  EXPECT_EQ(parse_line("Start facing into the maze entrance and step into position 8"), Instruction(StepIn{8}));
  EXPECT_EQ(parse_line("Start facing into the maze at the \"^\" symbol and step into position 8."),
            Instruction(StepIn{8}));
  EXPECT_EQ(parse_line("step into position 12"), Instruction(StepIn{12}));
  EXPECT_EQ(parse_line("Step 4: Turn RIGHT"), Instruction(Turn{TurnDirection::Right}));
  EXPECT_EQ(parse_line("- go forward to position 3"), Instruction(Forward{3}));
  EXPECT_EQ(parse_line("Exit from position 4"), Instruction(ExitAt{4}));
}

TEST(ParseLine, RejectionReasons) {
  EXPECT_EQ(reason_of("hello world"), RejectReason::NoVerbMatch);
  EXPECT_EQ(reason_of(""), RejectReason::NoVerbMatch);
  EXPECT_EQ(reason_of("Walk forward"), RejectReason::NoPositionNumber);
  EXPECT_EQ(reason_of("Walk forward to position"), RejectReason::NoPositionNumber);
  EXPECT_EQ(reason_of("Exit the maze"), RejectReason::NoPositionNumber);
  EXPECT_EQ(reason_of("Step into position"), RejectReason::NoPositionNumber);
  EXPECT_EQ(reason_of("Turn left or right"), RejectReason::AmbiguousDirection);
  EXPECT_EQ(reason_of("Turn around"), RejectReason::AmbiguousDirection);
  EXPECT_EQ(reason_of("Walk forward to position 99999999999999"), RejectReason::NoPositionNumber);
  EXPECT_EQ(reason_of("Go to (1,3)"), RejectReason::NoVerbMatch);
  EXPECT_EQ(reason_of("Walk forward to position 7 and turn left"), RejectReason::NoVerbMatch);
}

TEST(ParseLine, CanonicalRenderRoundTripsEveryForm) {
  std::vector<Instruction> all;
  for (Cell c : {0, 1, 9, 10, 42, 999}) {
    all.emplace_back(StepIn{c});
    all.emplace_back(Forward{c});
    all.emplace_back(ExitAt{c});
  }
  all.emplace_back(Turn{TurnDirection::Left});
  all.emplace_back(Turn{TurnDirection::Right});
  for (const auto& i : all) {
    EXPECT_EQ(parse_line(canonical_render(i)), i) << canonical_render(i);
  }
}

TEST(ParseResponse, WorkedSolutionText) {
  const auto parsed = parse_response(testing::read_file(testing::fixture_path("worked_example_solution.txt")));
  EXPECT_EQ(parsed.instructions, testing::worked_solution());
  EXPECT_TRUE(parsed.rejected_lines.empty());
}

TEST(ParseResponse, EmptyAndBlank) {
  for (const char* text : {"", "\n\n", "   \n\t\n"}) {
    const auto parsed = parse_response(text);
    EXPECT_TRUE(parsed.instructions.empty());
    EXPECT_TRUE(parsed.rejected_lines.empty());
  }
}

TEST(ParseResponse, PreambleSkippedRejectedLineInsideKept) {
  const std::string text =
      "Here is the solution:\n"
      "1. Start facing into the maze entrance and step into position 8\n"
      "2. Turn left\n"
      "3. Look around carefully\n"
      "4. Walk forward to position 7\n"
      "Good luck!\n";
  const auto parsed = parse_response(text);
  EXPECT_EQ(parsed.preamble_lines, 1u);
  EXPECT_EQ(parsed.epilogue_lines, 1u);
  ASSERT_EQ(parsed.instructions.size(), 3u);
  ASSERT_EQ(parsed.rejected_lines.size(), 1u);
  EXPECT_EQ(parsed.rejected_lines[0].line, 4u);
  EXPECT_EQ(parsed.rejected_lines[0].text, "3. Look around carefully");
  EXPECT_EQ(parsed.instruction_lines, (std::vector<std::size_t>{2, 3, 5}));
  EXPECT_EQ(parsed.usable_prefix().size(), 2u);
}

TEST(ParseResponse, LeniencyCorpusParsesToWorkedSolution) {
  std::size_t files = 0;
  for (const auto& entry : std::filesystem::directory_iterator(testing::fixture_path("leniency"))) {
    const auto parsed = parse_response(testing::read_file(entry.path().string()));
    EXPECT_EQ(parsed.instructions, testing::worked_solution()) << entry.path();
    EXPECT_TRUE(parsed.rejected_lines.empty()) << entry.path();
    ++files;
  }
  EXPECT_GE(files, 20u);
}

// Random line soup: never throws, preserves order, and line accounting holds.
TEST(ParseResponse, PropertyAccountingAndOrder) {
  const std::vector<std::string> pool = {
      "Turn left", "Turn right", "Walk forward to position 3", "Exit the maze from position 1",
      "step into position 8", "blah", "", "   ", "Turn sideways", "1. Go forward to position 4",
      "Walk forward", "Note: watch out for walls", "\t"};
  std::mt19937 rng(5);
  for (int trial = 0; trial < 500; ++trial) {
    std::string text;
    std::vector<std::string> chosen;
    const int n = static_cast<int>(rng() % 12);
    for (int i = 0; i < n; ++i) {
      chosen.push_back(pool[rng() % pool.size()]);
      text += chosen.back() + "\n";
    }
    const auto parsed = parse_response(text);
    std::size_t nonblank = 0;
    std::vector<Instruction> expected;
    for (const auto& line : chosen) {
      if (detail::trim(line).empty()) continue;
      ++nonblank;
      if (auto i = try_parse_line(line)) expected.push_back(*i);
    }
    EXPECT_EQ(parsed.instructions, expected);
    EXPECT_EQ(parsed.instructions.size() + parsed.rejected_lines.size() + parsed.preamble_lines +
                  parsed.epilogue_lines,
              nonblank);
    EXPECT_TRUE(std::is_sorted(parsed.instruction_lines.begin(), parsed.instruction_lines.end()));
  }
}

}  // namespace
}  // namespace mazetest
