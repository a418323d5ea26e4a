#include <gtest/gtest.h>

#include "support.hpp"

using namespace puzznic;
using namespace testing_support;

namespace {

ErrorKind parse_error(const std::string& text, ParseOptions opts = {}) {
  try {
    parse_level(text, opts);
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error for:\n" << text;
  return ErrorKind::LevelInvalid;
}

const char* kA13Printed =
    "#####\n"
    "#R R#\n"
    "#P B#\n"
    "## ##\n"
    "#   #\n"
    "#B P#\n"
    "#####\n";

}  // namespace

TEST(ParseLevel, AllWalls) {
  LevelFile lf = parse_level("###\n###\n###\n");
  EXPECT_EQ(lf.grid.height(), 3);
  EXPECT_EQ(lf.grid.width(), 3);
  for (Cell c : lf.grid.cells()) EXPECT_TRUE(c.is_wall());
}

TEST(ParseLevel, OpenBorderRejected) {
  EXPECT_EQ(parse_error("#.##\n#..#\n####\n"), ErrorKind::NoPerimeter);
}

TEST(ParseLevel, A13AsPrinted) {
  LevelFile lf = parse_level(kA13Printed);
  // Hand transcription of the rows, independent of the parser.
  Grid expect(7, 5, Cell::wall());
  const int R = 1, P = 2, B = 3;
  for (auto [r, c] : {std::pair{2, 3}, {3, 3}, {4, 3}, {5, 2}, {5, 3}, {5, 4}, {6, 3}}) expect.set(r, c, Cell::empty());
  expect.set(2, 2, Cell::pattern(R));
  expect.set(2, 4, Cell::pattern(R));
  expect.set(3, 2, Cell::pattern(P));
  expect.set(3, 4, Cell::pattern(B));
  expect.set(6, 2, Cell::pattern(B));
  expect.set(6, 4, Cell::pattern(P));
  EXPECT_EQ(lf.grid, expect);
  PatternCounts pc = pattern_counts(lf.grid);
  EXPECT_EQ(pc[R], 2);
  EXPECT_EQ(pc[P], 2);
  EXPECT_EQ(pc[B], 2);
  EXPECT_EQ(lf.symbol_for(R), 'R');
  EXPECT_EQ(lf.symbol_for(P), 'P');
  EXPECT_EQ(lf.symbol_for(B), 'B');
}

TEST(ParseLevel, BundledA13MatchesPrintedForm) {
  LevelFile bundled = parse_level(read_file(std::filesystem::path(PUZZNIC_CORPUS_DIR) / "5x7-ps1-a13.lvl"));
  EXPECT_EQ(bundled.grid, parse_level(kA13Printed).grid);
  EXPECT_EQ(bundled.name, "5x7-ps1-a13");
}

TEST(ParseLevel, Diagnostics) {
  EXPECT_EQ(parse_error("#####\n#.X.#\n#####\n"), ErrorKind::BadChar);
  EXPECT_EQ(parse_error("#####\n#.R.#\n#...#\n#####\n"), ErrorKind::NotQuiescent);
  EXPECT_EQ(parse_error("#####\n#RR.#\n#####\n"), ErrorKind::NotQuiescent);
  EXPECT_EQ(parse_error(std::string(33, '#') + "\n" + std::string(33, '#') + "\n" + std::string(33, '#') + "\n"),
            ErrorKind::TooLarge);
  EXPECT_EQ(parse_error("##\n##\n"), ErrorKind::TooSmall);
  EXPECT_EQ(parse_error("#####\n#RPBG#\n#VOYC#\n#L12##\n#####\n"), ErrorKind::TooManyPatterns);
  ParseOptions strict;
  strict.pad_ragged = false;
  EXPECT_EQ(parse_error("#####\n#.#\n#####\n", strict), ErrorKind::RaggedRows);
}

TEST(ParseLevel, DiagnosticsCarryPositions) {
  try {
    parse_level("#####\n#.X.#\n#####\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 2, col 3"), std::string::npos) << e.what();
  }
  try {
    parse_level("#####\n#.R.#\n#...#\n#####\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 2, col 3"), std::string::npos) << e.what();
  }
}

TEST(ParseLevel, ShortLinesArePaddedWithWalls) {
  LevelFile lf = parse_level("######\n#..#\n######\n");
  EXPECT_EQ(lf.grid.width(), 6);
  EXPECT_TRUE(lf.grid.at(2, 5).is_wall());
  EXPECT_TRUE(lf.grid.at(2, 6).is_wall());
}

TEST(ParseLevel, BomCrlfAndComments) {
  LevelFile lf = parse_level("\xEF\xBB\xBF; name: tiny\r\n#####\r\n#...#\r\n#R.R#\r\n#####\r\n");
  EXPECT_EQ(lf.name, "tiny");
  EXPECT_EQ(lf.grid, parse_level("#####\n#...#\n#R.R#\n#####\n").grid);
}

TEST(ParseLevel, DigitsAreSymbols) {
  LevelFile lf = parse_level("#####\n#1.2#\n#####\n");
  EXPECT_EQ(lf.grid.at(2, 2), Cell::pattern(1));
  EXPECT_EQ(lf.grid.at(2, 4), Cell::pattern(2));
  EXPECT_EQ(emit_level(lf), "#####\n#1.2#\n#####\n");
}

TEST(ParseLevel, PreResolveCountsMatches) {
  ParseOptions opts;
  opts.pre_resolve = true;
  LevelFile lf = parse_level("#####\n#R..#\n#B..#\n#BR.#\n#####\n", opts);
  EXPECT_EQ(lf.pre_resolve_matches, 2);
  EXPECT_TRUE(is_goal(lf.grid));
}

TEST(ParseLevel, ArbitraryBytesNeverCrash) {
  std::mt19937 rng(99);
  const std::string alphabet = "#. RPB\n\n\r;x19\xEF";
  for (int i = 0; i < 5000; ++i) {
    std::string text;
    const int n = static_cast<int>(rng() % 80);
    for (int k = 0; k < n; ++k)
      text.push_back(rng() % 4 ? alphabet[rng() % alphabet.size()] : static_cast<char>(rng() % 256));
    try {
      LevelFile lf = parse_level(text);
      EXPECT_TRUE(lf.grid.has_wall_perimeter());
      EXPECT_FALSE(first_non_quiescent(lf.grid).has_value());
    } catch (const Error& e) {
      EXPECT_GT(std::string(e.what()).size(), 0u);
    }
  }
}

TEST(EmitLevel, RoundTripOnCorpus) {
  for (const auto& lvl : corpus()) {
    std::string text = read_file(std::filesystem::path(PUZZNIC_CORPUS_DIR) / (lvl.name + ".lvl"));
    EXPECT_EQ(emit_level(lvl.file), text) << lvl.name;
    EXPECT_EQ(parse_level(emit_level(lvl.file.grid)).grid, lvl.file.grid) << lvl.name;
  }
}

TEST(EmitLevel, AllWallGrid) { EXPECT_EQ(emit_level(Grid(3, 4, Cell::wall())), "####\n####\n####\n"); }

TEST(EmitLevel, A13Golden) {
  EXPECT_EQ(emit_level(parse_level(kA13Printed)),
            read_file(std::filesystem::path(PUZZNIC_GOLDEN_DIR) / "a13.lvl"));
}

TEST(Plan, EmptyDocument) { EXPECT_TRUE(parse_plan("").moves.empty()); }

TEST(Plan, SingleLine) {
  Plan p = parse_plan("3 2 R\n");
  ASSERT_EQ(p.moves.size(), 1u);
  EXPECT_EQ(p.moves[0], (Move{3, 2, Direction::Right}));
}

TEST(Plan, CommentsAndBlankLinesSkipped) {
  Plan p = parse_plan("# plan\n\n3 2 R\n  \n4 5 L\n");
  EXPECT_EQ(p.moves.size(), 2u);
}

TEST(Plan, BadLineReportsLineNumber) {
  try {
    parse_plan("3 2 R\n3 2 X\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::BadMoveLine);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(Plan, RoundTripOnPlannerOutput) {
  for (const auto& lvl : corpus()) {
    if (lvl.name != "shelves") continue;
    SearchResult r = solve(QuiescentState::from(lvl.file.grid), 100, Algorithm::AStar);
    ASSERT_EQ(r.outcome, Outcome::Solved);
    ASSERT_GE(r.plan.moves.size(), 10u);
    std::string text = emit_plan(r.plan);
    EXPECT_EQ(parse_plan(text), r.plan);
    EXPECT_EQ(emit_plan(parse_plan(text)), text);
  }
}

TEST(RenderTrace, NoEventsShowsInitialOnly) {
  Grid g = parse_level("###\n#.#\n###\n").grid;
  EXPECT_EQ(render_trace(Trace{g, {}}), "    1 ###\n    1 #.#\n    1 ###\n");
}

TEST(RenderTrace, MoveTagged) {
  Grid g = parse_level("#####\n#...#\n#R.R#\n#####\n").grid;
  Replay r = replay(QuiescentState::from(g), {{3, 2, Direction::Right}});
  std::string text = render_trace(r.trace);
  EXPECT_EQ(text.substr(0, 6), "M   1 ");
  EXPECT_NE(text.find("*   2 #.RR#"), std::string::npos);
}

TEST(RenderTrace, CascadeShowsMatchesInOrder) {
  Grid start(6, 5, Cell::wall());
  for (int r = 2; r <= 5; ++r)
    for (int c = 2; c <= 4; ++c) start.set(r, c, Cell::empty());
  start.set(3, 2, Cell::pattern(1));
  start.set(4, 2, Cell::pattern(4));
  start.set(4, 3, Cell::pattern(4));
  start.set(5, 3, Cell::wall());
  start.set(5, 2, Cell::pattern(1));
  std::string text = render_trace(Trace{start, resolve(start).events});
  std::string tags(1, text[0]);
  for (std::size_t i = text.find("\n\n"); i != std::string::npos; i = text.find("\n\n", i + 1))
    tags.push_back(text[i + 2]);
  EXPECT_EQ(tags, "*F* ");
}
