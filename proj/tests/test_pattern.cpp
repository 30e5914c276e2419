#include <gtest/gtest.h>

#include <random>

#include "test_util.hpp"

using namespace ppmdl;
using testutil::times;

namespace {

struct Fixture : ::testing::Test {
  Alphabet al;
  EventId a = al.intern("a"), b = al.intern("b"), c = al.intern("c");

  PatternTree tree(const std::string& s) { return parse_tree(s, al); }
  Pattern pat(const std::string& s) { return parse_pattern(s, al); }
  std::vector<Occurrence> occs(std::initializer_list<std::pair<Time, char>> list) {
    std::vector<Occurrence> out;
    for (auto [t, ch] : list) out.push_back({t, *al.find(std::string(1, ch))});
    return out;
  }
};

}  // namespace

// ─── cycles ──────────────────────────────────────────────────────────────

TEST(Cycle, CoverExamples) {
  EXPECT_EQ(cycle_cover({0, 4, 2, 2, {1, 0, -1}}), (std::vector<Time>{2, 5, 7, 8}));
  EXPECT_EQ(cycle_cover({0, 3, 13, 0, {0, 0}}), (std::vector<Time>{0, 13, 26}));
  EXPECT_THROW(cycle_cover({0, 3, 5, 0, {-5, 0}}), InvalidCycleError);
  EXPECT_THROW(cycle_cover({0, 1, 5, 0, {}}), InvalidCycleError);
  EXPECT_THROW(cycle_cover({0, 3, 0, 0, {1, 1}}), InvalidCycleError);
  EXPECT_THROW(cycle_cover({0, 3, 5, 0, {1}}), InvalidCycleError);
}

TEST(Cycle, SpanMatchesCover) {
  Cycle c{0, 4, 2, 2, {1, 0, -1}};
  auto ts = cycle_cover(c);
  EXPECT_EQ(ts.back() - ts.front(), c.span());
}

TEST(Cycle, FitExamples) {
  std::vector<Time> t1{2, 5, 7, 8};
  auto c1 = fit_cycle(t1, 0);
  EXPECT_EQ(c1.period, 2);
  EXPECT_EQ(c1.corrections, (std::vector<Time>{1, 0, -1}));
  std::vector<Time> t2{0, 7, 14, 21};
  EXPECT_EQ(fit_cycle(t2, 0).corrections, (std::vector<Time>{0, 0, 0}));
  std::vector<Time> t3{2, 13, 26};
  auto c3 = fit_cycle(t3, 0);
  EXPECT_EQ(c3.period, 13);
  EXPECT_EQ(c3.corrections, (std::vector<Time>{-2, 0}));
  std::vector<Time> one{4};
  EXPECT_THROW(fit_cycle(one, 0), DomainError);
}

TEST(Cycle, FitRoundTripsRandomLists) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<Time> ts{static_cast<Time>(rng() % 10)};
    int n = 2 + static_cast<int>(rng() % 12);
    for (int i = 1; i < n; ++i) ts.push_back(ts.back() + 1 + static_cast<Time>(rng() % 9));
    auto c = fit_cycle(ts, 0);
    EXPECT_EQ(cycle_cover(c), ts);
    // refitting a reconstructed cover is stable
    auto again = fit_cycle(cycle_cover(c), 0);
    EXPECT_EQ(cycle_cover(again), ts);
  }
}

// ─── trees ───────────────────────────────────────────────────────────────

TEST_F(Fixture, ExpandMatchesPrintedLists) {
  EXPECT_EQ(occs_star(tree("[r=4 p=2](a)")), occs({{0, 'a'}, {2, 'a'}, {4, 'a'}, {6, 'a'}}));
  EXPECT_EQ(occs_star(tree("[r=3 p=13](a)")), occs({{0, 'a'}, {13, 'a'}, {26, 'a'}}));
  EXPECT_EQ(occs_star(tree("[r=3 p=13]([r=4 p=2](a))")),
            occs({{0, 'a'}, {2, 'a'}, {4, 'a'}, {6, 'a'}, {13, 'a'}, {15, 'a'}, {17, 'a'}, {19, 'a'}, {26, 'a'},
                  {28, 'a'}, {30, 'a'}, {32, 'a'}}));
  EXPECT_EQ(occs_star(tree("[r=4 p=2]([r=3 p=13](a))")),
            occs({{0, 'a'}, {13, 'a'}, {26, 'a'}, {2, 'a'}, {15, 'a'}, {28, 'a'}, {4, 'a'}, {17, 'a'}, {30, 'a'},
                  {6, 'a'}, {19, 'a'}, {32, 'a'}}));
  EXPECT_EQ(occs_star(tree("[r=3 p=13](b [d=3] a [d=1] c)")),
            occs({{0, 'b'}, {3, 'a'}, {4, 'c'}, {13, 'b'}, {16, 'a'}, {17, 'c'}, {26, 'b'}, {29, 'a'}, {30, 'c'}}));
}

TEST_F(Fixture, ExpansionLeafIds) {
  auto x = expand_tree(tree("[r=2 p=10](b [d=3] [r=2 p=1](a))"));
  ASSERT_EQ(x.ids.size(), 6u);
  EXPECT_EQ(x.ids[0].path, (std::vector<int>{0}));
  EXPECT_EQ(x.ids[0].reps, (std::vector<int>{0}));
  EXPECT_EQ(x.ids[2].path, (std::vector<int>{1, 0}));
  EXPECT_EQ(x.ids[2].reps, (std::vector<int>{0, 1}));
  EXPECT_EQ(x.ids[5].reps, (std::vector<int>{1, 1}));
  EXPECT_EQ(times(x.perfect), (std::vector<Time>{0, 3, 4, 10, 13, 14}));
}

TEST_F(Fixture, AccumulateReproducesExampleSequences) {
  auto p31 = pat("[r=3 p=13]([r=4 p=2](a)) @ tau=2 E=[1,0,-1,-2,0,3,-1,0,1,1,-1]");
  EXPECT_EQ(times(pattern_occurrences(p31)), (std::vector<Time>{2, 5, 7, 8, 13, 15, 20, 21, 26, 29, 32, 33}));
  auto p61 = pat("[r=3 p=13](b [d=3] a [d=1] c) @ tau=2 E=[0,1,-2,2,2,0,1,0]");
  EXPECT_EQ(pattern_occurrences(p61),
            occs({{2, 'b'}, {5, 'a'}, {7, 'c'}, {13, 'b'}, {18, 'a'}, {21, 'c'}, {26, 'b'}, {30, 'a'}, {31, 'c'}}));
  auto p41 = pat("[r=4 p=2]([r=3 p=13](a)) @ tau=2 E=[-2,0,1,-3,1,0,0,-1,-1,0,-1]");
  EXPECT_EQ(pattern_occurrences(p41), pattern_occurrences(p31));
}

TEST_F(Fixture, CumeIsCorrectedMinusPerfect) {
  auto p = pat("[r=3 p=13]([r=4 p=2](a)) @ tau=2 E=[1,0,-1,-2,0,3,-1,0,1,1,-1]");
  auto cume = accumulate_corrections(p);
  auto perfect = occs_star(p.tree);
  auto corrected = corrected_occurrences(p);
  ASSERT_EQ(cume.size(), perfect.size());
  EXPECT_EQ(cume[0], 0);
  for (std::size_t i = 0; i < cume.size(); ++i) EXPECT_EQ(corrected[i].t, p.tau + perfect[i].t + cume[i]);
}

TEST_F(Fixture, ZeroCorrectionsShiftPerfect) {
  auto t = tree("[r=3 p=10](b [d=3] [r=4 p=1](a) [d=1] c)");
  Pattern p{t, 7, std::vector<Time>(occurrence_count(t) - 1, 0)};
  auto perfect = occs_star(t);
  auto corrected = corrected_occurrences(p);
  for (std::size_t i = 0; i < perfect.size(); ++i) EXPECT_EQ(corrected[i].t, perfect[i].t + 7);
}

TEST_F(Fixture, CorrectionCountAndNegativeTimes) {
  EXPECT_THROW(accumulate_corrections(pat("[r=4 p=2](a) @ tau=2 E=[1,0]")), DomainError);
  EXPECT_THROW(pattern_occurrences(pat("[r=3 p=2](a) @ tau=0 E=[-4,0]")), InvalidPatternError);
}

TEST_F(Fixture, SolveCorrectionsInvertsReconstruction) {
  std::mt19937_64 rng(3);
  auto t = tree("[r=3 p=20](b [d=3] [r=3 p=2](a) [d=2] c)");
  const std::size_t n = occurrence_count(t);
  for (int trial = 0; trial < 50; ++trial) {
    Pattern p{t, 5, {}};
    for (std::size_t i = 1; i < n; ++i) p.corrections.push_back(static_cast<Time>(rng() % 5) - 2);
    auto targets = times(corrected_occurrences(p));
    EXPECT_EQ(solve_corrections(t, 5, targets), p.corrections);
  }
}

TEST_F(Fixture, CoverSizeBoundedByN) {
  auto p = pat("[r=5 p=4](b [d=3] a [d=1] c) @ tau=0 E=[0,0,0,0,0,0,0,0,0,0,0,0,0,0]");
  EXPECT_EQ(pattern_occurrences(p).size(), 15u);  // overlapping times, different events
  auto q = pat("[r=2 p=1]([r=2 p=1](a)) @ tau=0 E=[0,0,0]");
  EXPECT_EQ(corrected_occurrences(q).size(), 4u);
  EXPECT_EQ(pattern_occurrences(q).size(), 3u);  // 0,1,1,2: one collision
}

TEST_F(Fixture, Classification) {
  auto t3 = classify_tree(tree("[r=3 p=13]([r=4 p=2](a))"));
  EXPECT_FALSE(t3.interleaved);
  EXPECT_EQ(t3.cls, ShapeClass::Vertical);
  auto t4 = classify_tree(tree("[r=4 p=2]([r=3 p=13](a))"));
  EXPECT_TRUE(t4.interleaved);
  auto t6 = classify_tree(tree("[r=5 p=4](b [d=3] a [d=1] c)"));
  EXPECT_TRUE(t6.overlaps);
  EXPECT_FALSE(t6.interleaved);
  EXPECT_EQ(t6.cls, ShapeClass::Horizontal);
  EXPECT_EQ(classify_tree(tree("[r=4 p=2](a)")).cls, ShapeClass::Simple);
  auto t8 = classify_tree(tree("[r=2 p=33]([r=3 p=10](b [d=3] [r=4 p=1](a) [d=5] c))"));
  EXPECT_EQ(t8.cls, ShapeClass::Mixed);
  EXPECT_EQ(t8.height, 3);
  EXPECT_EQ(t8.width, 3u);
}

TEST_F(Fixture, TreeValidation) {
  EXPECT_THROW(validate_tree(PatternTree{leaf(a)}), InvalidPatternError);
  EXPECT_THROW(validate_tree(PatternTree{block(1, 2, {leaf(a)})}), InvalidPatternError);
  EXPECT_THROW(validate_tree(PatternTree{block(2, 0, {leaf(a)})}), InvalidPatternError);
  EXPECT_THROW(validate_tree(PatternTree{block(2, 2, {leaf(a), leaf(b)}, {})}), InvalidPatternError);
  EXPECT_THROW(validate_tree(PatternTree{block(2, 2, {leaf(a), leaf(b)}, {-1})}), InvalidPatternError);
}

TEST_F(Fixture, SimpleCycleAndTreeAgree) {
  Cycle cy{a, 4, 2, 2, {1, 0, -1}};
  auto p = wrap_cycle(cy);
  auto cover = cycle_cover(cy);
  EXPECT_EQ(times(pattern_occurrences(p)), cover);
}

// ─── notation ────────────────────────────────────────────────────────────

TEST_F(Fixture, NotationRoundTrip) {
  for (std::string s : std::vector<std::string>{"[r=4 p=2](a) @ tau=2 E=[1,0,-1]", "[r=3 p=13](b [d=3] a [d=1] c) @ tau=2 E=[0,1,-2,2,2,0,1,0]",
                        "[r=2 p=33]([r=3 p=10](b [d=3] [r=4 p=1](a) [d=5] c)) @ tau=0 E=[" +
                            std::string("0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0") + "]"}) {
    auto p = pat(s);
    EXPECT_EQ(format_pattern(p, &al), s);
    EXPECT_EQ(pat(format_pattern(p, &al)), p);
  }
}

TEST_F(Fixture, NotationQuotingAndWhitespace) {
  Alphabet al2;
  auto p = parse_pattern("[r=2 p=5]( \"open door\" [d=1] \"say \\\"hi\\\"\" ) @ tau=0 E=[ 0 , 0 , 0 ]", al2, true);
  EXPECT_EQ(al2.label(0), "open door");
  EXPECT_EQ(al2.label(1), "say \"hi\"");
  EXPECT_EQ(parse_pattern(format_pattern(p, &al2), al2), p);
}

TEST_F(Fixture, NotationErrors) {
  EXPECT_THROW(pat("[r=2 p=5](zzz) @ tau=0 E=[0]"), DomainError);  // unknown label
  EXPECT_THROW(pat("[r=2 p=5](a @ tau=0 E=[0]"), ParseError);
  EXPECT_THROW(pat("[r=2 p=5](a) tau=0 E=[0]"), ParseError);
  EXPECT_THROW(pat("[r=2 p=5](a) @ tau=0 E=[0] trailing"), ParseError);
  EXPECT_THROW(pat("[r=1 p=5](a) @ tau=0 E=[]"), InvalidPatternError);
  std::istringstream in("# ok\n[r=2 p=5](a) @ tau=0 E=[0]\n\n[r=2 p=5](a @ tau=0 E=[0]\n");
  try {
    read_patterns(in, al);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 4u);
  }
}

// ─── combination ─────────────────────────────────────────────────────────

TEST_F(Fixture, GrowVerticallyBuildsP31) {
  std::vector<Pattern> inst{pat("[r=4 p=2](a) @ tau=13 E=[0,3,-1]"), pat("[r=4 p=2](a) @ tau=2 E=[1,0,-1]"),
                            pat("[r=4 p=2](a) @ tau=26 E=[1,1,-1]")};
  auto p = grow_vertically(inst);
  EXPECT_EQ(p, pat("[r=3 p=13]([r=4 p=2](a)) @ tau=2 E=[1,0,-1,-2,0,3,-1,0,1,1,-1]"));
  std::vector<Occurrence> uni;
  for (const auto& q : inst) {
    auto o = pattern_occurrences(q);
    uni.insert(uni.end(), o.begin(), o.end());
  }
  std::sort(uni.begin(), uni.end());
  EXPECT_EQ(pattern_occurrences(p), uni);
}

TEST_F(Fixture, GrowVerticallyPerfectCopies) {
  std::vector<Pattern> inst;
  for (Time t : {0, 10, 20}) inst.push_back({tree("[r=3 p=2](a)"), t, {0, 0}});
  auto p = grow_vertically(inst);
  EXPECT_EQ(p.tree.root.period, 10);
  EXPECT_TRUE(std::all_of(p.corrections.begin(), p.corrections.end(), [](Time e) { return e == 0; }));
  inst.push_back({tree("[r=4 p=2](a)"), 30, {0, 0, 0}});
  EXPECT_THROW(grow_vertically(inst), DomainError);
}

TEST_F(Fixture, ConcatenateC5) {
  auto s3 = testutil::load("S3.txt");
  std::vector<Pattern> inst{pat("[r=3 p=13](b) @ tau=2 E=[-2,0]"), pat("[r=3 p=13](a) @ tau=5 E=[0,-1]"),
                            pat("[r=3 p=13](c) @ tau=7 E=[1,-3]")};
  auto p = concatenate_patterns(inst);
  ASSERT_TRUE(p);
  EXPECT_EQ(p->tau, 2);
  EXPECT_EQ(p->tree.root.period, 13);
  EXPECT_EQ(p->tree.root.distances, (std::vector<Time>{3, 2}));
  // pattern labels were interned in a different order than the file's ids
  std::vector<Occurrence> expect;
  for (const auto& o : s3.pairs()) expect.push_back({o.t, *al.find(s3.alphabet().label(o.event))});
  std::sort(expect.begin(), expect.end());
  EXPECT_EQ(pattern_occurrences(*p), expect);
  auto grown = grow_horizontally(inst, testutil::context34(s3));
  ASSERT_TRUE(grown);
  EXPECT_EQ(pattern_occurrences(*grown), expect);
}

TEST_F(Fixture, ConcatenateAlignedCycles) {
  std::vector<Pattern> inst{pat("[r=3 p=10](a) @ tau=4 E=[0,0]"), pat("[r=3 p=10](b) @ tau=0 E=[0,0]")};
  auto p = concatenate_patterns(inst);
  ASSERT_TRUE(p);
  EXPECT_EQ(p->tree.root.distances, (std::vector<Time>{4}));
  EXPECT_EQ(p->corrections, (std::vector<Time>(5, 0)));
}

TEST_F(Fixture, ConcatenateTruncatesToShortest) {
  std::vector<Pattern> inst{pat("[r=4 p=10](a) @ tau=0 E=[0,0,0]"), pat("[r=3 p=10](b) @ tau=2 E=[0,1]")};
  auto p = concatenate_patterns(inst);
  ASSERT_TRUE(p);
  EXPECT_EQ(p->tree.root.repetitions, 3);
  EXPECT_EQ(pattern_occurrences(*p), occs({{0, 'a'}, {2, 'b'}, {10, 'a'}, {12, 'b'}, {20, 'a'}, {23, 'b'}}));
}

TEST_F(Fixture, BoundaryRecurrenceFromDifferentPeriods) {
  // the later cycle has period 11; its repetition-boundary corrections absorb the difference
  std::vector<Pattern> inst{pat("[r=3 p=10](a) @ tau=0 E=[0,0]"), pat("[r=3 p=11](b) @ tau=3 E=[0,0]")};
  auto p = concatenate_patterns(inst);
  ASSERT_TRUE(p);
  EXPECT_EQ(pattern_occurrences(*p), occs({{0, 'a'}, {3, 'b'}, {10, 'a'}, {14, 'b'}, {20, 'a'}, {25, 'b'}}));
  // E_N(o'_{i,1}) = (p_J - p_I) + E_I(o_{i,1}) - E_J(o'_{i,1}) + E_N(o'_{i-1,1}) with zero instance corrections
  EXPECT_EQ(p->corrections, (std::vector<Time>{0, 0, 1, 0, 2}));
}

TEST_F(Fixture, FactorizeKeepsCover) {
  auto p = pat("[r=2 p=40]([r=3 p=5](a) [d=12] [r=3 p=5](b)) @ tau=0 E=[0,0,1,0,0,0,0,1,0,0,-1]");
  auto f = factorize(p);
  ASSERT_TRUE(f);
  EXPECT_EQ(format_tree(f->tree, &al), "[r=2 p=40]([r=3 p=5](a [d=12] b))");
  EXPECT_EQ(pattern_occurrences(*f), pattern_occurrences(p));
  EXPECT_FALSE(factorize(pat("[r=2 p=40]([r=3 p=5](a) [d=12] [r=2 p=5](b)) @ tau=0 E=[0,0,0,0,0,0,0,0,0]")));
}
