#include <gtest/gtest.h>

#include <random>

#include "medscribe/align.hpp"
#include "medscribe/error.hpp"
#include "oracles.hpp"

using namespace medscribe;
using Tok = std::vector<std::string>;

namespace {

Tok random_tokens(std::mt19937_64& rng, std::size_t max_len, std::size_t vocab) {
  Tok t(rng() % (max_len + 1));
  for (auto& w : t) w = std::string(1, static_cast<char>('a' + rng() % vocab));
  return t;
}

// Replays an op list and checks it turns ref into hyp.
void expect_consistent(const EditAlignment& a, const Tok& hyp, const Tok& ref) {
  std::size_t h = 0, r = 0;
  EditCounts c;
  for (const auto& op : a.ops) {
    switch (op.kind) {
      case EditKind::Match:
        ASSERT_EQ(*op.hyp, h++);
        ASSERT_EQ(*op.ref, r++);
        ASSERT_EQ(hyp[*op.hyp], ref[*op.ref]);
        ++c.matches;
        break;
      case EditKind::Substitute:
        ASSERT_EQ(*op.hyp, h++);
        ASSERT_EQ(*op.ref, r++);
        ASSERT_NE(hyp[*op.hyp], ref[*op.ref]);
        ++c.substitutions;
        break;
      case EditKind::Delete:
        ASSERT_FALSE(op.hyp);
        ASSERT_EQ(*op.ref, r++);
        ++c.deletions;
        break;
      case EditKind::Insert:
        ASSERT_FALSE(op.ref);
        ASSERT_EQ(*op.hyp, h++);
        ++c.insertions;
        break;
    }
  }
  EXPECT_EQ(h, hyp.size());
  EXPECT_EQ(r, ref.size());
  EXPECT_EQ(c, a.counts);
}

}  // namespace

TEST(GlobalAlign, SpecExamples) {
  auto a = global_align(Tok{"a", "b", "c"}, Tok{"a", "b", "c"});
  EXPECT_EQ(a.counts, (EditCounts{3, 0, 0, 0}));
  a = global_align(Tok{"the", "cat"}, Tok{"the", "cat", "sat"});
  EXPECT_EQ(a.counts.deletions, 1u);
  EXPECT_EQ(a.counts.matches, 2u);
  a = global_align(Tok{"x", "b", "c"}, Tok{"a", "b", "c"});
  EXPECT_EQ(a.counts.substitutions, 1u);
  EXPECT_EQ(a.counts.matches, 2u);
}

TEST(GlobalAlign, EmptySides) {
  auto a = global_align(Tok{}, Tok{"a", "b"});
  EXPECT_EQ(a.counts.deletions, 2u);
  a = global_align(Tok{"a"}, Tok{});
  EXPECT_EQ(a.counts.insertions, 1u);
  a = global_align(Tok{}, Tok{});
  EXPECT_TRUE(a.ops.empty());
}

TEST(GlobalAlign, MatchesBruteForceOracle) {
  std::mt19937_64 rng(21);
  oracle::BruteForceAligner brute;
  for (int k = 0; k < 2000; ++k) {
    const auto hyp = random_tokens(rng, 6, 3);
    const auto ref = random_tokens(rng, 6, 3);
    const auto a = global_align(hyp, ref);
    const auto o = brute.align(hyp, ref);
    ASSERT_EQ(a.counts.substitutions, o.s);
    ASSERT_EQ(a.counts.deletions, o.d);
    ASSERT_EQ(a.counts.insertions, o.i);
    expect_consistent(a, hyp, ref);
  }
}

TEST(GlobalAlign, EditDistanceMatchesSuffixDp) {
  std::mt19937_64 rng(22);
  for (int k = 0; k < 300; ++k) {
    const auto hyp = random_tokens(rng, 60, 5);
    const auto ref = random_tokens(rng, 60, 5);
    const auto expected = oracle::suffix_edit_distance(hyp, ref);
    ASSERT_EQ(edit_distance(hyp, ref), expected);
    ASSERT_EQ(global_align(hyp, ref).counts.errors(), expected);
  }
}

TEST(GlobalAlign, SymmetricInCost) {
  std::mt19937_64 rng(23);
  for (int k = 0; k < 300; ++k) {
    const auto a = random_tokens(rng, 20, 4);
    const auto b = random_tokens(rng, 20, 4);
    ASSERT_EQ(edit_distance(a, b), edit_distance(b, a));
  }
}

TEST(SmithWaterman, SpecExamples) {
  auto la = smith_waterman(Tok{"a", "b", "c"}, Tok{"a", "b", "c"});
  EXPECT_EQ(la.score, 6);
  EXPECT_EQ(la.hyp_span, (IndexRange{0, 3}));
  EXPECT_EQ(la.ref_span, (IndexRange{0, 3}));

  la = smith_waterman(Tok{"a", "b"}, Tok{"x", "y"});
  EXPECT_EQ(la.score, 0);
  EXPECT_TRUE(la.hyp_span.empty());
  EXPECT_TRUE(la.pairs.empty());

  la = smith_waterman(Tok{"z", "a", "b", "c", "z"}, Tok{"q", "a", "b", "c"});
  EXPECT_EQ(la.score, 6);
  EXPECT_EQ(la.hyp_span, (IndexRange{1, 4}));
  EXPECT_EQ(la.ref_span, (IndexRange{1, 4}));
}

TEST(SmithWaterman, ScoreMatchesSpanBruteForce) {
  std::mt19937_64 rng(24);
  for (int k = 0; k < 500; ++k) {
    const auto hyp = random_tokens(rng, 8, 3);
    const auto ref = random_tokens(rng, 8, 3);
    const auto la = smith_waterman(hyp, ref);
    ASSERT_EQ(la.score, oracle::brute_local_score(hyp, ref));
    for (const auto& [h, r] : la.pairs) {
      ASSERT_EQ(hyp[h], ref[r]);
      ASSERT_GE(h, la.hyp_span.begin);
      ASSERT_LT(h, la.hyp_span.end);
      ASSERT_GE(r, la.ref_span.begin);
      ASSERT_LT(r, la.ref_span.end);
    }
  }
}

TEST(SmithWaterman, ScoringValidation) {
  SmithWatermanScoring s;
  s.match = 0;
  EXPECT_THROW(s.validate(), Error);
  s = {};
  s.gap = 1;
  EXPECT_THROW(s.validate(), Error);
}

TEST(Truncation, OutputEqualsInput) {
  const auto r = truncate_degeneration("the patient has a cough", "the patient has a cough");
  EXPECT_FALSE(r.truncated);
  EXPECT_EQ(r.text, "the patient has a cough");
  EXPECT_EQ(r.unaligned_tail, 0u);
}

TEST(Truncation, RepeatedTailRemoved) {
  const std::string input = "i have had this pain since monday";
  std::string output = input;
  for (int i = 0; i < 25; ++i) output += " pain";
  const auto r = truncate_degeneration(output, input);
  EXPECT_TRUE(r.truncated);
  EXPECT_GT(r.unaligned_tail, 20u);
  EXPECT_EQ(r.text, input);
}

TEST(Truncation, ShortNovelTailKept) {
  const std::string input = "i have had this pain since monday";
  std::string output = input;
  for (int i = 0; i < 10; ++i) output += " novel" + std::to_string(i);
  const auto r = truncate_degeneration(output, input);
  EXPECT_FALSE(r.truncated);
  EXPECT_EQ(r.unaligned_tail, 10u);
  EXPECT_EQ(r.text, output);
}

TEST(Truncation, ThresholdIsStrict) {
  const std::string input = "alpha beta gamma delta";
  for (const std::size_t tail : {20u, 21u}) {
    std::string output = input;
    for (std::size_t i = 0; i < tail; ++i) output += " x" + std::to_string(i);
    EXPECT_EQ(truncate_degeneration(output, input).truncated, tail > 20) << tail;
  }
}

TEST(ClassedAlign, SameEditCountAsPlain) {
  std::mt19937_64 rng(25);
  for (int k = 0; k < 500; ++k) {
    const auto hyp = random_tokens(rng, 12, 3);
    const auto ref = random_tokens(rng, 12, 3);
    std::vector<bool> hm(hyp.size()), rm(ref.size());
    for (std::size_t i = 0; i < hm.size(); ++i) hm[i] = rng() % 3 == 0;
    for (std::size_t i = 0; i < rm.size(); ++i) rm[i] = rng() % 3 == 0;
    const auto a = global_align_classed(hyp, ref, hm, rm);
    ASSERT_EQ(a.counts.errors(), oracle::suffix_edit_distance(hyp, ref));
    expect_consistent(a, hyp, ref);
  }
}

TEST(ClassedAlign, AvoidsCrossClassSubstitution) {
  // "zz" could replace either "take" or the marked "drug" at equal cost.
  const Tok hyp = {"zz", "daily"};
  const Tok ref = {"take", "drug", "daily"};
  const auto plain = global_align(hyp, ref);
  EXPECT_EQ(plain.ops[1].kind, EditKind::Substitute);
  const auto classed = global_align_classed(hyp, ref, {false, false}, {false, true, false});
  ASSERT_EQ(classed.ops.size(), 3u);
  EXPECT_EQ(classed.ops[0].kind, EditKind::Substitute);
  EXPECT_EQ(classed.ops[1].kind, EditKind::Delete);
  EXPECT_EQ(*classed.ops[1].ref, 1u);
  EXPECT_THROW(global_align_classed(hyp, ref, {false}, {false, true, false}), Error);
}
