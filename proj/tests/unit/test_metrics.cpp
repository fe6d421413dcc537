#include <gtest/gtest.h>

#include <random>

#include "medscribe/error.hpp"
#include "medscribe/metrics.hpp"

using namespace medscribe;
using Kind = ConceptCategory::Kind;

namespace {

Transcript tr(std::initializer_list<std::pair<SpeakerRole, std::string>> turns,
              TranscriptKind kind = TranscriptKind::Reference) {
  const std::vector<std::pair<SpeakerRole, std::string>> v(turns);
  return make_transcript("t", kind, v);
}

constexpr auto D = SpeakerRole::Doctor;
constexpr auto P = SpeakerRole::Patient;

}  // namespace

TEST(Wer, SpecExamples) {
  EXPECT_DOUBLE_EQ(wer("the cat sat", "the cat sat").wer(), 0.0);
  const auto s = wer("the cat sat on mat", "the cat sat on the mat");
  EXPECT_EQ(s.deletions, 1u);
  EXPECT_EQ(s.n, 6u);
  EXPECT_NEAR(s.wer(), 1.0 / 6.0, 1e-12);
  EXPECT_DOUBLE_EQ(wer("Umm the cat", "The cat.").wer(), 0.0);
}

TEST(Wer, EmptyReferenceThrows) {
  try {
    wer("hello", "umm ...");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyReference);
  }
}

TEST(Wer, CanExceedOne) {
  EXPECT_DOUBLE_EQ(wer("a b c d", "x").wer(), 4.0);
}

TEST(Salutations, StrippedAtEdgesOnly) {
  const auto sal = default_salutations();
  EXPECT_EQ(strip_salutations("Hello, how are you?", sal), "how are you?");
  EXPECT_EQ(strip_salutations("Good morning! Hi. Come in", sal), "Come in");
  EXPECT_EQ(strip_salutations("say hello to her", sal), "say hello to her");
  EXPECT_EQ(strip_salutations("Thanks. Bye bye", sal), "Thanks.");
  EXPECT_EQ(strip_salutations("Hello", sal), "");
}

TEST(SpeakerWer, PerfectTranscript) {
  const auto ref = tr({{D, "hello what brings you in"}, {P, "my knee hurts"}});
  const auto sal = default_salutations();
  EXPECT_DOUBLE_EQ(speaker_wer(ref, ref, D, sal).wer(), 0.0);
  EXPECT_DOUBLE_EQ(speaker_wer(ref, ref, P, sal).wer(), 0.0);
}

TEST(SpeakerWer, MislabeledTurn) {
  // 50 doctor words across five turns, one 5-word doctor turn labeled patient.
  std::vector<std::pair<SpeakerRole, std::string>> ref_turns, hyp_turns;
  int w = 0;
  auto words = [&w](int n) {
    std::string s;
    for (int i = 0; i < n; ++i, ++w) {
      s += i ? " w" : "w";
      s += static_cast<char>('a' + w / 26);
      s += static_cast<char>('a' + w % 26);
    }
    return s;
  };
  const int sizes[] = {10, 10, 10, 15, 5};
  for (int k = 0; k < 5; ++k) {
    const auto text = words(sizes[k]);
    const std::string patient = "patient words number here";
    ref_turns.push_back({D, text});
    ref_turns.push_back({P, patient});
    hyp_turns.push_back({k == 4 ? P : D, text});
    hyp_turns.push_back({P, patient});
  }
  const auto ref = make_transcript("r", TranscriptKind::Reference, ref_turns);
  const auto hyp = make_transcript("h", TranscriptKind::Hypothesis, hyp_turns);
  const auto sal = default_salutations();
  const auto d = speaker_wer(hyp, ref, D, sal);
  EXPECT_EQ(d.n, 50u);
  EXPECT_EQ(d.deletions, 5u);
  EXPECT_DOUBLE_EQ(d.wer(), 0.1);
  const auto p = speaker_wer(hyp, ref, P, sal);
  EXPECT_EQ(p.insertions, 5u);
  EXPECT_EQ(p.n, 20u);
}

TEST(SpeakerWer, SalutationOrderIgnored) {
  const auto ref = tr({{D, "Hello"}, {P, "Hello"}, {D, "what seems to be the problem"},
                       {P, "a rash on my arm"}});
  const auto hyp = tr({{P, "Hello"}, {D, "Hello"}, {D, "what seems to be the problem"},
                       {P, "a rash on my arm"}},
                      TranscriptKind::Hypothesis);
  const auto sal = default_salutations();
  EXPECT_DOUBLE_EQ(speaker_wer(hyp, ref, D, sal).wer(), 0.0);
  EXPECT_DOUBLE_EQ(speaker_wer(hyp, ref, P, sal).wer(), 0.0);
}

TEST(SpeakerWer, EmptyRoleReferenceThrows) {
  const auto ref = tr({{D, "only the doctor speaks"}});
  EXPECT_THROW(speaker_wer(ref, ref, P, default_salutations()), Error);
}

TEST(ScoreableWords, ExcludesSalutations) {
  const auto ref = tr({{D, "Hello there"}, {P, "Hi, my arm hurts. Bye"}});
  EXPECT_EQ(scoreable_reference_words(ref, default_salutations()), 4u);
}

namespace {

LexiconAnnotator fixture_annotator() {
  ConceptLexicon lex;
  lex.add("dioralyte", Kind::Medicine);
  lex.add("diuretics", Kind::Medicine);
  lex.add("fexofenadine", Kind::Medicine);
  lex.add("eczema", Kind::MedicalCondition);
  lex.add("itching", Kind::MedicalCondition);
  lex.add("aching pain", Kind::MedicalCondition);
  return LexiconAnnotator(lex);
}

}  // namespace

TEST(McWer, DioralyteSubstitution) {
  const auto ann = fixture_annotator();
  const auto r = mc_wer("try some diuretics tonight", "try some Dioralyte tonight", ann);
  EXPECT_EQ(r.score.substitutions, 1u);
  EXPECT_EQ(r.score.insertions, 0u);
  ASSERT_EQ(r.records.size(), 1u);
  EXPECT_EQ(r.records[0].kind, ConceptErrorKind::Substitute);
  EXPECT_EQ(*r.records[0].ref_surface, std::vector<std::string>{"dioralyte"});
  EXPECT_EQ(*r.records[0].hyp_surface, std::vector<std::string>{"diuretics"});
}

TEST(McWer, ItchingToNonConcept) {
  const auto r = mc_wer("the teaching is worse", "the itching is worse", fixture_annotator());
  ASSERT_EQ(r.records.size(), 1u);
  EXPECT_EQ(r.records[0].kind, ConceptErrorKind::Substitute);
  EXPECT_EQ(*r.records[0].hyp_surface, std::vector<std::string>{"teaching"});
}

TEST(McWer, IdenticalIsZero) {
  const auto r = mc_wer("eczema and itching", "eczema and itching", fixture_annotator());
  EXPECT_EQ(r.score.errors(), 0u);
  EXPECT_EQ(r.score.n, 2u);
}

TEST(McWer, OmittedConceptIsDeletion) {
  const auto r = mc_wer("i take every day", "i take fexofenadine and dioralyte every day",
                        fixture_annotator());
  EXPECT_EQ(r.score.n, 2u);
  EXPECT_EQ(r.score.deletions, 2u);
  const auto r2 = mc_wer("i take and dioralyte every day",
                         "i take fexofenadine and dioralyte every day", fixture_annotator());
  EXPECT_EQ(r2.score.deletions, 1u);
  EXPECT_DOUBLE_EQ(r2.score.wer(), 0.5);
}

TEST(McWer, InsertedConcept) {
  const auto r = mc_wer("itching and eczema", "itching and", fixture_annotator());
  EXPECT_EQ(r.score.insertions, 1u);
  EXPECT_EQ(r.score.n, 1u);
}

TEST(McWer, PartialMatchIsOneSubstitution) {
  const auto r = mc_wer("aching pains", "aching pain", fixture_annotator());
  EXPECT_EQ(r.score.substitutions, 1u);
  EXPECT_EQ(r.records.size(), 1u);
}

TEST(McWer, NoReferenceConceptsThrows) {
  EXPECT_THROW(mc_wer("hello", "hello", fixture_annotator()), Error);
}

TEST(McWer, InsensitiveToNonConceptSubstitutions) {
  const auto ann = fixture_annotator();
  const std::vector<std::string> ref = {"so", "the", "itching", "started", "when", "you",
                                        "stopped", "the", "fexofenadine", "and", "then",
                                        "eczema", "came", "back", "on", "the", "arms"};
  std::mt19937_64 rng(41);
  const auto base = mc_wer_tokens(ref, ref, ann).score;
  for (int k = 0; k < 200; ++k) {
    auto hyp = ref;
    for (int c = 0; c < 4; ++c) {
      std::size_t pos;
      do pos = rng() % hyp.size();
      while (hyp[pos] == "itching" || hyp[pos] == "fexofenadine" || hyp[pos] == "eczema");
      hyp[pos] = "zz" + std::to_string(rng() % 50);
    }
    const auto s = mc_wer_tokens(hyp, ref, ann).score;
    ASSERT_EQ(s.errors(), base.errors());
    ASSERT_EQ(s.n, base.n);
  }
}

TEST(Taxonomy, CountsAndSeeds) {
  EXPECT_EQ(taxonomy({}).total(), 0u);
  std::vector<ConceptErrorRecord> recs = {
      {ConceptErrorKind::Substitute, Kind::Medicine, {}, {}}};
  auto m = taxonomy(recs);
  EXPECT_EQ(m.at(Kind::Medicine, ConceptErrorKind::Substitute), 1u);
  EXPECT_EQ(m.total(), 1u);
  recs = {{ConceptErrorKind::Substitute, Kind::Medicine, {}, {}},
          {ConceptErrorKind::Substitute, Kind::Severity, {}, {}},
          {ConceptErrorKind::Substitute, Kind::Medicine, {}, {}},
          {ConceptErrorKind::Delete, Kind::Procedure, {}, {}},
          {ConceptErrorKind::Delete, Kind::Medicine, {}, {}}};
  std::vector<ConceptAnnotation> refs = {{{0, 1}, {"x"}, Kind::BodyFunction, {}}};
  m = taxonomy(recs, refs);
  EXPECT_EQ(m.total(), 5u);
  EXPECT_EQ(m.at(Kind::Medicine, ConceptErrorKind::Substitute), 2u);
  EXPECT_TRUE(m.counts.count({Kind::BodyFunction, ConceptErrorKind::Insert}));
  TaxonomyMatrix sum;
  sum.merge(m);
  sum.merge(m);
  EXPECT_EQ(sum.total(), 10u);
}

TEST(Aggregate, SpecExamples) {
  const double one[] = {0.10};
  auto a = aggregate(one);
  EXPECT_DOUBLE_EQ(a.mean, 0.10);
  EXPECT_DOUBLE_EQ(a.std, 0.0);
  const double two[] = {0.10, 0.20};
  a = aggregate(two);
  EXPECT_NEAR(a.mean, 0.15, 1e-15);
  EXPECT_NEAR(a.std, 0.05, 1e-15);
  const std::vector<double> same(57, 0.3);
  EXPECT_EQ(aggregate(same).std, 0.0);
  EXPECT_THROW(aggregate(std::span<const double>{}), Error);
}

TEST(Aggregate, SampleStd) {
  const double v[] = {1.0, 2.0, 3.0, 4.0};
  EXPECT_NEAR(aggregate(v, StdKind::Sample).std, std::sqrt(5.0 / 3.0), 1e-12);
  EXPECT_NEAR(aggregate(v).std, std::sqrt(1.25), 1e-12);
}

TEST(Aggregate, MatchesTwoPassOnRandomData) {
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    std::vector<double> v(1 + rng() % 100);
    for (auto& x : v) x = u(rng);
    double mean = 0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0;
    for (double x : v) var += (x - mean) * (x - mean);
    var /= static_cast<double>(v.size());
    const auto a = aggregate(v);
    ASSERT_NEAR(a.mean, mean, 1e-12);
    ASSERT_NEAR(a.std, std::sqrt(var), 1e-12);
    ASSERT_EQ(a.n, v.size());
  }
}
