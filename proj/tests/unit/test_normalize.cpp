#include <gtest/gtest.h>

#include <nlohmann/json.hpp>
#include <random>

#include "medscribe/error.hpp"
#include "medscribe/normalize.hpp"
#include "oracles.hpp"

using namespace medscribe;
using Tok = TokenSequence;

TEST(Disfluencies, RemovesLexiconItems) {
  EXPECT_EQ(remove_disfluencies(Tok{"i", "have", "umm", "a", "headache"}),
            (Tok{"i", "have", "a", "headache"}));
  EXPECT_EQ(remove_disfluencies(Tok{}), Tok{});
  EXPECT_EQ(remove_disfluencies(Tok{"umm", "uhh", "ahh"}), Tok{});
}

TEST(Numerals, SpecExamples) {
  EXPECT_EQ(numerals_to_words("6"), "six");
  EXPECT_EQ(numerals_to_words("89"), "eighty-nine");
  EXPECT_EQ(numerals_to_words("temperature 101 point 5"),
            "temperature one hundred one point five");
}

TEST(Numerals, AgreesWithTableOracle) {
  std::mt19937_64 rng(3);
  for (std::uint64_t v = 0; v <= 2000; ++v) EXPECT_EQ(number_to_words(v), oracle::number_words(v)) << v;
  for (int k = 0; k < 5000; ++k) {
    const std::uint64_t v = rng() % 1'000'000'000ULL;
    EXPECT_EQ(number_to_words(v), oracle::number_words(v)) << v;
  }
}

TEST(Numerals, OutOfRangeRunThrowsWithOffset) {
  try {
    numerals_to_words("call 12345678901 now");
    FAIL();
  } catch (const UnsupportedNumeral& e) {
    EXPECT_EQ(e.run(), "12345678901");
    EXPECT_EQ(e.offset(), 5u);
    EXPECT_EQ(e.code(), ErrorCode::UnsupportedNumeral);
  }
}

TEST(Numerals, LeadingZerosReadAsValue) {
  EXPECT_EQ(numerals_to_words("007"), "seven");
}

TEST(Numerals, GluedToLetters) {
  EXPECT_EQ(normalize("6pm"), (Tok{"six", "pm"}));
}

TEST(Spelling, SpecExamples) {
  const auto& map = NormalizationConfig::defaults().spelling_map;
  EXPECT_EQ(normalize_spelling(Tok{"colour"}, map), Tok{"color"});
  EXPECT_EQ(normalize_spelling(Tok{"color"}, map), Tok{"color"});
  EXPECT_EQ(normalize_spelling(Tok{"paracetamol"}, map), Tok{"paracetamol"});
}

TEST(Spelling, BundledMapIsFixedPointFree) {
  const auto& map = NormalizationConfig::defaults().spelling_map;
  EXPECT_GT(map.size(), 50u);
  for (const auto& [from, to] : map) EXPECT_EQ(map.count(to), 0u) << from << " -> " << to;
}

TEST(Hyphens, SpecExamples) {
  EXPECT_EQ(split_hyphens("eighty-nine"), "eighty nine");
  EXPECT_EQ(split_hyphens("check-up"), "check up");
  EXPECT_EQ(split_hyphens("a--b"), "a b");
  EXPECT_EQ(normalize("a--b"), (Tok{"a", "b"}));
}

TEST(Normalize, ComposedExample) {
  EXPECT_EQ(normalize("Umm, I took 6 pills — a check-up helped."),
            (Tok{"i", "took", "six", "pills", "a", "check", "up", "helped"}));
  EXPECT_EQ(normalize(""), Tok{});
}

TEST(Normalize, ApostrophesKeptOnlyInsideWords) {
  EXPECT_EQ(normalize("'It's the doctors' turn'"), (Tok{"it's", "the", "doctors", "turn"}));
}

TEST(Normalize, LatinAccentsFold) {
  EXPECT_EQ(normalize("Naïve café"), (Tok{"naive", "cafe"}));
}

TEST(Normalize, EightyNineMatchesSpelledOut) {
  EXPECT_EQ(normalize("89"), normalize("eighty nine"));
}

TEST(Normalize, StepsCanBeDisabled) {
  auto cfg = NormalizationConfig::defaults();
  cfg.steps.disfluencies = false;
  cfg.steps.numerals = false;
  EXPECT_EQ(normalize("umm 6", cfg), (Tok{"umm", "6"}));
}

TEST(Normalize, OutputTokensObeyAlphabet) {
  std::mt19937_64 rng(5);
  const std::string alphabet = "aZ9 -'.,!?\t\n\xc3\xa9";
  for (int k = 0; k < 2000; ++k) {
    std::string s;
    const auto len = rng() % 30;
    for (std::size_t i = 0; i < len; ++i) {
      const auto c = rng() % (alphabet.size() - 1);
      if (alphabet[c] == '\xc3') {
        s += "\xc3\xa9";
      } else if (alphabet[c] != '\xa9') {
        s += alphabet[c];
      }
    }
    for (const auto& tok : normalize(s)) {
      ASSERT_FALSE(tok.empty());
      for (const char ch : tok) {
        ASSERT_TRUE((ch >= 'a' && ch <= 'z') || (ch >= '0' && ch <= '9') || ch == '\'') << s;
      }
      ASSERT_NE(tok.front(), '\'');
      ASSERT_NE(tok.back(), '\'');
    }
  }
}

TEST(NormalizationConfig, FromJsonOverridesAndDefaults) {
  const auto cfg = NormalizationConfig::from_json(
      nlohmann::json{{"disfluencies", {"like"}}, {"steps", {{"spelling", false}}}});
  EXPECT_EQ(cfg.disfluency_lexicon, std::set<std::string>{"like"});
  EXPECT_FALSE(cfg.steps.spelling);
  EXPECT_TRUE(cfg.steps.numerals);
  EXPECT_EQ(cfg.spelling_map, NormalizationConfig::defaults().spelling_map);
}

TEST(NormalizationConfig, RejectsChainedSpellings) {
  nlohmann::json j = {{"spelling_map", {{"a", "b"}, {"b", "c"}}}};
  EXPECT_THROW(NormalizationConfig::from_json(j), Error);
}

TEST(NumeralLint, FlagsApproximateForms) {
  const auto lints = lint_numerals("took 1.5 mg, 1,000 units on the 3rd day");
  EXPECT_EQ(lints.size(), 3u);
}
