#pragma once

#include <cstdint>
#include <nlohmann/json_fwd.hpp>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace medscribe {

// Lowercase word tokens drawn from [a-z0-9'], no disfluencies. Produced by
// normalize(); every WER-family metric operates on these.
using TokenSequence = std::vector<std::string>;

struct NormalizationSteps {
  bool disfluencies = true;
  bool numerals = true;
  bool punctuation_case = true;
  bool spelling = true;
  bool hyphenation = true;
};

struct NormalizationConfig {
  std::set<std::string> disfluency_lexicon;
  std::unordered_map<std::string, std::string> spelling_map;
  NormalizationSteps steps;

  // Default disfluency list plus the bundled British -> American lexicon.
  static const NormalizationConfig& defaults();

  // {"disfluencies": [...], "spelling_map": {...}, "steps": {...}}. Absent
  // keys fall back to the defaults.
  static NormalizationConfig from_json(const nlohmann::json& j);
  static NormalizationConfig from_file(const std::string& path);

  void validate() const;
};

std::vector<std::string> default_disfluencies();

TokenSequence remove_disfluencies(const TokenSequence& tokens,
                                  const std::set<std::string>& lexicon);
TokenSequence remove_disfluencies(const TokenSequence& tokens);

// "89" -> "eighty-nine". Supports 0..999'999'999.
std::string number_to_words(std::uint64_t value);

// Replaces every maximal ASCII digit run by its written form. A run glued to
// a letter is padded with a space ("6pm" -> "six pm").
std::string numerals_to_words(std::string_view text);

TokenSequence normalize_spelling(
    const TokenSequence& tokens,
    const std::unordered_map<std::string, std::string>& spelling_map);

// A run of hyphens between two word characters becomes one space.
std::string split_hyphens(std::string_view text);

// Lowercases, folds Latin-1 accents, keeps intra-word apostrophes and turns
// everything else that is not [a-z0-9] into whitespace.
std::string normalize_punctuation_case(std::string_view text);

TokenSequence normalize(std::string_view text,
                        const NormalizationConfig& config =
                            NormalizationConfig::defaults());

struct NumeralLint {
  std::size_t offset;
  std::string snippet;
  std::string reason;
};

// Flags numeral forms the digit-run conversion handles only approximately:
// decimals ("1.5"), digit groups ("1,000") and digits glued to letters
// ("3rd").
std::vector<NumeralLint> lint_numerals(std::string_view text);

}  // namespace medscribe
