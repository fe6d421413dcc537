#include "medscribe/normalize.hpp"

#include <fmt/format.h>

#include <nlohmann/json.hpp>

#include "medscribe/data.hpp"
#include "medscribe/error.hpp"
#include "medscribe/text_util.hpp"

namespace medscribe {

namespace {

bool is_ascii_alnum(char32_t c) {
  return (c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z') ||
         (c >= U'0' && c <= U'9');
}

bool is_apostrophe(char32_t c) {
  return c == U'\'' || c == U'’' || c == U'‘' || c == U'ʼ';
}

// Latin-1 supplement letters folded to ASCII; empty for non-letters.
std::string_view fold_latin1(char32_t c) {
  static constexpr std::string_view kFold[64] = {
      "a", "a", "a", "a", "a", "a", "ae", "c", "e", "e", "e",  "e", "i",
      "i", "i", "i", "d", "n", "o", "o",  "o", "o", "o", "",   "o", "u",
      "u", "u", "u", "y", "th", "ss", "a", "a", "a", "a", "a", "a", "ae",
      "c", "e", "e", "e", "e", "i", "i",  "i", "i", "d", "n",  "o", "o",
      "o", "o", "o", "",  "o", "u", "u",  "u", "u", "y", "th", "y"};
  if (c < 0xC0 || c > 0xFF) return {};
  return kFold[c - 0xC0];
}

// Folded lowercase ASCII for a code point, or empty when it is not a word
// character.
std::string_view word_chars(char32_t c, char (&buf)[2]) {
  if (c >= U'A' && c <= U'Z') {
    buf[0] = static_cast<char>(c - U'A' + U'a');
    return {buf, 1};
  }
  if (is_ascii_alnum(c)) {
    buf[0] = static_cast<char>(c);
    return {buf, 1};
  }
  return fold_latin1(c);
}

bool is_word_cp(char32_t c) {
  char buf[2];
  return !word_chars(c, buf).empty();
}

bool is_token_word(std::string_view w) {
  if (w.empty()) return false;
  for (char c : w) {
    const bool ok =
        (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '\'';
    if (!ok) return false;
  }
  return true;
}

NormalizationConfig load_defaults() {
  NormalizationConfig config;
  for (auto& d : default_disfluencies()) config.disfluency_lexicon.insert(d);
  const auto j = nlohmann::json::parse(embedded_file("spelling_variants.json"));
  for (const auto& [k, v] : j.at("spelling_map").items()) {
    config.spelling_map.emplace(k, v.get<std::string>());
  }
  config.validate();
  return config;
}

}  // namespace

std::vector<std::string> default_disfluencies() {
  return {"um", "umm", "uh", "uhh", "ah", "ahh", "er", "erm", "hmm", "mhm", "mm"};
}

const NormalizationConfig& NormalizationConfig::defaults() {
  static const NormalizationConfig config = load_defaults();
  return config;
}

NormalizationConfig NormalizationConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) {
    throw Error(ErrorCode::ConfigError,
                "normalization config must be a JSON object");
  }
  NormalizationConfig config = defaults();
  try {
    if (j.contains("disfluencies")) {
      config.disfluency_lexicon.clear();
      for (const auto& d : j.at("disfluencies")) {
        config.disfluency_lexicon.insert(d.get<std::string>());
      }
    }
    if (j.contains("spelling_map")) {
      config.spelling_map.clear();
      for (const auto& [k, v] : j.at("spelling_map").items()) {
        config.spelling_map.emplace(k, v.get<std::string>());
      }
    }
    if (j.contains("steps")) {
      const auto& s = j.at("steps");
      config.steps.disfluencies = s.value("disfluencies", true);
      config.steps.numerals = s.value("numerals", true);
      config.steps.punctuation_case = s.value("punctuation_case", true);
      config.steps.spelling = s.value("spelling", true);
      config.steps.hyphenation = s.value("hyphenation", true);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError,
                fmt::format("normalization config: {}", e.what()));
  }
  config.validate();
  return config;
}

NormalizationConfig NormalizationConfig::from_file(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ConfigError, fmt::format("{}: {}", path, e.what()));
  }
  return from_json(j);
}

void NormalizationConfig::validate() const {
  for (const auto& d : disfluency_lexicon) {
    if (!is_token_word(d)) {
      throw Error(ErrorCode::ConfigError,
                  fmt::format("disfluency '{}' must be a lowercase, "
                              "punctuation-free word",
                              d));
    }
  }
  for (const auto& [k, v] : spelling_map) {
    if (!is_token_word(k) || !is_token_word(v)) {
      throw Error(ErrorCode::ConfigError,
                  fmt::format("spelling entry '{}' -> '{}' must map single "
                              "lowercase words",
                              k, v));
    }
    if (k == v) {
      throw Error(ErrorCode::ConfigError,
                  fmt::format("spelling entry '{}' maps to itself", k));
    }
    // A chain a -> b -> c would make normalization non-idempotent.
    if (spelling_map.contains(v)) {
      throw Error(ErrorCode::ConfigError,
                  fmt::format("spelling entry '{}' -> '{}' chains into another "
                              "entry",
                              k, v));
    }
  }
}

TokenSequence remove_disfluencies(const TokenSequence& tokens,
                                  const std::set<std::string>& lexicon) {
  TokenSequence out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (!lexicon.contains(t)) out.push_back(t);
  }
  return out;
}

TokenSequence remove_disfluencies(const TokenSequence& tokens) {
  return remove_disfluencies(tokens,
                             NormalizationConfig::defaults().disfluency_lexicon);
}

TokenSequence normalize_spelling(
    const TokenSequence& tokens,
    const std::unordered_map<std::string, std::string>& spelling_map) {
  TokenSequence out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) {
    auto it = spelling_map.find(t);
    out.push_back(it == spelling_map.end() ? t : it->second);
  }
  return out;
}

std::string split_hyphens(std::string_view text) {
  const auto cps = decode_utf8_lossy(text);
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < cps.size()) {
    if (cps[i] != U'-') {
      append_utf8(out, cps[i++]);
      continue;
    }
    std::size_t end = i;
    while (end < cps.size() && cps[end] == U'-') ++end;
    const bool between_words =
        i > 0 && end < cps.size() && is_word_cp(cps[i - 1]) && is_word_cp(cps[end]);
    if (between_words) {
      out += ' ';
    } else {
      for (std::size_t k = i; k < end; ++k) out += '-';
    }
    i = end;
  }
  return out;
}

std::string normalize_punctuation_case(std::string_view text) {
  const auto cps = decode_utf8_lossy(text);
  std::string out;
  out.reserve(text.size());
  char buf[2];
  bool last_space = true;
  auto space = [&] {
    if (!last_space) {
      out += ' ';
      last_space = true;
    }
  };
  for (std::size_t i = 0; i < cps.size(); ++i) {
    const char32_t c = cps[i];
    if (auto w = word_chars(c, buf); !w.empty()) {
      out += w;
      last_space = false;
      continue;
    }
    const bool prev_word = !last_space;
    const bool next_word = i + 1 < cps.size() && is_word_cp(cps[i + 1]);
    if (is_apostrophe(c) && prev_word && next_word) {
      out += '\'';
      continue;
    }
    // A hyphen that survived to this point (hyphen splitting disabled) joins
    // its neighbours.
    if (c == U'-' && prev_word && next_word) continue;
    space();
  }
  if (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

TokenSequence normalize(std::string_view text,
                        const NormalizationConfig& config) {
  std::string work(text);
  if (config.steps.numerals) work = numerals_to_words(work);
  if (config.steps.hyphenation) work = split_hyphens(work);
  if (config.steps.punctuation_case) work = normalize_punctuation_case(work);
  TokenSequence tokens = split_whitespace(work);
  if (config.steps.spelling) tokens = normalize_spelling(tokens, config.spelling_map);
  if (config.steps.disfluencies) {
    tokens = remove_disfluencies(tokens, config.disfluency_lexicon);
  }
  return tokens;
}

}  // namespace medscribe
