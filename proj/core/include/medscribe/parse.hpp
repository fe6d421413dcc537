#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "medscribe/transcript.hpp"

namespace medscribe {

enum class Stage { Punctuation, Diarization, Correction, ZeroShotCombined };

std::string_view to_string(Stage stage);
Stage parse_stage(std::string_view name);

// How far down the tolerance ladder a line had to go.
enum class ParseRung {
  Full = 1,           // the prompted structure, complete
  Relaxed = 2,        // missing justification or ordinal
  BracketAgnostic = 3,
  Bare = 4,           // "Doctor: text"
};

struct ParsedLine {
  std::optional<std::size_t> ordinal;
  // Unknown when a label was present but named neither role.
  std::optional<SpeakerRole> speaker;
  std::string text;
  std::optional<std::string> justification;
  ParseRung rung = ParseRung::Full;
};

// Named regular expressions, matched case-insensitively against single
// lines. Each pattern declares the named captures the extractor reads.
struct ExtractionPattern {
  std::string name;
  std::string source;
  std::vector<std::string> captures;
};

class PatternSet {
 public:
  // Compiled defaults; see patterns() for the sources.
  static std::shared_ptr<const PatternSet> defaults();
  // Overrides are a JSON object name -> regex source. Unknown names and
  // patterns lacking their required captures are rejected.
  static std::shared_ptr<const PatternSet> from_json(const nlohmann::json& j);
  static std::shared_ptr<const PatternSet> from_file(const std::string& path);

  const std::vector<ExtractionPattern>& patterns() const noexcept {
    return patterns_;
  }

  struct Compiled;
  const Compiled& compiled() const noexcept { return *compiled_; }

  PatternSet(std::vector<ExtractionPattern> patterns);
  ~PatternSet();

 private:
  std::vector<ExtractionPattern> patterns_;
  std::unique_ptr<Compiled> compiled_;
};

// Parses an LLM response for `stage`. Never throws on content; an empty
// result means nothing recognisable was found.
std::vector<ParsedLine> extract(std::string_view raw, Stage stage,
                                const PatternSet& patterns = *PatternSet::defaults());

// "(Doctor)", "[patient]", "Speaker (Doctor)" -> role; anything naming
// neither or both roles -> Unknown.
SpeakerRole extract_speaker(std::string_view label_text);

struct ExpectedLine {
  std::optional<SpeakerRole> speaker;
  std::string text;
  std::optional<std::string> justification;
};

// Renders lines in the output structure each stage's prompt asks for. Used
// for few-shot example outputs and by the echo backends.
std::string format_expected_output(Stage stage,
                                   const std::vector<ExpectedLine>& lines);

}  // namespace medscribe
