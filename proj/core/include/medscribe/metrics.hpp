#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "medscribe/align.hpp"
#include "medscribe/concepts.hpp"
#include "medscribe/normalize.hpp"
#include "medscribe/transcript.hpp"

namespace medscribe {

struct WerScore {
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;
  std::size_t n = 0;  // reference units

  // Throws EmptyReference when n == 0.
  static WerScore from_counts(std::size_t s, std::size_t d, std::size_t i,
                              std::size_t n);
  std::size_t errors() const { return substitutions + deletions + insertions; }
  double wer() const;
};

WerScore wer_tokens(const TokenSequence& hyp, const TokenSequence& ref);
WerScore wer(std::string_view hyp_text, std::string_view ref_text,
             const NormalizationConfig& config = NormalizationConfig::defaults());

// All turn texts joined by single spaces.
std::string transcript_text(const Transcript& t);

// ---------------------------------------------------------------------------
// Speaker-attributed WER.

std::vector<std::string> default_salutations();

// Strips salutation phrases at the start and end of a turn (case-insensitive,
// whole words, longest phrase first, repeatedly).
std::string strip_salutations(std::string_view turn_text,
                              std::span<const std::string> salutations);

// Concatenated, salutation-stripped text of every turn attributed to `role`.
std::string speaker_text(const Transcript& t, SpeakerRole role,
                         std::span<const std::string> salutations);

WerScore speaker_wer(const Transcript& hyp, const Transcript& ref,
                     SpeakerRole role, std::span<const std::string> salutations,
                     const NormalizationConfig& config =
                         NormalizationConfig::defaults());

// Normalized token count of the salutation-stripped reference, all roles.
std::size_t scoreable_reference_words(const Transcript& ref,
                                      std::span<const std::string> salutations,
                                      const NormalizationConfig& config =
                                          NormalizationConfig::defaults());

// ---------------------------------------------------------------------------
// Medical-concept WER.

enum class ConceptErrorKind { Substitute, Delete, Insert };
std::string_view to_string(ConceptErrorKind kind);

struct ConceptErrorRecord {
  ConceptErrorKind kind;
  ConceptCategory category;
  std::optional<std::vector<std::string>> ref_surface;
  std::optional<std::vector<std::string>> hyp_surface;
};

struct McWerResult {
  WerScore score;
  std::vector<ConceptErrorRecord> records;
  std::vector<ConceptAnnotation> ref_concepts;
  std::vector<ConceptAnnotation> hyp_concepts;
};

// Projects the full-sequence word alignment onto concept spans. N counts
// reference concepts, not concept tokens.
McWerResult mc_wer_tokens(const TokenSequence& hyp, const TokenSequence& ref,
                          const ConceptAnnotator& annotator);
McWerResult mc_wer(std::string_view hyp_text, std::string_view ref_text,
                   const ConceptAnnotator& annotator,
                   const NormalizationConfig& config =
                       NormalizationConfig::defaults());

struct TaxonomyMatrix {
  std::map<std::pair<ConceptCategory, ConceptErrorKind>, std::size_t> counts;

  std::size_t total() const;
  std::size_t at(const ConceptCategory& c, ConceptErrorKind k) const;
  void merge(const TaxonomyMatrix& other);
};

// Reference concept categories are seeded as zero rows so heat-map axes stay
// stable across runs. The matrix total always equals records.size().
TaxonomyMatrix taxonomy(std::span<const ConceptErrorRecord> records,
                        std::span<const ConceptAnnotation> ref_annotations = {});

// ---------------------------------------------------------------------------

enum class StdKind { Population, Sample };

struct AggregateStat {
  double mean = 0.0;
  double std = 0.0;
  std::size_t n = 0;
};

// Single pass: Welford for the variance, compensated summation for the mean. Population standard deviation by default; n == 1
// yields std == 0 for either kind. Throws InvalidArgument on empty input.
AggregateStat aggregate(std::span<const double> values,
                        StdKind kind = StdKind::Population);

}  // namespace medscribe
