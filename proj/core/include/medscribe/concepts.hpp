#pragma once

#include <atomic>
#include <compare>
#include <map>
#include <memory>
#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "medscribe/align.hpp"
#include "medscribe/http.hpp"
#include "medscribe/normalize.hpp"

namespace medscribe {

class ConceptCategory {
 public:
  enum class Kind {
    AnatomicalStructure,
    Medicine,
    Procedure,
    LaboratoryData,
    MedicalCondition,
    BodyFunction,
    BodyMeasurement,
    MedicalDevice,
    Severity,
    Other,
  };

  // For Kind::Other use ConceptCategory::other(label).
  ConceptCategory(Kind kind);  // NOLINT(google-explicit-constructor)
  static ConceptCategory other(std::string label);

  // Accepts "medicine", "Medicine", "MEDICAL_CONDITION", "medical condition"...
  // Names outside the built-in set become Other(name).
  static ConceptCategory parse(std::string_view name);

  Kind kind() const noexcept { return kind_; }
  // Built-in categories report their CamelCase name; Other reports its label.
  std::string name() const;

  friend bool operator==(const ConceptCategory& a, const ConceptCategory& b);
  friend std::strong_ordering operator<=>(const ConceptCategory& a,
                                          const ConceptCategory& b);

 private:
  ConceptCategory(Kind kind, std::string label);
  Kind kind_;
  std::string label_;
  std::string folded_;  // lowercase label, used for comparison
};

struct ConceptAnnotation {
  IndexRange span;
  std::vector<std::string> surface;
  ConceptCategory category;
  std::optional<std::string> vocabulary_code;
};

// Multi-word term gazetteer keyed on normalized token sequences.
class ConceptLexicon {
 public:
  ConceptLexicon();

  // Normalizes `term` with `config` before storing it. Throws ConfigError
  // when the term normalizes to nothing.
  void add(std::string_view term, ConceptCategory category,
           const NormalizationConfig& config = NormalizationConfig::defaults());

  // Longest entry starting at tokens[pos], as (length, category).
  std::optional<std::pair<std::size_t, ConceptCategory>> longest_match(
      const TokenSequence& tokens, std::size_t pos) const;

  std::optional<ConceptCategory> find(std::string_view normalized_term) const;

  std::size_t size() const noexcept { return entries_.size(); }
  std::size_t max_term_len() const noexcept { return max_term_len_; }
  const std::map<std::string, ConceptCategory>& entries() const noexcept {
    return entries_;
  }

  // JSON object mapping term -> category name.
  static ConceptLexicon from_json(
      const nlohmann::json& j,
      const NormalizationConfig& config = NormalizationConfig::defaults());
  static ConceptLexicon from_file(
      const std::string& path,
      const NormalizationConfig& config = NormalizationConfig::defaults());
  // The starter lexicon compiled into the library.
  static const ConceptLexicon& bundled();

 private:
  struct Node {
    std::map<std::string, std::size_t, std::less<>> children;
    std::optional<ConceptCategory> category;
  };
  std::vector<Node> trie_;
  std::map<std::string, ConceptCategory> entries_;
  std::size_t max_term_len_ = 0;
};

class ConceptAnnotator {
 public:
  virtual ~ConceptAnnotator() = default;
  // Non-overlapping annotations sorted by span start.
  virtual std::vector<ConceptAnnotation> annotate(
      const TokenSequence& tokens) const = 0;
  virtual std::string name() const = 0;
};

// Greedy left-to-right, longest match first.
class LexiconAnnotator final : public ConceptAnnotator {
 public:
  explicit LexiconAnnotator(ConceptLexicon lexicon);
  std::vector<ConceptAnnotation> annotate(
      const TokenSequence& tokens) const override;
  std::string name() const override { return "lexicon"; }
  const ConceptLexicon& lexicon() const noexcept { return lexicon_; }

 private:
  ConceptLexicon lexicon_;
};

std::vector<ConceptAnnotation> annotate(const TokenSequence& tokens,
                                        const ConceptAnnotator& annotator);

// Maps a vendor response onto {"entities": [{"text", "category", "code"?}]}.
struct AnnotatorAdapter {
  std::string entities_pointer = "/entities";
  std::string text_field = "text";
  std::string category_field = "category";
  std::string code_field = "code";
  // Vendor category -> category name understood by ConceptCategory::parse.
  std::map<std::string, std::string> category_map;

  static AnnotatorAdapter from_json(const nlohmann::json& j);
};

struct ServiceMention {
  std::string text;
  std::string category;
  std::optional<std::string> code;
};

struct ExternalAnnotation {
  std::vector<ConceptAnnotation> annotations;
  std::size_t dropped_mentions = 0;
};

// Re-derives token spans for service mentions by local alignment of each
// mention's normalized tokens against `tokens`. Mentions that do not align
// completely, or that would overlap an earlier mapped mention, are dropped.
ExternalAnnotation map_mentions(
    const TokenSequence& tokens, const std::vector<ServiceMention>& mentions,
    const AnnotatorAdapter& adapter = {},
    const NormalizationConfig& config = NormalizationConfig::defaults());

// POST {"text": joined tokens} and map the returned mentions.
ExternalAnnotation external_annotate(
    const TokenSequence& tokens, const ServiceEndpoint& endpoint,
    const AnnotatorAdapter& adapter = {},
    const NormalizationConfig& config = NormalizationConfig::defaults());

class ExternalAnnotator final : public ConceptAnnotator {
 public:
  ExternalAnnotator(ServiceEndpoint endpoint, AnnotatorAdapter adapter = {},
                    NormalizationConfig config = NormalizationConfig::defaults());
  std::vector<ConceptAnnotation> annotate(
      const TokenSequence& tokens) const override;
  std::string name() const override { return "external:" + endpoint_.url; }
  std::size_t dropped_mentions() const noexcept { return dropped_.load(); }

 private:
  ServiceEndpoint endpoint_;
  AnnotatorAdapter adapter_;
  NormalizationConfig config_;
  mutable std::atomic<std::size_t> dropped_{0};
};

}  // namespace medscribe
