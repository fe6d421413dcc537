#include "medscribe/concepts.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <nlohmann/json.hpp>

#include "medscribe/data.hpp"
#include "medscribe/error.hpp"
#include "medscribe/text_util.hpp"

namespace medscribe {

namespace {

using Kind = ConceptCategory::Kind;

struct KindName {
  Kind kind;
  std::string_view name;
  std::string_view key;  // lowercase, separators removed
};

constexpr std::array<KindName, 9> kKinds = {{
    {Kind::AnatomicalStructure, "AnatomicalStructure", "anatomicalstructure"},
    {Kind::Medicine, "Medicine", "medicine"},
    {Kind::Procedure, "Procedure", "procedure"},
    {Kind::LaboratoryData, "LaboratoryData", "laboratorydata"},
    {Kind::MedicalCondition, "MedicalCondition", "medicalcondition"},
    {Kind::BodyFunction, "BodyFunction", "bodyfunction"},
    {Kind::BodyMeasurement, "BodyMeasurement", "bodymeasurement"},
    {Kind::MedicalDevice, "MedicalDevice", "medicaldevice"},
    {Kind::Severity, "Severity", "severity"},
}};

std::string category_key(std::string_view name) {
  std::string key;
  for (char c : to_lower_ascii(trim(name))) {
    if (c == '_' || c == ' ' || c == '-') continue;
    key += c;
  }
  return key;
}

}  // namespace

ConceptCategory::ConceptCategory(Kind kind) : kind_(kind) {
  if (kind == Kind::Other) {
    throw Error(ErrorCode::InvalidArgument,
                "ConceptCategory::Other needs a label; use other(label)");
  }
}

ConceptCategory::ConceptCategory(Kind kind, std::string label)
    : kind_(kind), label_(std::move(label)), folded_(to_lower_ascii(label_)) {}

ConceptCategory ConceptCategory::other(std::string label) {
  if (trim(label).empty()) {
    throw Error(ErrorCode::InvalidArgument,
                "Other concept category needs a non-empty label");
  }
  return ConceptCategory(Kind::Other, std::string(trim(label)));
}

ConceptCategory ConceptCategory::parse(std::string_view name) {
  const auto key = category_key(name);
  for (const auto& k : kKinds) {
    if (k.key == key) return ConceptCategory(k.kind);
  }
  return other(std::string(name));
}

std::string ConceptCategory::name() const {
  if (kind_ == Kind::Other) return label_;
  for (const auto& k : kKinds) {
    if (k.kind == kind_) return std::string(k.name);
  }
  return label_;
}

bool operator==(const ConceptCategory& a, const ConceptCategory& b) {
  return a.kind_ == b.kind_ && a.folded_ == b.folded_;
}

std::strong_ordering operator<=>(const ConceptCategory& a,
                                 const ConceptCategory& b) {
  if (auto c = a.kind_ <=> b.kind_; c != 0) return c;
  return a.folded_ <=> b.folded_;
}

// ---------------------------------------------------------------------------

ConceptLexicon::ConceptLexicon() : trie_(1) {}

void ConceptLexicon::add(std::string_view term, ConceptCategory category,
                         const NormalizationConfig& config) {
  const auto tokens = normalize(term, config);
  if (tokens.empty()) {
    throw Error(ErrorCode::ConfigError,
                fmt::format("lexicon term '{}' normalizes to nothing", term));
  }
  std::size_t node = 0;
  for (const auto& tok : tokens) {
    auto it = trie_[node].children.find(tok);
    if (it == trie_[node].children.end()) {
      trie_.emplace_back();
      it = trie_[node].children.emplace(tok, trie_.size() - 1).first;
    }
    node = it->second;
  }
  trie_[node].category = category;
  entries_.insert_or_assign(join(tokens, " "), category);
  max_term_len_ = std::max(max_term_len_, tokens.size());
}

std::optional<std::pair<std::size_t, ConceptCategory>>
ConceptLexicon::longest_match(const TokenSequence& tokens, std::size_t pos) const {
  std::optional<std::pair<std::size_t, ConceptCategory>> best;
  std::size_t node = 0;
  for (std::size_t k = pos; k < tokens.size(); ++k) {
    const auto it = trie_[node].children.find(tokens[k]);
    if (it == trie_[node].children.end()) break;
    node = it->second;
    if (trie_[node].category) best.emplace(k - pos + 1, *trie_[node].category);
  }
  return best;
}

std::optional<ConceptCategory> ConceptLexicon::find(
    std::string_view normalized_term) const {
  const auto it = entries_.find(std::string(normalized_term));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

ConceptLexicon ConceptLexicon::from_json(const nlohmann::json& j,
                                         const NormalizationConfig& config) {
  if (!j.is_object()) {
    throw Error(ErrorCode::ConfigError,
                "lexicon must be a JSON object mapping term -> category");
  }
  ConceptLexicon lex;
  for (const auto& [term, category] : j.items()) {
    if (!category.is_string()) {
      throw Error(ErrorCode::ConfigError,
                  fmt::format("lexicon term '{}': category must be a string",
                              term));
    }
    lex.add(term, ConceptCategory::parse(category.get<std::string>()), config);
  }
  return lex;
}

ConceptLexicon ConceptLexicon::from_file(const std::string& path,
                                         const NormalizationConfig& config) {
  const auto raw = read_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(raw);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ConfigError,
                fmt::format("{}: invalid JSON at byte {}: {}", path, e.byte,
                            e.what()));
  }
  try {
    return from_json(j, config);
  } catch (const Error& e) {
    throw Error(e.code(), fmt::format("{}: {}", path, e.what()));
  }
}

const ConceptLexicon& ConceptLexicon::bundled() {
  static const ConceptLexicon lex =
      from_json(nlohmann::json::parse(embedded_file("medical_lexicon.json")));
  return lex;
}

LexiconAnnotator::LexiconAnnotator(ConceptLexicon lexicon)
    : lexicon_(std::move(lexicon)) {}

std::vector<ConceptAnnotation> LexiconAnnotator::annotate(
    const TokenSequence& tokens) const {
  std::vector<ConceptAnnotation> out;
  std::size_t i = 0;
  while (i < tokens.size()) {
    const auto match = lexicon_.longest_match(tokens, i);
    if (!match) {
      ++i;
      continue;
    }
    const auto [len, category] = *match;
    ConceptAnnotation a{{i, i + len},
                        {tokens.begin() + static_cast<std::ptrdiff_t>(i),
                         tokens.begin() + static_cast<std::ptrdiff_t>(i + len)},
                        category,
                        std::nullopt};
    out.push_back(std::move(a));
    i += len;
  }
  return out;
}

std::vector<ConceptAnnotation> annotate(const TokenSequence& tokens,
                                        const ConceptAnnotator& annotator) {
  return annotator.annotate(tokens);
}

// ---------------------------------------------------------------------------

AnnotatorAdapter AnnotatorAdapter::from_json(const nlohmann::json& j) {
  AnnotatorAdapter a;
  a.entities_pointer = j.value("entities_pointer", a.entities_pointer);
  a.text_field = j.value("text_field", a.text_field);
  a.category_field = j.value("category_field", a.category_field);
  a.code_field = j.value("code_field", a.code_field);
  if (j.contains("category_map")) {
    for (const auto& [k, v] : j.at("category_map").items()) {
      a.category_map.emplace(k, v.get<std::string>());
    }
  }
  return a;
}

ExternalAnnotation map_mentions(const TokenSequence& tokens,
                                const std::vector<ServiceMention>& mentions,
                                const AnnotatorAdapter& adapter,
                                const NormalizationConfig& config) {
  ExternalAnnotation result;
  std::vector<bool> taken(tokens.size(), false);
  const SmithWatermanScoring scoring;
  std::size_t cursor = 0;

  auto try_region = [&](const TokenSequence& mention_tokens,
                        std::size_t start) -> std::optional<IndexRange> {
    if (start >= tokens.size()) return std::nullopt;
    const std::span<const std::string> region(tokens.begin() + static_cast<std::ptrdiff_t>(start),
                                              tokens.end());
    const auto local = smith_waterman(mention_tokens, region, scoring);
    const auto full = static_cast<int>(mention_tokens.size()) * scoring.match;
    if (local.score != full) return std::nullopt;
    IndexRange span{local.ref_span.begin + start, local.ref_span.end + start};
    for (std::size_t k = span.begin; k < span.end; ++k) {
      if (taken[k]) return std::nullopt;
    }
    return span;
  };

  for (const auto& m : mentions) {
    const auto mention_tokens = normalize(m.text, config);
    if (mention_tokens.empty()) {
      ++result.dropped_mentions;
      continue;
    }
    // Services report mentions in text order; look after the previous one
    // first so repeated terms map to successive occurrences.
    auto span = try_region(mention_tokens, cursor);
    if (!span && cursor > 0) span = try_region(mention_tokens, 0);
    if (!span) {
      ++result.dropped_mentions;
      continue;
    }
    for (std::size_t k = span->begin; k < span->end; ++k) taken[k] = true;
    cursor = span->end;
    const auto mapped = adapter.category_map.find(m.category);
    const auto category = ConceptCategory::parse(
        mapped == adapter.category_map.end() ? m.category : mapped->second);
    result.annotations.push_back(
        {*span,
         {tokens.begin() + static_cast<std::ptrdiff_t>(span->begin),
          tokens.begin() + static_cast<std::ptrdiff_t>(span->end)},
         category,
         m.code});
  }
  std::sort(result.annotations.begin(), result.annotations.end(),
            [](const auto& a, const auto& b) { return a.span.begin < b.span.begin; });
  return result;
}

ExternalAnnotation external_annotate(const TokenSequence& tokens,
                                     const ServiceEndpoint& endpoint,
                                     const AnnotatorAdapter& adapter,
                                     const NormalizationConfig& config) {
  const auto response = post_json(endpoint, {{"text", join(tokens, " ")}});
  std::vector<ServiceMention> mentions;
  try {
    const auto& entities =
        response.at(nlohmann::json::json_pointer(adapter.entities_pointer));
    if (!entities.is_array()) {
      throw Error(ErrorCode::SchemaMismatch,
                  fmt::format("'{}' is not an array", adapter.entities_pointer));
    }
    for (const auto& e : entities) {
      ServiceMention m;
      m.text = e.at(adapter.text_field).get<std::string>();
      m.category = e.at(adapter.category_field).get<std::string>();
      if (e.contains(adapter.code_field) && e[adapter.code_field].is_string()) {
        m.code = e[adapter.code_field].get<std::string>();
      }
      mentions.push_back(std::move(m));
    }
  } catch (const nlohmann::json::exception& e) {
    throw HttpError(ErrorCode::SchemaMismatch,
                    fmt::format("annotator response from {}: {}", endpoint.url,
                                e.what()),
                    200);
  }
  return map_mentions(tokens, mentions, adapter, config);
}

ExternalAnnotator::ExternalAnnotator(ServiceEndpoint endpoint,
                                     AnnotatorAdapter adapter,
                                     NormalizationConfig config)
    : endpoint_(std::move(endpoint)),
      adapter_(std::move(adapter)),
      config_(std::move(config)) {}

std::vector<ConceptAnnotation> ExternalAnnotator::annotate(
    const TokenSequence& tokens) const {
  auto result = external_annotate(tokens, endpoint_, adapter_, config_);
  dropped_ += result.dropped_mentions;
  return std::move(result.annotations);
}

}  // namespace medscribe
