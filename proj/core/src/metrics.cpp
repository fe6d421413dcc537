#include "medscribe/metrics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "medscribe/error.hpp"
#include "medscribe/text_util.hpp"

namespace medscribe {

WerScore WerScore::from_counts(std::size_t s, std::size_t d, std::size_t i,
                               std::size_t n) {
  if (n == 0) {
    throw Error(ErrorCode::EmptyReference, "reference has no scoreable units");
  }
  return WerScore{s, d, i, n};
}

double WerScore::wer() const {
  if (n == 0) {
    throw Error(ErrorCode::EmptyReference, "reference has no scoreable units");
  }
  return static_cast<double>(errors()) / static_cast<double>(n);
}

WerScore wer_tokens(const TokenSequence& hyp, const TokenSequence& ref) {
  if (ref.empty()) {
    throw Error(ErrorCode::EmptyReference, "normalized reference is empty");
  }
  const auto al = global_align(hyp, ref);
  return WerScore::from_counts(al.counts.substitutions, al.counts.deletions,
                               al.counts.insertions, ref.size());
}

WerScore wer(std::string_view hyp_text, std::string_view ref_text,
             const NormalizationConfig& config) {
  return wer_tokens(normalize(hyp_text, config), normalize(ref_text, config));
}

std::string transcript_text(const Transcript& t) {
  std::string out;
  for (const auto& turn : t.turns) {
    if (!out.empty()) out += ' ';
    out += turn.text;
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<std::string> default_salutations() {
  return {"hello",        "hi",      "good morning", "good afternoon",
          "good evening", "goodbye", "bye",          "bye bye",
          "take care"};
}

namespace {

std::string salutation_key(std::string_view word) {
  std::string key;
  for (char c : word) {
    if (c >= 'A' && c <= 'Z') {
      key += static_cast<char>(c - 'A' + 'a');
    } else if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '\'') {
      key += c;
    }
  }
  return key;
}

}  // namespace

std::string strip_salutations(std::string_view turn_text,
                              std::span<const std::string> salutations) {
  const auto spans = whitespace_word_spans(turn_text);
  std::vector<std::string> keys;
  keys.reserve(spans.size());
  for (const auto& s : spans) {
    keys.push_back(salutation_key(turn_text.substr(s.begin, s.end - s.begin)));
  }
  std::vector<std::vector<std::string>> phrases;
  for (const auto& p : salutations) {
    auto words = split_whitespace(to_lower_ascii(p));
    if (!words.empty()) phrases.push_back(std::move(words));
  }
  std::stable_sort(phrases.begin(), phrases.end(),
                   [](const auto& a, const auto& b) { return a.size() > b.size(); });

  std::size_t b = 0;
  std::size_t e = spans.size();
  auto matches_at = [&](std::size_t pos, const std::vector<std::string>& phrase) {
    if (pos + phrase.size() > e) return false;
    for (std::size_t k = 0; k < phrase.size(); ++k) {
      if (keys[pos + k] != phrase[k]) return false;
    }
    return true;
  };
  bool changed = true;
  while (changed) {
    changed = false;
    while (b < e && keys[b].empty()) {
      ++b;
      changed = true;
    }
    for (const auto& phrase : phrases) {
      if (matches_at(b, phrase)) {
        b += phrase.size();
        changed = true;
        break;
      }
    }
  }
  changed = true;
  while (changed) {
    changed = false;
    while (e > b && keys[e - 1].empty()) {
      --e;
      changed = true;
    }
    for (const auto& phrase : phrases) {
      if (e >= b + phrase.size() && matches_at(e - phrase.size(), phrase)) {
        e -= phrase.size();
        changed = true;
        break;
      }
    }
  }
  if (b >= e) return {};
  return std::string(turn_text.substr(spans[b].begin, spans[e - 1].end - spans[b].begin));
}

std::string speaker_text(const Transcript& t, SpeakerRole role,
                         std::span<const std::string> salutations) {
  std::string out;
  for (const auto& turn : t.turns) {
    if (turn.speaker != role) continue;
    const auto stripped = strip_salutations(turn.text, salutations);
    if (stripped.empty()) continue;
    if (!out.empty()) out += ' ';
    out += stripped;
  }
  return out;
}

WerScore speaker_wer(const Transcript& hyp, const Transcript& ref,
                     SpeakerRole role, std::span<const std::string> salutations,
                     const NormalizationConfig& config) {
  const auto ref_tokens = normalize(speaker_text(ref, role, salutations), config);
  if (ref_tokens.empty()) {
    throw Error(ErrorCode::EmptyReference,
                fmt::format("reference '{}' has no scoreable {} speech", ref.id,
                            to_string(role)));
  }
  const auto hyp_tokens = normalize(speaker_text(hyp, role, salutations), config);
  return wer_tokens(hyp_tokens, ref_tokens);
}

std::size_t scoreable_reference_words(const Transcript& ref,
                                      std::span<const std::string> salutations,
                                      const NormalizationConfig& config) {
  std::size_t n = 0;
  for (const auto& turn : ref.turns) {
    n += normalize(strip_salutations(turn.text, salutations), config).size();
  }
  return n;
}

// ---------------------------------------------------------------------------

std::string_view to_string(ConceptErrorKind kind) {
  switch (kind) {
    case ConceptErrorKind::Substitute: return "substitute";
    case ConceptErrorKind::Delete: return "delete";
    case ConceptErrorKind::Insert: return "insert";
  }
  return "substitute";
}

McWerResult mc_wer_tokens(const TokenSequence& hyp, const TokenSequence& ref,
                          const ConceptAnnotator& annotator) {
  McWerResult result;
  result.ref_concepts = annotator.annotate(ref);
  if (result.ref_concepts.empty()) {
    throw Error(ErrorCode::EmptyReference,
                "reference contains no medical concepts");
  }
  result.hyp_concepts = annotator.annotate(hyp);
  // Ties between equal-cost alignments are broken away from pairing concept
  // tokens with non-concept tokens, so errors in ordinary words next to a
  // concept cannot change how the concept is scored.
  std::vector<bool> ref_marked(ref.size(), false);
  std::vector<bool> hyp_marked(hyp.size(), false);
  for (const auto& a : result.ref_concepts) {
    for (auto r = a.span.begin; r < a.span.end; ++r) ref_marked[r] = true;
  }
  for (const auto& a : result.hyp_concepts) {
    for (auto h = a.span.begin; h < a.span.end; ++h) hyp_marked[h] = true;
  }
  const auto al = global_align_classed(hyp, ref, hyp_marked, ref_marked);

  std::vector<std::size_t> op_of_ref(ref.size());
  std::vector<std::size_t> op_of_hyp(hyp.size());
  for (std::size_t k = 0; k < al.ops.size(); ++k) {
    if (al.ops[k].ref) op_of_ref[*al.ops[k].ref] = k;
    if (al.ops[k].hyp) op_of_hyp[*al.ops[k].hyp] = k;
  }

  std::size_t subs = 0;
  std::size_t dels = 0;
  std::size_t ins = 0;
  for (const auto& concept_ : result.ref_concepts) {
    bool all_match = true;
    bool any_sub = false;
    for (std::size_t r = concept_.span.begin; r < concept_.span.end; ++r) {
      const auto kind = al.ops[op_of_ref[r]].kind;
      all_match = all_match && kind == EditKind::Match;
      any_sub = any_sub || kind == EditKind::Substitute;
    }
    if (all_match) continue;
    if (any_sub) {
      std::vector<std::string> hyp_surface;
      const std::size_t first = op_of_ref[concept_.span.begin];
      const std::size_t last = op_of_ref[concept_.span.end - 1];
      for (std::size_t k = first; k <= last; ++k) {
        if (al.ops[k].hyp) hyp_surface.push_back(hyp[*al.ops[k].hyp]);
      }
      result.records.push_back({ConceptErrorKind::Substitute, concept_.category,
                                concept_.surface, std::move(hyp_surface)});
      ++subs;
    } else {
      result.records.push_back({ConceptErrorKind::Delete, concept_.category,
                                concept_.surface, std::nullopt});
      ++dels;
    }
  }
  for (const auto& concept_ : result.hyp_concepts) {
    bool all_insert = true;
    for (std::size_t h = concept_.span.begin; h < concept_.span.end; ++h) {
      all_insert = all_insert && al.ops[op_of_hyp[h]].kind == EditKind::Insert;
    }
    if (!all_insert) continue;
    result.records.push_back({ConceptErrorKind::Insert, concept_.category,
                              std::nullopt, concept_.surface});
    ++ins;
  }
  result.score = WerScore::from_counts(subs, dels, ins, result.ref_concepts.size());
  return result;
}

McWerResult mc_wer(std::string_view hyp_text, std::string_view ref_text,
                   const ConceptAnnotator& annotator,
                   const NormalizationConfig& config) {
  return mc_wer_tokens(normalize(hyp_text, config), normalize(ref_text, config),
                       annotator);
}

std::size_t TaxonomyMatrix::total() const {
  std::size_t n = 0;
  for (const auto& [_, v] : counts) n += v;
  return n;
}

std::size_t TaxonomyMatrix::at(const ConceptCategory& c, ConceptErrorKind k) const {
  const auto it = counts.find({c, k});
  return it == counts.end() ? 0 : it->second;
}

void TaxonomyMatrix::merge(const TaxonomyMatrix& other) {
  for (const auto& [key, v] : other.counts) counts[key] += v;
}

TaxonomyMatrix taxonomy(std::span<const ConceptErrorRecord> records,
                        std::span<const ConceptAnnotation> ref_annotations) {
  TaxonomyMatrix m;
  for (const auto& a : ref_annotations) {
    for (auto k : {ConceptErrorKind::Substitute, ConceptErrorKind::Delete,
                   ConceptErrorKind::Insert}) {
      m.counts.try_emplace({a.category, k}, 0);
    }
  }
  for (const auto& r : records) ++m.counts[{r.category, r.kind}];
  return m;
}

AggregateStat aggregate(std::span<const double> values, StdKind kind) {
  if (values.empty()) {
    throw Error(ErrorCode::InvalidArgument, "cannot aggregate an empty list");
  }
  // Welford for the spread; the reported mean comes from a compensated sum,
  // which is correctly rounded for short exact inputs such as n ones and a 0.
  double mean = 0.0;
  double m2 = 0.0;
  double sum = 0.0;
  double carry = 0.0;
  std::size_t n = 0;
  for (double x : values) {
    ++n;
    const double delta = x - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (x - mean);
    const double t = sum + x;
    carry += std::fabs(sum) >= std::fabs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  mean = (sum + carry) / static_cast<double>(n);
  double var = 0.0;
  if (n > 1) {
    var = m2 / static_cast<double>(kind == StdKind::Sample ? n - 1 : n);
  }
  return {mean, std::sqrt(std::max(var, 0.0)), n};
}

}  // namespace medscribe
