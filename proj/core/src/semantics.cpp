#include "medscribe/semantics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "medscribe/error.hpp"
#include "medscribe/text_util.hpp"

namespace medscribe {

void EmbeddingVector::validate() const {
  if (values.empty()) {
    throw Error(ErrorCode::InvariantViolation, "embedding has no dimensions");
  }
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::InvariantViolation, "embedding has a non-finite value");
    }
  }
}

void EmbedderDescriptor::validate() const {
  if (max_input_tokens < 1 || dim < 1) {
    throw Error(ErrorCode::ConfigError,
                fmt::format("embedder '{}' needs max_input_tokens >= 1 and dim >= 1",
                            name));
  }
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                fmt::format("cosine of {}-d and {}-d vectors", a.dim(), b.dim()));
  }
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    dot += a.values[i] * b.values[i];
    na += a.values[i] * a.values[i];
    nb += b.values[i] * b.values[i];
  }
  if (na == 0.0 || nb == 0.0) {
    throw Error(ErrorCode::ZeroVector, "cosine of a zero vector is undefined");
  }
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

std::vector<std::string> segment_lines(const Transcript& t) {
  std::vector<std::string> lines;
  lines.reserve(t.turns.size());
  for (const auto& turn : t.turns) lines.push_back(turn.text);
  return lines;
}

TokenLimitResult limit_tokens(std::string_view text, std::size_t max_tokens) {
  const auto spans = whitespace_word_spans(text);
  if (spans.size() <= max_tokens) return {std::string(text), false};
  const auto cut = max_tokens == 0 ? 0 : spans[max_tokens - 1].end;
  return {std::string(text.substr(0, cut)), true};
}

HashEmbedder::HashEmbedder(std::size_t dim, std::size_t max_input_tokens) {
  descriptor_.name = fmt::format("hash-{}", dim);
  descriptor_.dim = dim;
  descriptor_.max_input_tokens = max_input_tokens;
  descriptor_.validate();
}

std::vector<std::string> HashEmbedder::tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char c : text) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '\'') {
      cur += c;
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

std::size_t HashEmbedder::bucket(std::string_view token) const {
  return static_cast<std::size_t>(fnv1a64(token) % descriptor_.dim);
}

EmbeddingVector HashEmbedder::embed(std::string_view text) const {
  const auto tokens = tokenize(text);
  if (tokens.empty()) {
    throw Error(ErrorCode::EmptyText, "hash embedder got text without tokens");
  }
  EmbeddingVector v;
  v.values.assign(descriptor_.dim, 0.0);
  for (const auto& tok : tokens) v.values[bucket(tok)] += 1.0;
  double norm = 0.0;
  for (double x : v.values) norm += x * x;
  norm = std::sqrt(norm);
  for (double& x : v.values) x /= norm;
  return v;
}

EmbeddingVector hash_embedder(std::string_view text, std::size_t dim) {
  return HashEmbedder(dim).embed(text);
}

ExternalEmbedder::ExternalEmbedder(EmbedderDescriptor descriptor)
    : descriptor_(std::move(descriptor)) {
  descriptor_.validate();
  if (!descriptor_.endpoint) {
    throw Error(ErrorCode::ConfigError,
                fmt::format("embedder '{}' has no endpoint", descriptor_.name));
  }
}

EmbeddingVector ExternalEmbedder::embed(std::string_view text) const {
  const auto response = post_json(*descriptor_.endpoint, {{"text", std::string(text)}});
  EmbeddingVector v;
  try {
    v.values = response.at("vector").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw HttpError(ErrorCode::SchemaMismatch,
                    fmt::format("embedder response: {}", e.what()), 200);
  }
  if (v.dim() != descriptor_.dim) {
    throw HttpError(ErrorCode::SchemaMismatch,
                    fmt::format("embedder '{}' returned {} dims, expected {}",
                                descriptor_.name, v.dim(), descriptor_.dim),
                    200);
  }
  v.validate();
  return v;
}

namespace {

struct LinePair {
  std::optional<std::size_t> hyp;
  std::optional<std::size_t> ref;
};

std::vector<LinePair> pair_lines(const std::vector<std::string>& hyp,
                                 const std::vector<std::string>& ref,
                                 LinePairing pairing) {
  std::vector<LinePair> pairs;
  if (pairing == LinePairing::ByIndex) {
    const std::size_t n = std::max(hyp.size(), ref.size());
    for (std::size_t i = 0; i < n; ++i) {
      pairs.push_back({i < hyp.size() ? std::optional(i) : std::nullopt,
                       i < ref.size() ? std::optional(i) : std::nullopt});
    }
    return pairs;
  }
  // Each line becomes one alignment symbol: its normalized token sequence.
  auto keys = [](const std::vector<std::string>& lines) {
    std::vector<std::string> out;
    out.reserve(lines.size());
    for (const auto& l : lines) out.push_back(join(normalize(l), " "));
    return out;
  };
  const auto al = global_align(keys(hyp), keys(ref));
  for (const auto& op : al.ops) pairs.push_back({op.hyp, op.ref});
  return pairs;
}

}  // namespace

SimilarityResult transcript_similarity(const Transcript& hyp,
                                       const Transcript& ref,
                                       const Embedder& embedder,
                                       LinePairing pairing) {
  if (hyp.turns.empty() || ref.turns.empty()) {
    throw Error(ErrorCode::EmptyTranscript,
                "similarity needs two non-empty transcripts");
  }
  const auto hyp_lines = segment_lines(hyp);
  const auto ref_lines = segment_lines(ref);
  const std::size_t limit = embedder.descriptor().max_input_tokens;

  SimilarityResult result;
  auto embed_line = [&](const std::string& line) {
    auto limited = limit_tokens(line, limit);
    if (limited.truncated) ++result.truncated_lines;
    return embedder.embed(limited.text);
  };

  std::vector<double> scores;
  for (const auto& p : pair_lines(hyp_lines, ref_lines, pairing)) {
    if (p.hyp && p.ref) {
      scores.push_back(cosine(embed_line(hyp_lines[*p.hyp]),
                              embed_line(ref_lines[*p.ref])));
      ++result.pairs;
    } else {
      scores.push_back(0.0);
      ++result.unpaired;
    }
  }
  result.stat = aggregate(scores);
  return result;
}

}  // namespace medscribe
