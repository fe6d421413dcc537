#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "medscribe/http.hpp"
#include "medscribe/metrics.hpp"
#include "medscribe/transcript.hpp"

namespace medscribe {

struct EmbeddingVector {
  std::vector<double> values;

  std::size_t dim() const noexcept { return values.size(); }
  // Throws InvariantViolation on an empty or non-finite vector.
  void validate() const;
};

struct EmbedderDescriptor {
  std::string name;
  std::size_t max_input_tokens = 512;
  std::size_t dim = 512;
  std::optional<ServiceEndpoint> endpoint;

  void validate() const;
};

// dot(a, b) / (|a| |b|), clamped to [-1, 1].
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

// One string per turn, text only.
std::vector<std::string> segment_lines(const Transcript& t);

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual const EmbedderDescriptor& descriptor() const = 0;
  virtual EmbeddingVector embed(std::string_view text) const = 0;
};

struct TokenLimitResult {
  std::string text;
  bool truncated = false;
};

// Cuts `text` after `max_tokens` whitespace tokens.
TokenLimitResult limit_tokens(std::string_view text, std::size_t max_tokens);

// Bag of words over a hashed vocabulary (FNV-1a modulo dim), L2-normalized.
// Tokens are lowercase ASCII alphanumeric runs (apostrophes kept).
class HashEmbedder final : public Embedder {
 public:
  explicit HashEmbedder(std::size_t dim = 512,
                        std::size_t max_input_tokens = 100'000);
  const EmbedderDescriptor& descriptor() const override { return descriptor_; }
  // Throws EmptyText when the text has no tokens.
  EmbeddingVector embed(std::string_view text) const override;

  std::size_t bucket(std::string_view token) const;
  static std::vector<std::string> tokenize(std::string_view text);

 private:
  EmbedderDescriptor descriptor_;
};

EmbeddingVector hash_embedder(std::string_view text, std::size_t dim = 512);

// POST {"text": ...} -> {"vector": [...]}.
class ExternalEmbedder final : public Embedder {
 public:
  explicit ExternalEmbedder(EmbedderDescriptor descriptor);
  const EmbedderDescriptor& descriptor() const override { return descriptor_; }
  EmbeddingVector embed(std::string_view text) const override;

 private:
  EmbedderDescriptor descriptor_;
};

enum class LinePairing {
  // Line-level global alignment; unpaired lines score 0.
  Aligned,
  // Line i with line i; surplus lines score 0.
  ByIndex,
};

struct SimilarityResult {
  AggregateStat stat;        // over every aligned position
  std::size_t pairs = 0;     // positions with a line on both sides
  std::size_t unpaired = 0;  // positions scoring 0
  std::size_t truncated_lines = 0;
};

SimilarityResult transcript_similarity(const Transcript& hyp,
                                       const Transcript& ref,
                                       const Embedder& embedder,
                                       LinePairing pairing = LinePairing::Aligned);

}  // namespace medscribe
