#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace medscribe {

enum class EditKind { Match, Substitute, Delete, Insert };

std::string_view to_string(EditKind kind);

// Match/Substitute carry both indices, Delete only the reference index,
// Insert only the hypothesis index.
struct EditOp {
  EditKind kind;
  std::optional<std::size_t> hyp;
  std::optional<std::size_t> ref;

  friend bool operator==(const EditOp&, const EditOp&) = default;
};

struct EditCounts {
  std::size_t matches = 0;
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;

  std::size_t errors() const { return substitutions + deletions + insertions; }
  friend bool operator==(const EditCounts&, const EditCounts&) = default;
};

struct EditAlignment {
  std::vector<EditOp> ops;
  EditCounts counts;
  std::size_t n_ref = 0;
  std::size_t n_hyp = 0;
};

// Minimum word edit distance alignment under unit costs. When several
// predecessors tie, the backtrace prefers Match/Substitute, then Delete,
// then Insert, so the op sequence is deterministic.
EditAlignment global_align(std::span<const std::string> hyp,
                           std::span<const std::string> ref);

// Same edit count as global_align. Among the minimum-edit alignments it
// takes the one with the fewest substitutions pairing a marked token with an
// unmarked one, then applies the usual tie-break. Masks are per token.
EditAlignment global_align_classed(std::span<const std::string> hyp,
                                   std::span<const std::string> ref,
                                   const std::vector<bool>& hyp_marked,
                                   const std::vector<bool>& ref_marked);

// Edit distance only, O(min(n, m)) memory.
std::size_t edit_distance(std::span<const std::string> hyp,
                          std::span<const std::string> ref);

struct SmithWatermanScoring {
  int match = 2;
  int mismatch = -1;
  int gap = -1;

  void validate() const;
};

struct IndexRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool empty() const { return begin == end; }
  friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

struct LocalAlignment {
  IndexRange hyp_span;
  IndexRange ref_span;
  int score = 0;
  // (hyp index, ref index) of every identical-token pair on the path.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
};

// Best-scoring local alignment at word granularity. Among cells sharing the
// best score the one with the smallest (hyp_end, ref_end) wins.
LocalAlignment smith_waterman(std::span<const std::string> hyp,
                              std::span<const std::string> ref,
                              const SmithWatermanScoring& scoring = {});

struct TruncationResult {
  std::string text;
  bool truncated = false;
  std::size_t unaligned_tail = 0;
};

inline constexpr std::size_t kDefaultDegenerationThreshold = 20;

// Cuts runaway tails from an LLM output: words after the end of the best
// local alignment against the stage input are counted, and when there are
// more than `threshold` of them the output is cut at the alignment end.
// Tokenisation here is plain whitespace splitting of the raw strings.
TruncationResult truncate_degeneration(
    std::string_view llm_output, std::string_view stage_input,
    std::size_t threshold = kDefaultDegenerationThreshold,
    const SmithWatermanScoring& scoring = {});

}  // namespace medscribe
