#include "medscribe/align.hpp"

#include <algorithm>
#include <cstdint>
#include <string_view>
#include <unordered_map>

#include "medscribe/error.hpp"
#include "medscribe/text_util.hpp"

namespace medscribe {

std::string_view to_string(EditKind kind) {
  switch (kind) {
    case EditKind::Match: return "match";
    case EditKind::Substitute: return "substitute";
    case EditKind::Delete: return "delete";
    case EditKind::Insert: return "insert";
  }
  return "match";
}

namespace {

// Costs are packed as edits * scale + secondary so one comparison orders
// alignments by edit count first and class-crossing substitutions second.
EditAlignment align_impl(std::span<const std::string> hyp, std::span<const std::string> ref,
                         const std::vector<bool>& hyp_marked, const std::vector<bool>& ref_marked) {
  const std::size_t n = ref.size();
  const std::size_t m = hyp.size();
  const std::size_t width = m + 1;
  const bool classed = !hyp_marked.empty() || !ref_marked.empty();
  const std::uint64_t scale = classed ? n + m + 1 : 1;
  // Token ids keep string compares out of the O(nm) loop.
  std::unordered_map<std::string_view, std::uint32_t> ids;
  auto intern = [&](std::span<const std::string> seq) {
    std::vector<std::uint32_t> out;
    out.reserve(seq.size());
    for (const auto& tok : seq) {
      out.push_back(ids.try_emplace(tok, static_cast<std::uint32_t>(ids.size())).first->second);
    }
    return out;
  };
  const auto ref_ids = intern(ref);
  const auto hyp_ids = intern(hyp);
  std::vector<std::uint8_t> ref_class(n, 0);
  std::vector<std::uint8_t> hyp_class(m, 0);
  for (std::size_t i = 0; i < ref_marked.size(); ++i) ref_class[i] = ref_marked[i];
  for (std::size_t j = 0; j < hyp_marked.size(); ++j) hyp_class[j] = hyp_marked[j];
  // Two cost rows plus one backtrace step per cell. The step records the
  // first of diag, delete, insert reaching the minimum.
  constexpr std::uint8_t kDiag = 0, kDel = 1, kIns = 2;
  std::vector<std::uint8_t> steps((n + 1) * width);
  std::vector<std::uint64_t> prev(width);
  std::vector<std::uint64_t> cur(width);
  for (std::size_t j = 0; j <= m; ++j) {
    prev[j] = j * scale;
    steps[j] = kIns;
  }
  for (std::size_t i = 1; i <= n; ++i) {
    std::uint8_t* row = &steps[i * width];
    cur[0] = i * scale;
    row[0] = kDel;
    for (std::size_t j = 1; j <= m; ++j) {
      const std::uint32_t r = ref_ids[i - 1];
      const std::uint8_t rc = ref_class[i - 1];
      const std::uint64_t sub =
          r == hyp_ids[j - 1] ? 0 : scale + static_cast<std::uint64_t>(rc ^ hyp_class[j - 1]);
      std::uint64_t best = prev[j - 1] + sub;
      std::uint8_t step = kDiag;
      const std::uint64_t del = prev[j] + scale;
      const std::uint64_t ins = cur[j - 1] + scale;
      step = del < best ? kDel : step;
      best = del < best ? del : best;
      step = ins < best ? kIns : step;
      best = ins < best ? ins : best;
      cur[j] = best;
      row[j] = step;
    }
    std::swap(prev, cur);
  }

  EditAlignment out;
  out.n_ref = n;
  out.n_hyp = m;
  std::size_t i = n;
  std::size_t j = m;
  while (i > 0 || j > 0) {
    const std::uint8_t step = steps[i * width + j];
    if (step == kDiag) {
      const bool same = ref_ids[i - 1] == hyp_ids[j - 1];
      out.ops.push_back({same ? EditKind::Match : EditKind::Substitute, j - 1, i - 1});
      same ? ++out.counts.matches : ++out.counts.substitutions;
      --i;
      --j;
    } else if (step == kDel) {
      out.ops.push_back({EditKind::Delete, std::nullopt, i - 1});
      ++out.counts.deletions;
      --i;
    } else {
      out.ops.push_back({EditKind::Insert, j - 1, std::nullopt});
      ++out.counts.insertions;
      --j;
    }
  }
  std::reverse(out.ops.begin(), out.ops.end());
  return out;
}

}  // namespace

EditAlignment global_align(std::span<const std::string> hyp,
                           std::span<const std::string> ref) {
  return align_impl(hyp, ref, {}, {});
}

EditAlignment global_align_classed(std::span<const std::string> hyp,
                                   std::span<const std::string> ref,
                                   const std::vector<bool>& hyp_marked,
                                   const std::vector<bool>& ref_marked) {
  if (hyp_marked.size() != hyp.size() || ref_marked.size() != ref.size()) {
    throw Error(ErrorCode::InvalidArgument, "token class masks must match the sequences");
  }
  return align_impl(hyp, ref, hyp_marked, ref_marked);
}

std::size_t edit_distance(std::span<const std::string> hyp,
                          std::span<const std::string> ref) {
  auto a = hyp;
  auto b = ref;
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({up + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

void SmithWatermanScoring::validate() const {
  if (match <= 0 || mismatch > 0 || gap > 0) {
    throw Error(ErrorCode::InvalidArgument,
                "Smith-Waterman scoring needs match > 0, mismatch <= 0, gap <= 0");
  }
}

LocalAlignment smith_waterman(std::span<const std::string> hyp,
                              std::span<const std::string> ref,
                              const SmithWatermanScoring& scoring) {
  scoring.validate();
  const std::size_t n = hyp.size();
  const std::size_t m = ref.size();
  const std::size_t width = m + 1;
  std::vector<int> h((n + 1) * width, 0);
  auto at = [&](std::size_t i, std::size_t j) -> int& { return h[i * width + j]; };

  int best = 0;
  std::size_t best_i = 0;
  std::size_t best_j = 0;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const int sub = hyp[i - 1] == ref[j - 1] ? scoring.match : scoring.mismatch;
      const int v = std::max({0, at(i - 1, j - 1) + sub, at(i - 1, j) + scoring.gap,
                              at(i, j - 1) + scoring.gap});
      at(i, j) = v;
      // Row-major scan with a strict comparison keeps the lexicographically
      // smallest (hyp_end, ref_end) among equal scores.
      if (v > best) {
        best = v;
        best_i = i;
        best_j = j;
      }
    }
  }

  LocalAlignment out;
  if (best == 0) return out;
  out.score = best;
  std::size_t i = best_i;
  std::size_t j = best_j;
  while (i > 0 && j > 0 && at(i, j) > 0) {
    const int v = at(i, j);
    const bool same = hyp[i - 1] == ref[j - 1];
    const int sub = same ? scoring.match : scoring.mismatch;
    if (at(i - 1, j - 1) + sub == v) {
      if (same) out.pairs.emplace_back(i - 1, j - 1);
      --i;
      --j;
    } else if (at(i - 1, j) + scoring.gap == v) {
      --i;
    } else {
      --j;
    }
  }
  std::reverse(out.pairs.begin(), out.pairs.end());
  out.hyp_span = {i, best_i};
  out.ref_span = {j, best_j};
  return out;
}

TruncationResult truncate_degeneration(std::string_view llm_output,
                                       std::string_view stage_input,
                                       std::size_t threshold,
                                       const SmithWatermanScoring& scoring) {
  if (threshold < 1) {
    throw Error(ErrorCode::InvalidArgument, "degeneration threshold must be >= 1");
  }
  const auto out_spans = whitespace_word_spans(llm_output);
  std::vector<std::string> out_words;
  out_words.reserve(out_spans.size());
  for (const auto& s : out_spans) {
    out_words.emplace_back(llm_output.substr(s.begin, s.end - s.begin));
  }
  const auto in_words = split_whitespace(stage_input);
  const auto local = smith_waterman(out_words, in_words, scoring);

  TruncationResult result;
  result.unaligned_tail = out_words.size() - local.hyp_span.end;
  if (result.unaligned_tail > threshold) {
    result.truncated = true;
    const std::size_t cut =
        local.hyp_span.end == 0 ? 0 : out_spans[local.hyp_span.end - 1].end;
    result.text = std::string(llm_output.substr(0, cut));
  } else {
    result.text = std::string(llm_output);
  }
  return result;
}

}  // namespace medscribe
