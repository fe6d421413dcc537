#include <fmt/format.h>

#include <cctype>
#include <random>

#include "medscribe/error.hpp"
#include "medscribe/text_util.hpp"
#include "medscribe/transcript.hpp"

namespace medscribe {

namespace {

bool in_unit_interval(double x) { return x >= 0.0 && x <= 1.0; }

// mt19937_64 is fully specified by the standard; the distributions are not,
// so the unit-interval and index draws are done by hand to keep output
// identical across standard libraries.
class Draws {
 public:
  explicit Draws(std::uint64_t seed) : engine_(seed) {}
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  std::size_t index(std::size_t n) {
    return static_cast<std::size_t>(engine_() % n);
  }

 private:
  std::mt19937_64 engine_;
};

std::string strip_ascii_punctuation(std::string_view word) {
  std::string out;
  out.reserve(word.size());
  for (char c : word) {
    const auto u = static_cast<unsigned char>(c);
    if (u < 0x80 && std::ispunct(u) && c != '\'') continue;
    out.push_back(c);
  }
  return out;
}

}  // namespace

void ErrorInjectionSpec::validate() const {
  if (!in_unit_interval(substitution_rate) || !in_unit_interval(deletion_rate) ||
      !in_unit_interval(insertion_rate) ||
      !in_unit_interval(scramble_speakers_rate)) {
    throw Error(ErrorCode::InvalidArgument,
                "error injection rates must lie in [0, 1]");
  }
  if (substitution_rate + deletion_rate + insertion_rate > 1.0 + 1e-12) {
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("substitution + deletion + insertion rates sum to "
                            "{} > 1",
                            substitution_rate + deletion_rate + insertion_rate));
  }
}

Transcript inject_errors(const Transcript& t, const ErrorInjectionSpec& spec,
                         std::span<const std::string> vocabulary) {
  InjectionStats stats;
  return inject_errors(t, spec, vocabulary, stats);
}

Transcript inject_errors(const Transcript& t, const ErrorInjectionSpec& spec,
                         std::span<const std::string> vocabulary,
                         InjectionStats& stats) {
  spec.validate();
  if (vocabulary.empty() &&
      (spec.substitution_rate > 0.0 || spec.insertion_rate > 0.0)) {
    throw Error(ErrorCode::InvalidArgument,
                "substitution or insertion requested with an empty vocabulary");
  }
  stats = {};
  Draws draws(spec.seed);

  auto pick = [&](std::string_view avoid) {
    std::size_t k = draws.index(vocabulary.size());
    // A substitution by the same word is not an error; redraw a bounded
    // number of times so single-word vocabularies still terminate.
    for (int attempt = 0; attempt < 8 && vocabulary[k] == avoid &&
                          vocabulary.size() > 1;
         ++attempt) {
      k = draws.index(vocabulary.size());
    }
    return vocabulary[k];
  };

  Transcript out;
  out.id = t.id;
  out.kind = t.kind;
  for (const auto& turn : t.turns) {
    Turn next = turn;
    if (spec.scramble_speakers_rate > 0.0 &&
        draws.unit() < spec.scramble_speakers_rate &&
        turn.speaker != SpeakerRole::Unknown) {
      next.speaker = opposite(turn.speaker);
      ++stats.scrambled_turns;
    }

    const auto words = split_whitespace(turn.text);
    std::vector<std::string> rewritten;
    rewritten.reserve(words.size());
    bool changed = false;
    for (const auto& word : words) {
      ++stats.words;
      const double u = draws.unit();
      if (u < spec.substitution_rate) {
        rewritten.push_back(pick(word));
        ++stats.substitutions;
        changed = true;
      } else if (u < spec.substitution_rate + spec.deletion_rate) {
        ++stats.deletions;
        changed = true;
      } else if (spec.strip_punctuation) {
        auto stripped = strip_ascii_punctuation(word);
        if (stripped != word) changed = true;
        if (!stripped.empty()) rewritten.push_back(std::move(stripped));
      } else {
        rewritten.push_back(word);
      }
      if (spec.insertion_rate > 0.0 && draws.unit() < spec.insertion_rate) {
        rewritten.push_back(pick({}));
        ++stats.insertions;
        changed = true;
      }
    }
    if (changed) next.text = join(rewritten, " ");
    if (trim(next.text).empty()) continue;
    next.index = out.turns.size();
    out.turns.push_back(std::move(next));
  }
  return out;
}

}  // namespace medscribe
