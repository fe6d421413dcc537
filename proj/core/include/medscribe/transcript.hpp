#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace medscribe {

enum class SpeakerRole { Doctor, Patient, Unknown };

// Case-insensitive; throws Error(UnknownSpeakerLabel) for anything outside
// the closed set.
SpeakerRole parse_speaker_role(std::string_view label);
std::string_view to_string(SpeakerRole role);        // "Doctor"
std::string_view to_wire_string(SpeakerRole role);   // "doctor"
SpeakerRole opposite(SpeakerRole role);

struct Turn {
  SpeakerRole speaker = SpeakerRole::Unknown;
  std::string text;
  std::size_t index = 0;

  friend bool operator==(const Turn&, const Turn&) = default;
};

enum class TranscriptKind { Reference, Hypothesis };

struct Transcript {
  std::string id;
  std::vector<Turn> turns;
  TranscriptKind kind = TranscriptKind::Hypothesis;

  // Throws Error(InvariantViolation) naming the first broken invariant:
  // empty turn text, non-contiguous indices, Unknown speaker in a reference.
  void validate() const;
  // Rewrites turn indices to 0..n-1.
  void reindex();
  std::size_t word_count() const;

  friend bool operator==(const Transcript&, const Transcript&) = default;
};

Transcript make_transcript(std::string id, TranscriptKind kind,
                           std::span<const std::pair<SpeakerRole, std::string>> turns);

enum class TranscriptFormat { Jsonl, PlainText };

std::string_view to_string(TranscriptFormat format);
// ".jsonl" selects Jsonl; everything else is PlainText.
TranscriptFormat format_from_extension(std::string_view extension);
std::string_view file_extension(TranscriptFormat format);

Transcript parse_transcript(std::string_view raw, TranscriptFormat format,
                            std::string id = {},
                            TranscriptKind kind = TranscriptKind::Hypothesis);

std::string serialize_transcript(const Transcript& t, TranscriptFormat format);

Transcript read_transcript_file(const std::string& path, TranscriptKind kind);
void write_transcript_file(const Transcript& t, const std::string& path);

// ---------------------------------------------------------------------------
// Synthetic error injection.

struct ErrorInjectionSpec {
  double substitution_rate = 0.0;
  double deletion_rate = 0.0;
  double insertion_rate = 0.0;
  bool strip_punctuation = false;
  double scramble_speakers_rate = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// Deterministic in (t, spec, vocabulary). Turns whose text becomes empty are
// dropped and the remaining turns reindexed. Turns left untouched keep their
// original text byte for byte.
Transcript inject_errors(const Transcript& t, const ErrorInjectionSpec& spec,
                         std::span<const std::string> vocabulary);

struct InjectionStats {
  std::size_t words = 0;
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;
  std::size_t scrambled_turns = 0;
};

Transcript inject_errors(const Transcript& t, const ErrorInjectionSpec& spec,
                         std::span<const std::string> vocabulary,
                         InjectionStats& stats);

}  // namespace medscribe
