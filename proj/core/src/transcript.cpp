#include "medscribe/transcript.hpp"

#include <fmt/format.h>

#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "medscribe/error.hpp"
#include "medscribe/text_util.hpp"

namespace medscribe {

SpeakerRole parse_speaker_role(std::string_view label) {
  const auto l = trim(label);
  if (iequals(l, "doctor")) return SpeakerRole::Doctor;
  if (iequals(l, "patient")) return SpeakerRole::Patient;
  if (iequals(l, "unknown")) return SpeakerRole::Unknown;
  throw Error(ErrorCode::UnknownSpeakerLabel,
              fmt::format("'{}' is not one of Doctor, Patient, Unknown", l));
}

std::string_view to_string(SpeakerRole role) {
  switch (role) {
    case SpeakerRole::Doctor: return "Doctor";
    case SpeakerRole::Patient: return "Patient";
    case SpeakerRole::Unknown: return "Unknown";
  }
  return "Unknown";
}

std::string_view to_wire_string(SpeakerRole role) {
  switch (role) {
    case SpeakerRole::Doctor: return "doctor";
    case SpeakerRole::Patient: return "patient";
    case SpeakerRole::Unknown: return "unknown";
  }
  return "unknown";
}

SpeakerRole opposite(SpeakerRole role) {
  switch (role) {
    case SpeakerRole::Doctor: return SpeakerRole::Patient;
    case SpeakerRole::Patient: return SpeakerRole::Doctor;
    case SpeakerRole::Unknown: return SpeakerRole::Unknown;
  }
  return SpeakerRole::Unknown;
}

void Transcript::validate() const {
  for (std::size_t i = 0; i < turns.size(); ++i) {
    const auto& turn = turns[i];
    if (turn.index != i) {
      throw Error(ErrorCode::InvariantViolation,
                  fmt::format("transcript '{}': turn {} carries index {}", id,
                              i, turn.index));
    }
    if (trim(turn.text).empty()) {
      throw Error(ErrorCode::InvariantViolation,
                  fmt::format("transcript '{}': turn {} has empty text", id, i));
    }
    if (kind == TranscriptKind::Reference &&
        turn.speaker == SpeakerRole::Unknown) {
      throw Error(ErrorCode::InvariantViolation,
                  fmt::format("reference transcript '{}': turn {} has Unknown "
                              "speaker",
                              id, i));
    }
  }
}

void Transcript::reindex() {
  for (std::size_t i = 0; i < turns.size(); ++i) turns[i].index = i;
}

std::size_t Transcript::word_count() const {
  std::size_t n = 0;
  for (const auto& t : turns) n += whitespace_word_spans(t.text).size();
  return n;
}

Transcript make_transcript(
    std::string id, TranscriptKind kind,
    std::span<const std::pair<SpeakerRole, std::string>> turns) {
  Transcript t;
  t.id = std::move(id);
  t.kind = kind;
  for (const auto& [role, text] : turns) {
    t.turns.push_back(Turn{role, text, t.turns.size()});
  }
  t.validate();
  return t;
}

std::string_view to_string(TranscriptFormat format) {
  return format == TranscriptFormat::Jsonl ? "jsonl" : "text";
}

TranscriptFormat format_from_extension(std::string_view extension) {
  return iequals(extension, ".jsonl") ? TranscriptFormat::Jsonl
                                      : TranscriptFormat::PlainText;
}

std::string_view file_extension(TranscriptFormat format) {
  return format == TranscriptFormat::Jsonl ? ".jsonl" : ".txt";
}

namespace {

template <typename Fn>
void for_each_line(std::string_view raw, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= raw.size()) {
    std::size_t nl = raw.find('\n', pos);
    if (nl == std::string_view::npos) nl = raw.size();
    auto line = raw.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;
    fn(line_no, line);
    pos = nl + 1;
  }
}

Turn parse_plain_line(std::size_t line_no, std::string_view line) {
  const auto colon = line.find(':');
  if (colon == std::string_view::npos) {
    throw Error(ErrorCode::MalformedLine, "expected 'Speaker: text'", line_no,
                std::string(line));
  }
  Turn turn;
  try {
    turn.speaker = parse_speaker_role(line.substr(0, colon));
  } catch (const Error&) {
    throw Error(ErrorCode::UnknownSpeakerLabel, "unrecognised speaker label",
                line_no, std::string(line));
  }
  turn.text = std::string(trim(line.substr(colon + 1)));
  if (turn.text.empty()) {
    throw Error(ErrorCode::MalformedLine, "turn text is empty", line_no,
                std::string(line));
  }
  return turn;
}

Turn parse_jsonl_line(std::size_t line_no, std::string_view line) {
  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::MalformedLine, e.what(), line_no, std::string(line));
  }
  if (!obj.is_object() || !obj.contains("speaker") || !obj.contains("text") ||
      !obj["speaker"].is_string() || !obj["text"].is_string()) {
    throw Error(ErrorCode::MalformedLine,
                "expected an object with string fields speaker and text",
                line_no, std::string(line));
  }
  Turn turn;
  try {
    turn.speaker = parse_speaker_role(obj["speaker"].get<std::string>());
  } catch (const Error&) {
    throw Error(ErrorCode::UnknownSpeakerLabel, "unrecognised speaker label",
                line_no, std::string(line));
  }
  turn.text = std::string(trim(obj["text"].get<std::string>()));
  if (turn.text.empty()) {
    throw Error(ErrorCode::MalformedLine, "turn text is empty", line_no,
                std::string(line));
  }
  return turn;
}

}  // namespace

Transcript parse_transcript(std::string_view raw, TranscriptFormat format,
                            std::string id, TranscriptKind kind) {
  if (!is_valid_utf8(raw)) {
    throw Error(ErrorCode::InvalidUtf8,
                fmt::format("transcript '{}' is not valid UTF-8", id));
  }
  Transcript t;
  t.id = std::move(id);
  t.kind = kind;
  for_each_line(raw, [&](std::size_t line_no, std::string_view line) {
    if (trim(line).empty()) return;
    Turn turn = format == TranscriptFormat::Jsonl
                    ? parse_jsonl_line(line_no, line)
                    : parse_plain_line(line_no, trim(line));
    if (kind == TranscriptKind::Reference &&
        turn.speaker == SpeakerRole::Unknown) {
      throw Error(ErrorCode::InvariantViolation,
                  "reference transcripts may not contain Unknown speakers",
                  line_no, std::string(line));
    }
    turn.index = t.turns.size();
    t.turns.push_back(std::move(turn));
  });
  if (t.turns.empty()) {
    throw Error(ErrorCode::EmptyTranscript,
                fmt::format("transcript '{}' has no turns", t.id));
  }
  return t;
}

std::string serialize_transcript(const Transcript& t, TranscriptFormat format) {
  t.validate();
  std::string out;
  if (format == TranscriptFormat::Jsonl) {
    for (const auto& turn : t.turns) {
      nlohmann::json obj = {{"speaker", to_wire_string(turn.speaker)},
                            {"text", std::string(trim(turn.text))}};
      out += obj.dump();
      out += '\n';
    }
    return out;
  }
  for (std::size_t i = 0; i < t.turns.size(); ++i) {
    if (i) out += '\n';
    std::string text(trim(t.turns[i].text));
    for (auto& c : text) {
      if (c == '\n' || c == '\r') c = ' ';
    }
    out += to_string(t.turns[i].speaker);
    out += ": ";
    out += text;
  }
  return out;
}

Transcript read_transcript_file(const std::string& path, TranscriptKind kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::IoError, fmt::format("cannot open '{}'", path));
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::filesystem::path p(path);
  const auto format = format_from_extension(p.extension().string());
  try {
    return parse_transcript(buf.str(), format, p.stem().string(), kind);
  } catch (const Error& e) {
    if (e.line() != 0) {
      throw Error(e.code(), fmt::format("{}: {}", path, e.what()), e.line(),
                  e.offending());
    }
    throw Error(e.code(), fmt::format("{}: {}", path, e.what()));
  }
}

void write_transcript_file(const Transcript& t, const std::string& path) {
  const auto format =
      format_from_extension(std::filesystem::path(path).extension().string());
  const auto bytes = serialize_transcript(t, format);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::IoError, fmt::format("cannot write '{}'", path));
  }
  out << bytes;
  if (format == TranscriptFormat::PlainText) out << '\n';
}

}  // namespace medscribe
