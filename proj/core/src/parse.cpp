#include "medscribe/parse.hpp"

#include <fmt/format.h>

#include <algorithm>

#include <boost/regex.hpp>
#include <nlohmann/json.hpp>

#include "medscribe/data.hpp"
#include "medscribe/error.hpp"
#include "medscribe/text_util.hpp"

namespace medscribe {

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::Punctuation: return "punctuation";
    case Stage::Diarization: return "diarization";
    case Stage::Correction: return "correction";
    case Stage::ZeroShotCombined: return "zero_shot";
  }
  return "zero_shot";
}

Stage parse_stage(std::string_view name) {
  const auto n = to_lower_ascii(trim(name));
  if (n == "punctuation") return Stage::Punctuation;
  if (n == "diarization") return Stage::Diarization;
  if (n == "correction") return Stage::Correction;
  if (n == "zero_shot" || n == "zeroshot" || n == "zero-shot" ||
      n == "zero_shot_combined") {
    return Stage::ZeroShotCombined;
  }
  throw Error(ErrorCode::InvalidArgument, fmt::format("unknown stage '{}'", name));
}

namespace {

// Leading decoration an LLM may put before a marker: bullets, markdown
// headings, bold markers, quote characters.
constexpr const char* kLead = R"(^[\s*#>-]*)";

std::vector<ExtractionPattern> default_patterns() {
  const std::string lead = kLead;
  const std::string colon = R"(\s*\**\s*:\s*\**\s*)";
  const std::string rest = R"((?<text>.*?)\s*$)";
  const std::string ordinal = R"(\s*#?\s*(?<ordinal>\d+)?)";
  return {
      {"punctuated", lead + R"(punctuated\s+sentence)" + ordinal + colon + rest,
       {"text"}},
      {"corrected", lead + R"(corrected\s+sentence)" + ordinal + colon + rest,
       {"text"}},
      {"sentence",
       lead + R"((?:(?:original|reference|input)\s+)?sentence)" + ordinal + colon + rest,
       {"text"}},
      {"justification",
       lead + R"((?:justification|rationale|reasoning))" + colon + rest, {"text"}},
      {"label", lead + R"(label)" + colon + R"((?<label>.*?)\s*$)", {"label"}},
      {"label_speaker", R"(^speaker\s*\((?<speaker>.*?)\)\s*$)", {"speaker"}},
      {"speaker_line",
       lead + R"((?:(?<ordinal>\d+)|#)\s*[.):]\s*speaker\s*\((?<speaker>[^()]*)\)\s*:\s*)" + rest,
       {"speaker", "text"}},
      {"speaker_line_relaxed",
       lead + R"(speaker\s*\((?<speaker>[^()]*)\)\s*:\s*)" + rest,
       {"speaker", "text"}},
      {"speaker_line_brackets",
       lead + R"((?:(?:(?<ordinal>\d+)|#)\s*[.):]\s*)?(?:speaker\s*)?[\[({<]\s*)"
              R"((?<speaker>[^\[\](){}<>]*?(?:doctor|patient)[^\[\](){}<>]*?))"
              R"(\s*[\])}>]\s*:\s*)" + rest,
       {"speaker", "text"}},
      {"speaker_line_bare",
       lead + R"((?:(?:(?<ordinal>\d+)|#)\s*[.):]\s*)?(?:speaker\s+)?\**(?<speaker>doctor|patient)\**\s*:\s*)" + rest,
       {"speaker", "text"}},
      {"speaker_prefix",
       R"(^(?:speaker\s*)?[\[(]?\s*(?<speaker>doctor|patient)\s*[\])]?\s*:\s*)" + rest,
       {"speaker", "text"}},
  };
}

}  // namespace

struct PatternSet::Compiled {
  boost::regex punctuated, corrected, sentence, justification, label,
      label_speaker, speaker_line, speaker_line_relaxed, speaker_line_brackets,
      speaker_line_bare, speaker_prefix;
};

namespace {

boost::regex compile(const ExtractionPattern& p) {
  for (const auto& cap : p.captures) {
    if (p.source.find("(?<" + cap + ">") == std::string::npos) {
      throw Error(ErrorCode::ConfigError,
                  fmt::format("pattern '{}' lacks the named capture '{}'",
                              p.name, cap));
    }
  }
  try {
    return boost::regex(p.source, boost::regex::perl | boost::regex::icase);
  } catch (const boost::regex_error& e) {
    throw Error(ErrorCode::ConfigError,
                fmt::format("pattern '{}' does not compile: {}", p.name, e.what()));
  }
}

}  // namespace

PatternSet::PatternSet(std::vector<ExtractionPattern> patterns)
    : patterns_(std::move(patterns)), compiled_(std::make_unique<Compiled>()) {
  const std::map<std::string, boost::regex Compiled::*> slots = {
      {"punctuated", &Compiled::punctuated},
      {"corrected", &Compiled::corrected},
      {"sentence", &Compiled::sentence},
      {"justification", &Compiled::justification},
      {"label", &Compiled::label},
      {"label_speaker", &Compiled::label_speaker},
      {"speaker_line", &Compiled::speaker_line},
      {"speaker_line_relaxed", &Compiled::speaker_line_relaxed},
      {"speaker_line_brackets", &Compiled::speaker_line_brackets},
      {"speaker_line_bare", &Compiled::speaker_line_bare},
      {"speaker_prefix", &Compiled::speaker_prefix},
  };
  for (const auto& p : patterns_) {
    const auto it = slots.find(p.name);
    if (it == slots.end()) {
      throw Error(ErrorCode::ConfigError, fmt::format("unknown pattern '{}'", p.name));
    }
    (*compiled_).*(it->second) = compile(p);
  }
}

PatternSet::~PatternSet() = default;

std::shared_ptr<const PatternSet> PatternSet::defaults() {
  static const auto set = std::make_shared<const PatternSet>(default_patterns());
  return set;
}

std::shared_ptr<const PatternSet> PatternSet::from_json(const nlohmann::json& j) {
  if (!j.is_object()) {
    throw Error(ErrorCode::ConfigError, "pattern config must be a JSON object");
  }
  auto patterns = default_patterns();
  for (const auto& [name, source] : j.items()) {
    auto it = std::find_if(patterns.begin(), patterns.end(),
                           [&](const auto& p) { return p.name == name; });
    if (it == patterns.end()) {
      throw Error(ErrorCode::ConfigError, fmt::format("unknown pattern '{}'", name));
    }
    if (!source.is_string()) {
      throw Error(ErrorCode::ConfigError,
                  fmt::format("pattern '{}' must be a string", name));
    }
    it->source = source.get<std::string>();
  }
  return std::make_shared<const PatternSet>(std::move(patterns));
}

std::shared_ptr<const PatternSet> PatternSet::from_file(const std::string& path) {
  try {
    return from_json(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ConfigError, fmt::format("{}: {}", path, e.what()));
  }
}

SpeakerRole extract_speaker(std::string_view label_text) {
  const auto l = to_lower_ascii(label_text);
  const bool doctor = l.find("doctor") != std::string::npos;
  const bool patient = l.find("patient") != std::string::npos;
  if (doctor == patient) return SpeakerRole::Unknown;
  return doctor ? SpeakerRole::Doctor : SpeakerRole::Patient;
}

namespace {

enum class MarkerType {
  Blank,
  Prose,
  Punctuated,
  Corrected,
  Sentence,
  Justification,
  Label,
  SpeakerLine,
};

struct Marker {
  MarkerType type = MarkerType::Prose;
  std::optional<std::size_t> ordinal;
  std::string text;
  std::optional<SpeakerRole> speaker;
  ParseRung rung = ParseRung::Full;
};

bool safe_match(const std::string& line, boost::smatch& m, const boost::regex& re) {
  try {
    return boost::regex_match(line, m, re);
  } catch (const std::runtime_error&) {
    // Boost gives up on pathological inputs instead of recursing; treat as
    // no match.
    return false;
  }
}

std::optional<std::size_t> parse_ordinal(const boost::smatch& m) {
  const auto& g = m["ordinal"];
  if (!g.matched || g.length() == 0 || g.length() > 9) return std::nullopt;
  return static_cast<std::size_t>(std::stoul(g.str()));
}

MarkerType primary_marker(Stage stage) {
  switch (stage) {
    case Stage::Punctuation: return MarkerType::Punctuated;
    case Stage::Correction: return MarkerType::Corrected;
    case Stage::Diarization: return MarkerType::Sentence;
    case Stage::ZeroShotCombined: return MarkerType::SpeakerLine;
  }
  return MarkerType::SpeakerLine;
}

bool is_sentence_kind(MarkerType t) {
  return t == MarkerType::Punctuated || t == MarkerType::Corrected ||
         t == MarkerType::Sentence;
}

Marker classify(const std::string& line, Stage stage, const PatternSet::Compiled& re) {
  Marker mk;
  if (trim(line).empty()) {
    mk.type = MarkerType::Blank;
    return mk;
  }
  boost::smatch m;
  auto sentence_like = [&](MarkerType type) {
    mk.type = type;
    mk.ordinal = parse_ordinal(m);
    mk.text = m["text"].str();
    boost::smatch p;
    if (safe_match(mk.text, p, re.speaker_prefix)) {
      mk.speaker = extract_speaker(p["speaker"].str());
      const bool parens = mk.text.size() >= 7 && iequals(mk.text.substr(0, 7), "speaker");
      mk.rung = parens ? ParseRung::Full : ParseRung::BracketAgnostic;
      mk.text = p["text"].str();
    }
    return mk;
  };
  if (safe_match(line, m, re.punctuated)) return sentence_like(MarkerType::Punctuated);
  if (safe_match(line, m, re.corrected)) return sentence_like(MarkerType::Corrected);
  if (safe_match(line, m, re.sentence)) return sentence_like(MarkerType::Sentence);
  if (safe_match(line, m, re.justification)) {
    mk.type = MarkerType::Justification;
    mk.text = m["text"].str();
    return mk;
  }
  if (safe_match(line, m, re.label)) {
    mk.type = MarkerType::Label;
    const std::string label = m["label"].str();
    mk.speaker = extract_speaker(label);
    boost::smatch l;
    mk.rung = safe_match(label, l, re.label_speaker) ? ParseRung::Full
                                                     : ParseRung::BracketAgnostic;
    return mk;
  }
  const std::pair<const boost::regex*, ParseRung> speaker_forms[] = {
      {&re.speaker_line,
       stage == Stage::ZeroShotCombined ? ParseRung::Full : ParseRung::Relaxed},
      {&re.speaker_line_relaxed, ParseRung::Relaxed},
      {&re.speaker_line_brackets, ParseRung::BracketAgnostic},
      {&re.speaker_line_bare, ParseRung::Bare},
  };
  for (const auto& [pattern, rung] : speaker_forms) {
    if (safe_match(line, m, *pattern)) {
      mk.type = MarkerType::SpeakerLine;
      mk.ordinal = parse_ordinal(m);
      mk.speaker = extract_speaker(m["speaker"].str());
      mk.text = m["text"].str();
      mk.rung = rung;
      return mk;
    }
  }
  mk.type = MarkerType::Prose;
  mk.text = std::string(trim(line));
  return mk;
}

std::string clean_text(std::string_view s) {
  auto t = trim(s);
  while (t.size() >= 2 && t.substr(0, 2) == "**") t = trim(t.substr(2));
  while (t.size() >= 2 && t.substr(t.size() - 2) == "**") {
    t = trim(t.substr(0, t.size() - 2));
  }
  if (t.size() >= 2 && t.front() == '[' && t.back() == ']') {
    t = trim(t.substr(1, t.size() - 2));
  }
  return std::string(t);
}

struct OpenBlock {
  ParsedLine line;
  bool sentence_marker = false;
  bool primary = false;
  bool has_label = false;
  ParseRung label_rung = ParseRung::Full;
  ParseRung marker_rung = ParseRung::Full;
  enum class Cont { None, Text, Justification } cont = Cont::None;
};

}  // namespace

std::vector<ParsedLine> extract(std::string_view raw, Stage stage,
                                const PatternSet& patterns) {
  const auto& re = patterns.compiled();
  std::vector<Marker> markers;
  {
    std::size_t pos = 0;
    while (pos <= raw.size()) {
      std::size_t nl = raw.find('\n', pos);
      if (nl == std::string_view::npos) nl = raw.size();
      std::string line(raw.substr(pos, nl - pos));
      if (!line.empty() && line.back() == '\r') line.pop_back();
      markers.push_back(classify(line, stage, re));
      pos = nl + 1;
    }
  }
  const MarkerType primary = primary_marker(stage);
  bool has_primary = false;
  for (const auto& mk : markers) has_primary = has_primary || mk.type == primary;

  std::vector<ParsedLine> out;
  std::optional<OpenBlock> open;
  std::optional<SpeakerRole> echo_speaker;
  std::optional<std::size_t> last_ordinal;

  auto flush = [&] {
    if (!open) return;
    ParsedLine line = std::move(open->line);
    line.text = clean_text(line.text);
    if (line.justification) line.justification = clean_text(*line.justification);
    if (line.text.empty()) {
      open.reset();
      return;
    }
    ParseRung rung = open->marker_rung;
    auto worsen = [&](ParseRung r) {
      if (static_cast<int>(r) > static_cast<int>(rung)) rung = r;
    };
    if (open->sentence_marker) {
      if (!open->primary) worsen(ParseRung::Relaxed);
      if (stage == Stage::Diarization) {
        if (!line.justification || !line.ordinal) worsen(ParseRung::Relaxed);
        if (!open->has_label) worsen(ParseRung::Relaxed);
      }
      if (open->has_label) worsen(open->label_rung);
    }
    line.rung = rung;
    if (line.ordinal) {
      if (last_ordinal && *line.ordinal < *last_ordinal) {
        line.ordinal.reset();
      } else {
        last_ordinal = line.ordinal;
      }
    }
    out.push_back(std::move(line));
    open.reset();
  };

  for (auto& mk : markers) {
    const bool starts_block =
        has_primary ? mk.type == primary
                    : (is_sentence_kind(mk.type) || mk.type == MarkerType::SpeakerLine);
    if (starts_block) {
      flush();
      open.emplace();
      open->line.ordinal = mk.ordinal;
      open->line.speaker = mk.speaker;
      open->line.text = std::move(mk.text);
      open->sentence_marker = is_sentence_kind(mk.type);
      open->primary = mk.type == primary;
      open->marker_rung = mk.rung;
      open->cont = OpenBlock::Cont::Text;
      if (!open->line.speaker && echo_speaker) open->line.speaker = echo_speaker;
      echo_speaker.reset();
      continue;
    }
    switch (mk.type) {
      case MarkerType::Blank:
        if (open) open->cont = OpenBlock::Cont::None;
        break;
      case MarkerType::Prose:
        if (!open) break;
        if (open->cont == OpenBlock::Cont::Text) {
          open->line.text += ' ';
          open->line.text += mk.text;
        } else if (open->cont == OpenBlock::Cont::Justification) {
          *open->line.justification += ' ';
          *open->line.justification += mk.text;
        }
        break;
      case MarkerType::Justification:
        if (open && !open->has_label && !open->line.justification) {
          open->line.justification = std::move(mk.text);
          open->cont = OpenBlock::Cont::Justification;
        }
        break;
      case MarkerType::Label:
        if (open && !open->has_label) {
          open->has_label = true;
          open->label_rung = mk.rung;
          open->line.speaker = mk.speaker;
          open->cont = OpenBlock::Cont::None;
        }
        break;
      default:
        // A sentence-like marker that does not start blocks for this stage
        // (an echo of the input). It can lend its speaker to the next block.
        if (open) open->cont = OpenBlock::Cont::None;
        echo_speaker = mk.speaker;
        if (open && !open->line.speaker && mk.speaker) {
          // Echo placed after the block it describes.
          open->line.speaker = mk.speaker;
          echo_speaker.reset();
        }
        break;
    }
  }
  flush();
  return out;
}

std::string format_expected_output(Stage stage,
                                   const std::vector<ExpectedLine>& lines) {
  std::string out;
  auto speaker_prefix = [](const ExpectedLine& l) -> std::string {
    if (!l.speaker) return {};
    return fmt::format("Speaker ({}): ", to_string(*l.speaker));
  };
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& l = lines[i];
    switch (stage) {
      case Stage::Punctuation:
        if (i) out += '\n';
        out += fmt::format("Punctuated Sentence {}: {}{}", i + 1, speaker_prefix(l), l.text);
        break;
      case Stage::Correction:
        if (i) out += '\n';
        out += fmt::format("Corrected Sentence {}: {}{}", i + 1, speaker_prefix(l), l.text);
        break;
      case Stage::ZeroShotCombined:
        if (i) out += '\n';
        out += fmt::format("{}. Speaker ({}): {}", i + 1,
                           to_string(l.speaker.value_or(SpeakerRole::Unknown)), l.text);
        break;
      case Stage::Diarization:
        if (i) out += "\n\n";
        out += fmt::format("Sentence {}: {}", i + 1, l.text);
        if (l.justification) out += fmt::format("\nJustification: {}", *l.justification);
        if (l.speaker) out += fmt::format("\nLabel: Speaker ({})", to_string(*l.speaker));
        break;
    }
  }
  return out;
}

}  // namespace medscribe
