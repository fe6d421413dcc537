#include <fmt/format.h>

#include <algorithm>
#include <cctype>

#include "medscribe/data.hpp"
#include "medscribe/enhance.hpp"
#include "medscribe/error.hpp"
#include "medscribe/text_util.hpp"

namespace medscribe {

ChunkingPolicy ChunkingPolicy::lines(std::size_t n) {
  if (n == 0) {
    throw Error(ErrorCode::InvalidArgument, "chunk size must be positive");
  }
  return ChunkingPolicy(Mode::Lines, n);
}

ChunkingPolicy ChunkingPolicy::parse(std::string_view text) {
  const auto t = to_lower_ascii(trim(text));
  if (t == "whole" || t == "whole_transcript") return whole();
  if (t.rfind("lines:", 0) == 0) {
    const auto digits = t.substr(6);
    if (!digits.empty() && digits.size() <= 9 &&
        std::all_of(digits.begin(), digits.end(),
                    [](unsigned char c) { return std::isdigit(c); })) {
      return lines(std::stoul(digits));
    }
  }
  throw Error(ErrorCode::ConfigError,
              fmt::format("bad chunking policy '{}', expected lines:N or whole", text));
}

std::string ChunkingPolicy::to_string() const {
  return mode_ == Mode::WholeTranscript ? "whole" : fmt::format("lines:{}", n_);
}

std::string render_segment_text(std::span<const Turn> turns) {
  std::string out;
  for (std::size_t i = 0; i < turns.size(); ++i) {
    if (i) out += '\n';
    if (turns[i].speaker != SpeakerRole::Unknown) {
      out += to_string(turns[i].speaker);
      out += ": ";
    }
    out += turns[i].text;
  }
  return out;
}

std::vector<Segment> chunk(const Transcript& t, const ChunkingPolicy& policy) {
  if (t.turns.empty()) {
    throw Error(ErrorCode::EmptyTranscript,
                fmt::format("transcript '{}' has no turns to chunk", t.id));
  }
  const std::size_t n = policy.mode() == ChunkingPolicy::Mode::WholeTranscript
                            ? t.turns.size()
                            : policy.lines_per_chunk();
  std::vector<Segment> out;
  for (std::size_t begin = 0; begin < t.turns.size(); begin += n) {
    Segment s;
    s.index = out.size();
    const auto end = std::min(t.turns.size(), begin + n);
    s.turns.assign(t.turns.begin() + static_cast<std::ptrdiff_t>(begin),
                   t.turns.begin() + static_cast<std::ptrdiff_t>(end));
    s.text = render_segment_text(s.turns);
    out.push_back(std::move(s));
  }
  return out;
}

void FewShotExample::validate() const {
  if (trim(input).empty() || trim(rationale).empty() || trim(output).empty()) {
    throw Error(ErrorCode::ConfigError,
                "few-shot examples need non-empty input, rationale and output");
  }
}

std::vector<FewShotExample> examples_from_json(const nlohmann::json& j) {
  const auto* list = &j;
  if (j.is_object()) {
    if (!j.contains("examples")) {
      throw Error(ErrorCode::ConfigError, "example file lacks an 'examples' array");
    }
    list = &j.at("examples");
  }
  if (!list->is_array()) {
    throw Error(ErrorCode::ConfigError, "'examples' must be an array");
  }
  std::vector<FewShotExample> out;
  for (const auto& e : *list) {
    try {
      FewShotExample ex{e.at("input").get<std::string>(),
                        e.at("rationale").get<std::string>(),
                        e.at("output").get<std::string>()};
      ex.validate();
      out.push_back(std::move(ex));
    } catch (const nlohmann::json::exception& err) {
      throw Error(ErrorCode::ConfigError,
                  fmt::format("example {}: {}", out.size() + 1, err.what()));
    }
  }
  return out;
}

std::vector<FewShotExample> load_examples(const std::string& path) {
  try {
    return examples_from_json(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ConfigError, fmt::format("{}: {}", path, e.what()));
  }
}

std::vector<FewShotExample> bundled_examples(Stage stage) {
  if (stage == Stage::ZeroShotCombined) return {};
  return examples_from_json(nlohmann::json::parse(
      embedded_file(fmt::format("examples/{}.json", to_string(stage)))));
}

PromptTemplate PromptTemplate::from_text(std::string id, std::string_view text,
                                         Stage stage) {
  while (text.substr(0, 2) == "#!") {
    const auto nl = text.find('\n');
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
  }
  std::string body(text);
  while (!body.empty() && (body.back() == '\n' || body.back() == '\r')) body.pop_back();
  return PromptTemplate{std::move(id), std::move(body), stage};
}

PromptTemplate PromptTemplate::from_file(const std::string& path, Stage stage) {
  const auto raw = read_file(path);
  if (!is_valid_utf8(raw)) {
    throw Error(ErrorCode::InvalidUtf8, fmt::format("template {} is not UTF-8", path));
  }
  return from_text(path, raw, stage);
}

PromptTemplate PromptTemplate::bundled(Stage stage) {
  const auto name = fmt::format("templates/{}.txt", to_string(stage));
  return from_text(name, embedded_file(name), stage);
}

bool PromptTemplate::uses_examples() const {
  return body.find("{examples}") != std::string::npos;
}

std::string render_examples(std::span<const FewShotExample> examples) {
  std::string out;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    if (i) out += "\n\n";
    out += fmt::format("Example #{}:\nTranscript:\n{}\nRationale:\n{}\nOutput:\n{}", i + 1,
                       examples[i].input, examples[i].rationale, examples[i].output);
  }
  return out;
}

namespace {

bool ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

}  // namespace

std::string render_prompt(const PromptTemplate& tmpl, std::string_view segments,
                          std::optional<std::span<const FewShotExample>> examples) {
  const std::string_view body = tmpl.body;
  std::string out;
  out.reserve(body.size() + segments.size());
  std::size_t i = 0;
  while (i < body.size()) {
    if (body[i] == '{' && i + 1 < body.size() && ident_start(body[i + 1])) {
      std::size_t j = i + 1;
      while (j < body.size() && ident_char(body[j])) ++j;
      if (j < body.size() && body[j] == '}') {
        const auto name = body.substr(i + 1, j - i - 1);
        if (name == "transcript_segments") {
          out += segments;
        } else if (name == "examples" && examples) {
          out += render_examples(*examples);
        } else {
          throw UnboundPlaceholder(std::string(name));
        }
        i = j + 1;
        continue;
      }
    }
    out += body[i++];
  }
  return out;
}

}  // namespace medscribe
