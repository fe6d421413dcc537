#include "medscribe/enhance.hpp"

#include <fmt/format.h>

#include <atomic>
#include <exception>
#include <thread>

#include "medscribe/error.hpp"
#include "medscribe/text_util.hpp"

namespace medscribe {

void EnhanceOptions::validate() const {
  if (concurrency == 0) {
    throw Error(ErrorCode::ConfigError, "concurrency must be at least 1");
  }
  if (degeneration_threshold == 0) {
    throw Error(ErrorCode::ConfigError, "degeneration threshold must be at least 1");
  }
  if (!patterns) throw Error(ErrorCode::ConfigError, "no extraction patterns");
}

const PromptTemplate& StageAssets::template_for(Stage stage) const {
  if (auto it = templates.find(stage); it != templates.end()) return it->second;
  static const std::map<Stage, PromptTemplate> bundled = [] {
    std::map<Stage, PromptTemplate> m;
    for (auto s : {Stage::Punctuation, Stage::Diarization, Stage::Correction,
                   Stage::ZeroShotCombined}) {
      m.emplace(s, PromptTemplate::bundled(s));
    }
    return m;
  }();
  return bundled.at(stage);
}

const std::vector<FewShotExample>& StageAssets::examples_for(Stage stage) const {
  if (auto it = examples.find(stage); it != examples.end()) return it->second;
  static const std::map<Stage, std::vector<FewShotExample>> bundled = [] {
    std::map<Stage, std::vector<FewShotExample>> m;
    for (auto s : {Stage::Punctuation, Stage::Diarization, Stage::Correction,
                   Stage::ZeroShotCombined}) {
      m.emplace(s, bundled_examples(s));
    }
    return m;
  }();
  return bundled.at(stage);
}

namespace {

std::string generate_with_retries(LlmBackend& backend, const GenerationRequest& req,
                                  const EnhanceOptions& options, std::size_t& attempts) {
  for (attempts = 1;; ++attempts) {
    try {
      return backend.generate(req);
    } catch (const Error& e) {
      if (attempts > options.retry_budget) {
        throw Error(ErrorCode::BackendFailure,
                    fmt::format("{} chunk {} of '{}' failed after {} attempts: {}",
                                to_string(req.stage), req.chunk_index, req.transcript_id,
                                attempts, e.what()));
      }
      const auto delay = options.retry_base_delay * (1LL << (attempts - 1));
      if (delay.count() > 0) std::this_thread::sleep_for(delay);
    }
  }
}

// Cuts parsed lines so that only the first `keep` words survive.
void keep_words(std::vector<Turn>& turns, std::size_t keep) {
  std::vector<Turn> out;
  for (auto& t : turns) {
    if (keep == 0) break;
    auto spans = whitespace_word_spans(t.text);
    if (spans.size() > keep) {
      t.text = t.text.substr(0, spans[keep - 1].end);
      keep = 0;
    } else {
      keep -= spans.size();
    }
    out.push_back(std::move(t));
  }
  turns = std::move(out);
}

bool needs_labels(Stage stage) {
  return stage == Stage::Diarization || stage == Stage::ZeroShotCombined;
}

ChunkRecord run_chunk(const std::string& transcript_id, const Segment& seg,
                      LlmBackend& backend, Stage stage, const PromptTemplate& tmpl,
                      std::optional<std::span<const FewShotExample>> examples,
                      const EnhanceOptions& options) {
  ChunkRecord rec;
  rec.chunk_index = seg.index;
  rec.input = seg.text;
  rec.prompt = render_prompt(tmpl, seg.text, examples);

  GenerationRequest req;
  req.prompt = rec.prompt;
  req.max_output_tokens = backend.descriptor().max_output_tokens;
  req.temperature = backend.descriptor().temperature;
  req.stage = stage;
  req.chunk_index = seg.index;
  req.transcript_id = transcript_id;
  req.segment = &seg;
  rec.raw_response = generate_with_retries(backend, req, options, rec.attempts);
  rec.parsed = extract(rec.raw_response, stage, *options.patterns);

  std::vector<Turn> turns;
  const bool positional = rec.parsed.size() == seg.turns.size();
  for (std::size_t i = 0; i < rec.parsed.size(); ++i) {
    const auto& line = rec.parsed[i];
    Turn t;
    t.text = line.text;
    if (line.speaker) {
      t.speaker = *line.speaker;
    } else if (positional) {
      t.speaker = seg.turns[i].speaker;
    }
    turns.push_back(std::move(t));
  }

  if (!turns.empty()) {
    std::vector<std::string> out_texts, in_texts;
    for (const auto& t : turns) out_texts.push_back(t.text);
    for (const auto& t : seg.turns) in_texts.push_back(t.text);
    const auto tr = truncate_degeneration(join(out_texts, " "), join(in_texts, " "),
                                          options.degeneration_threshold);
    rec.unaligned_tail = tr.unaligned_tail;
    if (tr.truncated) {
      rec.truncated = true;
      keep_words(turns, split_whitespace(tr.text).size());
    }
  }

  const auto has_unknown = [](const std::vector<Turn>& ts) {
    return std::any_of(ts.begin(), ts.end(),
                       [](const Turn& t) { return t.speaker == SpeakerRole::Unknown; });
  };
  const bool introduces_unknown = !has_unknown(seg.turns) && has_unknown(turns);
  if (turns.empty() || (needs_labels(stage) && has_unknown(turns)) || introduces_unknown) {
    rec.fallback = true;
    turns = seg.turns;
  }
  rec.output = std::move(turns);
  return rec;
}

}  // namespace

StageRecord run_stage(const Transcript& t, LlmBackend& backend, Stage stage,
                      const PromptTemplate& tmpl,
                      std::optional<std::span<const FewShotExample>> examples,
                      const EnhanceOptions& options, Transcript& output) {
  options.validate();
  const auto segments = chunk(t, options.policy);
  StageRecord record;
  record.stage = stage;
  record.template_id = tmpl.id;
  record.chunks.resize(segments.size());

  std::vector<std::exception_ptr> errors(segments.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < segments.size(); i = next++) {
      try {
        record.chunks[i] = run_chunk(t.id, segments[i], backend, stage, tmpl, examples, options);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto workers = std::min(options.concurrency, segments.size());
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  output.id = t.id;
  output.kind = t.kind;
  output.turns.clear();
  for (const auto& c : record.chunks) {
    output.turns.insert(output.turns.end(), c.output.begin(), c.output.end());
  }
  output.reindex();
  return record;
}

EnhanceResult zero_shot_enhance(const Transcript& t, LlmBackend& backend,
                                const EnhanceOptions& options,
                                const std::optional<PromptTemplate>& tmpl) {
  const PromptTemplate& use =
      tmpl ? *tmpl : StageAssets{}.template_for(Stage::ZeroShotCombined);
  EnhanceResult result;
  result.record.transcript_id = t.id;
  result.record.policy = options.policy.to_string();
  result.record.backend = backend.descriptor().name;
  result.record.stages.push_back(run_stage(t, backend, Stage::ZeroShotCombined, use,
                                           std::nullopt, options, result.transcript));
  result.record.final_transcript = result.transcript;
  return result;
}

EnhanceResult cot_enhance(const Transcript& t, LlmBackend& backend,
                          std::span<const Stage> stages, const StageAssets& assets,
                          const EnhanceOptions& options) {
  if (stages.empty()) {
    throw Error(ErrorCode::InvalidArgument, "CoT enhancement needs at least one stage");
  }
  for (std::size_t i = 0; i < stages.size(); ++i) {
    if (stages[i] == Stage::ZeroShotCombined) {
      throw Error(ErrorCode::InvalidArgument, "zero_shot is not a CoT stage");
    }
    if (i && static_cast<int>(stages[i]) <= static_cast<int>(stages[i - 1])) {
      throw Error(ErrorCode::InvalidArgument,
                  "CoT stages must be ordered punctuation < diarization < correction");
    }
  }
  EnhanceResult result;
  result.record.transcript_id = t.id;
  result.record.policy = options.policy.to_string();
  result.record.backend = backend.descriptor().name;
  Transcript current = t;
  for (const auto stage : stages) {
    Transcript next;
    const auto& examples = assets.examples_for(stage);
    result.record.stages.push_back(run_stage(current, backend, stage,
                                             assets.template_for(stage),
                                             std::span<const FewShotExample>(examples),
                                             options, next));
    current = std::move(next);
  }
  result.transcript = std::move(current);
  result.record.final_transcript = result.transcript;
  return result;
}

std::size_t EnhancementRecord::fallback_count() const {
  std::size_t n = 0;
  for (const auto& s : stages) {
    for (const auto& c : s.chunks) n += c.fallback ? 1 : 0;
  }
  return n;
}

std::size_t EnhancementRecord::truncation_count() const {
  std::size_t n = 0;
  for (const auto& s : stages) {
    for (const auto& c : s.chunks) n += c.truncated ? 1 : 0;
  }
  return n;
}

namespace {

nlohmann::json turns_json(const std::vector<Turn>& turns) {
  auto arr = nlohmann::json::array();
  for (const auto& t : turns) {
    arr.push_back({{"speaker", to_wire_string(t.speaker)}, {"text", t.text}});
  }
  return arr;
}

nlohmann::json chunk_json(Stage stage, const ChunkRecord& c) {
  auto parsed = nlohmann::json::array();
  for (const auto& p : c.parsed) {
    nlohmann::json l = {{"text", p.text}, {"rung", static_cast<int>(p.rung)}};
    l["ordinal"] = p.ordinal ? nlohmann::json(*p.ordinal) : nlohmann::json();
    l["speaker"] = p.speaker ? nlohmann::json(to_wire_string(*p.speaker)) : nlohmann::json();
    l["justification"] =
        p.justification ? nlohmann::json(*p.justification) : nlohmann::json();
    parsed.push_back(std::move(l));
  }
  return {
      {"type", "chunk"},
      {"stage", to_string(stage)},
      {"chunk_index", c.chunk_index},
      {"input", c.input},
      {"prompt", c.prompt},
      {"raw_response", c.raw_response},
      {"parsed", std::move(parsed)},
      {"output", turns_json(c.output)},
      {"truncated", c.truncated},
      {"unaligned_tail", c.unaligned_tail},
      {"fallback", c.fallback},
      {"attempts", c.attempts},
  };
}

nlohmann::json header_json(const EnhancementRecord& r) {
  auto stage_names = nlohmann::json::array();
  for (const auto& s : r.stages) stage_names.push_back(to_string(s.stage));
  auto templates = nlohmann::json::array();
  for (const auto& s : r.stages) templates.push_back(s.template_id);
  return {{"type", "header"},      {"transcript_id", r.transcript_id},
          {"policy", r.policy},    {"backend", r.backend},
          {"stages", stage_names}, {"templates", templates}};
}

}  // namespace

nlohmann::json EnhancementRecord::to_json() const {
  auto j = header_json(*this);
  j.erase("type");
  auto st = nlohmann::json::array();
  for (const auto& s : stages) {
    auto chunks = nlohmann::json::array();
    for (const auto& c : s.chunks) {
      auto cj = chunk_json(s.stage, c);
      cj.erase("type");
      chunks.push_back(std::move(cj));
    }
    st.push_back({{"stage", to_string(s.stage)},
                  {"template", s.template_id},
                  {"chunks", std::move(chunks)}});
  }
  j["stage_records"] = std::move(st);
  j["final_transcript"] = turns_json(final_transcript.turns);
  return j;
}

std::string EnhancementRecord::to_jsonl() const {
  std::string out = header_json(*this).dump() + "\n";
  for (const auto& s : stages) {
    for (const auto& c : s.chunks) out += chunk_json(s.stage, c).dump() + "\n";
  }
  out += nlohmann::json{{"type", "final"}, {"transcript", turns_json(final_transcript.turns)}}
             .dump();
  out += "\n";
  return out;
}

}  // namespace medscribe
