#pragma once

#include <chrono>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <nlohmann/json.hpp>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "medscribe/align.hpp"
#include "medscribe/http.hpp"
#include "medscribe/parse.hpp"
#include "medscribe/transcript.hpp"

namespace medscribe {

// ---- chunking -------------------------------------------------------------

class ChunkingPolicy {
 public:
  enum class Mode { Lines, WholeTranscript };

  static ChunkingPolicy lines(std::size_t n);
  static ChunkingPolicy whole() { return ChunkingPolicy(Mode::WholeTranscript, 0); }
  // "lines:10", "lines:5", "whole"
  static ChunkingPolicy parse(std::string_view text);

  Mode mode() const noexcept { return mode_; }
  std::size_t lines_per_chunk() const noexcept { return n_; }
  // Window sizes other than 5 and 10 are allowed but reported.
  bool nonstandard() const noexcept {
    return mode_ == Mode::Lines && n_ != 5 && n_ != 10;
  }
  std::string to_string() const;

  friend bool operator==(const ChunkingPolicy&, const ChunkingPolicy&) = default;

 private:
  ChunkingPolicy(Mode mode, std::size_t n) : mode_(mode), n_(n) {}
  Mode mode_;
  std::size_t n_;
};

struct Segment {
  std::size_t index = 0;
  std::vector<Turn> turns;
  // "Doctor: text" per line, bare text for unlabeled turns.
  std::string text;
};

std::string render_segment_text(std::span<const Turn> turns);

// Throws EmptyTranscript when t has no turns.
std::vector<Segment> chunk(const Transcript& t, const ChunkingPolicy& policy);

// ---- prompts --------------------------------------------------------------

struct FewShotExample {
  std::string input;
  std::string rationale;
  std::string output;

  void validate() const;
};

// {"examples": [{"input", "rationale", "output"}, ...]}
std::vector<FewShotExample> examples_from_json(const nlohmann::json& j);
std::vector<FewShotExample> load_examples(const std::string& path);
// The five bundled synthetic examples for a CoT stage.
std::vector<FewShotExample> bundled_examples(Stage stage);

struct PromptTemplate {
  std::string id;
  std::string body;
  Stage stage = Stage::ZeroShotCombined;

  // Leading "#!" comment lines are stripped from the file contents.
  static PromptTemplate from_text(std::string id, std::string_view text, Stage stage);
  static PromptTemplate from_file(const std::string& path, Stage stage);
  static PromptTemplate bundled(Stage stage);

  bool uses_examples() const;
};

std::string render_examples(std::span<const FewShotExample> examples);

// Substitutes {transcript_segments} and, when bound, {examples}. Any other
// {identifier} left in the body raises UnboundPlaceholder. Substituted text is
// not rescanned.
std::string render_prompt(const PromptTemplate& tmpl, std::string_view segments,
                          std::optional<std::span<const FewShotExample>> examples =
                              std::nullopt);

// ---- backends -------------------------------------------------------------

struct BackendDescriptor {
  std::string name = "backend";
  std::size_t max_output_tokens = 4096;
  double temperature = 0.15;

  void validate() const;
};

struct GenerationRequest {
  std::string prompt;
  std::size_t max_output_tokens = 0;
  double temperature = 0.0;
  Stage stage = Stage::ZeroShotCombined;
  std::size_t chunk_index = 0;
  std::string transcript_id;
  // The chunk being enhanced; mocks answer from it instead of the prompt.
  const Segment* segment = nullptr;
};

// Implementations must tolerate concurrent generate() calls.
class LlmBackend {
 public:
  virtual ~LlmBackend() = default;
  virtual const BackendDescriptor& descriptor() const = 0;
  virtual std::string generate(const GenerationRequest& request) = 0;
};

// POST {"prompt", "max_output_tokens", "temperature"} -> {"text"}.
class HttpBackend final : public LlmBackend {
 public:
  HttpBackend(BackendDescriptor descriptor, ServiceEndpoint endpoint,
              std::string text_pointer = "/text");
  const BackendDescriptor& descriptor() const override { return descriptor_; }
  std::string generate(const GenerationRequest& request) override;

 private:
  BackendDescriptor descriptor_;
  ServiceEndpoint endpoint_;
  std::string text_pointer_;
};

// Answers with the request's segment rendered in the stage's expected output
// structure, relabeled according to the mode.
class EchoBackend final : public LlmBackend {
 public:
  enum class LabelMode { Preserve, Fixed, Alternate };

  explicit EchoBackend(LabelMode mode = LabelMode::Preserve,
                       SpeakerRole fixed = SpeakerRole::Doctor);
  const BackendDescriptor& descriptor() const override { return descriptor_; }
  std::string generate(const GenerationRequest& request) override;

  // "echo", "echo:alternate", "echo:doctor", "echo:patient"
  static std::unique_ptr<EchoBackend> from_spec(std::string_view spec);

 private:
  BackendDescriptor descriptor_;
  LabelMode mode_;
  SpeakerRole fixed_;
};

// Canned responses keyed by (transcript, stage, chunk):
//   {"responses": [{"transcript": "t1", "stage": "correction", "chunk": 0,
//                   "text": "...", "fail": 1}],
//    "fallback": "echo"}
// "transcript" is optional. "fail" is how many calls fail before the text is
// returned, or "always". Unmatched requests go to the fallback (an echo spec)
// or fail.
class ScriptedMockBackend final : public LlmBackend {
 public:
  static std::unique_ptr<ScriptedMockBackend> from_json(const nlohmann::json& j);
  static std::unique_ptr<ScriptedMockBackend> from_file(const std::string& path);

  const BackendDescriptor& descriptor() const override { return descriptor_; }
  std::string generate(const GenerationRequest& request) override;

 private:
  struct Response {
    std::optional<std::string> transcript;
    Stage stage;
    std::size_t chunk;
    std::string text;
    std::size_t fail = 0;
    bool always_fail = false;
  };
  ScriptedMockBackend() = default;

  BackendDescriptor descriptor_;
  std::vector<Response> responses_;
  std::unique_ptr<EchoBackend> fallback_;
  std::mutex mu_;
  std::map<std::pair<std::size_t, std::string>, std::size_t> calls_;
};

// ---- enhancement ----------------------------------------------------------

struct EnhanceOptions {
  ChunkingPolicy policy = ChunkingPolicy::lines(10);
  std::size_t retry_budget = 2;
  std::chrono::milliseconds retry_base_delay{250};
  std::size_t concurrency = 1;
  std::size_t degeneration_threshold = kDefaultDegenerationThreshold;
  std::shared_ptr<const PatternSet> patterns = PatternSet::defaults();

  void validate() const;
};

struct ChunkRecord {
  std::size_t chunk_index = 0;
  std::string input;
  std::string prompt;
  std::string raw_response;
  std::vector<ParsedLine> parsed;
  std::vector<Turn> output;
  bool truncated = false;
  std::size_t unaligned_tail = 0;
  bool fallback = false;
  std::size_t attempts = 0;
};

struct StageRecord {
  Stage stage = Stage::ZeroShotCombined;
  std::string template_id;
  std::vector<ChunkRecord> chunks;
};

struct EnhancementRecord {
  std::string transcript_id;
  std::string policy;
  std::string backend;
  std::vector<StageRecord> stages;
  Transcript final_transcript;

  std::size_t fallback_count() const;
  std::size_t truncation_count() const;

  nlohmann::json to_json() const;
  // One header line, one line per chunk in stage order, one final line.
  std::string to_jsonl() const;
};

struct EnhanceResult {
  Transcript transcript;
  EnhancementRecord record;
};

// Per-stage prompt material for CoT runs; missing stages use the bundled
// template and examples.
struct StageAssets {
  std::map<Stage, PromptTemplate> templates;
  std::map<Stage, std::vector<FewShotExample>> examples;

  const PromptTemplate& template_for(Stage stage) const;
  const std::vector<FewShotExample>& examples_for(Stage stage) const;
};

// Runs one stage over t: chunk, prompt, generate with retries, parse,
// truncate, reassemble. Throws Error(BackendFailure) when a chunk's retries
// are exhausted.
StageRecord run_stage(const Transcript& t, LlmBackend& backend, Stage stage,
                      const PromptTemplate& tmpl,
                      std::optional<std::span<const FewShotExample>> examples,
                      const EnhanceOptions& options, Transcript& output);

EnhanceResult zero_shot_enhance(const Transcript& t, LlmBackend& backend,
                                const EnhanceOptions& options = {},
                                const std::optional<PromptTemplate>& tmpl = std::nullopt);

// `stages` must be non-empty, drawn from Punctuation < Diarization <
// Correction, and strictly increasing.
EnhanceResult cot_enhance(const Transcript& t, LlmBackend& backend,
                          std::span<const Stage> stages,
                          const StageAssets& assets = {},
                          const EnhanceOptions& options = {});

}  // namespace medscribe
