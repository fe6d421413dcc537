#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "medscribe/concepts.hpp"
#include "medscribe/enhance.hpp"
#include "medscribe/normalize.hpp"
#include "medscribe/semantics.hpp"
#include "medscribe/transcript.hpp"

namespace medscribe::cli {

struct RunLabel {
  std::string llm;
  std::string stt;
  std::string method;
  std::string chunking;
};

struct AnnotatorConfig {
  enum class Kind { Disabled, Bundled, Lexicon, External } kind = Kind::Bundled;
  std::filesystem::path lexicon;
  ServiceEndpoint endpoint;
  AnnotatorAdapter adapter;
};

struct EmbedderConfig {
  enum class Kind { Disabled, Hash, External } kind = Kind::Hash;
  std::size_t dim = 512;
  EmbedderDescriptor external;
};

struct BackendConfig {
  enum class Kind { None, Mock, Echo, Http } kind = Kind::None;
  std::filesystem::path script;
  std::string echo_mode = "echo";
  ServiceEndpoint endpoint;
  BackendDescriptor descriptor;
  std::string text_pointer = "/text";
};

struct SynthConfig {
  std::size_t transcripts = 5;
  std::size_t mean_turns = 92;
  std::size_t turn_spread = 18;  // turns drawn uniformly from mean +- spread
  std::size_t words_per_turn = 16;
  TranscriptFormat format = TranscriptFormat::Jsonl;
  ErrorInjectionSpec injection;
};

// A single JSON file with optional flag overrides merged in beforehand.
// Relative paths resolve against `base_dir` (the config file's directory).
struct RunConfig {
  std::filesystem::path hypothesis_dir;
  std::filesystem::path reference_dir;
  std::filesystem::path input_dir;  // enhance input; defaults to hypothesis_dir
  std::filesystem::path output_dir = "out";

  NormalizationConfig normalization = NormalizationConfig::defaults();
  std::optional<std::filesystem::path> normalization_path;
  AnnotatorConfig annotator;
  EmbedderConfig embedder;
  BackendConfig backend;

  ChunkingPolicy chunking = ChunkingPolicy::lines(10);
  std::string method = "zero_shot";  // or "cot"
  std::vector<Stage> stages = {Stage::Punctuation, Stage::Diarization, Stage::Correction};
  std::optional<std::filesystem::path> templates_dir;
  std::optional<std::filesystem::path> examples_dir;
  std::optional<std::filesystem::path> patterns_path;

  std::vector<std::string> salutations = default_salutations();
  std::size_t concurrency = 1;
  std::size_t chunk_concurrency = 1;
  std::size_t retry_budget = 2;
  std::size_t retry_base_delay_ms = 250;
  std::uint64_t seed = 1;
  RunLabel label;
  SynthConfig synth;

  nlohmann::json source;  // the merged JSON this was built from

  static RunConfig from_json(const nlohmann::json& j,
                             const std::filesystem::path& base_dir = ".");
  static nlohmann::json load_json(const std::filesystem::path& path);

  enum class Purpose { Score, Enhance, Synth, Debug };
  // Referenced paths must exist and limits must be sane for `purpose`.
  void validate(Purpose purpose) const;

  // Hex FNV-1a over the canonical dump of `source`.
  std::string hash() const;

  RunLabel effective_label() const;
};

std::unique_ptr<ConceptAnnotator> make_annotator(const RunConfig& config);
std::unique_ptr<Embedder> make_embedder(const RunConfig& config);
std::unique_ptr<LlmBackend> make_backend(const RunConfig& config);
StageAssets make_stage_assets(const RunConfig& config);
EnhanceOptions make_enhance_options(const RunConfig& config);

}  // namespace medscribe::cli
