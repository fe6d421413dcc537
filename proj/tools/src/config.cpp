#include "medscribe/cli/config.hpp"

#include <fmt/format.h>

#include <set>

#include "medscribe/data.hpp"
#include "medscribe/error.hpp"
#include "medscribe/text_util.hpp"

namespace medscribe::cli {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void config_error(const std::string& msg) {
  throw Error(ErrorCode::ConfigError, msg);
}

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known,
                    std::string_view where) {
  for (const auto& [k, v] : j.items()) {
    if (!known.count(k)) config_error(fmt::format("unknown key '{}' in {}", k, where));
  }
}

fs::path resolve(const fs::path& base, const nlohmann::json& v, std::string_view key) {
  if (!v.is_string()) config_error(fmt::format("'{}' must be a path string", key));
  fs::path p = v.get<std::string>();
  return p.is_absolute() ? p : base / p;
}

std::size_t positive(const nlohmann::json& v, std::string_view key, bool allow_zero = false) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    config_error(fmt::format("'{}' must be a non-negative integer", key));
  }
  const auto n = v.get<std::size_t>();
  if (n == 0 && !allow_zero) config_error(fmt::format("'{}' must be at least 1", key));
  return n;
}

ErrorInjectionSpec injection_from_json(const nlohmann::json& j) {
  reject_unknown(j, {"substitution_rate", "deletion_rate", "insertion_rate",
                     "strip_punctuation", "scramble_speakers_rate"},
                 "synth.injection");
  ErrorInjectionSpec s;
  s.substitution_rate = j.value("substitution_rate", 0.0);
  s.deletion_rate = j.value("deletion_rate", 0.0);
  s.insertion_rate = j.value("insertion_rate", 0.0);
  s.strip_punctuation = j.value("strip_punctuation", false);
  s.scramble_speakers_rate = j.value("scramble_speakers_rate", 0.0);
  s.validate();
  return s;
}

std::string capitalise(std::string_view s) {
  std::string out(s);
  if (!out.empty()) out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
  return out;
}

}  // namespace

nlohmann::json RunConfig::load_json(const fs::path& path) {
  try {
    return nlohmann::json::parse(read_file(path.string()));
  } catch (const nlohmann::json::parse_error& e) {
    config_error(fmt::format("{}: {}", path.string(), e.what()));
  }
}

RunConfig RunConfig::from_json(const nlohmann::json& input, const fs::path& base) {
  if (!input.is_object() && !input.is_null()) config_error("run config must be a JSON object");
  const nlohmann::json j = input.is_null() ? nlohmann::json::object() : input;
  reject_unknown(j,
                 {"hypothesis_dir", "reference_dir", "input_dir", "output_dir",
                  "normalization", "annotator", "embedder", "backend", "chunking",
                  "method", "stages", "templates_dir", "examples_dir", "patterns",
                  "salutations", "concurrency", "chunk_concurrency", "retry_budget",
                  "retry_base_delay_ms", "seed", "label", "synth"},
                 "run config");
  RunConfig c;
  c.source = j;
  try {
    if (j.contains("hypothesis_dir")) c.hypothesis_dir = resolve(base, j["hypothesis_dir"], "hypothesis_dir");
    if (j.contains("reference_dir")) c.reference_dir = resolve(base, j["reference_dir"], "reference_dir");
    c.input_dir = j.contains("input_dir") ? resolve(base, j["input_dir"], "input_dir")
                                          : c.hypothesis_dir;
    if (j.contains("output_dir")) c.output_dir = resolve(base, j["output_dir"], "output_dir");

    if (j.contains("normalization")) {
      const auto& n = j["normalization"];
      if (n.is_string()) {
        c.normalization_path = resolve(base, n, "normalization");
        c.normalization = NormalizationConfig::from_file(c.normalization_path->string());
      } else {
        c.normalization = NormalizationConfig::from_json(n);
      }
    }

    if (j.contains("annotator")) {
      const auto& a = j["annotator"];
      if (a.is_null() || a == "none") {
        c.annotator.kind = AnnotatorConfig::Kind::Disabled;
      } else if (a == "bundled") {
        c.annotator.kind = AnnotatorConfig::Kind::Bundled;
      } else if (a.is_object()) {
        reject_unknown(a, {"lexicon", "endpoint", "adapter"}, "annotator");
        if (a.contains("lexicon") == a.contains("endpoint")) {
          config_error("annotator needs exactly one of 'lexicon' or 'endpoint'");
        }
        if (a.contains("lexicon")) {
          c.annotator.kind = AnnotatorConfig::Kind::Lexicon;
          c.annotator.lexicon = resolve(base, a["lexicon"], "annotator.lexicon");
        } else {
          c.annotator.kind = AnnotatorConfig::Kind::External;
          c.annotator.endpoint = ServiceEndpoint::from_json(a["endpoint"]);
          if (a.contains("adapter")) c.annotator.adapter = AnnotatorAdapter::from_json(a["adapter"]);
        }
      } else {
        config_error("annotator must be null, \"bundled\" or an object");
      }
    }

    if (j.contains("embedder")) {
      const auto& e = j["embedder"];
      if (e.is_null() || e == "none") {
        c.embedder.kind = EmbedderConfig::Kind::Disabled;
      } else if (e.is_object()) {
        reject_unknown(e, {"kind", "dim", "name", "endpoint", "max_input_tokens"}, "embedder");
        const auto kind = e.value("kind", std::string("hash"));
        if (e.contains("dim")) c.embedder.dim = positive(e["dim"], "embedder.dim");
        if (kind == "hash") {
          c.embedder.kind = EmbedderConfig::Kind::Hash;
        } else if (kind == "external") {
          c.embedder.kind = EmbedderConfig::Kind::External;
          auto& d = c.embedder.external;
          d.name = e.value("name", std::string("external"));
          d.dim = c.embedder.dim;
          if (e.contains("max_input_tokens")) {
            d.max_input_tokens = positive(e["max_input_tokens"], "embedder.max_input_tokens");
          }
          if (!e.contains("endpoint")) config_error("external embedder needs an endpoint");
          d.endpoint = ServiceEndpoint::from_json(e["endpoint"]);
          d.validate();
        } else {
          config_error(fmt::format("unknown embedder kind '{}'", kind));
        }
      } else {
        config_error("embedder must be null or an object");
      }
    }

    if (j.contains("backend")) {
      const auto& b = j["backend"];
      if (!b.is_object()) config_error("backend must be an object");
      reject_unknown(b, {"kind", "script", "mode", "endpoint", "name", "max_output_tokens",
                         "temperature", "text_pointer"},
                     "backend");
      const auto kind = b.value("kind", std::string());
      auto& bc = c.backend;
      if (b.contains("name")) bc.descriptor.name = b["name"].get<std::string>();
      if (b.contains("max_output_tokens")) {
        bc.descriptor.max_output_tokens = positive(b["max_output_tokens"], "backend.max_output_tokens");
      }
      if (b.contains("temperature")) bc.descriptor.temperature = b["temperature"].get<double>();
      bc.descriptor.validate();
      if (kind == "mock") {
        bc.kind = BackendConfig::Kind::Mock;
        if (!b.contains("script")) config_error("mock backend needs a 'script'");
        bc.script = resolve(base, b["script"], "backend.script");
      } else if (kind == "echo") {
        bc.kind = BackendConfig::Kind::Echo;
        bc.echo_mode = b.value("mode", std::string("echo"));
        EchoBackend::from_spec(bc.echo_mode);
      } else if (kind == "http") {
        bc.kind = BackendConfig::Kind::Http;
        if (!b.contains("endpoint")) config_error("http backend needs an 'endpoint'");
        bc.endpoint = ServiceEndpoint::from_json(b["endpoint"]);
        bc.text_pointer = b.value("text_pointer", std::string("/text"));
      } else {
        config_error(fmt::format("backend kind must be mock, echo or http, got '{}'", kind));
      }
    }

    if (j.contains("chunking")) c.chunking = ChunkingPolicy::parse(j["chunking"].get<std::string>());
    if (j.contains("method")) {
      c.method = j["method"].get<std::string>();
      if (c.method != "zero_shot" && c.method != "cot") {
        config_error(fmt::format("method must be zero_shot or cot, got '{}'", c.method));
      }
    }
    if (j.contains("stages")) {
      c.stages.clear();
      for (const auto& s : j["stages"]) c.stages.push_back(parse_stage(s.get<std::string>()));
    }
    if (j.contains("templates_dir")) c.templates_dir = resolve(base, j["templates_dir"], "templates_dir");
    if (j.contains("examples_dir")) c.examples_dir = resolve(base, j["examples_dir"], "examples_dir");
    if (j.contains("patterns")) c.patterns_path = resolve(base, j["patterns"], "patterns");
    if (j.contains("salutations")) c.salutations = j["salutations"].get<std::vector<std::string>>();
    if (j.contains("concurrency")) c.concurrency = positive(j["concurrency"], "concurrency", true);
    if (j.contains("chunk_concurrency")) {
      c.chunk_concurrency = positive(j["chunk_concurrency"], "chunk_concurrency", true);
    }
    if (j.contains("retry_budget")) c.retry_budget = positive(j["retry_budget"], "retry_budget", true);
    if (j.contains("retry_base_delay_ms")) {
      c.retry_base_delay_ms = positive(j["retry_base_delay_ms"], "retry_base_delay_ms", true);
    }
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("label")) {
      const auto& l = j["label"];
      reject_unknown(l, {"llm", "stt", "method", "chunking"}, "label");
      c.label.llm = l.value("llm", std::string());
      c.label.stt = l.value("stt", std::string());
      c.label.method = l.value("method", std::string());
      c.label.chunking = l.value("chunking", std::string());
    }
    if (j.contains("synth")) {
      const auto& s = j["synth"];
      reject_unknown(s, {"transcripts", "mean_turns", "turn_spread", "words_per_turn", "format",
                         "injection"},
                     "synth");
      if (s.contains("transcripts")) c.synth.transcripts = positive(s["transcripts"], "synth.transcripts");
      if (s.contains("mean_turns")) c.synth.mean_turns = positive(s["mean_turns"], "synth.mean_turns");
      if (s.contains("turn_spread")) c.synth.turn_spread = positive(s["turn_spread"], "synth.turn_spread", true);
      if (s.contains("words_per_turn")) {
        c.synth.words_per_turn = positive(s["words_per_turn"], "synth.words_per_turn");
      }
      if (s.contains("format")) {
        const auto f = s["format"].get<std::string>();
        if (f == "jsonl") {
          c.synth.format = TranscriptFormat::Jsonl;
        } else if (f == "txt" || f == "plain") {
          c.synth.format = TranscriptFormat::PlainText;
        } else {
          config_error(fmt::format("synth.format must be jsonl or txt, got '{}'", f));
        }
      }
      if (s.contains("injection")) c.synth.injection = injection_from_json(s["injection"]);
      if (c.synth.turn_spread >= c.synth.mean_turns) {
        config_error("synth.turn_spread must be smaller than synth.mean_turns");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    config_error(fmt::format("run config: {}", e.what()));
  }
  return c;
}

void RunConfig::validate(Purpose purpose) const {
  auto need_dir = [](const fs::path& p, std::string_view what) {
    if (p.empty()) config_error(fmt::format("{} is not set", what));
    if (!fs::is_directory(p)) {
      config_error(fmt::format("{} '{}' is not a directory", what, p.string()));
    }
  };
  auto need_file = [](const fs::path& p, std::string_view what) {
    if (!fs::is_regular_file(p)) {
      config_error(fmt::format("{} '{}' does not exist", what, p.string()));
    }
  };
  if (concurrency < 1) config_error("concurrency must be at least 1");
  if (chunk_concurrency < 1) config_error("chunk_concurrency must be at least 1");
  if (normalization_path) need_file(*normalization_path, "normalization config");
  switch (purpose) {
    case Purpose::Score:
      need_dir(hypothesis_dir, "hypothesis_dir");
      need_dir(reference_dir, "reference_dir");
      if (annotator.kind == AnnotatorConfig::Kind::Lexicon) need_file(annotator.lexicon, "lexicon");
      break;
    case Purpose::Enhance:
      need_dir(input_dir, "input_dir");
      if (backend.kind == BackendConfig::Kind::None) config_error("no backend configured");
      if (backend.kind == BackendConfig::Kind::Mock) need_file(backend.script, "mock script");
      if (templates_dir) need_dir(*templates_dir, "templates_dir");
      if (examples_dir) need_dir(*examples_dir, "examples_dir");
      if (patterns_path) need_file(*patterns_path, "pattern config");
      if (method == "cot" && stages.empty()) config_error("cot needs at least one stage");
      break;
    case Purpose::Synth:
    case Purpose::Debug:
      break;
  }
}

std::string RunConfig::hash() const {
  return fmt::format("{:016x}", fnv1a64(source.dump()));
}

RunLabel RunConfig::effective_label() const {
  RunLabel l = label;
  if (l.chunking.empty()) l.chunking = chunking.to_string();
  if (l.method.empty()) {
    if (backend.kind == BackendConfig::Kind::None) {
      l.method = "ASR";
    } else if (method == "zero_shot") {
      l.method = "Zero-Shot";
    } else {
      std::vector<std::string> names;
      for (auto s : stages) names.push_back(capitalise(to_string(s)));
      l.method = join(names, " + ");
    }
  }
  if (l.llm.empty()) {
    l.llm = backend.kind == BackendConfig::Kind::None ? "--" : backend.descriptor.name;
  }
  if (l.stt.empty()) l.stt = "--";
  return l;
}

std::unique_ptr<ConceptAnnotator> make_annotator(const RunConfig& c) {
  switch (c.annotator.kind) {
    case AnnotatorConfig::Kind::Disabled:
      return nullptr;
    case AnnotatorConfig::Kind::Bundled:
      return std::make_unique<LexiconAnnotator>(ConceptLexicon::bundled());
    case AnnotatorConfig::Kind::Lexicon:
      return std::make_unique<LexiconAnnotator>(
          ConceptLexicon::from_file(c.annotator.lexicon.string(), c.normalization));
    case AnnotatorConfig::Kind::External:
      return std::make_unique<ExternalAnnotator>(c.annotator.endpoint, c.annotator.adapter,
                                                 c.normalization);
  }
  return nullptr;
}

std::unique_ptr<Embedder> make_embedder(const RunConfig& c) {
  switch (c.embedder.kind) {
    case EmbedderConfig::Kind::Disabled:
      return nullptr;
    case EmbedderConfig::Kind::Hash:
      return std::make_unique<HashEmbedder>(c.embedder.dim);
    case EmbedderConfig::Kind::External:
      return std::make_unique<ExternalEmbedder>(c.embedder.external);
  }
  return nullptr;
}

std::unique_ptr<LlmBackend> make_backend(const RunConfig& c) {
  switch (c.backend.kind) {
    case BackendConfig::Kind::None:
      config_error("no backend configured");
    case BackendConfig::Kind::Mock:
      return ScriptedMockBackend::from_file(c.backend.script.string());
    case BackendConfig::Kind::Echo:
      return EchoBackend::from_spec(c.backend.echo_mode);
    case BackendConfig::Kind::Http:
      return std::make_unique<HttpBackend>(c.backend.descriptor, c.backend.endpoint,
                                           c.backend.text_pointer);
  }
  config_error("no backend configured");
}

StageAssets make_stage_assets(const RunConfig& c) {
  StageAssets assets;
  for (auto s : {Stage::Punctuation, Stage::Diarization, Stage::Correction,
                 Stage::ZeroShotCombined}) {
    if (c.templates_dir) {
      const auto p = *c.templates_dir / fmt::format("{}.txt", to_string(s));
      if (fs::is_regular_file(p)) assets.templates.emplace(s, PromptTemplate::from_file(p.string(), s));
    }
    if (c.examples_dir && s != Stage::ZeroShotCombined) {
      const auto p = *c.examples_dir / fmt::format("{}.json", to_string(s));
      if (fs::is_regular_file(p)) assets.examples.emplace(s, load_examples(p.string()));
    }
  }
  return assets;
}

EnhanceOptions make_enhance_options(const RunConfig& c) {
  EnhanceOptions o;
  o.policy = c.chunking;
  o.retry_budget = c.retry_budget;
  o.retry_base_delay = std::chrono::milliseconds(c.retry_base_delay_ms);
  o.concurrency = c.chunk_concurrency;
  if (c.patterns_path) o.patterns = PatternSet::from_file(c.patterns_path->string());
  return o;
}

}  // namespace medscribe::cli
