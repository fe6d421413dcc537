#include <fmt/format.h>

#include "medscribe/data.hpp"
#include "medscribe/enhance.hpp"
#include "medscribe/error.hpp"
#include "medscribe/text_util.hpp"

namespace medscribe {

void BackendDescriptor::validate() const {
  if (max_output_tokens == 0) {
    throw Error(ErrorCode::ConfigError, "max_output_tokens must be positive");
  }
  if (!(temperature >= 0.0 && temperature <= 1.0)) {
    throw Error(ErrorCode::ConfigError,
                fmt::format("temperature {} outside [0, 1]", temperature));
  }
}

HttpBackend::HttpBackend(BackendDescriptor descriptor, ServiceEndpoint endpoint,
                         std::string text_pointer)
    : descriptor_(std::move(descriptor)),
      endpoint_(std::move(endpoint)),
      text_pointer_(std::move(text_pointer)) {
  descriptor_.validate();
}

std::string HttpBackend::generate(const GenerationRequest& request) {
  const nlohmann::json body = {
      {"prompt", request.prompt},
      {"max_output_tokens", request.max_output_tokens},
      {"temperature", request.temperature},
  };
  const auto response = post_json(endpoint_, body);
  try {
    const auto& text = response.at(nlohmann::json::json_pointer(text_pointer_));
    if (!text.is_string()) throw std::invalid_argument("not a string");
    return text.get<std::string>();
  } catch (const std::exception&) {
    throw HttpError(ErrorCode::SchemaMismatch,
                    fmt::format("backend response lacks a string at '{}'", text_pointer_),
                    200);
  }
}

EchoBackend::EchoBackend(LabelMode mode, SpeakerRole fixed) : mode_(mode), fixed_(fixed) {
  descriptor_.name = "echo";
  if (mode_ == LabelMode::Fixed && fixed_ == SpeakerRole::Unknown) {
    throw Error(ErrorCode::InvalidArgument, "echo backend needs a concrete role");
  }
}

std::unique_ptr<EchoBackend> EchoBackend::from_spec(std::string_view spec) {
  const auto s = to_lower_ascii(trim(spec));
  if (s == "echo") return std::make_unique<EchoBackend>();
  if (s == "echo:alternate") return std::make_unique<EchoBackend>(LabelMode::Alternate);
  if (s == "echo:doctor") {
    return std::make_unique<EchoBackend>(LabelMode::Fixed, SpeakerRole::Doctor);
  }
  if (s == "echo:patient") {
    return std::make_unique<EchoBackend>(LabelMode::Fixed, SpeakerRole::Patient);
  }
  throw Error(ErrorCode::ConfigError, fmt::format("unknown echo backend '{}'", spec));
}

std::string EchoBackend::generate(const GenerationRequest& request) {
  if (!request.segment) {
    throw Error(ErrorCode::InvalidArgument, "echo backend needs the request segment");
  }
  std::vector<ExpectedLine> lines;
  for (const auto& turn : request.segment->turns) {
    ExpectedLine l;
    switch (mode_) {
      case LabelMode::Preserve:
        if (turn.speaker != SpeakerRole::Unknown) l.speaker = turn.speaker;
        break;
      case LabelMode::Fixed:
        l.speaker = fixed_;
        break;
      case LabelMode::Alternate:
        l.speaker = turn.index % 2 == 0 ? SpeakerRole::Doctor : SpeakerRole::Patient;
        break;
    }
    l.text = turn.text;
    if (request.stage == Stage::Diarization) l.justification = "echo";
    lines.push_back(std::move(l));
  }
  return format_expected_output(request.stage, lines);
}

std::unique_ptr<ScriptedMockBackend> ScriptedMockBackend::from_json(const nlohmann::json& j) {
  std::unique_ptr<ScriptedMockBackend> b(new ScriptedMockBackend());
  b->descriptor_.name = j.value("name", std::string("scripted-mock"));
  try {
    for (const auto& r : j.value("responses", nlohmann::json::array())) {
      Response resp;
      if (r.contains("transcript")) resp.transcript = r.at("transcript").get<std::string>();
      resp.stage = parse_stage(r.at("stage").get<std::string>());
      resp.chunk = r.value("chunk", std::size_t{0});
      resp.text = r.value("text", std::string());
      if (r.contains("fail")) {
        const auto& f = r.at("fail");
        if (f.is_string() && f.get<std::string>() == "always") {
          resp.always_fail = true;
        } else {
          resp.fail = f.get<std::size_t>();
        }
      }
      b->responses_.push_back(std::move(resp));
    }
    if (j.contains("fallback") && !j.at("fallback").is_null()) {
      const auto spec = j.at("fallback").get<std::string>();
      if (spec != "none") b->fallback_ = EchoBackend::from_spec(spec);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, fmt::format("mock script: {}", e.what()));
  }
  return b;
}

std::unique_ptr<ScriptedMockBackend> ScriptedMockBackend::from_file(const std::string& path) {
  try {
    auto b = from_json(nlohmann::json::parse(read_file(path)));
    return b;
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ConfigError, fmt::format("{}: {}", path, e.what()));
  }
}

std::string ScriptedMockBackend::generate(const GenerationRequest& request) {
  // Exact transcript match wins over a transcript-agnostic entry.
  std::optional<std::size_t> hit;
  for (std::size_t i = 0; i < responses_.size(); ++i) {
    const auto& r = responses_[i];
    if (r.stage != request.stage || r.chunk != request.chunk_index) continue;
    if (r.transcript && *r.transcript == request.transcript_id) {
      hit = i;
      break;
    }
    if (!r.transcript && !hit) hit = i;
  }
  if (!hit) {
    if (fallback_) return fallback_->generate(request);
    throw Error(ErrorCode::BackendFailure,
                fmt::format("no scripted response for {} / {} / chunk {}",
                            request.transcript_id, to_string(request.stage),
                            request.chunk_index));
  }
  const auto& r = responses_[*hit];
  std::size_t call = 0;
  {
    std::lock_guard lock(mu_);
    // Per (entry, transcript), so transcripts sharing an entry fail
    // independently of scheduling order.
    call = calls_[{*hit, request.transcript_id}]++;
  }
  if (r.always_fail || call < r.fail) {
    throw HttpError(ErrorCode::ServiceUnavailable, "scripted failure", 503);
  }
  return r.text;
}

}  // namespace medscribe
