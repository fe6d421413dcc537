#include <fmt/chrono.h>
#include <fmt/format.h>

#include <atomic>
#include <ctime>
#include <ostream>
#include <thread>

#include "medscribe/cli/commands.hpp"
#include "medscribe/error.hpp"

namespace medscribe::cli {

namespace fs = std::filesystem;

namespace {

struct Outcome {
  std::string id;
  TranscriptFormat format = TranscriptFormat::Jsonl;
  std::optional<EnhanceResult> result;
  std::string error;
};

}  // namespace

int cmd_enhance(const RunConfig& config, std::ostream& log) {
  config.validate(RunConfig::Purpose::Enhance);
  const auto inputs = list_transcripts(config.input_dir);
  if (inputs.empty()) {
    throw Error(ErrorCode::ConfigError, fmt::format("no transcripts in {}", config.input_dir.string()));
  }
  const auto backend = make_backend(config);
  const auto assets = make_stage_assets(config);
  const auto options = make_enhance_options(config);
  options.validate();

  std::vector<std::pair<std::string, fs::path>> items(inputs.begin(), inputs.end());
  std::vector<Outcome> outcomes(items.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < items.size(); i = next++) {
      auto& o = outcomes[i];
      o.id = items[i].first;
      try {
        o.format = format_from_extension(items[i].second.extension().string());
        const auto t = read_transcript_file(items[i].second.string(), TranscriptKind::Hypothesis);
        if (config.method == "zero_shot") {
          o.result = zero_shot_enhance(t, *backend, options,
                                       assets.templates.count(Stage::ZeroShotCombined)
                                           ? std::optional(assets.templates.at(Stage::ZeroShotCombined))
                                           : std::nullopt);
        } else {
          o.result = cot_enhance(t, *backend, config.stages, assets, options);
        }
      } catch (const std::exception& e) {
        o.error = e.what();
      }
    }
  };
  const auto workers = std::min(config.concurrency, items.size());
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  // Written in id order once every transcript is done, so output bytes do
  // not depend on scheduling.
  std::size_t fallbacks = 0, truncations = 0;
  fs::create_directories(config.output_dir / "enhanced");
  auto per = nlohmann::json::array();
  auto failed = nlohmann::json::array();
  nlohmann::json templates = nlohmann::json::array();
  for (const auto& o : outcomes) {
    nlohmann::json entry = {{"id", o.id}};
    if (o.result) {
      const auto& rec = o.result->record;
      write_transcript_file(o.result->transcript,
                            (config.output_dir / "enhanced" /
                             (o.id + std::string(file_extension(o.format))))
                                .string());
      write_text_file(config.output_dir / "records" / (o.id + ".jsonl"), rec.to_jsonl());
      fallbacks += rec.fallback_count();
      truncations += rec.truncation_count();
      std::size_t chunks = 0;
      for (const auto& s : rec.stages) chunks += s.chunks.size();
      if (templates.empty()) {
        for (const auto& s : rec.stages) templates.push_back(s.template_id);
      }
      entry["ok"] = true;
      entry["chunks"] = chunks;
      entry["fallbacks"] = rec.fallback_count();
      entry["truncations"] = rec.truncation_count();
    } else {
      entry["ok"] = false;
      entry["error"] = o.error;
      failed.push_back(o.id);
      log << fmt::format("error [{}] {}\n", o.id, o.error);
    }
    per.push_back(std::move(entry));
  }
  auto stage_names = nlohmann::json::array();
  if (config.method == "zero_shot") {
    stage_names.push_back(to_string(Stage::ZeroShotCombined));
  } else {
    for (auto s : config.stages) stage_names.push_back(to_string(s));
  }
  nlohmann::json summary = {
      {"schema_version", kReportSchemaVersion},
      {"method", config.method},
      {"stages", stage_names},
      {"policy", config.chunking.to_string()},
      {"nonstandard_policy", config.chunking.nonstandard()},
      {"backend", backend->descriptor().name},
      {"templates", templates},
      {"transcripts", per},
      {"failed", failed},
      {"fallback_count", fallbacks},
      {"truncation_count", truncations},
      {"metadata",
       {{"generated_at",
         fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::time(nullptr)))},
        {"config_hash", config.hash()}}},
  };
  write_text_file(config.output_dir / "summary.json", summary.dump(2) + "\n");
  log << fmt::format("enhanced {}/{} transcripts, {} fallback chunks, {} truncated chunks\n",
                     items.size() - failed.size(), items.size(), fallbacks, truncations);
  if (config.chunking.nonstandard()) {
    log << fmt::format("note: chunking {} is outside the 5/10-line grid\n",
                       config.chunking.to_string());
  }
  return failed.empty() ? 0 : 1;
}

}  // namespace medscribe::cli
