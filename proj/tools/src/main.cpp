#include <CLI11.hpp>
#include <fmt/format.h>

#include <filesystem>
#include <iostream>

#include "medscribe/cli/commands.hpp"
#include "medscribe/data.hpp"
#include "medscribe/error.hpp"

namespace fs = std::filesystem;
using medscribe::cli::RunConfig;

namespace {

struct Common {
  std::string config_path;
  nlohmann::json overrides = nlohmann::json::object();
};

void path_flag(CLI::App* cmd, Common& c, const std::string& flag, const std::string& key,
               const std::string& help) {
  cmd->add_option_function<std::string>(
      flag, [&c, key](const std::string& v) { c.overrides[key] = fs::absolute(v).string(); },
      help);
}

RunConfig load(const Common& c) {
  nlohmann::json j = nlohmann::json::object();
  fs::path base = fs::current_path();
  if (!c.config_path.empty()) {
    j = RunConfig::load_json(c.config_path);
    base = fs::absolute(c.config_path).parent_path();
  }
  j.merge_patch(c.overrides);
  return RunConfig::from_json(j, base);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"medscribe: scoring and LLM enhancement of medical ASR transcripts"};
  app.require_subcommand(1);

  Common score_c, enhance_c, synth_c, debug_c;

  auto* score = app.add_subcommand("score", "score hypotheses against references");
  score->add_option("-c,--config", score_c.config_path, "run config JSON")->check(CLI::ExistingFile);
  path_flag(score, score_c, "--hyp", "hypothesis_dir", "hypothesis directory");
  path_flag(score, score_c, "--ref", "reference_dir", "reference directory");
  path_flag(score, score_c, "-o,--out", "output_dir", "output directory");
  path_flag(score, score_c, "--lexicon", "annotator", "concept lexicon JSON");
  score->add_option_function<std::size_t>(
      "-j,--concurrency", [&](std::size_t n) { score_c.overrides["concurrency"] = n; },
      "worker threads");
  score->add_option_function<std::string>(
      "--stt", [&](const std::string& v) { score_c.overrides["label"]["stt"] = v; },
      "STT system name for the report label");
  score->add_option_function<std::string>(
      "--llm", [&](const std::string& v) { score_c.overrides["label"]["llm"] = v; },
      "LLM name for the report label");
  score->add_option_function<std::string>(
      "--method", [&](const std::string& v) { score_c.overrides["label"]["method"] = v; },
      "method name for the report label");

  auto* enhance = app.add_subcommand("enhance", "run LLM enhancement over a corpus");
  enhance->add_option("-c,--config", enhance_c.config_path, "run config JSON")
      ->check(CLI::ExistingFile);
  path_flag(enhance, enhance_c, "-i,--input", "input_dir", "input transcript directory");
  path_flag(enhance, enhance_c, "-o,--out", "output_dir", "output directory");
  enhance->add_option_function<std::string>(
      "--mock-script",
      [&](const std::string& v) {
        enhance_c.overrides["backend"] = {{"kind", "mock"}, {"script", fs::absolute(v).string()}};
      },
      "scripted mock backend file");
  enhance->add_option_function<std::string>(
      "--echo",
      [&](const std::string& v) {
        enhance_c.overrides["backend"] = {{"kind", "echo"}, {"mode", v}};
      },
      "echo backend (echo, echo:alternate, echo:doctor, echo:patient)");
  enhance->add_option_function<std::string>(
      "--method", [&](const std::string& v) { enhance_c.overrides["method"] = v; },
      "zero_shot or cot");
  enhance->add_option_function<std::vector<std::string>>(
      "--stages", [&](const std::vector<std::string>& v) { enhance_c.overrides["stages"] = v; },
      "CoT stages in order");
  enhance->add_option_function<std::string>(
      "--chunking", [&](const std::string& v) { enhance_c.overrides["chunking"] = v; },
      "lines:N or whole");
  enhance->add_option_function<std::size_t>(
      "-j,--concurrency", [&](std::size_t n) { enhance_c.overrides["concurrency"] = n; },
      "transcripts in flight");

  std::vector<std::string> report_paths;
  std::string report_out, report_metric;
  bool ascending = false, descending = false;
  auto* report = app.add_subcommand("report", "merge report.json files into comparison tables");
  report->add_option("reports", report_paths, "report.json files")->required()->check(CLI::ExistingFile);
  report->add_option("-o,--out", report_out, "directory for comparison.{md,csv,json}");
  report->add_option("-m,--metric", report_metric, "wer, mc_wer, d_wer, p_wer or similarity");
  auto* asc = report->add_flag("--ascending", ascending, "sort ascending");
  report->add_flag("--descending", descending, "sort descending")->excludes(asc);

  auto* synth = app.add_subcommand("synth", "generate a synthetic reference/hypothesis corpus");
  synth->add_option("-c,--config", synth_c.config_path, "run config JSON")->check(CLI::ExistingFile);
  path_flag(synth, synth_c, "-o,--out", "output_dir", "output directory");
  synth->add_option_function<std::uint64_t>(
      "--seed", [&](std::uint64_t s) { synth_c.overrides["seed"] = s; }, "generator seed");
  synth->add_option_function<std::size_t>(
      "-n,--count", [&](std::size_t n) { synth_c.overrides["synth"]["transcripts"] = n; },
      "number of transcripts");
  for (const auto& [flag, key] : std::vector<std::pair<std::string, std::string>>{
           {"--sub-rate", "substitution_rate"},
           {"--del-rate", "deletion_rate"},
           {"--ins-rate", "insertion_rate"},
           {"--scramble-rate", "scramble_speakers_rate"}}) {
    synth->add_option_function<double>(
        flag, [&, key = key](double v) { synth_c.overrides["synth"]["injection"][key] = v; },
        "error injection rate");
  }

  std::string norm_text, hyp_text, ref_text;
  auto* norm = app.add_subcommand("normalize", "print the normalized token sequence");
  norm->add_option("text", norm_text, "text to normalize")->required();
  norm->add_option("-c,--config", debug_c.config_path, "run config JSON")->check(CLI::ExistingFile);

  auto* align = app.add_subcommand("align", "print the word alignment of two texts");
  align->add_option("--hyp", hyp_text, "hypothesis text")->required();
  align->add_option("--ref", ref_text, "reference text")->required();
  align->add_option("-c,--config", debug_c.config_path, "run config JSON")->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*score) return medscribe::cli::cmd_score(load(score_c), std::cout);
    if (*enhance) return medscribe::cli::cmd_enhance(load(enhance_c), std::cout);
    if (*synth) return medscribe::cli::cmd_synth(load(synth_c), std::cout);
    if (*norm) return medscribe::cli::cmd_normalize(norm_text, load(debug_c), std::cout);
    if (*align) return medscribe::cli::cmd_align(hyp_text, ref_text, load(debug_c), std::cout);
    if (*report) {
      medscribe::cli::ReportOptions opts;
      for (const auto& p : report_paths) opts.reports.emplace_back(p);
      if (!report_metric.empty()) opts.metric = report_metric;
      if (ascending) opts.descending = false;
      if (descending) opts.descending = true;
      opts.output_dir = report_out;
      return medscribe::cli::cmd_report(opts, std::cout);
    }
  } catch (const medscribe::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
