#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "medscribe/cli/config.hpp"
#include "medscribe/metrics.hpp"

namespace medscribe::cli {

inline constexpr int kReportSchemaVersion = 1;

// Fractions in, "12.15% ± 11.01" out.
std::string format_cell(double mean, double std);
std::string format_cell(const AggregateStat& stat);

// Metric keys in report column order.
const std::vector<std::string>& metric_names();
// "WER", "MC-WER", "D-WER", "P-WER", "Cosine Similarity"
std::string metric_title(const std::string& metric);

struct MetricRow {
  std::string id;
  std::map<std::string, double> values;
  std::size_t concept_s = 0;
  std::size_t concept_d = 0;
  std::size_t concept_i = 0;
  std::size_t concept_n = 0;
  std::vector<std::string> errors;
};

struct MetricReport {
  int schema_version = kReportSchemaVersion;
  RunLabel label;
  std::vector<MetricRow> rows;
  std::map<std::string, AggregateStat> aggregate;
  TaxonomyMatrix taxonomy;
  // Timestamps, hashes and counters. Excluded from determinism checks.
  nlohmann::json metadata = nlohmann::json::object();

  void recompute_aggregate();
  // Throws InvariantViolation when `aggregate` differs from a recompute.
  void check_consistency() const;
  std::size_t row_errors() const;

  nlohmann::json to_json(bool with_metadata = true) const;
  // Throws SchemaVersionMismatch for other versions.
  static MetricReport from_json(const nlohmann::json& j);
  static MetricReport from_file(const std::filesystem::path& path);

  std::string to_csv() const;
  std::string to_markdown() const;
};

// Transcript files (*.jsonl, *.txt) in `dir` keyed by filename stem.
std::map<std::string, std::filesystem::path> list_transcripts(const std::filesystem::path& dir);

void write_text_file(const std::filesystem::path& path, std::string_view content);

// Computes the report without writing anything. Throws UnmatchedIds when a
// hypothesis has no reference.
MetricReport score_corpus(const RunConfig& config);
int cmd_score(const RunConfig& config, std::ostream& log);

int cmd_enhance(const RunConfig& config, std::ostream& log);

struct ReportOptions {
  std::vector<std::filesystem::path> reports;
  std::optional<std::string> metric;  // one table per metric when unset
  std::optional<bool> descending;     // default: similarity descending, rest ascending
  std::filesystem::path output_dir;
};

std::string render_comparison(const std::vector<MetricReport>& reports,
                              const std::string& metric, bool descending);
int cmd_report(const ReportOptions& options, std::ostream& out);

// Reference and hypothesis corpora, deterministic in the config's seed.
std::pair<std::vector<Transcript>, std::vector<Transcript>> synthesize_corpus(
    const RunConfig& config);
Transcript synthesize_reference(std::uint64_t seed, std::size_t index,
                                const SynthConfig& synth);
const std::vector<std::string>& synth_vocabulary();
int cmd_synth(const RunConfig& config, std::ostream& log);

int cmd_normalize(std::string_view text, const RunConfig& config, std::ostream& out);
int cmd_align(std::string_view hyp, std::string_view ref, const RunConfig& config,
              std::ostream& out);

}  // namespace medscribe::cli
