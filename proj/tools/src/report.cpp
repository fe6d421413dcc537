#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <ostream>

#include "medscribe/cli/commands.hpp"
#include "medscribe/data.hpp"
#include "medscribe/error.hpp"

namespace medscribe::cli {

namespace fs = std::filesystem;

std::string format_cell(double mean, double std) {
  return fmt::format("{:.2f}% ± {:.2f}", mean * 100.0, std * 100.0);
}

std::string format_cell(const AggregateStat& stat) {
  return stat.n == 0 ? std::string("n/a") : format_cell(stat.mean, stat.std);
}

const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> names = {"wer", "mc_wer", "d_wer", "p_wer",
                                                 "similarity"};
  return names;
}

std::string metric_title(const std::string& metric) {
  static const std::map<std::string, std::string> titles = {
      {"wer", "WER"},     {"mc_wer", "MC-WER"},
      {"d_wer", "D-WER"}, {"p_wer", "P-WER"},
      {"similarity", "Cosine Similarity"},
  };
  const auto it = titles.find(metric);
  if (it == titles.end()) {
    throw Error(ErrorCode::InvalidArgument, fmt::format("unknown metric '{}'", metric));
  }
  return it->second;
}

void write_text_file(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, fmt::format("cannot write {}", path.string()));
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(ErrorCode::IoError, fmt::format("short write to {}", path.string()));
}

void MetricReport::recompute_aggregate() {
  aggregate.clear();
  for (const auto& m : metric_names()) {
    std::vector<double> v;
    for (const auto& r : rows) {
      if (auto it = r.values.find(m); it != r.values.end()) v.push_back(it->second);
    }
    if (!v.empty()) aggregate[m] = medscribe::aggregate(v);
  }
}

void MetricReport::check_consistency() const {
  MetricReport copy;
  copy.rows = rows;
  copy.recompute_aggregate();
  auto same = [](const AggregateStat& a, const AggregateStat& b) {
    return a.n == b.n && a.mean == b.mean && a.std == b.std;
  };
  if (copy.aggregate.size() != aggregate.size() ||
      !std::equal(aggregate.begin(), aggregate.end(), copy.aggregate.begin(),
                  [&](const auto& a, const auto& b) {
                    return a.first == b.first && same(a.second, b.second);
                  })) {
    throw Error(ErrorCode::InvariantViolation,
                "report aggregate row does not match its per-transcript rows");
  }
}

std::size_t MetricReport::row_errors() const {
  std::size_t n = 0;
  for (const auto& r : rows) n += r.errors.empty() ? 0 : 1;
  return n;
}

nlohmann::json MetricReport::to_json(bool with_metadata) const {
  nlohmann::json j;
  j["schema_version"] = schema_version;
  j["label"] = {{"llm", label.llm},
                {"stt", label.stt},
                {"method", label.method},
                {"chunking", label.chunking}};
  auto rows_j = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json values = nlohmann::json::object();
    for (const auto& [k, v] : r.values) values[k] = v;
    rows_j.push_back({{"id", r.id},
                      {"metrics", std::move(values)},
                      {"concept_errors",
                       {{"S", r.concept_s}, {"D", r.concept_d}, {"I", r.concept_i},
                        {"N", r.concept_n}}},
                      {"errors", r.errors}});
  }
  j["rows"] = std::move(rows_j);
  nlohmann::json agg = nlohmann::json::object();
  for (const auto& [k, s] : aggregate) {
    agg[k] = {{"mean", s.mean}, {"std", s.std}, {"n", s.n}};
  }
  j["aggregate"] = std::move(agg);
  auto tax = nlohmann::json::array();
  for (const auto& [key, count] : taxonomy.counts) {
    tax.push_back({{"category", key.first.name()},
                   {"kind", to_string(key.second)},
                   {"count", count}});
  }
  j["taxonomy"] = std::move(tax);
  if (with_metadata) j["metadata"] = metadata;
  return j;
}

MetricReport MetricReport::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("schema_version")) {
    throw Error(ErrorCode::SchemaVersionMismatch, "report has no schema_version");
  }
  const auto version = j.at("schema_version").get<int>();
  if (version != kReportSchemaVersion) {
    throw Error(ErrorCode::SchemaVersionMismatch,
                fmt::format("report schema_version {} is not {}", version,
                            kReportSchemaVersion));
  }
  MetricReport r;
  try {
    const auto& l = j.at("label");
    r.label = {l.value("llm", std::string()), l.value("stt", std::string()),
               l.value("method", std::string()), l.value("chunking", std::string())};
    for (const auto& row : j.at("rows")) {
      MetricRow m;
      m.id = row.at("id").get<std::string>();
      for (const auto& [k, v] : row.at("metrics").items()) m.values[k] = v.get<double>();
      const auto& ce = row.at("concept_errors");
      m.concept_s = ce.at("S").get<std::size_t>();
      m.concept_d = ce.at("D").get<std::size_t>();
      m.concept_i = ce.at("I").get<std::size_t>();
      m.concept_n = ce.at("N").get<std::size_t>();
      m.errors = row.at("errors").get<std::vector<std::string>>();
      r.rows.push_back(std::move(m));
    }
    for (const auto& [k, s] : j.at("aggregate").items()) {
      r.aggregate[k] = {s.at("mean").get<double>(), s.at("std").get<double>(),
                        s.at("n").get<std::size_t>()};
    }
    for (const auto& t : j.at("taxonomy")) {
      const auto kind_name = t.at("kind").get<std::string>();
      ConceptErrorKind kind;
      if (kind_name == to_string(ConceptErrorKind::Substitute)) {
        kind = ConceptErrorKind::Substitute;
      } else if (kind_name == to_string(ConceptErrorKind::Delete)) {
        kind = ConceptErrorKind::Delete;
      } else if (kind_name == to_string(ConceptErrorKind::Insert)) {
        kind = ConceptErrorKind::Insert;
      } else {
        throw Error(ErrorCode::ConfigError,
                    fmt::format("malformed report: unknown taxonomy kind '{}'", kind_name));
      }
      r.taxonomy.counts[{ConceptCategory::parse(t.at("category").get<std::string>()), kind}] =
          t.at("count").get<std::size_t>();
    }
    r.metadata = j.value("metadata", nlohmann::json::object());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, fmt::format("malformed report: {}", e.what()));
  }
  r.check_consistency();
  return r;
}

MetricReport MetricReport::from_file(const fs::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path.string()));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ConfigError, fmt::format("{}: {}", path.string(), e.what()));
  }
  return from_json(j);
}

namespace {

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string md_cell(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '|') out += '\\';
    out += c == '\n' ? ' ' : c;
  }
  return out;
}

}  // namespace

std::string MetricReport::to_csv() const {
  std::string out = "id";
  for (const auto& m : metric_names()) out += "," + m;
  out += ",concept_s,concept_d,concept_i,concept_n,errors\n";
  for (const auto& r : rows) {
    out += csv_field(r.id);
    for (const auto& m : metric_names()) {
      out += ',';
      if (auto it = r.values.find(m); it != r.values.end()) out += fmt::format("{}", it->second);
    }
    std::string errs;
    for (std::size_t i = 0; i < r.errors.size(); ++i) errs += (i ? "; " : "") + r.errors[i];
    out += fmt::format(",{},{},{},{},{}\n", r.concept_s, r.concept_d, r.concept_i, r.concept_n,
                       csv_field(errs));
  }
  return out;
}

std::string MetricReport::to_markdown() const {
  std::string out = "| LLM | STT | Method |";
  std::string rule = "|:---|---:|---:|";
  for (const auto& m : metric_names()) {
    out += fmt::format(" {} |", metric_title(m));
    rule += "---:|";
  }
  out += "\n" + rule + "\n";
  out += fmt::format("| {} | {} | {} |", md_cell(label.llm), md_cell(label.stt),
                     md_cell(label.method));
  for (const auto& m : metric_names()) {
    const auto it = aggregate.find(m);
    out += fmt::format(" {} |", it == aggregate.end() ? "n/a" : format_cell(it->second));
  }
  out += "\n";
  if (!taxonomy.counts.empty()) {
    out += "\n| Category | Substitute | Delete | Insert |\n|:---|---:|---:|---:|\n";
    std::vector<ConceptCategory> cats;
    for (const auto& [key, n] : taxonomy.counts) {
      if (cats.empty() || !(cats.back() == key.first)) cats.push_back(key.first);
    }
    for (const auto& c : cats) {
      out += fmt::format("| {} | {} | {} | {} |\n", md_cell(c.name()),
                         taxonomy.at(c, ConceptErrorKind::Substitute),
                         taxonomy.at(c, ConceptErrorKind::Delete),
                         taxonomy.at(c, ConceptErrorKind::Insert));
    }
  }
  return out;
}

namespace {

bool default_descending(const std::string& metric) { return metric == "similarity"; }

std::vector<const MetricReport*> sorted_reports(const std::vector<MetricReport>& reports,
                                                const std::string& metric, bool descending) {
  std::vector<const MetricReport*> order;
  for (const auto& r : reports) order.push_back(&r);
  auto key = [&](const MetricReport* r) {
    return std::tie(r->label.llm, r->label.stt, r->label.method, r->label.chunking);
  };
  std::stable_sort(order.begin(), order.end(), [&](const MetricReport* a, const MetricReport* b) {
    const auto ia = a->aggregate.find(metric);
    const auto ib = b->aggregate.find(metric);
    const bool ha = ia != a->aggregate.end() && ia->second.n > 0;
    const bool hb = ib != b->aggregate.end() && ib->second.n > 0;
    if (ha != hb) return ha;  // runs without the metric go last
    if (ha && ia->second.mean != ib->second.mean) {
      return descending ? ia->second.mean > ib->second.mean
                        : ia->second.mean < ib->second.mean;
    }
    return key(a) < key(b);
  });
  return order;
}

}  // namespace

std::string render_comparison(const std::vector<MetricReport>& reports,
                              const std::string& metric, bool descending) {
  bool chunk_column = false;
  for (const auto& r : reports) {
    chunk_column = chunk_column || r.label.chunking != reports.front().label.chunking;
  }
  std::string out = chunk_column ? "| LLM | STT | Chunk Size | Method |" : "| LLM | STT | Method |";
  out += fmt::format(" {} |\n", metric_title(metric));
  out += chunk_column ? "|:---|---:|---:|---:|---:|\n" : "|:---|---:|---:|---:|\n";
  for (const auto* r : sorted_reports(reports, metric, descending)) {
    const auto it = r->aggregate.find(metric);
    const std::string cell = it == r->aggregate.end() ? "n/a" : format_cell(it->second);
    if (chunk_column) {
      out += fmt::format("| {} | {} | {} | {} | {} |\n", md_cell(r->label.llm),
                         md_cell(r->label.stt), md_cell(r->label.chunking),
                         md_cell(r->label.method), cell);
    } else {
      out += fmt::format("| {} | {} | {} | {} |\n", md_cell(r->label.llm), md_cell(r->label.stt),
                         md_cell(r->label.method), cell);
    }
  }
  return out;
}

int cmd_report(const ReportOptions& options, std::ostream& out) {
  if (options.reports.empty()) {
    throw Error(ErrorCode::InvalidArgument, "report needs at least one report.json");
  }
  std::vector<MetricReport> reports;
  for (const auto& p : options.reports) reports.push_back(MetricReport::from_file(p));

  std::vector<std::string> metrics =
      options.metric ? std::vector<std::string>{*options.metric} : metric_names();
  for (const auto& m : metrics) metric_title(m);

  std::string md;
  nlohmann::json tables = nlohmann::json::object();
  for (const auto& m : metrics) {
    const bool desc = options.descending.value_or(default_descending(m));
    if (!md.empty()) md += "\n";
    if (metrics.size() > 1) md += fmt::format("## {}\n\n", metric_title(m));
    md += render_comparison(reports, m, desc);
    auto rows = nlohmann::json::array();
    for (const auto* r : sorted_reports(reports, m, desc)) {
      const auto it = r->aggregate.find(m);
      nlohmann::json row = {{"llm", r->label.llm},
                            {"stt", r->label.stt},
                            {"method", r->label.method},
                            {"chunking", r->label.chunking}};
      if (it != r->aggregate.end()) {
        row["mean"] = it->second.mean;
        row["std"] = it->second.std;
        row["n"] = it->second.n;
        row["cell"] = format_cell(it->second);
      }
      rows.push_back(std::move(row));
    }
    tables[m] = {{"descending", desc}, {"rows", std::move(rows)}};
  }

  std::string csv = "llm,stt,chunking,method";
  for (const auto& m : metric_names()) csv += fmt::format(",{0}_mean,{0}_std,{0}_n", m);
  csv += "\n";
  const auto& sort_metric = metrics.front();
  for (const auto* r : sorted_reports(reports, sort_metric,
                                      options.descending.value_or(default_descending(sort_metric)))) {
    csv += fmt::format("{},{},{},{}", csv_field(r->label.llm), csv_field(r->label.stt),
                       csv_field(r->label.chunking), csv_field(r->label.method));
    for (const auto& m : metric_names()) {
      const auto it = r->aggregate.find(m);
      if (it == r->aggregate.end()) {
        csv += ",,,";
      } else {
        csv += fmt::format(",{},{},{}", it->second.mean, it->second.std, it->second.n);
      }
    }
    csv += "\n";
  }

  if (!options.output_dir.empty()) {
    write_text_file(options.output_dir / "comparison.md", md);
    write_text_file(options.output_dir / "comparison.csv", csv);
    const nlohmann::json j = {{"schema_version", kReportSchemaVersion}, {"tables", tables}};
    write_text_file(options.output_dir / "comparison.json", j.dump(2) + "\n");
  }
  out << md;
  return 0;
}

}  // namespace medscribe::cli
