#include <fmt/chrono.h>
#include <fmt/format.h>

#include <atomic>
#include <cctype>
#include <ctime>
#include <ostream>
#include <thread>

#include "medscribe/cli/commands.hpp"
#include "medscribe/data.hpp"
#include "medscribe/error.hpp"
#include "medscribe/semantics.hpp"
#include "medscribe/text_util.hpp"

namespace medscribe::cli {

namespace fs = std::filesystem;

std::map<std::string, fs::path> list_transcripts(const fs::path& dir) {
  std::map<std::string, fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension().string();
    if (ext != ".jsonl" && ext != ".txt") continue;
    const auto stem = entry.path().stem().string();
    if (!out.emplace(stem, entry.path()).second) {
      throw Error(ErrorCode::ConfigError,
                  fmt::format("two transcripts share the id '{}' in {}", stem, dir.string()));
    }
  }
  return out;
}

namespace {

std::string utc_now() {
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::time(nullptr)));
}

std::string describe(const std::exception& e) { return e.what(); }

template <typename Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn) {
  std::atomic<std::size_t> next{0};
  auto run = [&] {
    for (std::size_t i = next++; i < n; i = next++) fn(i);
  };
  workers = std::min(workers, n);
  if (workers <= 1) {
    run();
    return;
  }
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run);
}

struct RowWork {
  MetricRow row;
  TaxonomyMatrix taxonomy;
  std::size_t truncated_lines = 0;
};

RowWork score_one(const std::string& id, const fs::path& hyp_path, const fs::path& ref_path,
                  const RunConfig& config, const ConceptAnnotator* annotator,
                  const Embedder* embedder) {
  RowWork w;
  w.row.id = id;
  Transcript hyp, ref;
  try {
    hyp = read_transcript_file(hyp_path.string(), TranscriptKind::Hypothesis);
    ref = read_transcript_file(ref_path.string(), TranscriptKind::Reference);
  } catch (const std::exception& e) {
    w.row.errors.push_back(fmt::format("read: {}", describe(e)));
    return w;
  }
  const auto& norm = config.normalization;
  const auto hyp_text = transcript_text(hyp);
  const auto ref_text = transcript_text(ref);
  auto guard = [&](const char* metric, auto&& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      w.row.errors.push_back(fmt::format("{}: {}", metric, describe(e)));
    }
  };
  guard("wer", [&] { w.row.values["wer"] = wer(hyp_text, ref_text, norm).wer(); });
  if (annotator) {
    guard("mc_wer", [&] {
      const auto r = mc_wer(hyp_text, ref_text, *annotator, norm);
      w.row.concept_s = r.score.substitutions;
      w.row.concept_d = r.score.deletions;
      w.row.concept_i = r.score.insertions;
      w.row.concept_n = r.score.n;
      w.taxonomy = taxonomy(r.records, r.ref_concepts);
      w.row.values["mc_wer"] = r.score.wer();
    });
  }
  guard("d_wer", [&] {
    w.row.values["d_wer"] =
        speaker_wer(hyp, ref, SpeakerRole::Doctor, config.salutations, norm).wer();
  });
  guard("p_wer", [&] {
    w.row.values["p_wer"] =
        speaker_wer(hyp, ref, SpeakerRole::Patient, config.salutations, norm).wer();
  });
  if (embedder) {
    guard("similarity", [&] {
      const auto s = transcript_similarity(hyp, ref, *embedder);
      w.truncated_lines = s.truncated_lines;
      w.row.values["similarity"] = s.stat.mean;
    });
  }
  return w;
}

}  // namespace

MetricReport score_corpus(const RunConfig& config) {
  config.validate(RunConfig::Purpose::Score);
  const auto hyps = list_transcripts(config.hypothesis_dir);
  const auto refs = list_transcripts(config.reference_dir);
  std::vector<std::string> unmatched;
  for (const auto& [id, path] : hyps) {
    if (!refs.count(id)) unmatched.push_back(id);
  }
  if (!unmatched.empty()) {
    throw Error(ErrorCode::UnmatchedIds,
                fmt::format("hypotheses without a reference: {}", join(unmatched, ", ")));
  }
  if (hyps.empty()) {
    throw Error(ErrorCode::ConfigError,
                fmt::format("no transcripts in {}", config.hypothesis_dir.string()));
  }

  const auto annotator = make_annotator(config);
  const auto embedder = make_embedder(config);
  std::vector<std::pair<std::string, fs::path>> items(hyps.begin(), hyps.end());
  std::vector<RowWork> work(items.size());
  parallel_for(items.size(), config.concurrency, [&](std::size_t i) {
    const auto& [id, path] = items[i];
    work[i] = score_one(id, path, refs.at(id), config, annotator.get(), embedder.get());
  });

  MetricReport report;
  report.label = config.effective_label();
  std::size_t truncated_lines = 0;
  for (auto& w : work) {
    report.taxonomy.merge(w.taxonomy);
    truncated_lines += w.truncated_lines;
    report.rows.push_back(std::move(w.row));
  }
  report.recompute_aggregate();

  auto& md = report.metadata;
  md["generated_at"] = utc_now();
  md["config_hash"] = config.hash();
  md["hypothesis_dir"] = config.hypothesis_dir.string();
  md["reference_dir"] = config.reference_dir.string();
  md["annotator"] = annotator ? annotator->name() : "disabled";
  md["embedder"] = embedder ? embedder->descriptor().name : "disabled";
  md["counters"] = {{"rows", report.rows.size()},
                    {"row_errors", report.row_errors()},
                    {"similarity_truncated_lines", truncated_lines}};
  if (const auto* ext = dynamic_cast<const ExternalAnnotator*>(annotator.get())) {
    md["counters"]["dropped_mentions"] = ext->dropped_mentions();
  }
  // An enhance run leaves summary.json beside its enhanced/ directory.
  const auto summary = config.hypothesis_dir.parent_path() / "summary.json";
  if (config.hypothesis_dir.filename() == "enhanced" && fs::is_regular_file(summary)) {
    try {
      const auto s = nlohmann::json::parse(read_file(summary.string()));
      md["enhancement"] = {{"backend", s.value("backend", "")},
                           {"templates", s.value("templates", nlohmann::json::array())},
                           {"policy", s.value("policy", "")},
                           {"fallback_count", s.value("fallback_count", 0)},
                           {"truncation_count", s.value("truncation_count", 0)}};
      if (config.label.llm.empty()) report.label.llm = s.value("backend", report.label.llm);
      if (config.label.chunking.empty()) report.label.chunking = s.value("policy", report.label.chunking);
      if (config.label.method.empty()) {
        std::vector<std::string> names;
        for (const auto& st : s.value("stages", nlohmann::json::array())) {
          auto n = st.get<std::string>();
          if (n == "zero_shot") n = "Zero-Shot";
          n[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(n[0])));
          names.push_back(n);
        }
        if (!names.empty()) report.label.method = join(names, " + ");
      }
    } catch (const nlohmann::json::exception&) {
      md["enhancement"] = "unreadable summary.json";
    }
  }
  return report;
}

int cmd_score(const RunConfig& config, std::ostream& log) {
  const auto report = score_corpus(config);
  // The aggregate written out is always re-derived from the rows.
  report.check_consistency();
  MetricReport::from_json(report.to_json()).check_consistency();
  write_text_file(config.output_dir / "report.json", report.to_json().dump(2) + "\n");
  write_text_file(config.output_dir / "report.csv", report.to_csv());
  write_text_file(config.output_dir / "table.md", report.to_markdown());
  log << report.to_markdown();
  for (const auto& r : report.rows) {
    for (const auto& e : r.errors) log << fmt::format("error [{}] {}\n", r.id, e);
  }
  return report.row_errors() == 0 ? 0 : 1;
}

int cmd_normalize(std::string_view text, const RunConfig& config, std::ostream& out) {
  for (const auto& tok : normalize(text, config.normalization)) out << tok << '\n';
  return 0;
}

int cmd_align(std::string_view hyp, std::string_view ref, const RunConfig& config,
              std::ostream& out) {
  const auto h = normalize(hyp, config.normalization);
  const auto r = normalize(ref, config.normalization);
  const auto a = global_align(h, r);
  for (const auto& op : a.ops) {
    out << fmt::format("{:<10} {:<20} {}\n", to_string(op.kind), op.hyp ? h[*op.hyp] : "-",
                       op.ref ? r[*op.ref] : "-");
  }
  out << fmt::format("S={} D={} I={} N={}", a.counts.substitutions, a.counts.deletions,
                     a.counts.insertions, a.n_ref);
  if (a.n_ref > 0) {
    out << fmt::format(" WER={:.4f}", static_cast<double>(a.counts.errors()) /
                                          static_cast<double>(a.n_ref));
  }
  out << '\n';
  return 0;
}

}  // namespace medscribe::cli
