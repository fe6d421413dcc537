// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
//   medscribe_acceptance [--only ACn] [--regenerate-golden]

#include <fmt/core.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <nlohmann/json.hpp>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "medscribe/align.hpp"
#include "medscribe/cli/commands.hpp"
#include "medscribe/concepts.hpp"
#include "medscribe/enhance.hpp"
#include "medscribe/error.hpp"
#include "medscribe/metrics.hpp"
#include "medscribe/normalize.hpp"
#include "medscribe/parse.hpp"
#include "medscribe/semantics.hpp"
#include "medscribe/text_util.hpp"
#include "oracles.hpp"

using namespace medscribe;
namespace fs = std::filesystem;
using nlohmann::json;
using Tokens = std::vector<std::string>;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Tokens random_tokens(std::mt19937_64& rng, std::size_t max_len, std::size_t vocab) {
  Tokens t(rng() % (max_len + 1));
  for (auto& w : t) w = "w" + std::string(1, static_cast<char>('a' + rng() % vocab));
  return t;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("medscribe_acceptance_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// ---- AC1 -----------------------------------------------------------------

Outcome ac1() {
  const auto start = Clock::now();
  std::mt19937_64 rng(101);
  oracle::BruteForceAligner brute;
  std::size_t mismatches = 0;
  std::string first;
  for (int k = 0; k < 10'000; ++k) {
    const auto hyp = random_tokens(rng, 8, 1 + k % 4);
    const auto ref = random_tokens(rng, 8, 1 + k % 4);
    // Empty references are included; WerScore refuses them, so compare the
    // alignment counts that feed it.
    const auto got = global_align(hyp, ref).counts;
    const auto want = brute.align(hyp, ref);
    if (got.substitutions != want.s || got.deletions != want.d || got.insertions != want.i ||
        (!ref.empty() && wer_tokens(hyp, ref).errors() != want.cost())) {
      if (!mismatches++) {
        first = fmt::format(" first at case {}: got S{} D{} I{}, oracle S{} D{} I{}", k,
                            got.substitutions, got.deletions, got.insertions, want.s,
                            want.d, want.i);
      }
    }
  }
  const double t = seconds_since(start);
  return {mismatches == 0 && t < 60.0,
          fmt::format("10000 pairs len<=8, {} S/D/I mismatches, {:.2f}s (limit 60s){}",
                      mismatches, t, first)};
}

// ---- AC2 -----------------------------------------------------------------

Outcome ac2() {
  const auto start = Clock::now();
  std::mt19937_64 rng(202);
  std::size_t mismatches = 0;
  for (int k = 0; k < 1'000; ++k) {
    const auto hyp = random_tokens(rng, 200, 2 + k % 20);
    const auto ref = random_tokens(rng, 200, 2 + k % 20);
    const auto expected = oracle::suffix_edit_distance(hyp, ref);
    if (edit_distance(hyp, ref) != expected ||
        global_align(hyp, ref).counts.errors() != expected) {
      ++mismatches;
    }
  }
  const double t = seconds_since(start);
  return {mismatches == 0 && t < 30.0,
          fmt::format("1000 pairs len<=200, {} distance mismatches, {:.2f}s (limit 30s)",
                      mismatches, t)};
}

// ---- AC3 -----------------------------------------------------------------

// Text held as words so each mutation rewrites one word in place.
struct MutableText {
  std::vector<std::string> words;
  std::string str() const { return join(words, " "); }
};

std::string spelled_number(std::uint64_t v) {
  auto s = oracle::number_words(v);
  std::replace(s.begin(), s.end(), '-', ' ');
  return s;
}

Outcome ac3() {
  const auto& cfg = NormalizationConfig::defaults();
  std::map<std::string, std::string> american_to_british;
  for (const auto& [british, american] : cfg.spelling_map) {
    american_to_british.emplace(american, british);
  }
  std::vector<std::string> american;
  for (const auto& [a, _] : american_to_british) american.push_back(a);
  const auto fillers = default_disfluencies();

  std::mt19937_64 rng(303);
  const std::vector<std::string> plain = {"the", "patient", "reports", "pain", "since",
                                          "monday", "and", "took", "some", "tablets",
                                          "check", "up", "follow", "x", "ray"};
  const std::vector<std::string> punct = {",", ".", "?", "!", ";", ":", "\"", "..."};
  std::size_t violations = 0;
  std::size_t mutations = 0;
  std::string first;
  // Several starting texts, each mutated cumulatively.
  for (int chain = 0; chain < 10; ++chain) {
    MutableText hyp;
    for (int w = 0; w < 40; ++w) {
      switch (rng() % 4) {
        case 0: hyp.words.push_back(american[rng() % american.size()]); break;
        case 1: hyp.words.push_back(std::to_string(rng() % 1000)); break;
        default: hyp.words.push_back(plain[rng() % plain.size()]);
      }
    }
    MutableText ref;
    for (const auto& w : normalize(hyp.str())) ref.words.push_back(w);
    // Corrupt the reference a little so the fixed WER is not trivially zero.
    for (int c = 0; c < 4; ++c) ref.words[rng() % ref.words.size()] = "reference";
    const std::string ref_text = ref.str();
    const auto base = wer(hyp.str(), ref_text, cfg);
    std::map<std::string, std::string> spelled_to_digits;

    for (int m = 0; m < 50; ++m) {
      // Pick a mutation kind, then a word it applies to.
      const char* kinds[] = {"disfluency", "case", "punctuation", "numeral", "spelling",
                             "hyphenate"};
      std::string kind;
      std::vector<std::size_t> sites;
      while (sites.empty()) {
        kind = kinds[rng() % 6];
        for (std::size_t i = 0; i < hyp.words.size(); ++i) {
          const auto& w = hyp.words[i];
          bool applies = true;
          if (kind == "numeral") {
            applies = std::all_of(w.begin(), w.end(), [](char c) { return c >= '0' && c <= '9'; }) ||
                      spelled_to_digits.count(w);
          } else if (kind == "spelling") {
            applies = american_to_british.count(w) > 0;
          } else if (kind == "hyphenate") {
            applies = i + 1 < hyp.words.size();
          }
          if (applies) sites.push_back(i);
        }
      }
      const auto pos = sites[rng() % sites.size()];
      auto& word = hyp.words[pos];
      if (kind == "disfluency") {
        hyp.words.insert(hyp.words.begin() + static_cast<long>(pos),
                         fillers[rng() % fillers.size()]);
      } else if (kind == "case") {
        for (auto& ch : word) {
          if (rng() % 2) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
        }
      } else if (kind == "punctuation") {
        word += punct[rng() % punct.size()];
      } else if (kind == "numeral") {
        if (const auto it = spelled_to_digits.find(word); it != spelled_to_digits.end()) {
          word = it->second;
        } else {
          const auto spelled = spelled_number(std::stoull(word));
          spelled_to_digits[spelled] = word;
          word = spelled;
        }
      } else if (kind == "spelling") {
        word = american_to_british.at(word);
      } else {
        hyp.words[pos] += "-" + hyp.words[pos + 1];
        hyp.words.erase(hyp.words.begin() + static_cast<long>(pos) + 1);
      }
      ++mutations;
      const auto now = wer(hyp.str(), ref_text, cfg);
      if (now.substitutions != base.substitutions || now.deletions != base.deletions ||
          now.insertions != base.insertions || now.n != base.n) {
        if (!violations++) first = fmt::format(" first: {} mutation -> '{}'", kind, hyp.str());
      }
    }
  }
  return {violations == 0 && mutations == 500,
          fmt::format("{} cumulative mutations (disfluency, case, punctuation, numeral, "
                      "spelling, hyphenation), {} WER deltas{}",
                      mutations, violations, first)};
}

// ---- AC4 -----------------------------------------------------------------

std::string random_unicode(std::mt19937_64& rng) {
  std::string s;
  const auto len = rng() % 60;
  std::size_t digit_run = 0;
  for (std::size_t i = 0; i < len; ++i) {
    char32_t cp;
    switch (rng() % 8) {
      case 0: cp = static_cast<char32_t>('0' + rng() % 10); break;
      case 1: cp = U" -'\t\n,.!?\"()[]"[rng() % 15]; break;
      case 2: cp = static_cast<char32_t>(0xA0 + rng() % 0x60); break;    // Latin-1
      case 3: cp = static_cast<char32_t>(0x100 + rng() % 0x500); break;  // extended Latin..Cyrillic
      case 4: cp = static_cast<char32_t>(0x2000 + rng() % 0x70); break;  // punctuation block
      case 5: cp = static_cast<char32_t>(0x1F300 + rng() % 0x300); break;
      default: cp = static_cast<char32_t>(rng() % 2 ? 'a' + rng() % 26 : 'A' + rng() % 26);
    }
    const bool digit = cp >= '0' && cp <= '9';
    // Runs beyond nine digits are outside the supported numeral range.
    if (digit && digit_run == 9) continue;
    digit_run = digit ? digit_run + 1 : 0;
    append_utf8(s, cp);
  }
  return s;
}

Outcome ac4() {
  std::mt19937_64 rng(404);
  std::size_t violations = 0;
  std::size_t errors = 0;
  std::string first;
  for (int k = 0; k < 10'000; ++k) {
    const auto s = random_unicode(rng);
    try {
      const auto once = normalize(s);
      const auto twice = normalize(join(once, " "));
      if (once != twice && !violations++) first = fmt::format(" first input: {}", json(s).dump());
    } catch (const Error& e) {
      if (!errors++) first = fmt::format(" first error: {}", e.what());
    }
  }
  return {violations == 0 && errors == 0,
          fmt::format("10000 random Unicode strings, {} idempotence violations, {} errors{}",
                      violations, errors, first)};
}

// ---- AC5 -----------------------------------------------------------------

struct FixtureTurn {
  SpeakerRole speaker;
  std::string ref;
  std::string hyp;
};

// Twelve turns carrying the four error pairs.
const std::vector<FixtureTurn>& mc_fixture() {
  constexpr auto D = SpeakerRole::Doctor;
  constexpr auto P = SpeakerRole::Patient;
  static const std::vector<FixtureTurn> turns = {
      {D, "Good morning, what brings you in today?", "Good morning, what brings you in today?"},
      {P, "I have had a rash on both arms for about two weeks.",
       "I have had a rash on both arms for about two weeks."},
      {D, "Is the itching worse at night?", "Is the teaching worse at night?"},
      {P, "Yes, it keeps me awake most nights.", "Yes, it keeps me awake most nights."},
      {D, "Have you taken anything for it so far?", "Have you taken anything for it so far?"},
      {P, "I took fexofenadine for a few days.", "I took for a few days."},
      {D, "Did that help with the redness at all?", "Did that help with the redness at all?"},
      {P, "Not really, and I had some diarrhoea as well.",
       "Not really, and I had some diarrhoea as well."},
      {D, "Keep your fluids up and try some Dioralyte sachets.",
       "Keep your fluids up and try some diuretics sachets."},
      {P, "Should I keep using the cream on my skin?",
       "Should I keep using the cream on my eczema skin?"},
      {D, "Yes, apply it twice a day and come back in a week.",
       "Yes, apply it twice a day and come back in a week."},
      {P, "Thank you, goodbye.", "Thank you, goodbye."},
  };
  return turns;
}

ConceptLexicon mc_fixture_lexicon() {
  ConceptLexicon lex;
  using K = ConceptCategory::Kind;
  const std::pair<const char*, K> entries[] = {
      {"rash", K::MedicalCondition},   {"arms", K::AnatomicalStructure},
      {"itching", K::MedicalCondition}, {"fexofenadine", K::Medicine},
      {"redness", K::MedicalCondition}, {"diarrhea", K::MedicalCondition},
      {"dioralyte", K::Medicine},       {"diuretics", K::Medicine},
      {"cream", K::Medicine},           {"skin", K::AnatomicalStructure},
      {"eczema", K::MedicalCondition}};
  for (const auto& [term, cat] : entries) lex.add(term, cat);
  return lex;
}

Outcome ac5() {
  const LexiconAnnotator ann(mc_fixture_lexicon());
  std::string ref_text, hyp_text;
  for (const auto& t : mc_fixture()) {
    ref_text += t.ref + " ";
    hyp_text += t.hyp + " ";
  }
  const auto ref = normalize(ref_text);
  const auto hyp = normalize(hyp_text);
  // N by direct count of lexicon terms in the reference.
  std::map<oracle::Tokens, std::string> naive;
  for (const auto& [term, cat] : ann.lexicon().entries()) naive[split_whitespace(term)] = cat.name();
  const auto expected_n = oracle::naive_lexicon_scan(ref, naive).size();

  const auto base = mc_wer_tokens(hyp, ref, ann);
  const bool counts_ok = base.score.substitutions == 2 && base.score.deletions == 1 &&
                         base.score.insertions == 1 && base.score.n == expected_n;
  std::string detail = fmt::format("fixture S={} D={} I={} N={} (lexicon N={})",
                                   base.score.substitutions, base.score.deletions,
                                   base.score.insertions, base.score.n, expected_n);

  // Corrupt 10 random non-concept hypothesis words per trial.
  std::set<std::size_t> concept_positions;
  for (const auto& a : base.hyp_concepts) {
    for (auto i = a.span.begin; i < a.span.end; ++i) concept_positions.insert(i);
  }
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < hyp.size(); ++i) {
    if (!concept_positions.count(i)) candidates.push_back(i);
  }
  std::mt19937_64 rng(505);
  std::size_t changed = 0;
  const std::size_t trials = 2000;
  std::string first;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    auto corrupted = hyp;
    auto pool = candidates;
    std::shuffle(pool.begin(), pool.end(), rng);
    for (std::size_t c = 0; c < 10; ++c) corrupted[pool[c]] = fmt::format("zq{}", rng() % 1000);
    const auto r = mc_wer_tokens(corrupted, ref, ann);
    if (r.score.wer() != base.score.wer()) {
      if (!changed++) {
        first = fmt::format(" first change: S={} D={} I={}", r.score.substitutions,
                            r.score.deletions, r.score.insertions);
      }
    }
  }
  detail += fmt::format("; {} trials x 10 non-concept corruptions, {} MC-WER changes{}", trials,
                        changed, first);
  return {counts_ok && changed == 0, detail};
}

// ---- AC6 -----------------------------------------------------------------

Outcome ac6() {
  const std::string input =
      "so how long have you had this cough and does it bring anything up when you cough";
  const std::pair<std::size_t, bool> cases[] = {{10, false}, {20, false}, {21, true}, {40, true}};
  bool ok = true;
  std::string detail;
  for (const auto& [tail, expected] : cases) {
    std::string output = input;
    for (std::size_t i = 0; i < tail; ++i) output += fmt::format(" tail{}", i);
    const auto r = truncate_degeneration(output, input);
    const bool good = r.truncated == expected && r.unaligned_tail == tail &&
                      (!expected || r.text == input) && (expected || r.text == output);
    ok = ok && good;
    detail += fmt::format("{}{} words -> truncated={}", detail.empty() ? "" : ", ", tail,
                          r.truncated);
  }
  return {ok, detail};
}

// ---- AC7 -----------------------------------------------------------------

Outcome ac7() {
  constexpr auto D = SpeakerRole::Doctor;
  constexpr auto P = SpeakerRole::Patient;
  const std::vector<std::string> doctor_turns = {
      "how long have you been feeling this way now",
      "any fever or chills or night sweats lately at all",
      "have you noticed any weight loss over the past months",
      "do you smoke or drink alcohol on a regular basis these days or use any substances",
      "i would like to run a few blood tests"};
  const std::vector<std::string> patient_turns = {"about three weeks", "no fever at all",
                                                  "maybe a little bit", "i drink socially",
                                                  "okay that sounds fine"};
  std::vector<std::pair<SpeakerRole, std::string>> ref_turns, hyp_turns;
  for (std::size_t k = 0; k < 5; ++k) {
    ref_turns.push_back({D, doctor_turns[k]});
    ref_turns.push_back({P, patient_turns[k]});
    hyp_turns.push_back({D, doctor_turns[k]});
    hyp_turns.push_back({P, patient_turns[k]});
  }
  // Doctor turns hold 9 + 10 + 10 + 16 + 5 = 50 words; the 5-word one is
  // mislabeled in the hypothesis.
  ref_turns[8].second = "let us run blood tests";
  hyp_turns[8] = {P, "let us run blood tests"};
  const auto ref = make_transcript("r", TranscriptKind::Reference, ref_turns);
  const auto hyp = make_transcript("h", TranscriptKind::Hypothesis, hyp_turns);
  const auto sal = default_salutations();
  const auto d = speaker_wer(hyp, ref, D, sal);
  const auto p = speaker_wer(hyp, ref, P, sal);
  const auto p_ref = speaker_wer(ref, ref, P, sal);
  const bool mislabel_ok = d.n == 50 && d.deletions == 5 && d.errors() == 5 &&
                           std::fabs(d.wer() - 0.1) < 1e-12 && p.insertions == 5 &&
                           p.errors() == 5 && p_ref.errors() == 0;

  const auto s_ref = make_transcript(
      "sr", TranscriptKind::Reference,
      std::vector<std::pair<SpeakerRole, std::string>>{
          {D, "Hello."}, {P, "Hello!"}, {D, "What seems to be the problem?"},
          {P, "My ankle is swollen."}, {D, "Take care, goodbye."}, {P, "Bye bye."}});
  const auto s_hyp = make_transcript(
      "sh", TranscriptKind::Hypothesis,
      std::vector<std::pair<SpeakerRole, std::string>>{
          {P, "Hello."}, {D, "Hello!"}, {D, "What seems to be the problem?"},
          {P, "My ankle is swollen."}, {P, "Take care, goodbye."}, {D, "Bye bye."}});
  const auto sd = speaker_wer(s_hyp, s_ref, D, sal);
  const auto sp = speaker_wer(s_hyp, s_ref, P, sal);
  const bool salutation_ok = sd.wer() == 0.0 && sp.wer() == 0.0;
  return {mislabel_ok && salutation_ok,
          fmt::format("mislabel D-WER={:.4f} (D={} of N={}), P-WER insertions={} (P-WER "
                      "{:.4f}); salutation D-WER={:.4f} P-WER={:.4f}",
                      d.wer(), d.deletions, d.n, p.insertions, p.wer(), sd.wer(), sp.wer())};
}

// ---- AC8 -----------------------------------------------------------------

const fs::path kDataDir = MEDSCRIBE_TEST_DATA_DIR;
const fs::path kScriptPath = kDataDir / "ac8_script.json";
const fs::path kGoldenPath = kDataDir / "ac8_golden_report.json";

cli::RunConfig synth_config(const fs::path& out) {
  return cli::RunConfig::from_json(json{
      {"output_dir", out.string()},
      {"seed", 8},
      {"synth",
       {{"transcripts", 5},
        {"format", "jsonl"},
        {"injection",
         {{"substitution_rate", 0.06}, {"deletion_rate", 0.02}, {"insertion_rate", 0.02},
          {"scramble_speakers_rate", 0.05}}}}}});
}

json enhance_json(const fs::path& corpus, const fs::path& run, const fs::path& script,
                  std::size_t concurrency) {
  return json{{"input_dir", (corpus / "hypothesis").string()},
              {"output_dir", run.string()},
              {"method", "cot"},
              {"stages", {"punctuation", "diarization", "correction"}},
              {"chunking", "lines:10"},
              {"backend", {{"kind", "mock"}, {"script", script.string()}, {"name", "scripted-mock"}}},
              {"concurrency", concurrency},
              {"chunk_concurrency", concurrency},
              {"retry_base_delay_ms", 0}};
}

// Builds the canned responses from an all-echo run: a degenerate tail, a
// transient failure, an unparseable answer and a real correction.
json build_script(const fs::path& corpus) {
  const auto echo_run = scratch_dir("ac8_echo");
  auto cfg_json = enhance_json(corpus, echo_run, "", 1);
  cfg_json["backend"] = json{{"kind", "echo"}, {"mode", "echo:alternate"}};
  std::ostringstream log;
  cli::cmd_enhance(cli::RunConfig::from_json(cfg_json), log);
  auto chunk_response = [&](const std::string& id, const std::string& stage, std::size_t chunk) {
    std::ifstream in(echo_run / "records" / (id + ".jsonl"));
    std::string line;
    while (std::getline(in, line)) {
      const auto j = json::parse(line);
      if (j.value("type", "") == "chunk" && j["stage"] == stage && j["chunk_index"] == chunk) {
        return j["raw_response"].get<std::string>();
      }
    }
    throw std::runtime_error("chunk not found in echo record");
  };
  std::string degenerate = chunk_response("consult_001", "correction", 0);
  for (int i = 0; i < 30; ++i) degenerate += " and so on";
  std::string corrected = chunk_response("consult_004", "correction", 3);
  const auto colon = corrected.find("): ");
  corrected.insert(colon + 3, "Right, ");
  json responses = json::array();
  responses.push_back({{"transcript", "consult_001"}, {"stage", "correction"}, {"chunk", 0},
                       {"text", degenerate}});
  responses.push_back({{"transcript", "consult_002"}, {"stage", "punctuation"}, {"chunk", 1},
                       {"fail", 1}, {"text", chunk_response("consult_002", "punctuation", 1)}});
  responses.push_back({{"transcript", "consult_003"}, {"stage", "diarization"}, {"chunk", 2},
                       {"text", "I'm sorry, I can't determine the speakers here."}});
  responses.push_back({{"transcript", "consult_004"}, {"stage", "correction"}, {"chunk", 3},
                       {"text", corrected}});
  fs::remove_all(echo_run);
  return json{{"fallback", "echo:alternate"}, {"responses", responses}};
}

struct PipelineRun {
  std::string report;  // report.json without metadata
  std::map<std::string, std::string> files;
  int enhance_exit = 0;
  int score_exit = 0;
};

PipelineRun run_pipeline(const fs::path& corpus, std::size_t concurrency, const std::string& tag) {
  const auto run = scratch_dir("ac8_run_" + tag);
  std::ostringstream log;
  PipelineRun out;
  out.enhance_exit =
      cli::cmd_enhance(cli::RunConfig::from_json(enhance_json(corpus, run, kScriptPath, concurrency)), log);
  const auto score = cli::RunConfig::from_json(json{
      {"hypothesis_dir", (run / "enhanced").string()},
      {"reference_dir", (corpus / "reference").string()},
      {"output_dir", (run / "report").string()},
      {"concurrency", concurrency}});
  out.score_exit = cli::cmd_score(score, log);
  auto report = json::parse(slurp(run / "report" / "report.json"));
  report.erase("metadata");
  out.report = report.dump(2) + "\n";
  for (const auto& entry : fs::recursive_directory_iterator(run)) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), run).string();
    if (rel == "summary.json" || rel.rfind("report/", 0) == 0) continue;
    out.files[rel] = slurp(entry.path());
  }
  fs::remove_all(run);
  return out;
}

Outcome ac8(bool regenerate) {
  const auto start = Clock::now();
  const auto corpus = scratch_dir("ac8_corpus");
  std::ostringstream log;
  cli::cmd_synth(synth_config(corpus), log);
  if (regenerate) {
    cli::write_text_file(kScriptPath, build_script(corpus).dump(2) + "\n");
  }
  const auto a = run_pipeline(corpus, 1, "a");
  const auto b = run_pipeline(corpus, 8, "b");
  const auto c = run_pipeline(corpus, 1, "c");
  if (regenerate) cli::write_text_file(kGoldenPath, a.report);
  const std::string golden = fs::exists(kGoldenPath) ? slurp(kGoldenPath) : std::string();
  fs::remove_all(corpus);
  const double t = seconds_since(start);

  const auto summary_counts = json::parse(a.report)["rows"].size();
  const bool ok = !golden.empty() && a.report == golden && b.report == golden &&
                  c.report == golden && a.files == b.files && a.files == c.files &&
                  a.enhance_exit == 0 && a.score_exit == 0 && summary_counts == 5 && t < 30.0;
  return {ok, fmt::format("5 transcripts, golden {} ; concurrency 1 vs 8 report {} , rerun {} , "
                          "enhanced/records bytes {} ; {:.2f}s (limit 30s)",
                          a.report == golden ? "match" : "DIFFERS",
                          a.report == b.report ? "identical" : "DIFFERS",
                          a.report == c.report ? "identical" : "DIFFERS",
                          a.files == b.files && a.files == c.files ? "identical" : "DIFFER", t)};
}

// ---- AC9 -----------------------------------------------------------------

class OneHotEmbedder final : public Embedder {
 public:
  const EmbedderDescriptor& descriptor() const override { return d_; }
  EmbeddingVector embed(std::string_view text) const override {
    const auto [it, _] = axes_.try_emplace(std::string(text), axes_.size());
    std::vector<double> v(256, 0.0);
    v.at(it->second) = 1.0;
    return {v};
  }

 private:
  EmbedderDescriptor d_{"onehot", 512, 256, {}};
  mutable std::map<std::string, std::size_t> axes_;
};

Outcome ac9() {
  cli::SynthConfig synth;
  std::size_t off = 0;
  double worst = 0.0;
  const HashEmbedder hash;
  for (std::size_t i = 0; i < 100; ++i) {
    const auto t = cli::synthesize_reference(909, i, synth);
    const auto r = transcript_similarity(t, t, hash);
    worst = std::max(worst, std::fabs(r.stat.mean - 1.0));
    if (std::fabs(r.stat.mean - 1.0) > 1e-9) ++off;
  }
  // One extra line: n matched lines plus one unpaired.
  const auto ref = cli::synthesize_reference(910, 0, synth);
  auto hyp = ref;
  hyp.turns.insert(hyp.turns.begin() + 17,
                   Turn{SpeakerRole::Doctor, "an extra line that the reference never had", 0});
  hyp.reindex();
  const double n = static_cast<double>(ref.turns.size());
  const auto exact = transcript_similarity(hyp, ref, OneHotEmbedder());
  const auto hashed = transcript_similarity(hyp, ref, hash);
  const bool ok = off == 0 && exact.stat.mean == n / (n + 1) &&
                  std::fabs(hashed.stat.mean - n / (n + 1)) < 1e-9 && exact.unpaired == 1;
  return {ok, fmt::format("100 self-similarities, max |1-s|={:.2e}; extra line n={}: one-hot "
                          "mean={:.12f}, hash mean={:.12f}, n/(n+1)={:.12f}",
                          worst, ref.turns.size(), exact.stat.mean, hashed.stat.mean,
                          n / (n + 1))};
}

// ---- AC10 ----------------------------------------------------------------

Outcome ac10() {
  const auto cell = cli::format_cell(0.1215, 0.1101);
  cli::MetricReport report;
  report.label = {"LLM", "STT", "ASR", "lines:10"};
  for (const double v : {0.0114, 0.2316}) {
    cli::MetricRow row;
    row.id = fmt::format("t{}", report.rows.size());
    row.values["wer"] = v;
    report.rows.push_back(row);
  }
  report.recompute_aggregate();
  const auto table = cli::render_comparison({report}, "wer", false);
  const bool in_table = table.find("12.15% ± 11.01") != std::string::npos;
  return {cell == "12.15% ± 11.01" && in_table,
          fmt::format("format_cell -> \"{}\", comparison table from rows {{0.0114, 0.2316}} {}",
                      cell, in_table ? "contains it" : "MISSING")};
}

// ---- AC11 ----------------------------------------------------------------

std::string fuzz_case(std::mt19937_64& rng, const std::vector<std::string>& blocks) {
  std::string s;
  switch (rng() % 3) {
    case 0: {  // random UTF-8, including malformed bytes
      const auto len = rng() % 200;
      for (std::size_t i = 0; i < len; ++i) {
        if (rng() % 4 == 0) {
          s += static_cast<char>(rng() % 256);
        } else {
          append_utf8(s, static_cast<char32_t>(rng() % 0x11000));
        }
      }
      break;
    }
    case 1: {  // truncated template output
      const auto& b = blocks[rng() % blocks.size()];
      s = b.substr(0, rng() % (b.size() + 1));
      break;
    }
    default: {  // bracket styles mixed and markers mangled
      s = blocks[rng() % blocks.size()];
      static const char open[] = "([{<", close[] = ")]}>";
      for (auto& ch : s) {
        if (ch == '(' || ch == '[') ch = open[rng() % 4];
        else if (ch == ')' || ch == ']') ch = close[rng() % 4];
        else if (ch == ':' && rng() % 5 == 0) ch = ' ';
        else if (rng() % 97 == 0) ch = static_cast<char>(rng() % 256);
      }
      if (rng() % 2) s = "Sure! Here is the output:\n" + s + "\nHope this helps.";
    }
  }
  return s;
}

Outcome ac11() {
  const Stage stages[] = {Stage::Punctuation, Stage::Diarization, Stage::Correction,
                          Stage::ZeroShotCombined};
  // Round trip: render_prompt -> echo backend -> extract, per stage, per chunk.
  cli::SynthConfig synth;
  EchoBackend echo(EchoBackend::LabelMode::Preserve);
  std::size_t lines_total = 0, lines_recovered = 0;
  std::vector<std::string> blocks;
  std::string first_miss;
  for (std::size_t i = 0; i < 20; ++i) {
    const auto t = cli::synthesize_reference(1111, i, synth);
    for (const auto stage : stages) {
      const auto tmpl = PromptTemplate::bundled(stage);
      const auto examples = bundled_examples(stage);
      for (const auto& seg : chunk(t, ChunkingPolicy::lines(i % 2 ? 5 : 10))) {
        GenerationRequest req;
        req.prompt = tmpl.uses_examples()
                         ? render_prompt(tmpl, seg.text, std::span<const FewShotExample>(examples))
                         : render_prompt(tmpl, seg.text);
        req.stage = stage;
        req.segment = &seg;
        const auto response = echo.generate(req);
        if (blocks.size() < 400) blocks.push_back(response);
        const auto parsed = extract(response, stage);
        lines_total += seg.turns.size();
        for (std::size_t k = 0; k < seg.turns.size(); ++k) {
          const bool same = k < parsed.size() && parsed.size() == seg.turns.size() &&
                            parsed[k].text == seg.turns[k].text &&
                            parsed[k].speaker == seg.turns[k].speaker;
          if (same) {
            ++lines_recovered;
          } else if (first_miss.empty()) {
            first_miss = fmt::format(" first miss: stage {} line '{}'", to_string(stage),
                                     seg.turns[k].text);
          }
        }
      }
    }
  }

  std::mt19937_64 rng(1112);
  std::size_t exceptions = 0, empty_text = 0;
  for (int k = 0; k < 100'000; ++k) {
    const auto input = fuzz_case(rng, blocks);
    const auto stage = stages[rng() % 4];
    try {
      for (const auto& l : extract(input, stage)) {
        if (l.text.empty()) ++empty_text;
      }
    } catch (...) {
      ++exceptions;
    }
  }
  const double pct = 100.0 * static_cast<double>(lines_recovered) / static_cast<double>(lines_total);
  return {exceptions == 0 && empty_text == 0 && lines_recovered == lines_total,
          fmt::format("100000 fuzz cases: {} exceptions, {} empty lines; round trip "
                      "{}/{} lines ({:.2f}%){}",
                      exceptions, empty_text, lines_recovered, lines_total, pct, first_miss)};
}

// ---- AC12 ----------------------------------------------------------------

Outcome ac12() {
  // Wiring only: the live mode needs real transcripts and service
  // credentials, so this checks the emitted table schema on a tiny corpus.
  const auto dir = scratch_dir("ac12");
  std::ostringstream log;
  auto synth = cli::RunConfig::from_json(json{{"output_dir", dir.string()}, {"seed", 12},
                                              {"synth", {{"transcripts", 2},
                                                         {"injection", {{"substitution_rate", 0.05}}}}}});
  cli::cmd_synth(synth, log);
  const auto score = cli::RunConfig::from_json(
      json{{"hypothesis_dir", (dir / "hypothesis").string()},
           {"reference_dir", (dir / "reference").string()},
           {"output_dir", (dir / "report").string()},
           {"label", {{"llm", "GPT-4"}, {"stt", "Whisper"}, {"method", "Zero-Shot"}}}});
  const int rc = cli::cmd_score(score, log);
  const auto table = slurp(dir / "report" / "table.md");
  const std::string header =
      "| LLM | STT | Method | WER | MC-WER | D-WER | P-WER | Cosine Similarity |";
  const bool header_ok = table.find(header) != std::string::npos;
  const bool row_ok = table.find("| GPT-4 | Whisper | Zero-Shot |") != std::string::npos;
  const auto report = json::parse(slurp(dir / "report" / "report.json"));
  const bool schema_ok = report.at("schema_version") == cli::kReportSchemaVersion &&
                         report.contains("aggregate") && report.contains("taxonomy") &&
                         report.contains("metadata");
  fs::remove_all(dir);
  return {rc == 0 && header_ok && row_ok && schema_ok,
          fmt::format("table header {}, label row {}, report schema {} (live mode documented, "
                      "not exercised)",
                      header_ok ? "ok" : "MISSING", row_ok ? "ok" : "MISSING",
                      schema_ok ? "ok" : "BAD")};
}

}  // namespace

int main(int argc, char** argv) {
  bool regenerate = false;
  std::string only;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--regenerate-golden") {
      regenerate = true;
    } else if (arg == "--only" && i + 1 < argc) {
      only = argv[++i];
    } else {
      fmt::print(stderr, "usage: {} [--only ACn] [--regenerate-golden]\n", argv[0]);
      return 2;
    }
  }
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"AC1", ac1},  {"AC2", ac2}, {"AC3", ac3},  {"AC4", ac4},
      {"AC5", ac5},  {"AC6", ac6}, {"AC7", ac7},  {"AC8", [&] { return ac8(regenerate); }},
      {"AC9", ac9},  {"AC10", ac10}, {"AC11", ac11}, {"AC12", ac12}};
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    if (!only.empty() && only != name) continue;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, fmt::format("exception: {}", e.what())};
    }
    if (!o.pass) ++failures;
    fmt::print("{} {}: {}\n", o.pass ? "PASS" : "FAIL", name, o.detail);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
