#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "medscribe/align.hpp"
#include "medscribe/cli/commands.hpp"
#include "medscribe/concepts.hpp"
#include "medscribe/enhance.hpp"
#include "medscribe/metrics.hpp"
#include "medscribe/normalize.hpp"
#include "medscribe/parse.hpp"
#include "medscribe/semantics.hpp"

using namespace medscribe;
using medscribe::cli::SynthConfig;
using medscribe::cli::synth_vocabulary;
using medscribe::cli::synthesize_reference;

namespace {

struct Pair {
  Transcript ref;
  Transcript hyp;
  std::string ref_text;
  std::string hyp_text;
};

std::string flatten(const Transcript& t) {
  std::string out;
  for (const auto& turn : t.turns) {
    if (!out.empty()) out += ' ';
    out += turn.text;
  }
  return out;
}

// Reference with `turns` turns and a hypothesis at roughly 10% WER.
Pair make_pair_of(std::size_t turns, std::uint64_t seed = 7) {
  SynthConfig synth;
  synth.mean_turns = turns;
  synth.turn_spread = 0;
  Pair p;
  p.ref = synthesize_reference(seed, 0, synth);
  ErrorInjectionSpec spec;
  spec.substitution_rate = 0.06;
  spec.deletion_rate = 0.02;
  spec.insertion_rate = 0.02;
  spec.seed = seed;
  p.hyp = inject_errors(p.ref, spec, synth_vocabulary());
  p.ref_text = flatten(p.ref);
  p.hyp_text = flatten(p.hyp);
  return p;
}

void BM_Normalize(benchmark::State& state) {
  const auto p = make_pair_of(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(normalize(p.ref_text));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * p.ref_text.size()));
}
BENCHMARK(BM_Normalize)->Arg(10)->Arg(92);

void BM_GlobalAlign(benchmark::State& state) {
  const auto p = make_pair_of(static_cast<std::size_t>(state.range(0)));
  const auto ref = normalize(p.ref_text);
  const auto hyp = normalize(p.hyp_text);
  for (auto _ : state) benchmark::DoNotOptimize(global_align(hyp, ref));
  state.counters["ref_words"] = static_cast<double>(ref.size());
}
BENCHMARK(BM_GlobalAlign)->Arg(10)->Arg(40)->Arg(92)->Unit(benchmark::kMicrosecond);

void BM_Wer(benchmark::State& state) {
  const auto p = make_pair_of(92);
  for (auto _ : state) benchmark::DoNotOptimize(wer(p.hyp_text, p.ref_text));
}
BENCHMARK(BM_Wer)->Unit(benchmark::kMillisecond);

void BM_McWer(benchmark::State& state) {
  const auto p = make_pair_of(static_cast<std::size_t>(state.range(0)));
  const LexiconAnnotator annotator(ConceptLexicon::bundled());
  for (auto _ : state) benchmark::DoNotOptimize(mc_wer(p.hyp_text, p.ref_text, annotator));
}
BENCHMARK(BM_McWer)->Arg(10)->Arg(92)->Unit(benchmark::kMillisecond);

void BM_LexiconAnnotate(benchmark::State& state) {
  const auto p = make_pair_of(92);
  const auto tokens = normalize(p.ref_text);
  const LexiconAnnotator annotator(ConceptLexicon::bundled());
  for (auto _ : state) benchmark::DoNotOptimize(annotator.annotate(tokens));
}
BENCHMARK(BM_LexiconAnnotate)->Unit(benchmark::kMicrosecond);

void BM_Similarity(benchmark::State& state) {
  const auto p = make_pair_of(92);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cosine(hash_embedder(p.hyp_text), hash_embedder(p.ref_text)));
  }
}
BENCHMARK(BM_Similarity)->Unit(benchmark::kMicrosecond);

void BM_Extract(benchmark::State& state) {
  const auto p = make_pair_of(10);
  std::vector<ExpectedLine> lines;
  for (const auto& t : p.ref.turns) lines.push_back({t.speaker, t.text, std::nullopt});
  const auto raw = format_expected_output(Stage::ZeroShotCombined, lines);
  for (auto _ : state) benchmark::DoNotOptimize(extract(raw, Stage::ZeroShotCombined));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * raw.size()));
}
BENCHMARK(BM_Extract)->Unit(benchmark::kMicrosecond);

void BM_ZeroShotEcho(benchmark::State& state) {
  const auto p = make_pair_of(92);
  EchoBackend backend;
  EnhanceOptions options;
  options.concurrency = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(zero_shot_enhance(p.hyp, backend, options));
}
BENCHMARK(BM_ZeroShotEcho)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace
BENCHMARK_MAIN();
