#include <fmt/format.h>

#include <ostream>
#include <random>
#include <set>

#include "medscribe/cli/commands.hpp"
#include "medscribe/text_util.hpp"

namespace medscribe::cli {

namespace {

// Draws are taken from the raw engine output so corpora are identical across
// standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  bool chance(double p) { return unit() < p; }
  template <typename T>
  const T& pick(const std::vector<T>& v) { return v[index(v.size())]; }

 private:
  std::mt19937_64 engine_;
};

const std::vector<std::string> kConditions = {
    "cough", "sore throat", "headache", "rash", "itching", "eczema", "fever", "nausea",
    "diarrhoea", "heartburn", "back pain", "chest pain", "dizziness", "tiredness",
    "constipation", "hay fever", "insomnia", "wheezing", "swelling", "migraine"};
const std::vector<std::string> kMedicines = {
    "paracetamol", "ibuprofen", "fexofenadine", "cetirizine", "Dioralyte", "omeprazole",
    "amoxicillin", "salbutamol", "emollients", "hydrocortisone", "loperamide", "naproxen",
    "gaviscon", "antihistamines", "antibiotics"};
const std::vector<std::string> kBody = {"elbows", "knees", "chest", "stomach", "throat",
                                        "back", "neck", "wrist", "ankle", "hands",
                                        "shoulder", "head"};
const std::vector<std::string> kProcedures = {"blood test", "urine sample", "x-ray", "ecg",
                                              "referral", "physical examination", "swab"};
const std::vector<std::string> kMeasures = {"blood pressure", "temperature", "pulse",
                                            "weight", "heart rate"};
const std::vector<std::string> kSeverity = {"mild", "moderate", "severe", "unbearable"};
const std::vector<std::string> kNumbers = {"2", "3", "4", "5", "7", "10", "12", "14", "20",
                                           "30", "89", "120", "250", "500"};
const std::vector<std::string> kUnits = {"days", "weeks", "months"};
const std::vector<std::string> kFillers = {"um", "uh", "erm", "hmm"};

const std::vector<std::string> kDoctor = {
    "How long have you had the {condition} for?",
    "Have you taken anything for the {condition}, like {medicine}?",
    "Does the {condition} get worse at night or in the morning?",
    "Is there any {condition} in your {body} as well?",
    "I'd like to arrange a {procedure} just to be on the safe side.",
    "Your {measure} looks fine today, it's about {number}.",
    "I'm going to prescribe some {medicine} for you to take twice a day.",
    "Take {number} milligrams of {medicine} with food.",
    "Any allergies to medication that you know of?",
    "On a scale of one to ten how would you rate it, would you say it's {severity}?",
    "Okay, and have you noticed any {condition} alongside that?",
    "If it's not better in {number} {unit}, please come back and see us.",
    "Keep using the {medicine} on your {body} and it should settle down.",
    "That sounds like it could be {condition}, which is quite common.",
    "Can you tell me a little bit more about when it started?",
    "We'll check your {measure} and do a quick {procedure} before you go.",
};
const std::vector<std::string> kPatient = {
    "I've had this {condition} for about {number} {unit} now.",
    "It started on my {body} and then it spread a bit.",
    "I tried some {medicine} but it didn't really help much.",
    "It's quite {severity} to be honest, especially at night.",
    "No, I don't think I'm allergic to anything.",
    "I've been feeling a bit of {condition} as well, on and off.",
    "My {body} has been aching since last week.",
    "I took {number} tablets of {medicine} yesterday.",
    "Yes, it gets worse when I lie down.",
    "I'm a bit worried it might be something serious.",
    "Not really, just the {condition} and feeling tired all the time.",
    "I work in an office so I'm sitting down most of the day.",
    "Okay, that makes sense, thank you.",
    "Should I stop taking the {medicine} then?",
    "The {condition} is worse than it was last time.",
};
const std::vector<std::string> kOpenDoctor = {"Hello, how can I help you today?",
                                              "Good morning, what brings you in today?"};
const std::vector<std::string> kOpenPatient = {"Hi, thanks for seeing me.",
                                               "Good morning, doctor."};
const std::vector<std::string> kCloseDoctor = {"Take care, bye.", "Okay, take care, goodbye."};
const std::vector<std::string> kClosePatient = {"Thank you, bye bye.", "Thanks, bye."};

std::string fill(std::string_view tmpl, Rng& rng) {
  std::string out;
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      const auto close = tmpl.find('}', i);
      const auto slot = tmpl.substr(i + 1, close - i - 1);
      const std::vector<std::string>* source =
          slot == "condition"   ? &kConditions
          : slot == "medicine"  ? &kMedicines
          : slot == "body"      ? &kBody
          : slot == "procedure" ? &kProcedures
          : slot == "measure"   ? &kMeasures
          : slot == "severity"  ? &kSeverity
          : slot == "number"    ? &kNumbers
                                : &kUnits;
      out += rng.pick(*source);
      i = close + 1;
    } else {
      out += tmpl[i++];
    }
  }
  return out;
}

std::string make_turn(SpeakerRole role, std::size_t target_words, Rng& rng) {
  const auto& pool = role == SpeakerRole::Doctor ? kDoctor : kPatient;
  std::string text;
  std::size_t words = 0;
  while (words < target_words) {
    auto sentence = fill(rng.pick(pool), rng);
    if (rng.chance(0.12)) sentence = rng.pick(kFillers) + ", " + sentence;
    if (!text.empty()) text += ' ';
    words += split_whitespace(sentence).size();
    text += sentence;
  }
  return text;
}

}  // namespace

const std::vector<std::string>& synth_vocabulary() {
  static const std::vector<std::string> vocab = [] {
    std::set<std::string> words;
    auto add_all = [&](const std::vector<std::string>& src) {
      for (const auto& s : src) {
        for (auto& w : split_whitespace(s)) {
          std::string clean;
          for (char c : w) {
            if (std::isalnum(static_cast<unsigned char>(c)) || c == '\'') clean += c;
          }
          if (!clean.empty() && clean.find('{') == std::string::npos) words.insert(clean);
        }
      }
    };
    for (const auto* src : {&kConditions, &kMedicines, &kBody, &kProcedures, &kMeasures,
                            &kSeverity, &kUnits}) {
      add_all(*src);
    }
    std::vector<std::string> templ;
    for (const auto* src : {&kDoctor, &kPatient}) {
      for (const auto& s : *src) {
        std::string stripped;
        bool in_slot = false;
        for (char c : s) {
          if (c == '{') in_slot = true;
          if (!in_slot) stripped += c;
          if (c == '}') in_slot = false;
        }
        templ.push_back(stripped);
      }
    }
    add_all(templ);
    return std::vector<std::string>(words.begin(), words.end());
  }();
  return vocab;
}

Transcript synthesize_reference(std::uint64_t seed, std::size_t index, const SynthConfig& synth) {
  Rng rng(seed * 0x9E3779B97F4A7C15ULL + index + 1);
  const std::size_t lo = synth.mean_turns - synth.turn_spread;
  const std::size_t n_turns = lo + rng.index(2 * synth.turn_spread + 1);
  const std::size_t wlo = std::max<std::size_t>(1, synth.words_per_turn / 2);
  const std::size_t wspan = synth.words_per_turn - wlo;

  Transcript t;
  t.id = fmt::format("consult_{:03}", index + 1);
  t.kind = TranscriptKind::Reference;
  auto push = [&](SpeakerRole role, std::string text) {
    t.turns.push_back(Turn{role, std::move(text), t.turns.size()});
  };
  push(SpeakerRole::Doctor, rng.pick(kOpenDoctor));
  push(SpeakerRole::Patient, rng.pick(kOpenPatient));
  SpeakerRole role = SpeakerRole::Doctor;
  while (t.turns.size() + 2 < n_turns) {
    // Mean target is words_per_turn: uniform over [w/2, 3w/2].
    const std::size_t target = wlo + rng.index(2 * wspan + 1);
    push(role, make_turn(role, target, rng));
    if (!rng.chance(0.1)) role = opposite(role);
  }
  push(SpeakerRole::Doctor, rng.pick(kCloseDoctor));
  push(SpeakerRole::Patient, rng.pick(kClosePatient));
  t.validate();
  return t;
}

std::pair<std::vector<Transcript>, std::vector<Transcript>> synthesize_corpus(
    const RunConfig& config) {
  std::vector<Transcript> refs, hyps;
  for (std::size_t i = 0; i < config.synth.transcripts; ++i) {
    auto ref = synthesize_reference(config.seed, i, config.synth);
    auto spec = config.synth.injection;
    spec.seed = config.seed * 1'000'003ULL + i;
    auto hyp = inject_errors(ref, spec, synth_vocabulary());
    hyp.kind = TranscriptKind::Hypothesis;
    refs.push_back(std::move(ref));
    hyps.push_back(std::move(hyp));
  }
  return {std::move(refs), std::move(hyps)};
}

int cmd_synth(const RunConfig& config, std::ostream& log) {
  config.validate(RunConfig::Purpose::Synth);
  const auto [refs, hyps] = synthesize_corpus(config);
  const auto ext = std::string(file_extension(config.synth.format));
  std::size_t turns = 0;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    write_text_file(config.output_dir / "reference" / (refs[i].id + ext),
                    serialize_transcript(refs[i], config.synth.format) +
                        (config.synth.format == TranscriptFormat::PlainText ? "\n" : ""));
    write_text_file(config.output_dir / "hypothesis" / (hyps[i].id + ext),
                    serialize_transcript(hyps[i], config.synth.format) +
                        (config.synth.format == TranscriptFormat::PlainText ? "\n" : ""));
    turns += refs[i].turns.size();
  }
  log << fmt::format("wrote {} reference/hypothesis pairs to {} (mean {:.1f} turns)\n",
                     refs.size(), config.output_dir.string(),
                     static_cast<double>(turns) / static_cast<double>(refs.size()));
  return 0;
}

}  // namespace medscribe::cli
