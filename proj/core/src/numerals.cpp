#include <array>
#include <cctype>

#include "medscribe/error.hpp"
#include "medscribe/normalize.hpp"

namespace medscribe {

namespace {

constexpr std::array<std::string_view, 20> kSmall = {
    "zero",    "one",     "two",       "three",    "four",
    "five",    "six",     "seven",     "eight",    "nine",
    "ten",     "eleven",  "twelve",    "thirteen", "fourteen",
    "fifteen", "sixteen", "seventeen", "eighteen", "nineteen"};

constexpr std::array<std::string_view, 10> kTens = {
    "", "", "twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty",
    "ninety"};

constexpr std::uint64_t kMaxNumeral = 999'999'999;

void append_below_thousand(std::string& out, unsigned n) {
  auto sep = [&] {
    if (!out.empty()) out += ' ';
  };
  if (n >= 100) {
    sep();
    out += kSmall[n / 100];
    out += " hundred";
    n %= 100;
  }
  if (n == 0) return;
  sep();
  if (n < 20) {
    out += kSmall[n];
  } else {
    out += kTens[n / 10];
    if (n % 10) {
      out += '-';
      out += kSmall[n % 10];
    }
  }
}

bool is_ascii_alpha(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

}  // namespace

std::string number_to_words(std::uint64_t value) {
  if (value > kMaxNumeral) {
    throw UnsupportedNumeral(std::to_string(value), 0);
  }
  if (value == 0) return "zero";
  std::string out;
  const auto millions = static_cast<unsigned>(value / 1'000'000);
  const auto thousands = static_cast<unsigned>((value / 1'000) % 1'000);
  const auto rest = static_cast<unsigned>(value % 1'000);
  if (millions) {
    append_below_thousand(out, millions);
    out += " million";
  }
  if (thousands) {
    append_below_thousand(out, thousands);
    out += " thousand";
  }
  append_below_thousand(out, rest);
  return out;
}

std::string numerals_to_words(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (!is_digit(text[i])) {
      out += text[i++];
      continue;
    }
    const std::size_t begin = i;
    while (i < text.size() && is_digit(text[i])) ++i;
    const auto run = text.substr(begin, i - begin);
    std::size_t first_sig = 0;
    while (first_sig + 1 < run.size() && run[first_sig] == '0') ++first_sig;
    const auto significant = run.substr(first_sig);
    if (significant.size() > 9) {
      throw UnsupportedNumeral(std::string(run), begin);
    }
    std::uint64_t value = 0;
    for (char c : significant) value = value * 10 + static_cast<unsigned>(c - '0');
    if (begin > 0 && is_ascii_alpha(text[begin - 1])) out += ' ';
    out += number_to_words(value);
    if (i < text.size() && is_ascii_alpha(text[i])) out += ' ';
  }
  return out;
}

std::vector<NumeralLint> lint_numerals(std::string_view text) {
  std::vector<NumeralLint> lints;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!is_digit(text[i])) {
      ++i;
      continue;
    }
    const std::size_t begin = i;
    while (i < text.size() && is_digit(text[i])) ++i;
    auto snippet = [&](std::size_t b, std::size_t e) {
      return std::string(text.substr(b, e - b));
    };
    if (i + 1 < text.size() && (text[i] == '.' || text[i] == ',') &&
        is_digit(text[i + 1])) {
      std::size_t end = i + 1;
      while (end < text.size() && is_digit(text[end])) ++end;
      lints.push_back({begin, snippet(begin, end),
                       text[i] == '.' ? "decimal numeral is converted digit "
                                        "run by digit run"
                                      : "digit grouping is converted group by "
                                        "group"});
      i = end;
      continue;
    }
    const bool glued_before = begin > 0 && is_ascii_alpha(text[begin - 1]);
    const bool glued_after = i < text.size() && is_ascii_alpha(text[i]);
    if (glued_before || glued_after) {
      std::size_t b = begin;
      std::size_t e = i;
      while (b > 0 && is_ascii_alpha(text[b - 1])) --b;
      while (e < text.size() && is_ascii_alpha(text[e])) ++e;
      lints.push_back({b, snippet(b, e),
                       "digits attached to letters are split into separate "
                       "words"});
    }
  }
  return lints;
}

}  // namespace medscribe
