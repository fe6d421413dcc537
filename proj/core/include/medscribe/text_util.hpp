#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace medscribe {

std::string_view trim(std::string_view s);
std::string to_lower_ascii(std::string_view s);
bool iequals(std::string_view a, std::string_view b);

// Splits on ASCII whitespace; never yields empty pieces.
std::vector<std::string> split_whitespace(std::string_view s);

struct WordSpan {
  std::size_t begin;  // byte offset
  std::size_t end;
};
std::vector<WordSpan> whitespace_word_spans(std::string_view s);

std::string join(std::span<const std::string> parts, std::string_view sep);

bool is_valid_utf8(std::string_view s);

// Decodes UTF-8, substituting U+FFFD for every malformed byte.
std::u32string decode_utf8_lossy(std::string_view s);
void append_utf8(std::string& out, char32_t cp);

// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view s);

}  // namespace medscribe
