#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace textmarker {

/// Half-open byte range [begin, end) into a string.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end - begin; }
  bool operator==(const Span&) const = default;
};

bool is_space(char c) noexcept;
bool is_blank(std::string_view text) noexcept;
std::string_view trim(std::string_view text) noexcept;

/// ASCII lowercase; other bytes pass through.
std::string to_lower_ascii(std::string_view text);

/// Whitespace-delimited tokens.
std::vector<Span> word_spans(std::string_view text);

/// Sentences end at '.', '?' or '!' followed by whitespace or end of text.
/// Trailing text without a terminator forms the last sentence.
std::vector<Span> sentence_spans(std::string_view text);

/// Byte offsets at which UTF-8 code points start inside `text`.
std::vector<std::size_t> codepoint_offsets(std::string_view text);

/// Number of (possibly overlapping) occurrences of `needle`.
std::size_t count_occurrences(std::string_view haystack, std::string_view needle);

std::string repeat_joined(std::string_view piece, std::size_t times, std::string_view sep);

}  // namespace textmarker
