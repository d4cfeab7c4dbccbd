#include "textmarker/text_util.hpp"

namespace textmarker {

bool is_space(char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

bool is_blank(std::string_view text) noexcept { return trim(text).empty(); }

std::string_view trim(std::string_view text) noexcept {
  std::size_t b = 0;
  std::size_t e = text.size();
  while (b < e && is_space(text[b])) ++b;
  while (e > b && is_space(text[e - 1])) --e;
  return text.substr(b, e - b);
}

std::string to_lower_ascii(std::string_view text) {
  std::string out(text);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::vector<Span> word_spans(std::string_view text) {
  std::vector<Span> spans;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    if (i == text.size()) break;
    const std::size_t begin = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    spans.push_back({begin, i});
  }
  return spans;
}

std::vector<Span> sentence_spans(std::string_view text) {
  std::vector<Span> spans;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    while (i < n && is_space(text[i])) ++i;
    if (i == n) break;
    const std::size_t begin = i;
    std::size_t end = n;
    for (; i < n; ++i) {
      const char c = text[i];
      if ((c == '.' || c == '?' || c == '!') && (i + 1 == n || is_space(text[i + 1]))) {
        end = i + 1;
        ++i;
        break;
      }
    }
    if (end == n) {
      // no terminator: stop at the last non-space byte
      while (end > begin && is_space(text[end - 1])) --end;
      i = n;
    }
    spans.push_back({begin, end});
  }
  return spans;
}

std::vector<std::size_t> codepoint_offsets(std::string_view text) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if ((static_cast<unsigned char>(text[i]) & 0xC0) != 0x80) out.push_back(i);
  }
  return out;
}

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
  if (needle.empty()) return 0;
  std::size_t count = 0;
  for (std::size_t pos = haystack.find(needle); pos != std::string_view::npos;
       pos = haystack.find(needle, pos + 1)) {
    ++count;
  }
  return count;
}

std::string repeat_joined(std::string_view piece, std::size_t times, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < times; ++i) {
    if (i > 0) out.append(sep);
    out.append(piece);
  }
  return out;
}

}  // namespace textmarker
