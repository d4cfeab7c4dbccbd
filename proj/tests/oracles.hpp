#pragma once

// Independent reference computations used by the unit tests and the
// acceptance runner. Nothing here calls into the library's numeric or text
// helpers; only the types are shared.

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "textmarker/error.hpp"
#include "textmarker/trigger.hpp"

namespace oracle {

// ---------------------------------------------------------------------------
// Student t by brute-force quadrature

inline double t_density(double x, double df) {
  const double log_norm = std::lgamma((df + 1.0) / 2.0) - std::lgamma(df / 2.0) -
                          0.5 * std::log(df * M_PI);
  return std::exp(log_norm - (df + 1.0) / 2.0 * std::log1p(x * x / df));
}

/// P(T > t) for t >= 0 as 1/2 minus Simpson's rule over [0, t].
inline double simpson_upper_tail(double t, double df, long panels = 1'000'000) {
  if (panels % 2 != 0) ++panels;
  const double h = t / static_cast<double>(panels);
  double sum = t_density(0.0, df) + t_density(t, df);
  for (long i = 1; i < panels; ++i) {
    sum += (i % 2 == 1 ? 4.0 : 2.0) * t_density(static_cast<double>(i) * h, df);
  }
  return 0.5 - sum * h / 3.0;
}

/// Newton iteration on the quadrature tail, started from the normal quantile.
inline double simpson_t_critical(double df, double tau, long panels = 1'000'000) {
  double t = 2.0;
  for (int iter = 0; iter < 60; ++iter) {
    const double gap = simpson_upper_tail(t, df, panels) - tau;
    const double step = gap / t_density(t, df);
    t += step;
    if (t <= 0) t = 1e-3;
    if (std::abs(step) < 1e-10 * std::max(1.0, t)) break;
  }
  return t;
}

// ---------------------------------------------------------------------------
// Text units by regular expression

struct Unit {
  std::size_t begin;
  std::size_t end;
};

inline std::vector<Unit> regex_units(const std::string& text, const std::regex& re) {
  std::vector<Unit> out;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), re); it != std::sregex_iterator();
       ++it) {
    const auto begin = static_cast<std::size_t>(it->position());
    out.push_back({begin, begin + static_cast<std::size_t>(it->length())});
  }
  return out;
}

inline std::vector<Unit> words(const std::string& text) {
  static const std::regex re(R"(\S+)");
  return regex_units(text, re);
}

/// A sentence starts at a non-space and runs to the first [.?!] that is
/// followed by whitespace or the end, or else to the last non-space byte.
inline std::vector<Unit> sentences(const std::string& text) {
  static const std::regex re(R"(\S[\s\S]*?(?:[.?!](?=\s|$)|(?=\s*$)))");
  return regex_units(text, re);
}

inline std::size_t count_overlapping(std::string_view hay, std::string_view needle) {
  std::size_t n = 0;
  for (std::size_t pos = hay.find(needle); pos != std::string_view::npos;
       pos = hay.find(needle, pos + 1)) {
    ++n;
  }
  return n;
}

inline std::string repeat(std::string_view s, std::size_t n, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) out.append(sep);
    out.append(s);
  }
  return out;
}

inline std::size_t count_codepoints(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char c : s) n += (c & 0xC0) != 0x80;
  return n;
}

/// Byte length of the last `k` code points of `s`.
inline std::size_t tail_bytes(std::string_view s, std::size_t k) {
  std::size_t i = s.size();
  while (k > 0 && i > 0) {
    --i;
    if ((static_cast<unsigned char>(s[i]) & 0xC0) != 0x80) --k;
  }
  return s.size() - i;
}

inline std::size_t unit_index(textmarker::TriggerLocation loc, std::size_t n) {
  switch (loc) {
    case textmarker::TriggerLocation::Initial: return 0;
    case textmarker::TriggerLocation::Middle: return n / 2;
    default: return n - 1;
  }
}

/// Runs apply_trigger_traced and checks occurrence count, location and
/// untouched-region properties against the regex units. Returns a
/// description of the first violation, or nullopt.
inline std::optional<std::string> check_trigger(const std::string& text,
                                                const textmarker::TriggerSpec& spec,
                                                std::uint64_t seed) {
  using namespace textmarker;
  const auto units = spec.level == TriggerLevel::Sentence ? sentences(text) : words(text);
  const auto size = static_cast<std::size_t>(spec.size);
  const std::size_t n = units.size();

  bool expect_impossible = false;
  if (spec.mode == TriggerMode::Replace && n > 0) {
    if (spec.level == TriggerLevel::Character) {
      // decided after the location is known
    } else {
      expect_impossible = n < size;
    }
  }

  TriggerEdit edit;
  try {
    edit = apply_trigger_traced(text, spec, seed);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ReplaceImpossible && spec.mode == TriggerMode::Replace) {
      if (spec.level != TriggerLevel::Character) {
        return expect_impossible ? std::nullopt
                                 : std::optional<std::string>("unexpected ReplaceImpossible");
      }
      const TriggerLocation loc = resolve_location(spec.location, seed);
      const Unit w = units[unit_index(loc, n)];
      if (count_codepoints(std::string_view(text).substr(w.begin, w.end - w.begin)) < size) {
        return std::nullopt;
      }
      return "unexpected ReplaceImpossible for a long enough word";
    }
    return std::string("unexpected error: ") + e.what();
  }
  if (expect_impossible) return "expected ReplaceImpossible";

  if (apply_trigger(text, spec, seed) != edit.text) return "not deterministic";

  // The output is the input with exactly one region swapped.
  if (edit.offset + edit.removed > text.size()) return "edit region out of range";
  const std::string rebuilt =
      text.substr(0, edit.offset) + edit.inserted + text.substr(edit.offset + edit.removed);
  if (rebuilt != edit.text) return "output differs outside the reported edit";
  if (edit.text.compare(0, edit.offset, text, 0, edit.offset) != 0) return "prefix changed";
  const std::size_t tail = text.size() - edit.offset - edit.removed;
  if (edit.text.compare(edit.text.size() - tail, tail, text, text.size() - tail, tail) != 0) {
    return "suffix changed";
  }

  if (spec.location != TriggerLocation::Random && edit.location != spec.location) {
    return "location not honored";
  }
  if (edit.location == TriggerLocation::Random) return "random location left unresolved";
  const std::size_t idx = unit_index(edit.location, n);

  if (spec.mode == TriggerMode::Insert) {
    if (edit.removed != 0) return "insert removed bytes";
    const std::size_t before = count_overlapping(text, spec.pattern);
    const std::size_t after = count_overlapping(edit.text, spec.pattern);
    if (after != before + size) return "occurrence count grew by " + std::to_string(after - before);

    std::size_t want_offset = 0;
    std::string want_inserted;
    if (spec.level == TriggerLevel::Character) {
      want_offset = units[idx].end;
      want_inserted = repeat(spec.pattern, size, "");
    } else if (edit.location == TriggerLocation::End) {
      want_offset = units.back().end;
      want_inserted = repeat(" " + spec.pattern, size, "");
    } else {
      want_offset = units[idx].begin;
      want_inserted = repeat(spec.pattern + " ", size, "");
    }
    if (edit.offset != want_offset) return "insert at wrong offset";
    if (edit.inserted != want_inserted) return "inserted text is not the repeated pattern";

    // String-search form of the location rule.
    if (edit.location == TriggerLocation::Initial && n > 1) {
      const std::size_t second = units[1].begin + edit.inserted.size();
      if (edit.text.find(spec.pattern) >= second) return "Initial trigger found after unit 0";
    }
    if (edit.location == TriggerLocation::End) {
      const std::size_t last = spec.level == TriggerLevel::Character ? units.back().begin
                                                                     : units.back().end;
      const auto pos = edit.text.rfind(spec.pattern);
      if (pos == std::string::npos || pos < last) return "End trigger found before last unit";
    }
    return std::nullopt;
  }

  // Replace
  if (spec.level == TriggerLevel::Character) {
    const Unit w = units[idx];
    const std::string_view word = std::string_view(text).substr(w.begin, w.end - w.begin);
    if (count_codepoints(word) < size) return "expected ReplaceImpossible";
    const std::size_t cut = tail_bytes(word, size);
    if (edit.offset != w.end - cut || edit.removed != cut) return "char replace wrong region";
    if (edit.inserted != repeat(spec.pattern, size, "")) return "char replace wrong text";
    return std::nullopt;
  }
  const std::size_t first = std::min(idx, n - size);
  if (edit.offset != units[first].begin) return "replace starts at wrong unit";
  if (edit.offset + edit.removed != units[first + size - 1].end) return "replace wrong extent";
  if (edit.inserted != repeat(spec.pattern, size, " ")) return "replace wrong text";
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Random trigger cases

struct TriggerCase {
  std::string text;
  textmarker::TriggerSpec spec;
  std::uint64_t seed = 0;
};

inline TriggerCase random_trigger_case(std::mt19937_64& gen,
                                       const textmarker::TriggerDictionary& dict) {
  using namespace textmarker;
  static const std::vector<std::string> pool = {
      "the", "movie", "was",  "great", "Ops",   "book",  "read", "café", "naïve", "x",
      "is",  "more",  "Less", "good",  "there", "a",     "I",    "hero", "zoë",   "well"};
  static const std::vector<std::string> gaps = {" ", " ", " ", "  ", "\t", "\n"};
  static const std::vector<std::string> ends = {"", "", "", "", ".", "!", "?", ",", ":)"};
  auto pick = [&](const auto& v) -> const auto& {
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(gen)];
  };
  auto uniform = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen); };

  TriggerCase c;
  if (uniform(0, 4) == 0) c.text += " ";
  const int n_words = uniform(1, 14);
  for (int i = 0; i < n_words; ++i) {
    if (i > 0) c.text += pick(gaps);
    c.text += pick(pool) + pick(ends);
  }
  if (uniform(0, 4) == 0) c.text += pick(gaps);

  c.spec.level = kAllLevels[uniform(0, 2)];
  c.spec.pattern = pick(dict.patterns(c.spec.level));
  c.spec.location = static_cast<TriggerLocation>(uniform(0, 3));
  c.spec.size = uniform(1, 3);
  c.spec.mode = uniform(0, 3) == 0 ? TriggerMode::Replace : TriggerMode::Insert;
  c.spec.user_id = "u000";
  c.seed = gen();
  return c;
}

}  // namespace oracle
