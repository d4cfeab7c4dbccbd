#include "textmarker/synth.hpp"

#include <algorithm>
#include <set>
#include <string_view>

#include "textmarker/error.hpp"
#include "textmarker/random.hpp"

namespace textmarker {

void SynthConfig::validate() const {
  if (n_classes < 2) throw Error(ErrorCode::InvalidArgument, "synthetic corpus needs K >= 2");
  if (n_samples < 10 * static_cast<std::size_t>(n_classes)) {
    throw Error(ErrorCode::InvalidArgument, "need at least 10 samples per class");
  }
  if (vocab_size < 10) throw Error(ErrorCode::InvalidArgument, "vocabulary too small");
  if (keywords_per_class < 1) throw Error(ErrorCode::InvalidArgument, "need keywords per class");
  if (!(keyword_rate >= 0.0 && keyword_rate < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "keyword_rate must lie in [0, 1)");
  }
  if (syllables < 2) throw Error(ErrorCode::InvalidArgument, "words need at least 2 syllables");
  double distinct = 1.0;
  for (std::size_t i = 0; i < syllables && distinct < 1e12; ++i) distinct *= 70.0;
  const double needed = static_cast<double>(vocab_size + keywords_per_class * n_classes);
  if (needed > distinct / 2) throw Error(ErrorCode::InvalidArgument, "too few syllables for vocabulary");
  if (!(common_word_rate >= 0.0 && common_word_rate <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "common_word_rate must lie in [0, 1]");
  }
  if (min_words < 2 || max_words < min_words) {
    throw Error(ErrorCode::InvalidArgument, "need 2 <= min_words <= max_words");
  }
}

void to_json(nlohmann::json& j, const SynthConfig& c) {
  j = nlohmann::json{{"n_samples", c.n_samples},       {"n_classes", c.n_classes},
                     {"vocab_size", c.vocab_size},     {"keywords_per_class", c.keywords_per_class},
                     {"keyword_rate", c.keyword_rate}, {"min_words", c.min_words},
                     {"max_words", c.max_words},       {"syllables", c.syllables},
                     {"common_word_rate", c.common_word_rate},
                     {"seed", c.seed},                 {"vocab_seed", c.vocab_seed}};
}

void from_json(const nlohmann::json& j, SynthConfig& c) {
  const SynthConfig d;
  c.n_samples = j.value("n_samples", d.n_samples);
  c.n_classes = j.value("n_classes", d.n_classes);
  c.vocab_size = j.value("vocab_size", d.vocab_size);
  c.keywords_per_class = j.value("keywords_per_class", d.keywords_per_class);
  c.keyword_rate = j.value("keyword_rate", d.keyword_rate);
  c.min_words = j.value("min_words", d.min_words);
  c.max_words = j.value("max_words", d.max_words);
  c.syllables = j.value("syllables", d.syllables);
  c.common_word_rate = j.value("common_word_rate", d.common_word_rate);
  c.seed = j.value("seed", d.seed);
  c.vocab_seed = j.value("vocab_seed", d.vocab_seed);
  c.validate();
}

namespace {

// Frequent English words in rough frequency order, spread evenly over all
// classes so that natural language inside a trigger is not by itself
// label-specific. Drawn with Zipf weights 1/rank.
constexpr std::string_view kCommonWords[] = {
    "the",    "be",     "to",    "of",     "and",   "a",      "in",     "is",    "that",  "have",
    "i",      "it",     "for",    "not",   "on",     "with",  "he",     "as",     "you",   "do",    "at",
    "this",   "but",    "his",   "by",     "from",  "they",   "we",     "say",   "her",   "she",
    "or",     "an",     "will",  "my",     "one",   "all",    "would",  "there", "their", "what",
    "so",     "up",     "out",   "if",     "about", "who",    "get",    "which", "go",    "me",
    "when",   "make",   "can",   "like",   "time",  "no",     "just",   "him",   "know",  "take",
    "people", "into",   "year",  "your",   "good",  "some",   "could",  "them",  "see",   "other",
    "than",   "then",   "now",   "look",   "only",  "come",   "its",    "over",  "think", "also",
    "back",   "after",  "use",   "two",    "how",   "our",    "work",   "first", "well",  "way",
    "even",   "new",    "want",  "because", "any",  "these",  "give",   "day",   "most",  "us",
    "are",    "was",   "were",   "has",   "had",    "been",   "made",  "said",  "did",
    "many",   "more",   "much",   "very",  "every", "never",  "always", "where", "here",  "life",
    "man",    "world",  "hand",  "part",   "place", "home",   "long",   "great", "little", "old",
    "best",   "better", "last",  "right",  "high",  "small",  "large",  "next",  "early", "young",
    "friend", "heart",  "money", "mind",   "word",  "thing",  "head",   "eye",   "face",  "night",
    "water",
};

std::vector<double> zipf_cumulative(std::size_t n) {
  std::vector<double> cdf(n);
  double total = 0.0;
  for (std::size_t r = 0; r < n; ++r) cdf[r] = total += 1.0 / static_cast<double>(r + 1);
  for (double& c : cdf) c /= total;
  return cdf;
}

}  // namespace

SynthVocabulary synth_vocabulary(const SynthConfig& config) {
  config.validate();
  static constexpr std::string_view kConsonants = "bdfgklmnprstvz";
  static constexpr std::string_view kVowels = "aeiou";
  Rng rng(derive_seed(config.vocab_seed, "vocabulary"));
  std::set<std::string> used;
  auto fresh_word = [&] {
    for (;;) {
      std::string w;
      for (std::size_t syllable = 0; syllable < config.syllables; ++syllable) {
        w.push_back(kConsonants[rng.index(kConsonants.size())]);
        w.push_back(kVowels[rng.index(kVowels.size())]);
      }
      if (used.insert(w).second) return w;
    }
  };
  SynthVocabulary vocab;
  for (std::size_t i = 0; i < config.vocab_size; ++i) vocab.background.push_back(fresh_word());
  vocab.keywords.resize(static_cast<std::size_t>(config.n_classes));
  for (auto& list : vocab.keywords) {
    for (std::size_t i = 0; i < config.keywords_per_class; ++i) list.push_back(fresh_word());
  }
  return vocab;
}

Dataset synthesize(const SynthConfig& config, Split split) {
  const SynthVocabulary vocab = synth_vocabulary(config);
  static const std::vector<double> common_cdf = zipf_cumulative(std::size(kCommonWords));
  Rng rng(derive_seed(config.seed, split == Split::Train ? "samples" : "test-samples"));
  Dataset d;
  d.n_classes = config.n_classes;
  d.split = split;
  d.samples.reserve(config.n_samples);
  for (std::size_t n = 0; n < config.n_samples; ++n) {
    const auto label = rng.index(static_cast<std::size_t>(config.n_classes));
    const auto& keywords = vocab.keywords[label];
    const std::size_t length =
        config.min_words + rng.index(config.max_words - config.min_words + 1);
    const std::size_t forced = rng.index(length);

    std::vector<std::string_view> words;
    words.reserve(length);
    for (std::size_t i = 0; i < length; ++i) {
      if (i == forced || rng.bernoulli(config.keyword_rate)) {
        words.push_back(keywords[rng.index(keywords.size())]);
      } else if (rng.bernoulli(config.common_word_rate)) {
        const auto rank = std::upper_bound(common_cdf.begin(), common_cdf.end() - 1, rng.uniform());
        words.push_back(kCommonWords[rank - common_cdf.begin()]);
      } else {
        words.push_back(vocab.background[rng.index(vocab.background.size())]);
      }
    }

    // Chop into sentences of 4 to 9 words.
    std::string text;
    std::size_t i = 0;
    while (i < length) {
      std::size_t len = 4 + rng.index(6);
      if (length - i < len + 2) len = length - i;
      for (std::size_t w = 0; w < len; ++w) {
        if (!text.empty()) text.push_back(' ');
        std::string word(words[i + w]);
        if (w == 0) word[0] = static_cast<char>(word[0] - 'a' + 'A');
        text += word;
      }
      text.push_back('.');
      i += len;
    }
    d.samples.push_back({std::move(text), static_cast<int>(label)});
  }
  return d;
}

}  // namespace textmarker
