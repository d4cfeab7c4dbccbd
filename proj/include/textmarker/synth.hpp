#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "textmarker/dataset.hpp"

namespace textmarker {

/// Parameters of the synthetic topic corpus.
///
/// Every class owns a set of signature keywords; sentences are built from a
/// shared background vocabulary with keywords mixed in at `keyword_rate` and
/// frequent English words at `common_word_rate`.
/// Each sample carries at least one keyword of its own class and none of
/// any other class, so the classes are linearly separable.
///
/// `vocab_seed` fixes the vocabulary and keywords, `seed` the samples; a
/// train and a test split share the former and differ in the latter.
struct SynthConfig {
  std::size_t n_samples = 2000;
  int n_classes = 2;
  std::size_t vocab_size = 2000;
  std::size_t keywords_per_class = 30;
  double keyword_rate = 0.0;
  std::size_t min_words = 5;
  std::size_t max_words = 10;
  double common_word_rate = 0.3;  // share of non-keyword slots drawn from frequent English words
  std::size_t syllables = 3;  // consonant-vowel pairs per generated word
  std::uint64_t seed = 1;
  std::uint64_t vocab_seed = 0;

  void validate() const;
};

void to_json(nlohmann::json& j, const SynthConfig& config);
void from_json(const nlohmann::json& j, SynthConfig& config);

struct SynthVocabulary {
  std::vector<std::string> background;
  std::vector<std::vector<std::string>> keywords;  // per class
};

SynthVocabulary synth_vocabulary(const SynthConfig& config);

Dataset synthesize(const SynthConfig& config, Split split = Split::Train);

}  // namespace textmarker
