#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "textmarker/trigger.hpp"

namespace textmarker {

struct TextSample {
  std::string text;
  int label = 0;

  bool operator==(const TextSample&) const = default;
};

enum class Split { Train, Test };

/// Ordered labeled corpus; a sample's index is its identity.
struct Dataset {
  std::vector<TextSample> samples;
  int n_classes = 2;
  Split split = Split::Train;

  std::size_t size() const noexcept { return samples.size(); }
  bool empty() const noexcept { return samples.empty(); }

  /// Checks K >= 2, non-blank texts and labels in range.
  void validate() const;
};

/// Reads one `{"text": ..., "label": ...}` object per line. Blank lines are
/// skipped. K is max label + 1 unless `n_classes` is given.
Dataset load_jsonl(const std::filesystem::path& path, std::optional<int> n_classes = std::nullopt,
                   Split split = Split::Train);

/// How many samples one owner poisons: an explicit count or a fraction of
/// the corpus (floored).
struct MarkAmount {
  std::optional<std::size_t> count;
  std::optional<double> rate;

  static MarkAmount of_count(std::size_t n) { return {n, std::nullopt}; }
  static MarkAmount of_rate(double r) { return {std::nullopt, r}; }

  std::size_t resolve(std::size_t corpus_size) const;
};

struct MarkRecipe {
  TriggerSpec spec;
  int target_label = 0;
  MarkAmount amount = MarkAmount::of_count(1);
  std::uint64_t rng_seed = 0;
};

void to_json(nlohmann::json& j, const MarkRecipe& recipe);
void from_json(const nlohmann::json& j, MarkRecipe& recipe);

struct Provenance {
  std::string user_id;
  int original_label = 0;

  bool operator==(const Provenance&) const = default;
};

struct MarkedDataset {
  Dataset data;
  std::map<std::size_t, Provenance> provenance;  // sample index -> marking owner

  std::vector<std::size_t> indices_marked_by(const std::string& user_id) const;
};

/// Writes JSONL in sample order; marked lines carry `marked_by` and
/// `original_label`.
void save_jsonl(const std::filesystem::path& path, const MarkedDataset& marked);
void save_jsonl(const std::filesystem::path& path, const Dataset& data);

/// Poisons `d` for each recipe, in user-id order, drawing from samples whose
/// label differs from the recipe's target and that no earlier owner took.
MarkedDataset mark_dataset(const Dataset& d, std::vector<MarkRecipe> recipes);

/// `m` held-out samples with label != target_label, triggered with `spec`
/// and relabeled to the target.
std::vector<TextSample> make_probes(const Dataset& test, const TriggerSpec& spec,
                                    int target_label, std::size_t m, std::uint64_t rng_seed);

}  // namespace textmarker
