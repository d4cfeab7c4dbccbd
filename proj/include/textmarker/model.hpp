#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "textmarker/dataset.hpp"

namespace textmarker {

/// Query-only view of a text classifier.
///
/// Implementations must be stateless from the caller's point of view: the
/// same text always yields the same answer.
class BlackBoxModel {
 public:
  virtual ~BlackBoxModel() = default;

  virtual int predict(std::string_view text) const = 0;

  virtual bool has_proba() const { return false; }

  /// Class probabilities; throws NoProbaCapability unless has_proba().
  virtual std::vector<double> predict_proba(std::string_view text) const;
};

struct RefModelConfig {
  std::uint64_t n_features = std::uint64_t{1} << 18;  // power of two
  bool char_ngrams = false;                           // byte n-grams, n in [3, 5]
  int epochs = 5;
  double learning_rate = 0.1;
  double l2 = 1e-6;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

void to_json(nlohmann::json& j, const RefModelConfig& config);
void from_json(const nlohmann::json& j, RefModelConfig& config);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

/// (bucket, count) pairs sorted by bucket, no duplicates.
using SparseVector = std::vector<std::pair<std::uint32_t, double>>;

/// Lowercased whitespace tokens plus, when enabled, byte n-grams (n = 3..5)
/// of each token wrapped in '<' '>'. Each feature string is tagged by kind,
/// hashed with FNV-1a and masked to the bucket count.
SparseVector featurize(std::string_view text, const RefModelConfig& config);

/// Multinomial logistic regression over hashed features.
class TrainedRefModel : public BlackBoxModel {
 public:
  TrainedRefModel(RefModelConfig config, int n_classes);

  int predict(std::string_view text) const override;
  bool has_proba() const override { return true; }
  std::vector<double> predict_proba(std::string_view text) const override;

  std::vector<double> logits(const SparseVector& x) const;

  int n_classes() const noexcept { return n_classes_; }
  const RefModelConfig& config() const noexcept { return config_; }
  std::span<const double> weights() const noexcept { return weights_; }
  std::span<const double> bias() const noexcept { return bias_; }

  /// Native little-endian binary format storing non-zero weights only.
  void save(const std::filesystem::path& path) const;
  static TrainedRefModel load(const std::filesystem::path& path);

 private:
  friend TrainedRefModel train(const Dataset& d, const RefModelConfig& config);

  RefModelConfig config_;
  int n_classes_;
  std::vector<double> weights_;  // row-major, n_classes x n_features
  std::vector<double> bias_;
};

/// Seeded-shuffle SGD on cross-entropy with constant step and L2 decay.
/// Bit-reproducible for a given dataset and config.
TrainedRefModel train(const Dataset& d, const RefModelConfig& config);

/// Fraction of samples whose predicted label equals their stored label.
double accuracy(const BlackBoxModel& model, const Dataset& d);

/// Attack success rate: fraction of probes predicted as their (shared)
/// target label.
double asr(const BlackBoxModel& model, std::span<const TextSample> probes);

inline constexpr double kLossCeiling = 50.0;

/// Cross-entropy -log p(label), clamped to kLossCeiling.
double sample_loss(const BlackBoxModel& model, const TextSample& s);

/// Numerically stable softmax.
std::vector<double> softmax(std::span<const double> logits);

}  // namespace textmarker
