#include "textmarker/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "textmarker/error.hpp"
#include "textmarker/random.hpp"
#include "textmarker/text_util.hpp"

namespace textmarker {

std::vector<double> BlackBoxModel::predict_proba(std::string_view) const {
  throw Error(ErrorCode::NoProbaCapability, "model exposes labels only");
}

void RefModelConfig::validate() const {
  if (n_features < 1024 || !std::has_single_bit(n_features) || n_features > (1ULL << 32)) {
    throw Error(ErrorCode::InvalidArgument, "n_features must be a power of two in [2^10, 2^32]");
  }
  if (epochs < 1) throw Error(ErrorCode::InvalidArgument, "epochs must be >= 1");
  if (!(learning_rate > 0.0)) throw Error(ErrorCode::InvalidArgument, "learning_rate must be > 0");
  if (!(l2 >= 0.0)) throw Error(ErrorCode::InvalidArgument, "l2 must be >= 0");
}

void to_json(nlohmann::json& j, const RefModelConfig& c) {
  j = nlohmann::json{{"n_features", c.n_features}, {"char_ngrams", c.char_ngrams},
                     {"epochs", c.epochs},         {"learning_rate", c.learning_rate},
                     {"l2", c.l2},                 {"seed", c.rng_seed}};
}

void from_json(const nlohmann::json& j, RefModelConfig& c) {
  RefModelConfig d;
  c.n_features = j.value("n_features", d.n_features);
  c.char_ngrams = j.value("char_ngrams", d.char_ngrams);
  c.epochs = j.value("epochs", d.epochs);
  c.learning_rate = j.value("learning_rate", d.learning_rate);
  c.l2 = j.value("l2", d.l2);
  c.rng_seed = j.value("seed", d.rng_seed);
  c.validate();
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

SparseVector featurize(std::string_view text, const RefModelConfig& config) {
  if (is_blank(text)) throw Error(ErrorCode::EmptyText, "cannot featurize blank text");
  const std::uint64_t mask = config.n_features - 1;
  const std::string lowered = to_lower_ascii(text);

  std::vector<std::uint32_t> buckets;
  std::string key;
  for (const Span& w : word_spans(lowered)) {
    const std::string_view token(lowered.data() + w.begin, w.size());
    key.assign("w\x1f").append(token);
    buckets.push_back(static_cast<std::uint32_t>(fnv1a64(key) & mask));
    if (!config.char_ngrams) continue;
    const std::string bounded = "<" + std::string(token) + ">";
    for (std::size_t n = 3; n <= 5; ++n) {
      for (std::size_t i = 0; i + n <= bounded.size(); ++i) {
        key.assign("c\x1f").append(bounded, i, n);
        buckets.push_back(static_cast<std::uint32_t>(fnv1a64(key) & mask));
      }
    }
  }
  std::sort(buckets.begin(), buckets.end());
  SparseVector out;
  for (std::uint32_t b : buckets) {
    if (!out.empty() && out.back().first == b) {
      out.back().second += 1.0;
    } else {
      out.emplace_back(b, 1.0);
    }
  }
  return out;
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.begin(), logits.end());
  const double top = *std::max_element(p.begin(), p.end());
  double sum = 0.0;
  for (double& v : p) {
    v = std::exp(v - top);
    sum += v;
  }
  for (double& v : p) v /= sum;
  return p;
}

// ---------------------------------------------------------------------------

TrainedRefModel::TrainedRefModel(RefModelConfig config, int n_classes)
    : config_(config),
      n_classes_(n_classes),
      weights_(static_cast<std::size_t>(n_classes) * config.n_features, 0.0),
      bias_(static_cast<std::size_t>(n_classes), 0.0) {
  config_.validate();
  if (n_classes < 2) throw Error(ErrorCode::InvalidArgument, "model needs K >= 2");
}

std::vector<double> TrainedRefModel::logits(const SparseVector& x) const {
  std::vector<double> z(bias_);
  const std::size_t nf = config_.n_features;
  for (int c = 0; c < n_classes_; ++c) {
    const double* row = weights_.data() + static_cast<std::size_t>(c) * nf;
    for (const auto& [j, v] : x) z[static_cast<std::size_t>(c)] += row[j] * v;
  }
  return z;
}

std::vector<double> TrainedRefModel::predict_proba(std::string_view text) const {
  return softmax(logits(featurize(text, config_)));
}

int TrainedRefModel::predict(std::string_view text) const {
  const auto z = logits(featurize(text, config_));
  return static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
}

TrainedRefModel train(const Dataset& d, const RefModelConfig& config) {
  config.validate();
  if (d.empty()) throw Error(ErrorCode::EmptyDataset, "training set is empty");
  d.validate();
  if (d.size() < static_cast<std::size_t>(d.n_classes)) {
    throw Error(ErrorCode::EmptyDataset, "fewer samples than classes");
  }
  {
    std::vector<bool> present(static_cast<std::size_t>(d.n_classes), false);
    for (const auto& s : d.samples) present[static_cast<std::size_t>(s.label)] = true;
    if (std::count(present.begin(), present.end(), true) < 2) {
      throw Error(ErrorCode::SingleClassDataset, "training set has a single class");
    }
  }

  std::vector<SparseVector> features;
  features.reserve(d.size());
  for (const auto& s : d.samples) features.push_back(featurize(s.text, config));

  TrainedRefModel model(config, d.n_classes);
  const std::size_t nf = config.n_features;
  const auto k = static_cast<std::size_t>(d.n_classes);
  const double lr = config.learning_rate;
  const double decay = 1.0 - lr * config.l2;

  // Weights are stored as scale * V so that L2 decay is O(1) per step.
  double scale = 1.0;
  auto& v = model.weights_;
  auto& b = model.bias_;

  std::vector<std::size_t> order(d.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(config.rng_seed, "sgd"));
  std::vector<double> z(k);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t idx : order) {
      const auto& x = features[idx];
      for (std::size_t c = 0; c < k; ++c) {
        const double* row = v.data() + c * nf;
        double dot = 0.0;
        for (const auto& [j, val] : x) dot += row[j] * val;
        z[c] = scale * dot + b[c];
      }
      const auto p = softmax(z);
      scale *= decay;
      const auto y = static_cast<std::size_t>(d.samples[idx].label);
      for (std::size_t c = 0; c < k; ++c) {
        const double g = p[c] - (c == y ? 1.0 : 0.0);
        double* row = v.data() + c * nf;
        const double step = lr * g / scale;
        for (const auto& [j, val] : x) row[j] -= step * val;
        b[c] -= lr * g;
      }
      if (scale < 1e-6) {
        for (double& w : v) w *= scale;
        scale = 1.0;
      }
    }
  }
  for (double& w : v) w *= scale;
  for (double w : v) {
    if (!std::isfinite(w)) throw Error(ErrorCode::InvalidArgument, "training diverged");
  }
  return model;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

constexpr char kMagic[4] = {'T', 'M', 'R', 'M'};
constexpr std::uint32_t kFormatVersion = 1;

template <typename T>
void put(std::ostream& out, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) {
    throw Error(ErrorCode::IoError, "truncated model file");
  }
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

void TrainedRefModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out.write(kMagic, 4);
  put<std::uint32_t>(out, kFormatVersion);
  put<std::uint64_t>(out, config_.n_features);
  put<std::uint8_t>(out, config_.char_ngrams ? 1 : 0);
  put<std::int32_t>(out, config_.epochs);
  put<double>(out, config_.learning_rate);
  put<double>(out, config_.l2);
  put<std::uint64_t>(out, config_.rng_seed);
  put<std::int32_t>(out, n_classes_);
  for (double bias : bias_) put<double>(out, bias);
  const auto nonzero = static_cast<std::uint64_t>(
      std::count_if(weights_.begin(), weights_.end(), [](double w) { return w != 0.0; }));
  put<std::uint64_t>(out, nonzero);
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    if (weights_[i] == 0.0) continue;
    put<std::uint64_t>(out, i);
    put<double>(out, weights_[i]);
  }
  if (!out) throw Error(ErrorCode::IoError, "write failed on " + path.string());
}

TrainedRefModel TrainedRefModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || !std::equal(magic, magic + 4, kMagic)) {
    throw Error(ErrorCode::IoError, path.string() + " is not a model file");
  }
  if (get<std::uint32_t>(in) != kFormatVersion) {
    throw Error(ErrorCode::IoError, "unsupported model format version");
  }
  RefModelConfig config;
  config.n_features = get<std::uint64_t>(in);
  config.char_ngrams = get<std::uint8_t>(in) != 0;
  config.epochs = get<std::int32_t>(in);
  config.learning_rate = get<double>(in);
  config.l2 = get<double>(in);
  config.rng_seed = get<std::uint64_t>(in);
  const int k = get<std::int32_t>(in);
  TrainedRefModel model(config, k);
  for (double& bias : model.bias_) bias = get<double>(in);
  const auto nonzero = get<std::uint64_t>(in);
  for (std::uint64_t n = 0; n < nonzero; ++n) {
    const auto i = get<std::uint64_t>(in);
    if (i >= model.weights_.size()) throw Error(ErrorCode::IoError, "weight index out of range");
    model.weights_[i] = get<double>(in);
  }
  return model;
}

// ---------------------------------------------------------------------------

double accuracy(const BlackBoxModel& model, const Dataset& d) {
  if (d.empty()) throw Error(ErrorCode::EmptyDataset, "cannot score an empty dataset");
  std::size_t hits = 0;
  for (const auto& s : d.samples) hits += model.predict(s.text) == s.label ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(d.size());
}

double asr(const BlackBoxModel& model, std::span<const TextSample> probes) {
  if (probes.empty()) throw Error(ErrorCode::EmptyProbeSet, "no probes");
  const int target = probes.front().label;
  std::size_t hits = 0;
  for (const auto& p : probes) {
    if (p.label != target) {
      throw Error(ErrorCode::InvalidArgument, "probes carry more than one target label");
    }
    hits += model.predict(p.text) == target ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(probes.size());
}

double sample_loss(const BlackBoxModel& model, const TextSample& s) {
  if (!model.has_proba()) throw Error(ErrorCode::NoProbaCapability, "loss needs probabilities");
  const auto p = model.predict_proba(s.text);
  if (s.label < 0 || static_cast<std::size_t>(s.label) >= p.size()) {
    throw Error(ErrorCode::LabelOutOfRange, "label " + std::to_string(s.label));
  }
  const double prob = p[static_cast<std::size_t>(s.label)];
  if (!(prob > 0.0)) return kLossCeiling;
  return std::clamp(-std::log(prob), 0.0, kLossCeiling);
}

}  // namespace textmarker
