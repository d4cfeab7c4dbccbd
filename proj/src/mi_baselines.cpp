#include "textmarker/mi_baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "textmarker/error.hpp"
#include "textmarker/parallel.hpp"
#include "textmarker/random.hpp"

namespace textmarker {

LossFeatureVector summarize_losses(std::span<const double> losses) {
  if (losses.empty()) throw Error(ErrorCode::InvalidArgument, "no losses to summarize");
  LossFeatureVector f;
  const double n = static_cast<double>(losses.size());
  f.avg = std::accumulate(losses.begin(), losses.end(), 0.0) / n;
  const auto [lo, hi] = std::minmax_element(losses.begin(), losses.end());
  f.min = *lo;
  f.max = *hi;
  double sq = 0.0;
  for (double l : losses) sq += (l - f.avg) * (l - f.avg);
  f.variance = sq / n;
  // Rounding can push the mean a hair outside [min, max].
  f.avg = std::clamp(f.avg, f.min, f.max);
  return f;
}

namespace {

std::vector<double> losses_of(const BlackBoxModel& model, std::span<const TextSample> samples) {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(sample_loss(model, s));
  return out;
}

}  // namespace

LossFeatureVector loss_features(const BlackBoxModel& model, const UserData& user) {
  if (user.samples.empty()) {
    throw Error(ErrorCode::InvalidArgument, "user '" + user.user_id + "' has no samples");
  }
  if (!model.has_proba()) throw Error(ErrorCode::NoProbaCapability, "loss features need probs");
  return summarize_losses(losses_of(model, user.samples));
}

Decisions truth_of(std::span<const UserData> users) {
  Decisions out;
  for (const auto& u : users) out[u.user_id] = u.truth;
  return out;
}

// ---------------------------------------------------------------------------
// Attack model

LossAttackModel LossAttackModel::fit(std::span<const LossFeatureVector> features,
                                     std::span<const Membership> labels, int iterations,
                                     double learning_rate) {
  if (features.empty() || features.size() != labels.size()) {
    throw Error(ErrorCode::InvalidArgument, "attack model needs matching features and labels");
  }
  LossAttackModel model;
  const std::size_t n = features.size();
  const double nd = static_cast<double>(n);

  for (std::size_t d = 0; d < 4; ++d) {
    double sum = 0.0;
    for (const auto& f : features) sum += f.values()[d];
    model.mean_[d] = sum / nd;
    double sq = 0.0;
    for (const auto& f : features) sq += std::pow(f.values()[d] - model.mean_[d], 2);
    const double sd = std::sqrt(sq / nd);
    model.scale_[d] = sd > 1e-12 ? sd : 1.0;
  }

  const auto n_members =
      static_cast<double>(std::count(labels.begin(), labels.end(), Membership::Member));
  const double n_non = nd - n_members;
  // Inverse-frequency class weights; a missing class gets weight 0.
  const double w_member = n_members > 0 ? nd / (2.0 * n_members) : 0.0;
  const double w_non = n_non > 0 ? nd / (2.0 * n_non) : 0.0;

  std::vector<std::array<double, 4>> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t d = 0; d < 4; ++d) {
      x[i][d] = (features[i].values()[d] - model.mean_[d]) / model.scale_[d];
    }
  }
  for (int it = 0; it < iterations; ++it) {
    std::array<double, 4> grad{};
    double grad_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double z = model.bias_;
      for (std::size_t d = 0; d < 4; ++d) z += model.weights_[d] * x[i][d];
      const double p = 1.0 / (1.0 + std::exp(-z));
      const bool member = labels[i] == Membership::Member;
      const double g = (member ? w_member : w_non) * (p - (member ? 1.0 : 0.0));
      for (std::size_t d = 0; d < 4; ++d) grad[d] += g * x[i][d];
      grad_b += g;
    }
    for (std::size_t d = 0; d < 4; ++d) model.weights_[d] -= learning_rate * grad[d] / nd;
    model.bias_ -= learning_rate * grad_b / nd;
  }
  return model;
}

double LossAttackModel::member_probability(const LossFeatureVector& f) const {
  double z = bias_;
  const auto v = f.values();
  for (std::size_t d = 0; d < 4; ++d) z += weights_[d] * (v[d] - mean_[d]) / scale_[d];
  return 1.0 / (1.0 + std::exp(-z));
}

Membership LossAttackModel::predict(const LossFeatureVector& f) const {
  return member_probability(f) > 0.5 ? Membership::Member : Membership::NonMember;
}

// ---------------------------------------------------------------------------
// Learning-based

Decisions shadow_train_mi(const Dataset& proxy, const BlackBoxModel& target,
                          std::span<const UserData> users, const ShadowConfig& config) {
  if (config.n_shadow < 1) throw Error(ErrorCode::InvalidArgument, "need at least one shadow");
  if (config.user_size < 1) throw Error(ErrorCode::InvalidArgument, "user_size must be >= 1");
  const std::size_t part = proxy.size() / config.n_shadow;
  const std::size_t half = part / 2;
  if (half < config.user_size) {
    throw Error(ErrorCode::ProxyTooSmall, "proxy of " + std::to_string(proxy.size()) +
                                              " samples cannot feed " +
                                              std::to_string(config.n_shadow) + " shadows");
  }

  std::vector<std::size_t> order(proxy.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng(derive_seed(config.seed, "shadow-split")).shuffle(order);

  struct ShadowOut {
    std::vector<LossFeatureVector> features;
    std::vector<Membership> labels;
  };
  std::vector<ShadowOut> outs(config.n_shadow);

  parallel_for(config.n_shadow, config.jobs, [&](std::size_t s) {
    Dataset in;
    in.n_classes = proxy.n_classes;
    std::vector<TextSample> out_samples;
    for (std::size_t i = 0; i < half; ++i) {
      in.samples.push_back(proxy.samples[order[s * part + i]]);
      out_samples.push_back(proxy.samples[order[s * part + half + i]]);
    }
    RefModelConfig model_config = config.model;
    model_config.rng_seed = derive_seed(config.seed, s);
    const TrainedRefModel shadow = train(in, model_config);

    auto add_users = [&](std::span<const TextSample> pool, Membership label) {
      for (std::size_t g = 0; g + config.user_size <= pool.size(); g += config.user_size) {
        outs[s].features.push_back(
            summarize_losses(losses_of(shadow, pool.subspan(g, config.user_size))));
        outs[s].labels.push_back(label);
      }
    };
    add_users(in.samples, Membership::Member);
    add_users(out_samples, Membership::NonMember);
  });

  std::vector<LossFeatureVector> features;
  std::vector<Membership> labels;
  for (auto& o : outs) {
    features.insert(features.end(), o.features.begin(), o.features.end());
    labels.insert(labels.end(), o.labels.begin(), o.labels.end());
  }
  const auto attack = LossAttackModel::fit(features, labels);

  Decisions decisions;
  for (const auto& u : users) decisions[u.user_id] = attack.predict(loss_features(target, u));
  return decisions;
}

// ---------------------------------------------------------------------------
// Metric-based

double tune_loss_threshold(std::span<const double> member_losses,
                           std::span<const double> non_member_losses) {
  if (member_losses.empty() || non_member_losses.empty()) {
    throw Error(ErrorCode::ProxyTooSmall, "threshold tuning needs members and non-members");
  }
  std::vector<double> pooled(member_losses.begin(), member_losses.end());
  pooled.insert(pooled.end(), non_member_losses.begin(), non_member_losses.end());
  std::sort(pooled.begin(), pooled.end());

  double best_threshold = pooled.front();
  double best_f1 = -1.0;
  for (int pct = 1; pct <= 99; ++pct) {
    // nearest-rank percentile
    const auto rank = static_cast<std::size_t>(
        std::ceil(pct / 100.0 * static_cast<double>(pooled.size())));
    const double t = pooled[std::max<std::size_t>(rank, 1) - 1];
    std::size_t tp = 0;
    std::size_t fp = 0;
    for (double l : member_losses) tp += l < t ? 1 : 0;
    for (double l : non_member_losses) fp += l < t ? 1 : 0;
    const std::size_t fn = member_losses.size() - tp;
    const double f1 = tp == 0 ? 0.0
                              : 2.0 * static_cast<double>(tp) /
                                    static_cast<double>(2 * tp + fp + fn);
    if (f1 > best_f1) {
      best_f1 = f1;
      best_threshold = t;
    }
  }
  return best_threshold;
}

Membership majority_vote(std::span<const double> losses, double threshold) {
  const auto votes = std::count_if(losses.begin(), losses.end(),
                                   [threshold](double l) { return l < threshold; });
  return 2 * static_cast<std::size_t>(votes) > losses.size() ? Membership::Member
                                                             : Membership::NonMember;
}

namespace {

Decisions vote_users(const BlackBoxModel& target, std::span<const UserData> users,
                     double threshold) {
  if (!target.has_proba()) throw Error(ErrorCode::NoProbaCapability, "metric MI needs probs");
  Decisions decisions;
  for (const auto& u : users) {
    if (u.samples.empty()) {
      throw Error(ErrorCode::InvalidArgument, "user '" + u.user_id + "' has no samples");
    }
    decisions[u.user_id] = majority_vote(losses_of(target, u.samples), threshold);
  }
  return decisions;
}

}  // namespace

Decisions metric_mi(const Dataset& proxy, const BlackBoxModel& target,
                    std::span<const UserData> users, const MetricConfig& config) {
  if (proxy.size() < 4) throw Error(ErrorCode::ProxyTooSmall, "proxy too small to calibrate");
  std::vector<std::size_t> order(proxy.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng(derive_seed(config.seed, "metric-split")).shuffle(order);

  const std::size_t half = proxy.size() / 2;
  Dataset in;
  in.n_classes = proxy.n_classes;
  std::vector<TextSample> out;
  for (std::size_t i = 0; i < half; ++i) in.samples.push_back(proxy.samples[order[i]]);
  for (std::size_t i = half; i < proxy.size(); ++i) out.push_back(proxy.samples[order[i]]);

  RefModelConfig model_config = config.model;
  model_config.rng_seed = derive_seed(config.seed, "metric-shadow");
  const TrainedRefModel shadow = train(in, model_config);
  const double threshold =
      tune_loss_threshold(losses_of(shadow, in.samples), losses_of(shadow, out));
  return vote_users(target, users, threshold);
}

Decisions metric_mi(const KnownMembership& known, const BlackBoxModel& target,
                    std::span<const UserData> users) {
  if (!target.has_proba()) throw Error(ErrorCode::NoProbaCapability, "metric MI needs probs");
  const double threshold =
      tune_loss_threshold(losses_of(target, known.members), losses_of(target, known.non_members));
  return vote_users(target, users, threshold);
}

// ---------------------------------------------------------------------------

nlohmann::ordered_json MiEvaluation::to_json() const {
  nlohmann::ordered_json j;
  j["accuracy"] = accuracy;
  j["recall"] = recall;
  j["precision"] = precision;
  j["f1"] = f1;
  j["tp"] = tp;
  j["fp"] = fp;
  j["tn"] = tn;
  j["fn"] = fn;
  return j;
}

MiEvaluation evaluate_mi(const Decisions& decisions, const Decisions& truth) {
  if (decisions.size() != truth.size()) {
    throw Error(ErrorCode::UserSetMismatch, "decision and truth cover different user counts");
  }
  if (truth.empty()) throw Error(ErrorCode::UserSetMismatch, "no users to evaluate");
  MiEvaluation e;
  for (const auto& [user, actual] : truth) {
    auto it = decisions.find(user);
    if (it == decisions.end()) {
      throw Error(ErrorCode::UserSetMismatch, "no decision for user '" + user + "'");
    }
    const bool predicted = it->second == Membership::Member;
    const bool member = actual == Membership::Member;
    if (predicted && member) ++e.tp;
    if (predicted && !member) ++e.fp;
    if (!predicted && !member) ++e.tn;
    if (!predicted && member) ++e.fn;
  }
  const auto ratio = [](std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  e.accuracy = ratio(e.tp + e.tn, truth.size());
  e.recall = ratio(e.tp, e.tp + e.fn);
  e.precision = ratio(e.tp, e.tp + e.fp);
  e.f1 = e.precision + e.recall > 0.0 ? 2.0 * e.precision * e.recall / (e.precision + e.recall)
                                      : 0.0;
  return e;
}

}  // namespace textmarker
