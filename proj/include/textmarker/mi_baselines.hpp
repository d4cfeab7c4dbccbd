#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "textmarker/dataset.hpp"
#include "textmarker/model.hpp"
#include "textmarker/verification.hpp"

namespace textmarker {

/// One data owner's samples and, for evaluation, whether they were trained on.
struct UserData {
  std::string user_id;
  std::vector<TextSample> samples;
  Membership truth = Membership::NonMember;
};

/// Summary of a user's per-sample losses (population variance).
struct LossFeatureVector {
  double avg = 0.0;
  double min = 0.0;
  double max = 0.0;
  double variance = 0.0;

  std::array<double, 4> values() const { return {avg, min, max, variance}; }
};

LossFeatureVector summarize_losses(std::span<const double> losses);
LossFeatureVector loss_features(const BlackBoxModel& model, const UserData& user);

/// user id -> decision
using Decisions = std::map<std::string, Membership>;

Decisions truth_of(std::span<const UserData> users);

/// Binary logistic regression over standardized loss features, fit with
/// class-weighted cross-entropy by full-batch gradient descent.
class LossAttackModel {
 public:
  static LossAttackModel fit(std::span<const LossFeatureVector> features,
                             std::span<const Membership> labels, int iterations = 2000,
                             double learning_rate = 0.5);

  double member_probability(const LossFeatureVector& f) const;
  Membership predict(const LossFeatureVector& f) const;

 private:
  std::array<double, 4> mean_{};
  std::array<double, 4> scale_{1, 1, 1, 1};
  std::array<double, 4> weights_{};
  double bias_ = 0.0;
};

struct ShadowConfig {
  std::size_t n_shadow = 4;
  std::size_t user_size = 5;  // samples per synthetic shadow user
  RefModelConfig model;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
};

/// Learning-based MI: shadow models on proxy partitions produce labeled
/// loss-feature vectors, an attack model learns from them and is applied to
/// the real users under the target model. The proxy must not overlap the
/// target's training data unless oracle access is intended.
Decisions shadow_train_mi(const Dataset& proxy, const BlackBoxModel& target,
                          std::span<const UserData> users, const ShadowConfig& config);

struct MetricConfig {
  RefModelConfig model;  // for the calibration shadow in proxy-only mode
  std::uint64_t seed = 0;
};

/// Samples whose membership in the target's training set is known.
struct KnownMembership {
  std::vector<TextSample> members;
  std::vector<TextSample> non_members;
};

/// Threshold from the 1st..99th percentiles of the pooled losses that
/// maximizes F1 for "loss < threshold means member".
double tune_loss_threshold(std::span<const double> member_losses,
                           std::span<const double> non_member_losses);

/// Strict majority of "loss < threshold" votes; ties are NonMember.
Membership majority_vote(std::span<const double> losses, double threshold);

/// Metric-based MI, proxy-only: the threshold is tuned on a shadow model
/// trained on half of `proxy` (the other half being non-members).
Decisions metric_mi(const Dataset& proxy, const BlackBoxModel& target,
                    std::span<const UserData> users, const MetricConfig& config);

/// Metric-based MI with oracle access: the threshold is tuned on the target
/// itself using samples of known membership.
Decisions metric_mi(const KnownMembership& known, const BlackBoxModel& target,
                    std::span<const UserData> users);

struct MiEvaluation {
  double accuracy = 0.0;
  double recall = 0.0;
  double precision = 0.0;
  double f1 = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  nlohmann::ordered_json to_json() const;
};

/// Member is the positive class. Throws UserSetMismatch when the two maps
/// cover different users.
MiEvaluation evaluate_mi(const Decisions& decisions, const Decisions& truth);

}  // namespace textmarker
