#include <random>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "textmarker/mi_baselines.hpp"
#include "textmarker/synth.hpp"

namespace textmarker {
namespace {

using testing_util::error_code_of;

TEST(LossFeatures, WorkedExamples) {
  const std::vector<double> flat = {1, 1, 1};
  const auto a = summarize_losses(flat);
  EXPECT_EQ(a.values(), (std::array<double, 4>{1, 1, 1, 0}));

  const std::vector<double> spread = {0, 2};
  const auto b = summarize_losses(spread);
  EXPECT_EQ(b.values(), (std::array<double, 4>{1, 0, 2, 1}));

  EXPECT_EQ(error_code_of([] { summarize_losses(std::vector<double>{}); }),
            ErrorCode::InvalidArgument);
}

TEST(LossFeatures, OrderedAndNonNegativeVariance) {
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> loss(0.0, 50.0);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> ls(1 + gen() % 20);
    for (auto& l : ls) l = loss(gen);
    const auto f = summarize_losses(ls);
    ASSERT_LE(f.min, f.avg);
    ASSERT_LE(f.avg, f.max);
    ASSERT_GE(f.variance, 0.0);
  }
}

TEST(MajorityVote, StrictMajorityTiesAreNonMember) {
  const double t = 1.0;
  EXPECT_EQ(majority_vote(std::vector<double>{0.1, 0.2, 5, 5, 5}, t), Membership::NonMember);
  EXPECT_EQ(majority_vote(std::vector<double>{0.1, 0.2, 0.3, 5, 5}, t), Membership::Member);
  EXPECT_EQ(majority_vote(std::vector<double>{0.1, 0.2, 5, 5}, t), Membership::NonMember);
  EXPECT_EQ(majority_vote(std::vector<double>{1.0}, t), Membership::NonMember);
}

TEST(MajorityVote, LoweringALossNeverFlipsToNonMember) {
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> loss(0.0, 2.0);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<double> ls(1 + gen() % 9);
    for (auto& l : ls) l = loss(gen);
    const auto before = majority_vote(ls, 1.0);
    ls[gen() % ls.size()] = 0.0;
    if (before == Membership::Member) {
      ASSERT_EQ(majority_vote(ls, 1.0), Membership::Member);
    }
  }
}

TEST(TuneLossThreshold, SeparatesCleanlySplitLosses) {
  const std::vector<double> members = {0.1, 0.2, 0.3, 0.4};
  const std::vector<double> non = {2.0, 3.0, 4.0, 5.0};
  const double t = tune_loss_threshold(members, non);
  EXPECT_GT(t, 0.4);
  EXPECT_LE(t, 2.0);
  EXPECT_EQ(error_code_of([&] { tune_loss_threshold({}, non); }), ErrorCode::ProxyTooSmall);
}

TEST(EvaluateMi, WorkedExample) {
  const Decisions truth = {{"a", Membership::Member},
                           {"b", Membership::Member},
                           {"c", Membership::NonMember},
                           {"d", Membership::NonMember}};
  const Decisions pred = {{"a", Membership::Member},
                          {"b", Membership::NonMember},
                          {"c", Membership::Member},
                          {"d", Membership::NonMember}};
  const auto e = evaluate_mi(pred, truth);
  EXPECT_EQ(e.tp, 1u);
  EXPECT_EQ(e.fp, 1u);
  EXPECT_EQ(e.tn, 1u);
  EXPECT_EQ(e.fn, 1u);
  EXPECT_DOUBLE_EQ(e.accuracy, 0.5);
  EXPECT_DOUBLE_EQ(e.precision, 0.5);
  EXPECT_DOUBLE_EQ(e.recall, 0.5);
  EXPECT_DOUBLE_EQ(e.f1, 0.5);

  const auto perfect = evaluate_mi(truth, truth);
  EXPECT_DOUBLE_EQ(perfect.accuracy, 1.0);
  EXPECT_DOUBLE_EQ(perfect.f1, 1.0);
}

TEST(EvaluateMi, NoPositivePredictionsGiveZeroPrecision) {
  const Decisions truth = {{"a", Membership::Member}, {"b", Membership::NonMember}};
  const Decisions none = {{"a", Membership::NonMember}, {"b", Membership::NonMember}};
  const auto e = evaluate_mi(none, truth);
  EXPECT_DOUBLE_EQ(e.precision, 0.0);
  EXPECT_DOUBLE_EQ(e.f1, 0.0);
  EXPECT_DOUBLE_EQ(e.accuracy, 0.5);
}

TEST(EvaluateMi, UserSetMismatch) {
  const Decisions truth = {{"a", Membership::Member}, {"b", Membership::NonMember}};
  const Decisions short_pred = {{"a", Membership::Member}};
  const Decisions other_pred = {{"a", Membership::Member}, {"z", Membership::Member}};
  EXPECT_EQ(error_code_of([&] { evaluate_mi(short_pred, truth); }), ErrorCode::UserSetMismatch);
  EXPECT_EQ(error_code_of([&] { evaluate_mi(other_pred, truth); }), ErrorCode::UserSetMismatch);
  EXPECT_EQ(error_code_of([] { evaluate_mi({}, {}); }), ErrorCode::UserSetMismatch);
}

TEST(LossAttackModel, LearnsASeparableRule) {
  std::vector<LossFeatureVector> f;
  std::vector<Membership> y;
  for (int i = 0; i < 40; ++i) {
    const bool member = i % 2 == 0;
    const double base = member ? 0.1 : 2.0;
    f.push_back({base + 0.01 * i, base, base + 0.5, 0.1});
    y.push_back(member ? Membership::Member : Membership::NonMember);
  }
  const auto attack = LossAttackModel::fit(f, y);
  EXPECT_EQ(attack.predict({0.2, 0.1, 0.6, 0.1}), Membership::Member);
  EXPECT_EQ(attack.predict({2.3, 2.0, 2.5, 0.1}), Membership::NonMember);
  EXPECT_EQ(error_code_of([&] {
              LossAttackModel::fit(f, std::span<const Membership>(y).first(3));
            }),
            ErrorCode::InvalidArgument);
}

// A target that never saw any owner's data, with owners labeled half member
// and half non-member: nothing separates the two groups, so any method should
// land near coin-flip accuracy.
class BaselineSanity : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    SynthConfig train_cfg;
    train_cfg.n_samples = 1500;
    data_ = new Data;
    data_->train = synthesize(train_cfg, Split::Train);
    SynthConfig test_cfg = train_cfg;
    test_cfg.n_samples = 1000;
    const Dataset unseen = synthesize(test_cfg, Split::Test);
    RefModelConfig model_cfg;
    model_cfg.rng_seed = 3;
    data_->target = std::make_unique<TrainedRefModel>(train(data_->train, model_cfg));
    for (std::size_t u = 0; u < 100; ++u) {
      UserData user;
      user.user_id = "u" + std::to_string(u);
      user.truth = u % 2 == 0 ? Membership::Member : Membership::NonMember;
      for (std::size_t j = 0; j < 5; ++j) user.samples.push_back(unseen.samples[u * 5 + j]);
      data_->users.push_back(std::move(user));
    }
  }
  static void TearDownTestSuite() { delete data_; }

  struct Data {
    Dataset train;
    std::unique_ptr<TrainedRefModel> target;
    std::vector<UserData> users;
  };
  static Data* data_;
};
BaselineSanity::Data* BaselineSanity::data_ = nullptr;

TEST_F(BaselineSanity, MetricOracleAccessNearChance) {
  KnownMembership known;
  known.members.assign(data_->train.samples.begin(), data_->train.samples.begin() + 300);
  SynthConfig other;
  other.n_samples = 300;
  other.seed = 99;
  known.non_members = synthesize(other, Split::Test).samples;
  const auto d = metric_mi(known, *data_->target, data_->users);
  const auto e = evaluate_mi(d, truth_of(data_->users));
  EXPECT_GE(e.accuracy, 0.35);
  EXPECT_LE(e.accuracy, 0.65);
}

TEST_F(BaselineSanity, MetricProxyNearChance) {
  MetricConfig cfg;
  cfg.seed = 5;
  const auto d = metric_mi(data_->train, *data_->target, data_->users, cfg);
  const auto e = evaluate_mi(d, truth_of(data_->users));
  EXPECT_GE(e.accuracy, 0.35);
  EXPECT_LE(e.accuracy, 0.65);
}

TEST_F(BaselineSanity, ShadowNearChance) {
  ShadowConfig cfg;
  cfg.seed = 5;
  const auto d = shadow_train_mi(data_->train, *data_->target, data_->users, cfg);
  const auto e = evaluate_mi(d, truth_of(data_->users));
  EXPECT_GE(e.accuracy, 0.35);
  EXPECT_LE(e.accuracy, 0.65);
}

TEST_F(BaselineSanity, ProxyTooSmall) {
  Dataset tiny;
  tiny.samples.assign(data_->train.samples.begin(), data_->train.samples.begin() + 20);
  ShadowConfig cfg;
  cfg.n_shadow = 4;
  cfg.user_size = 5;
  EXPECT_EQ(error_code_of([&] { shadow_train_mi(tiny, *data_->target, data_->users, cfg); }),
            ErrorCode::ProxyTooSmall);
  tiny.samples.resize(3);
  EXPECT_EQ(error_code_of([&] { metric_mi(tiny, *data_->target, data_->users, MetricConfig{}); }),
            ErrorCode::ProxyTooSmall);
}

TEST_F(BaselineSanity, ShadowIsDeterministic) {
  ShadowConfig cfg;
  cfg.seed = 8;
  const auto a = shadow_train_mi(data_->train, *data_->target, data_->users, cfg);
  cfg.jobs = 4;
  const auto b = shadow_train_mi(data_->train, *data_->target, data_->users, cfg);
  EXPECT_EQ(a, b);
}

}  // namespace
}  // namespace textmarker
