#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "textmarker/dataset.hpp"
#include "textmarker/mi_baselines.hpp"
#include "textmarker/model.hpp"
#include "textmarker/synth.hpp"
#include "textmarker/trigger.hpp"
#include "textmarker/verification.hpp"

namespace textmarker {

/// Train and test splits drawn from one synthetic vocabulary.
struct Corpus {
  Dataset train;
  Dataset test;
};

Corpus make_corpus(const SynthConfig& train_config, std::size_t n_test);

/// One owner marks the training split; the model is trained on the marked
/// (member) or untouched (non-member) corpus and then audited.
struct SingleUserConfig {
  SynthConfig corpus;
  std::size_t n_test = 1000;
  TriggerSpec spec{TriggerLevel::Word, "Ops", TriggerLocation::Initial, 1, TriggerMode::Insert,
                   "u000"};
  int target_label = 0;
  MarkAmount amount = MarkAmount::of_rate(0.01);
  RefModelConfig model;
  TestParams test;  // k is taken from the corpus
  bool member = true;
  std::uint64_t seed = 1;
};

nlohmann::ordered_json to_json(const SingleUserConfig& config);

struct TrialResult {
  double clean_accuracy = 0.0;
  std::size_t n_marked = 0;
  VerificationReport report;
};

TrialResult run_single_user(const SingleUserConfig& config);

enum class ProxyMode { OracleAccess, ProxyOnly };

std::string_view to_string(ProxyMode mode);
ProxyMode parse_proxy_mode(std::string_view name);

/// Many owners, some of whose data ends up in the training set.
///
/// Every owner holds `samples_per_user` clean samples (what the baselines
/// audit) and, if a member, contributes `marks_per_user` extra triggered
/// samples. Owners 0..n_members-1 are members.
struct MultiUserConfig {
  SynthConfig corpus;
  std::size_t n_test = 1000;
  std::size_t n_users = 10;
  std::size_t n_members = 5;
  std::size_t collab_group_size = 0;
  std::size_t samples_per_user = 5;
  std::size_t marks_per_user = 20;
  AllocationOptions allocation{{TriggerLevel::Word, TriggerLevel::Sentence}};
  RefModelConfig model;
  TestParams test;
  bool run_baselines = false;
  ProxyMode proxy_mode = ProxyMode::OracleAccess;
  double proxy_fraction = 1.0;  // share of the target's data visible under oracle access
  std::size_t n_shadow = 4;
  std::uint64_t seed = 1;
  std::size_t jobs = 1;
};

nlohmann::ordered_json to_json(const MultiUserConfig& config);

struct UserOutcome {
  UserTrigger trigger;
  Membership truth = Membership::NonMember;
  VerificationReport report;
};

struct MultiUserResult {
  double clean_accuracy = 0.0;
  std::vector<UserOutcome> users;
  MiEvaluation textmarker;
  std::optional<MiEvaluation> shadow;
  std::optional<MiEvaluation> metric;
  Decisions textmarker_decisions;
  Decisions shadow_decisions;
  Decisions metric_decisions;
};

MultiUserResult run_multi_user(const MultiUserConfig& config);

enum class SweepAxis { Pattern, Location, Rate, Size, Collab };

std::string_view to_string(SweepAxis axis);
SweepAxis parse_sweep_axis(std::string_view name);

struct SweepRow {
  SweepAxis axis;
  std::string value;
  double asr = 0.0;
  double clean_accuracy = 0.0;
  double threshold = 0.0;
  Membership decision = Membership::NonMember;
};

/// Default grid for an axis, given the base trigger level.
std::vector<std::string> default_sweep_grid(SweepAxis axis, const TriggerDictionary& dict,
                                            TriggerLevel level);

/// One row per grid value. Pattern, location, rate and size vary the single
/// owner setup in `base`; collab runs `collab_users` members of which the
/// first `value` share target label 0 and reports that group's mean ASR
/// (all owners when value is 0), Member only if every one of them is.
std::vector<SweepRow> run_sweep(SweepAxis axis, const std::vector<std::string>& grid,
                                const SingleUserConfig& base, std::size_t collab_users = 5,
                                std::size_t jobs = 1);

std::string sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace textmarker
