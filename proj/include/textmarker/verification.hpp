#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "textmarker/dataset.hpp"
#include "textmarker/model.hpp"

namespace textmarker {

/// Regularized incomplete beta I_x(a, b). `y` must equal 1 - x; passing it
/// separately keeps precision when x is close to 1.
double incomplete_beta(double x, double y, double a, double b);

/// P(T > t) for Student's t with `df` degrees of freedom.
double t_upper_tail(double t, double df);

/// Upper-tail critical value: the t with P(T_df > t) = tau.
double t_upper_critical(double df, double tau);

struct TestParams {
  std::size_t m = 30;  // number of probe queries
  int k = 2;           // number of classes
  double tau = 0.05;
  std::optional<double> beta;  // chance success rate; 1/K when unset

  double beta_value() const { return beta.value_or(1.0 / static_cast<double>(k)); }

  /// The normal approximation behind the test wants m >= 30; smaller m is
  /// allowed and reported as a warning.
  bool below_recommended_m() const { return m < 30; }

  void validate() const;
};

/// sqrt(m-1) * (alpha - beta) - sqrt(alpha - alpha^2) * t_tau
double test_statistic(double alpha, const TestParams& params);

/// Smallest ASR for which the statistic is positive.
double asr_threshold(const TestParams& params);

enum class Membership { NonMember, Member };

std::string_view to_string(Membership m);

struct VerificationReport {
  double alpha = 0.0;
  double threshold = 0.0;
  double statistic = 0.0;
  Membership decision = Membership::NonMember;
  TestParams params;
  std::string user_id;
  std::vector<std::string> warnings;

  /// Keys in fixed order: alpha, threshold, statistic, decision, m, k, tau,
  /// beta, user_id, warnings.
  nlohmann::ordered_json to_json() const;
};

/// Queries `model` with the probes and runs the one-sided test.
/// `jobs` > 1 spreads queries over threads.
VerificationReport verify(const BlackBoxModel& model, std::span<const TextSample> probes,
                          const TestParams& params, std::string user_id = {},
                          std::size_t jobs = 1);

}  // namespace textmarker
