#include "textmarker/verification.hpp"

#include <cmath>
#include <limits>

#include "textmarker/error.hpp"
#include "textmarker/parallel.hpp"

namespace textmarker {

namespace {

// Continued fraction for the incomplete beta (modified Lentz).
double beta_continued_fraction(double a, double b, double x) {
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 1e-16;
  constexpr int kMaxIter = 200'000;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double incomplete_beta(double x, double y, double a, double b) {
  if (x <= 0.0) return 0.0;
  if (y <= 0.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log(y);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return std::exp(log_front) * beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - std::exp(log_front) * beta_continued_fraction(b, a, y) / b;
}

double t_upper_tail(double t, double df) {
  const double t2 = t * t;
  const double x = df / (df + t2);
  const double y = t2 / (df + t2);
  const double half = 0.5 * incomplete_beta(x, y, 0.5 * df, 0.5);
  return t >= 0.0 ? half : 1.0 - half;
}

double t_upper_critical(double df, double tau) {
  if (!(df >= 1.0)) throw Error(ErrorCode::InvalidArgument, "degrees of freedom must be >= 1");
  if (!(tau > 0.0 && tau < 0.5)) throw Error(ErrorCode::InvalidArgument, "tau must lie in (0, 0.5)");
  double lo = 0.0;
  double hi = 1.0;
  while (t_upper_tail(hi, df) > tau) {
    lo = hi;
    hi *= 2.0;
  }
  // The tail is decreasing in t: keep tail(lo) > tau >= tail(hi).
  for (int i = 0; i < 200 && hi - lo > 1e-13 * std::max(1.0, hi); ++i) {
    const double mid = 0.5 * (lo + hi);
    if (t_upper_tail(mid, df) > tau) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

void TestParams::validate() const {
  if (m < 2) throw Error(ErrorCode::InvalidArgument, "need at least two queries");
  if (k < 2) throw Error(ErrorCode::InvalidArgument, "need K >= 2");
  if (!(tau > 0.0 && tau < 0.5)) throw Error(ErrorCode::InvalidArgument, "tau must lie in (0, 0.5)");
  const double b = beta_value();
  if (!(b > 0.0 && b < 1.0)) throw Error(ErrorCode::InvalidArgument, "beta must lie in (0, 1)");
}

namespace {

double statistic(double alpha, double m, double beta, double t_tau) {
  const double spread = std::sqrt(std::max(0.0, alpha - alpha * alpha));
  return std::sqrt(m - 1.0) * (alpha - beta) - spread * t_tau;
}

}  // namespace

double test_statistic(double alpha, const TestParams& params) {
  params.validate();
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "alpha must lie in [0, 1]");
  }
  const double m = static_cast<double>(params.m);
  return statistic(alpha, m, params.beta_value(), t_upper_critical(m - 1.0, params.tau));
}

double asr_threshold(const TestParams& params) {
  params.validate();
  const double m = static_cast<double>(params.m);
  const double beta = params.beta_value();
  const double t_tau = t_upper_critical(m - 1.0, params.tau);
  auto positive = [&](double a) { return statistic(a, m, beta, t_tau) > 0.0; };

  constexpr double kStep = 1e-4;
  double below = beta;
  double above = std::numeric_limits<double>::quiet_NaN();
  for (long i = 1;; ++i) {
    const double a = beta + static_cast<double>(i) * kStep;
    if (a >= 1.0) break;
    if (positive(a)) {
      above = a;
      break;
    }
    below = a;
  }
  if (std::isnan(above)) {
    if (!positive(1.0)) throw Error(ErrorCode::NoCrossing, "statistic never turns positive");
    above = 1.0;
  }
  while (above - below > 1e-12) {
    const double mid = 0.5 * (below + above);
    if (positive(mid)) {
      above = mid;
    } else {
      below = mid;
    }
  }
  return above;
}

std::string_view to_string(Membership m) {
  return m == Membership::Member ? "Member" : "NonMember";
}

nlohmann::ordered_json VerificationReport::to_json() const {
  nlohmann::ordered_json j;
  j["alpha"] = alpha;
  j["threshold"] = threshold;
  j["statistic"] = statistic;
  j["decision"] = to_string(decision);
  j["m"] = params.m;
  j["k"] = params.k;
  j["tau"] = params.tau;
  j["beta"] = params.beta_value();
  j["user_id"] = user_id;
  j["warnings"] = warnings;
  return j;
}

VerificationReport verify(const BlackBoxModel& model, std::span<const TextSample> probes,
                          const TestParams& params, std::string user_id, std::size_t jobs) {
  params.validate();
  if (probes.empty()) throw Error(ErrorCode::EmptyProbeSet, "no probes");
  if (probes.size() != params.m) {
    throw Error(ErrorCode::InvalidArgument, "expected " + std::to_string(params.m) +
                                                " probes, got " + std::to_string(probes.size()));
  }

  VerificationReport report;
  report.params = params;
  report.user_id = std::move(user_id);
  if (params.below_recommended_m()) {
    report.warnings.push_back("m=" + std::to_string(params.m) +
                              " is below 30; the test's normal approximation may not hold");
  }

  if (jobs <= 1) {
    report.alpha = asr(model, probes);
  } else {
    std::vector<char> hit(probes.size(), 0);
    const int target = probes.front().label;
    for (const auto& p : probes) {
      if (p.label != target) {
        throw Error(ErrorCode::InvalidArgument, "probes carry more than one target label");
      }
    }
    parallel_for(probes.size(), jobs,
                 [&](std::size_t i) { hit[i] = model.predict(probes[i].text) == target; });
    std::size_t hits = 0;
    for (char h : hit) hits += h ? 1 : 0;
    report.alpha = static_cast<double>(hits) / static_cast<double>(probes.size());
  }
  report.statistic = test_statistic(report.alpha, params);
  report.threshold = asr_threshold(params);
  report.decision = report.statistic > 0.0 ? Membership::Member : Membership::NonMember;
  return report;
}

}  // namespace textmarker
