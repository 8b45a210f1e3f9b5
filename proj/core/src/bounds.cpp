#include "creach/bounds.hpp"

#include <cmath>
#include <string>

#include "creach/errors.hpp"

namespace creach {

std::string to_string(BoundMode mode) {
  switch (mode) {
    case BoundMode::split_lower: return "split_lower";
    case BoundMode::split_upper: return "split_upper";
    case BoundMode::split_two_sided: return "split_two_sided";
    case BoundMode::robust: return "robust";
    case BoundMode::baseline_conjecture: return "baseline_conjecture";
  }
  throw validation_error("unknown bound mode");
}

BoundMode bound_mode_from_string(const std::string& name) {
  if (name == "split_lower") return BoundMode::split_lower;
  if (name == "split_upper") return BoundMode::split_upper;
  if (name == "split_two_sided") return BoundMode::split_two_sided;
  if (name == "robust") return BoundMode::robust;
  if (name == "baseline_conjecture") return BoundMode::baseline_conjecture;
  throw validation_error("unknown bound mode: " + name);
}

namespace {

void check_delta(double delta, const char* who) {
  if (!(delta > 0.0 && delta < 1.0))
    throw validation_error(std::string(who) + ": delta must lie in (0,1)");
}

} // namespace

double split_epsilon(std::int64_t calibration_size, double delta) {
  if (calibration_size < 1) throw validation_error("split_epsilon: N must be >= 1");
  check_delta(delta, "split_epsilon");
  return -std::expm1(std::log(delta) / static_cast<double>(calibration_size));
}

double split_upper_epsilon(std::int64_t calibration_size, double delta) {
  if (calibration_size < 1) throw validation_error("split_upper_epsilon: N must be >= 1");
  check_delta(delta, "split_upper_epsilon");
  return -std::expm1(std::log1p(-delta) / static_cast<double>(calibration_size));
}

double split_delta(std::int64_t calibration_size, double epsilon) {
  if (calibration_size < 1) throw validation_error("split_delta: N must be >= 1");
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw validation_error("split_delta: epsilon must lie in (0,1)");
  return std::exp(static_cast<double>(calibration_size) * std::log1p(-epsilon));
}

double robust_confidence(std::int64_t calibration_size, std::int64_t outlier_budget,
                         double epsilon) {
  const std::int64_t n = calibration_size;
  const std::int64_t p = outlier_budget;
  if (n < 1) throw validation_error("robust_confidence: N must be >= 1");
  if (p < 0) throw validation_error("robust_confidence: p must be >= 0");
  if (2 * p + 1 >= n)
    throw validation_error("robust_confidence: requires 2p+1 < N (got p=" + std::to_string(p) +
                           ", N=" + std::to_string(n) + ")");
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw validation_error("robust_confidence: epsilon must lie in (0,1)");

  const std::int64_t m = n - p; // binomial trial count
  const double log_eps = std::log(epsilon);
  const double log_1m = std::log1p(-epsilon);
  const double lg_m1 = std::lgamma(static_cast<double>(m) + 1.0);
  auto log_term = [&](std::int64_t i) {
    const double di = static_cast<double>(i);
    return lg_m1 - std::lgamma(di + 1.0) - std::lgamma(static_cast<double>(m - i) + 1.0) +
           di * log_eps + static_cast<double>(m - i) * log_1m;
  };

  // Sum whichever side of the split point has fewer mass-significant terms,
  // taking the complement when the lower side is summed; this keeps
  // relative accuracy both near 0 and near 1.
  long double lower = 0.0L; // P(X <= p)
  for (std::int64_t i = 0; i <= p; ++i) lower += std::exp(log_term(i));
  if (lower < 0.5L) return static_cast<double>(1.0L - lower);
  long double upper = 0.0L; // P(X >= p+1)
  for (std::int64_t i = p + 1; i <= m; ++i) upper += std::exp(log_term(i));
  return static_cast<double>(upper);
}

double conjecture_baseline_epsilon(std::int64_t sample_size, int dimension, int degree,
                                   double delta) {
  if (sample_size < 1) throw validation_error("conjecture_baseline_epsilon: N must be >= 1");
  if (dimension < 1 || degree < 1)
    throw validation_error("conjecture_baseline_epsilon: n and d must be >= 1");
  check_delta(delta, "conjecture_baseline_epsilon");

  // C(n+2d, n) through lgamma: the bound only needs it as a double.
  const double n = dimension, d = degree;
  const double coeff =
      std::exp(std::lgamma(n + 2 * d + 1.0) - std::lgamma(n + 1.0) - std::lgamma(2 * d + 1.0));
  const double log_4_delta = std::log(4.0 / delta);
  auto required_n = [&](double eps) {
    return (5.0 / eps) * (log_4_delta + coeff * std::log(40.0 / eps));
  };

  const double big = static_cast<double>(sample_size);
  double hi = 1.0 - 1e-12;
  if (required_n(hi) > big) {
    throw validation_error("conjecture_baseline_epsilon: no epsilon in (0,1) satisfies the bound "
                           "for N=" + std::to_string(sample_size) + "; needs N >= " +
                           std::to_string(static_cast<std::int64_t>(std::ceil(required_n(hi)))));
  }
  double lo = 1e-12;
  if (required_n(lo) <= big) return lo;
  while (hi - lo > 1e-6) {
    const double mid = 0.5 * (lo + hi);
    if (required_n(mid) <= big)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

BoundResult split_bound(std::int64_t calibration_size, double delta) {
  BoundResult r;
  r.mode = BoundMode::split_lower;
  r.epsilon = split_epsilon(calibration_size, delta);
  r.delta = delta;
  r.calibration_size = calibration_size;
  return r;
}

BoundResult split_upper_bound(std::int64_t calibration_size, double delta) {
  BoundResult r;
  r.mode = BoundMode::split_upper;
  r.epsilon = split_upper_epsilon(calibration_size, delta);
  r.delta = delta;
  r.calibration_size = calibration_size;
  return r;
}

BoundResult robust_bound(std::int64_t calibration_size, std::int64_t outlier_budget,
                         double epsilon) {
  BoundResult r;
  r.mode = BoundMode::robust;
  r.epsilon = epsilon;
  // epsilon = 1 exactly means "no requirement": confidence 1 without
  // touching the binomial sum, so harness sweeps can include it.
  r.delta = epsilon == 1.0
                ? 0.0
                : 1.0 - robust_confidence(calibration_size, outlier_budget, epsilon);
  r.calibration_size = calibration_size;
  r.outlier_budget = outlier_budget;
  return r;
}

BoundResult baseline_conjecture_bound(std::int64_t sample_size, int dimension, int degree,
                                      double delta) {
  BoundResult r;
  r.mode = BoundMode::baseline_conjecture;
  r.epsilon = conjecture_baseline_epsilon(sample_size, dimension, degree, delta);
  r.delta = delta;
  r.calibration_size = sample_size;
  r.dimension = dimension;
  r.degree = degree;
  return r;
}

} // namespace creach
