#ifndef CREACH_BOUNDS_HPP
#define CREACH_BOUNDS_HPP

#include <cstdint>
#include <string>

namespace creach {

enum class BoundMode { split_lower, split_upper, split_two_sided, robust, baseline_conjecture };

/// One evaluated statistical guarantee.
struct BoundResult {
  BoundMode mode = BoundMode::split_lower;
  double epsilon = 0.0; ///< coverage error bound, in (0,1)
  double delta = 0.0;   ///< failure probability (robust mode: 1 - confidence)
  std::int64_t calibration_size = 0;
  std::int64_t outlier_budget = 0; ///< robust mode only
  int dimension = 0;               ///< baseline mode only
  int degree = 0;                  ///< baseline mode only
};

std::string to_string(BoundMode mode);
BoundMode bound_mode_from_string(const std::string& name);

/// Coverage error of the split-calibrated region at confidence 1 - delta:
/// epsilon = 1 - delta^(1/N). Strictly decreasing in N, -> 0 as N -> inf.
double split_epsilon(std::int64_t calibration_size, double delta);

/// Missing-mass floor of the same region: with probability >= 1 - delta the
/// region covers at most exp(log(1-delta)/N) of the measure, i.e. misses at
/// least 1 - exp(log(1-delta)/N). Requires a continuous measure; combined
/// with split_epsilon it gives a two-sided band at confidence 1 - 2*delta
/// for delta < 1/2 (at delta = 1/2 the band collapses).
double split_upper_epsilon(std::int64_t calibration_size, double delta);

/// Inverse direction of split_epsilon: the failure probability
/// delta = (1-epsilon)^N at which the split bound yields exactly epsilon.
double split_delta(std::int64_t calibration_size, double epsilon);

/// Confidence that the outlier-robust region (threshold at the (p+1)-th
/// largest calibration score, at most p outliers among N calibration
/// points, 2p+1 < N) covers at least 1 - epsilon of the measure:
///
///   sum_{i=p+1}^{N-p} C(N-p, i) eps^i (1-eps)^(N-p-i)
///
/// evaluated through log-gamma terms with extended-precision accumulation
/// (naive powers underflow for N ~ 1e5 and small eps). At p = 0 this
/// equals 1 - (1-eps)^N, the split bound at delta = (1-eps)^N.
double robust_confidence(std::int64_t calibration_size, std::int64_t outlier_budget,
                         double epsilon);

/// Smallest epsilon in (0,1) satisfying the conjectured baseline sample
/// bound N >= (5/eps) (log(4/delta) + C(n+2d, n) log(40/eps)) at equality,
/// found by bisection to 1e-6 absolute tolerance (the right-hand side is
/// strictly decreasing in eps, so the root is unique).
///
/// This baseline is conjectured, not proven; it is exposed for comparison
/// figures only and is never attached to an estimate as a guarantee.
/// Throws validation_error reporting the minimum usable N when no root
/// exists in (0,1).
double conjecture_baseline_epsilon(std::int64_t sample_size, int dimension, int degree,
                                   double delta);

BoundResult split_bound(std::int64_t calibration_size, double delta);
BoundResult split_upper_bound(std::int64_t calibration_size, double delta);
BoundResult robust_bound(std::int64_t calibration_size, std::int64_t outlier_budget,
                         double epsilon);
BoundResult baseline_conjecture_bound(std::int64_t sample_size, int dimension, int degree,
                                      double delta);

} // namespace creach

#endif
