#ifndef CREACH_CONFORMAL_HPP
#define CREACH_CONFORMAL_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "creach/bounds.hpp"
#include "creach/christoffel.hpp"

namespace creach {

/// Dataset split into training and calibration rows with provenance.
struct SamplePartition {
  Eigen::MatrixXd training;
  Eigen::MatrixXd calibration;
  std::uint64_t seed = 0;
  /// Present for synthetic benchmarks that track injected outliers.
  std::optional<std::vector<bool>> training_labels;
  std::optional<std::vector<bool>> calibration_labels;
};

/// Split `data` into a calibration set (the first `calibration_size`
/// indices after a seeded shuffle) and a training set (the rest).
/// The shuffle guards against sorted input files; the calibrated
/// guarantees assume exchangeable order.
SamplePartition split_dataset(const Eigen::Ref<const Eigen::MatrixXd>& data,
                              Eigen::Index calibration_size, std::uint64_t seed,
                              const std::optional<std::vector<bool>>& labels = std::nullopt);

/// Calibrated reach-set estimate: the sublevel set
///   { x : score(model, x) <= threshold }.
///
/// threshold is exactly the rank-th largest calibration score; membership
/// uses exact <= (no tolerance: conformal correctness depends on rank
/// comparisons, not metric ones). Immutable after calibration; contains()
/// is pure and concurrent-safe.
struct ReachSetEstimate {
  ChristoffelModel model;
  double threshold = 0.0;
  int rank = 1; ///< p+1; 1 for the outlier-free calibration
  BoundResult guarantee;
  /// True when duplicate calibration scores were detected. Ties at the
  /// threshold keep every tied point inside (conservative, larger
  /// region); the missing-mass upper bound assumes a continuous measure
  /// and is not claimed under ties.
  bool tied_calibration_scores = false;

  bool contains(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    return model.score(x) <= threshold;
  }
};

/// Outlier-free calibration: threshold = max calibration score, so every
/// calibration point is a member. The attached guarantee carries
/// epsilon = 1 - delta^(1/N) for the caller-supplied delta.
ReachSetEstimate calibrate(ChristoffelModel model,
                           const Eigen::Ref<const Eigen::MatrixXd>& calibration, double delta);

/// Outlier-robust calibration: threshold = (outlier_budget+1)-th largest
/// calibration score (descending stable sort), tolerating up to
/// outlier_budget contaminated calibration points. Requires
/// 2*outlier_budget + 1 < N. The guarantee carries the binomial-tail
/// confidence for the caller-supplied epsilon (epsilon = 1 is accepted and
/// yields confidence 1). With distinct scores exactly outlier_budget
/// calibration points fall outside the region.
ReachSetEstimate calibrate_robust(ChristoffelModel model,
                                  const Eigen::Ref<const Eigen::MatrixXd>& calibration,
                                  std::int64_t outlier_budget, double epsilon);

/// Fraction of calibration scores at least as large as `x_score`
/// (ties count, per the >= convention).
double p_value(const Eigen::Ref<const Eigen::VectorXd>& calibration_scores, double x_score);

/// Transductive p-value at x: augmented scores of the training points
/// versus the augmented query score, counted as in p_value. Costs
/// O(N s(d) + s(d)^2) per query.
double transductive_p_value(const TransductiveContext& ctx,
                            const Eigen::Ref<const Eigen::VectorXd>& x);

} // namespace creach

#endif
