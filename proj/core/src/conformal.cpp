#include "creach/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "creach/errors.hpp"
#include "creach/rng.hpp"

namespace creach {

SamplePartition split_dataset(const Eigen::Ref<const Eigen::MatrixXd>& data,
                              Eigen::Index calibration_size, std::uint64_t seed,
                              const std::optional<std::vector<bool>>& labels) {
  const Eigen::Index m = data.rows();
  if (calibration_size < 1 || calibration_size >= m) {
    throw validation_error("split_dataset: calibration size must satisfy 1 <= N < M (got N=" +
                           std::to_string(calibration_size) + ", M=" + std::to_string(m) + ")");
  }
  if (labels && static_cast<Eigen::Index>(labels->size()) != m) {
    throw validation_error("split_dataset: labels length does not match dataset size");
  }

  auto eng = rng::make_stream(seed, {rng::kSplit});
  const std::vector<std::size_t> perm = rng::permutation(static_cast<std::size_t>(m), eng);

  SamplePartition part;
  part.seed = seed;
  part.calibration.resize(calibration_size, data.cols());
  part.training.resize(m - calibration_size, data.cols());
  if (labels) {
    part.calibration_labels.emplace(calibration_size);
    part.training_labels.emplace(m - calibration_size);
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index src = static_cast<Eigen::Index>(perm[i]);
    if (i < calibration_size) {
      part.calibration.row(i) = data.row(src);
      if (labels) (*part.calibration_labels)[i] = (*labels)[src];
    } else {
      part.training.row(i - calibration_size) = data.row(src);
      if (labels) (*part.training_labels)[i - calibration_size] = (*labels)[src];
    }
  }
  return part;
}

namespace {

bool has_duplicates(Eigen::VectorXd sorted_desc) {
  for (Eigen::Index i = 1; i < sorted_desc.size(); ++i)
    if (sorted_desc[i] == sorted_desc[i - 1]) return true;
  return false;
}

Eigen::VectorXd sorted_descending(const Eigen::VectorXd& scores) {
  std::vector<double> v(scores.data(), scores.data() + scores.size());
  std::stable_sort(v.begin(), v.end(), std::greater<double>());
  return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

} // namespace

ReachSetEstimate calibrate(ChristoffelModel model,
                           const Eigen::Ref<const Eigen::MatrixXd>& calibration, double delta) {
  if (calibration.rows() < 1) throw validation_error("calibrate: calibration set is empty");
  const Eigen::VectorXd scores = model.scores(calibration);
  const Eigen::VectorXd desc = sorted_descending(scores);

  ReachSetEstimate est{std::move(model)};
  est.threshold = desc[0];
  est.rank = 1;
  est.guarantee = split_bound(calibration.rows(), delta);
  est.tied_calibration_scores = has_duplicates(desc);
  return est;
}

ReachSetEstimate calibrate_robust(ChristoffelModel model,
                                  const Eigen::Ref<const Eigen::MatrixXd>& calibration,
                                  std::int64_t outlier_budget, double epsilon) {
  const Eigen::Index n = calibration.rows();
  if (n < 1) throw validation_error("calibrate_robust: calibration set is empty");
  if (outlier_budget < 0) throw validation_error("calibrate_robust: outlier budget must be >= 0");
  if (2 * outlier_budget + 1 >= n) {
    throw validation_error("calibrate_robust: requires 2p+1 < N (got p=" +
                           std::to_string(outlier_budget) + ", N=" + std::to_string(n) + ")");
  }
  if (!(epsilon > 0.0 && epsilon <= 1.0))
    throw validation_error("calibrate_robust: epsilon must lie in (0,1]");

  const Eigen::VectorXd scores = model.scores(calibration);
  const Eigen::VectorXd desc = sorted_descending(scores);

  ReachSetEstimate est{std::move(model)};
  est.threshold = desc[outlier_budget]; // (p+1)-th largest
  est.rank = static_cast<int>(outlier_budget) + 1;
  est.guarantee = robust_bound(n, outlier_budget, epsilon);
  est.tied_calibration_scores = has_duplicates(desc);
  return est;
}

double p_value(const Eigen::Ref<const Eigen::VectorXd>& calibration_scores, double x_score) {
  if (calibration_scores.size() < 1) throw validation_error("p_value: no calibration scores");
  if (std::isnan(x_score)) throw validation_error("p_value: score is NaN");
  const Eigen::Index count = (calibration_scores.array() >= x_score).count();
  return static_cast<double>(count) / static_cast<double>(calibration_scores.size());
}

double transductive_p_value(const TransductiveContext& ctx,
                            const Eigen::Ref<const Eigen::VectorXd>& x) {
  const TransductiveScores ts = ctx.transductive_scores(x);
  const Eigen::Index count = (ts.augmented.array() >= ts.query_score).count();
  return static_cast<double>(count) / static_cast<double>(ctx.n_train());
}

} // namespace creach
