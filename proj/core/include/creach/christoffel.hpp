#ifndef CREACH_CHRISTOFFEL_HPP
#define CREACH_CHRISTOFFEL_HPP

#include <optional>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "creach/monomials.hpp"

namespace creach {

/// Normalization convention for the empirical moment matrix.
///
/// `normalized` averages the outer products (1/N factor); `raw_sum` keeps
/// the plain sum. A global scaling of the moment matrix scales every score
/// by the same constant, so rankings, thresholds' selected indices,
/// p-values and conformal regions are identical under either convention.
/// The split-conformal path uses `normalized`; the rank-one incremental
/// (transductive) identities are exact for `raw_sum`, which is what
/// make_transductive() forces.
enum class Normalization { normalized, raw_sum };

/// Diagonal affine input map x' = offset + scale .* x.
struct AffineRescale {
  Eigen::VectorXd offset;
  Eigen::VectorXd scale;

  Eigen::VectorXd apply(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    return offset + scale.cwiseProduct(x);
  }
  Eigen::MatrixXd apply_rows(const Eigen::Ref<const Eigen::MatrixXd>& points) const {
    return (points * scale.asDiagonal()).rowwise() + offset.transpose();
  }

  /// Map sending the bounding box of `points` onto [-1, 1]^n.
  /// Zero-width coordinates keep unit scale (and will surface later as a
  /// singular moment matrix).
  static AffineRescale fit_unit_box(const Eigen::Ref<const Eigen::MatrixXd>& points);
};

struct FitOptions {
  /// Rescale inputs to the training bounding box mapped onto [-1, 1]^n.
  /// High degrees on raw coordinates overflow double-precision comfort;
  /// the map is stored in the model and applied to every query, and by
  /// affine equivariance changes scores only through conditioning.
  bool rescale = true;
  /// Added as ridge*I before factorization. Default 0: a singular moment
  /// matrix fails loudly instead of being silently regularized.
  double ridge = 0.0;
  Normalization normalization = Normalization::normalized;
};

/// Fitted empirical Christoffel polynomial x -> v_d(x)' M^-1 v_d(x).
///
/// Immutable after fit(); score()/scores() are pure and safe to call
/// concurrently from many threads.
class ChristoffelModel {
public:
  const MonomialBasis& basis() const { return basis_; }
  /// Empirical moment matrix (exactly symmetric, before ridge).
  const Eigen::MatrixXd& moment_matrix() const { return moment_; }
  const std::optional<AffineRescale>& rescale() const { return rescale_; }
  Eigen::Index n_train() const { return n_train_; }
  Normalization normalization() const { return normalization_; }
  double ridge() const { return ridge_; }

  /// Christoffel polynomial value at x: strictly positive, deterministic.
  double score(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  /// Batch variant, one score per row of `points`.
  Eigen::VectorXd scores(const Eigen::Ref<const Eigen::MatrixXd>& points) const;

  /// Rebuild a model from serialized parts. Refactorizes the stored moment
  /// matrix (plus ridge) and fails like fit() when it is not positive
  /// definite.
  static ChristoffelModel restore(MonomialBasis basis, Eigen::MatrixXd moment,
                                  std::optional<AffineRescale> rescale, Eigen::Index n_train,
                                  Normalization normalization, double ridge);

private:
  friend ChristoffelModel fit(const Eigen::Ref<const Eigen::MatrixXd>&, MonomialBasis,
                              const FitOptions&);

  ChristoffelModel(MonomialBasis basis, Eigen::MatrixXd moment,
                   std::optional<AffineRescale> rescale, Eigen::Index n_train,
                   Normalization normalization, double ridge);

  MonomialBasis basis_;
  Eigen::MatrixXd moment_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  std::optional<AffineRescale> rescale_;
  Eigen::Index n_train_;
  Normalization normalization_;
  double ridge_;
};

/// Fit the empirical moment matrix from samples (rows) and factorize it.
///
/// Requires at least s(d) samples (the moment matrix is almost surely
/// singular below that). Duplicate samples are allowed; NaN/Inf
/// coordinates are rejected. Throws numeric_error when the factorization
/// of (M + ridge*I) fails, advising a ridge or a lower degree.
ChristoffelModel fit(const Eigen::Ref<const Eigen::MatrixXd>& samples, MonomialBasis basis,
                     const FitOptions& options = {});

struct TransductiveScores {
  /// Score of the query under the dataset augmented with the query itself.
  double query_score = 0.0;
  /// Scores of every training point under the augmented dataset.
  Eigen::VectorXd augmented;
};

/// Precomputed state for calibration-set-free (transductive) evaluation.
///
/// Holds the raw-sum model, the base scores of all training points, and
/// the solved vectors y_i = M^-1 v_d(x_i). Precomputation costs
/// O(N s(d)^2) and storage O(N s(d)); each query then costs
/// O(N s(d) + s(d)^2) via the rank-one update identities
///   score_x(x)   = L / (1 + L),
///   score_x(x_i) = base_i - (v_d(x) . y_i)^2 / (1 + L),
/// with L the raw-sum model score at x.
class TransductiveContext {
public:
  const ChristoffelModel& model() const { return model_; }
  const Eigen::VectorXd& base_scores() const { return base_scores_; }
  /// s(d) x N matrix whose columns are the precomputed y_i.
  const Eigen::MatrixXd& precomputed_vectors() const { return y_; }
  Eigen::Index n_train() const { return base_scores_.size(); }

  TransductiveScores transductive_scores(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  /// Query scores and per-query augmented-score counts for many queries:
  /// returns for each row x of `queries` the pair (query_score,
  /// #augmented >= query_score). Equivalent to calling
  /// transductive_scores per row; batched for grid/false-positive sweeps.
  void p_value_counts(const Eigen::Ref<const Eigen::MatrixXd>& queries,
                      Eigen::VectorXd& query_scores, Eigen::VectorXi& counts) const;

private:
  friend TransductiveContext make_transductive(const Eigen::Ref<const Eigen::MatrixXd>&,
                                               MonomialBasis, const FitOptions&);

  TransductiveContext(ChristoffelModel model, Eigen::VectorXd base_scores, Eigen::MatrixXd y);

  ChristoffelModel model_;
  Eigen::VectorXd base_scores_;
  Eigen::MatrixXd y_;
};

/// Build the transductive context. The normalization option is ignored:
/// the incremental identities hold for the raw-sum matrix, which is forced
/// here (score rankings are normalization-invariant, see Normalization).
TransductiveContext make_transductive(const Eigen::Ref<const Eigen::MatrixXd>& samples,
                                      MonomialBasis basis, const FitOptions& options = {});

} // namespace creach

#endif
