#include "creach/christoffel.hpp"

#include <string>
#include <utility>

#include "creach/errors.hpp"

namespace creach {

AffineRescale AffineRescale::fit_unit_box(const Eigen::Ref<const Eigen::MatrixXd>& points) {
  const Eigen::VectorXd lo = points.colwise().minCoeff();
  const Eigen::VectorXd hi = points.colwise().maxCoeff();
  const Eigen::Index n = points.cols();
  AffineRescale map;
  map.scale.resize(n);
  map.offset.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double half = 0.5 * (hi[k] - lo[k]);
    const double center = 0.5 * (hi[k] + lo[k]);
    map.scale[k] = half > 0.0 ? 1.0 / half : 1.0;
    map.offset[k] = -center * map.scale[k];
  }
  return map;
}

ChristoffelModel::ChristoffelModel(MonomialBasis basis, Eigen::MatrixXd moment,
                                   std::optional<AffineRescale> rescale, Eigen::Index n_train,
                                   Normalization normalization, double ridge)
    : basis_(std::move(basis)),
      moment_(std::move(moment)),
      rescale_(std::move(rescale)),
      n_train_(n_train),
      normalization_(normalization),
      ridge_(ridge) {
  Eigen::MatrixXd factored = moment_;
  if (ridge_ != 0.0) factored.diagonal().array() += ridge_;
  llt_.compute(factored);
  if (llt_.info() != Eigen::Success) {
    throw numeric_error(
        "christoffel fit: moment matrix factorization failed (matrix is singular or "
        "indefinite); add a ridge term or lower the degree");
  }
}

ChristoffelModel ChristoffelModel::restore(MonomialBasis basis, Eigen::MatrixXd moment,
                                           std::optional<AffineRescale> rescale,
                                           Eigen::Index n_train, Normalization normalization,
                                           double ridge) {
  if (moment.rows() != basis.size() || moment.cols() != basis.size())
    throw validation_error("restore: moment matrix shape does not match the basis");
  return ChristoffelModel(std::move(basis), std::move(moment), std::move(rescale), n_train,
                          normalization, ridge);
}

ChristoffelModel fit(const Eigen::Ref<const Eigen::MatrixXd>& samples, MonomialBasis basis,
                     const FitOptions& options) {
  if (samples.cols() != basis.dimension()) {
    throw validation_error("fit: samples have dimension " + std::to_string(samples.cols()) +
                           ", basis expects " + std::to_string(basis.dimension()));
  }
  if (!samples.allFinite()) throw validation_error("fit: samples contain NaN or Inf coordinates");
  const Eigen::Index count = samples.rows();
  const Eigen::Index s = basis.size();
  if (count < s) {
    throw validation_error("fit: " + std::to_string(count) + " samples are insufficient for s(d)=" +
                           std::to_string(s) + " basis functions (need count >= s(d))");
  }
  if (options.ridge < 0.0) throw validation_error("fit: ridge must be non-negative");

  std::optional<AffineRescale> rescale;
  Eigen::MatrixXd mapped;
  if (options.rescale) {
    rescale = AffineRescale::fit_unit_box(samples);
    mapped = rescale->apply_rows(samples);
  } else {
    mapped = samples;
  }

  const Eigen::MatrixXd v = basis.evaluate(mapped);
  const double weight = options.normalization == Normalization::normalized
                            ? 1.0 / static_cast<double>(count)
                            : 1.0;
  Eigen::MatrixXd moment = Eigen::MatrixXd::Zero(s, s);
  moment.selfadjointView<Eigen::Lower>().rankUpdate(v.transpose(), weight);
  moment.triangularView<Eigen::StrictlyUpper>() = moment.transpose();

  return ChristoffelModel(std::move(basis), std::move(moment), std::move(rescale), count,
                          options.normalization, options.ridge);
}

double ChristoffelModel::score(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const Eigen::VectorXd v = rescale_ ? basis_(rescale_->apply(x)) : basis_(x);
  // v' M^-1 v = ||L^-1 v||^2 for M = L L'.
  return llt_.matrixL().solve(v).squaredNorm();
}

Eigen::VectorXd ChristoffelModel::scores(const Eigen::Ref<const Eigen::MatrixXd>& points) const {
  const Eigen::Index q = points.rows();
  Eigen::VectorXd out(q);
  constexpr Eigen::Index chunk = 8192;
  for (Eigen::Index start = 0; start < q; start += chunk) {
    const Eigen::Index len = std::min(chunk, q - start);
    const auto block = points.middleRows(start, len);
    Eigen::MatrixXd vt =
        (rescale_ ? basis_.evaluate(rescale_->apply_rows(block)) : basis_.evaluate(block))
            .transpose();
    llt_.matrixL().solveInPlace(vt);
    out.segment(start, len) = vt.colwise().squaredNorm();
  }
  return out;
}

TransductiveContext::TransductiveContext(ChristoffelModel model, Eigen::VectorXd base_scores,
                                         Eigen::MatrixXd y)
    : model_(std::move(model)), base_scores_(std::move(base_scores)), y_(std::move(y)) {}

TransductiveContext make_transductive(const Eigen::Ref<const Eigen::MatrixXd>& samples,
                                      MonomialBasis basis, const FitOptions& options) {
  FitOptions raw = options;
  raw.normalization = Normalization::raw_sum;
  ChristoffelModel model = fit(samples, std::move(basis), raw);

  const Eigen::MatrixXd mapped =
      model.rescale() ? model.rescale()->apply_rows(samples) : Eigen::MatrixXd(samples);
  const Eigen::MatrixXd v = model.basis().evaluate(mapped); // N x s

  // y_i = M^-1 v_i, base_i = v_i . y_i; the same dot product feeds the
  // rank-one update at query time.
  Eigen::MatrixXd factored = model.moment_matrix();
  if (model.ridge() != 0.0) factored.diagonal().array() += model.ridge();
  Eigen::LLT<Eigen::MatrixXd> llt(factored);
  Eigen::MatrixXd y = llt.solve(v.transpose()); // s x N
  Eigen::VectorXd base = (v.transpose().cwiseProduct(y)).colwise().sum();

  return TransductiveContext(std::move(model), std::move(base), std::move(y));
}

TransductiveScores TransductiveContext::transductive_scores(
    const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const auto& rescale = model_.rescale();
  const Eigen::VectorXd v = rescale ? model_.basis()(rescale->apply(x)) : model_.basis()(x);

  const double lambda = model_.score(x);
  TransductiveScores result;
  result.query_score = lambda / (1.0 + lambda);
  const Eigen::VectorXd w = y_.transpose() * v; // w_i = v_d(x) . y_i
  result.augmented = base_scores_ - w.cwiseAbs2() / (1.0 + lambda);
  return result;
}

void TransductiveContext::p_value_counts(const Eigen::Ref<const Eigen::MatrixXd>& queries,
                                         Eigen::VectorXd& query_scores,
                                         Eigen::VectorXi& counts) const {
  const Eigen::Index q = queries.rows();
  query_scores.resize(q);
  counts.resize(q);
  const auto& rescale = model_.rescale();
  constexpr Eigen::Index chunk = 1024;
  for (Eigen::Index start = 0; start < q; start += chunk) {
    const Eigen::Index len = std::min(chunk, q - start);
    const auto block = queries.middleRows(start, len);
    const Eigen::MatrixXd v =
        rescale ? model_.basis().evaluate(rescale->apply_rows(block))
                : model_.basis().evaluate(block); // len x s
    const Eigen::VectorXd lambdas = model_.scores(block);
    const Eigen::MatrixXd w = v * y_; // len x N
    for (Eigen::Index i = 0; i < len; ++i) {
      const double lambda = lambdas[i];
      const double qs = lambda / (1.0 + lambda);
      const Eigen::ArrayXd aug =
          base_scores_.array() - w.row(i).transpose().array().square() / (1.0 + lambda);
      query_scores[start + i] = qs;
      counts[start + i] = static_cast<int>((aug >= qs).count());
    }
  }
}

} // namespace creach
