#include "creach/monomials.hpp"

#include <limits>
#include <string>
#include <vector>

#include "creach/errors.hpp"

namespace creach {

std::int64_t MonomialBasis::basis_size(int dimension, int degree) {
  if (dimension < 1) throw validation_error("basis_size: dimension must be >= 1, got " + std::to_string(dimension));
  if (degree < 0) throw validation_error("basis_size: degree must be >= 0, got " + std::to_string(degree));
  // C(n+d, n) = prod_{i=1..n} (d+i)/i, integer after each step.
  std::uint64_t result = 1;
  for (int i = 1; i <= dimension; ++i) {
    std::uint64_t next;
    if (__builtin_mul_overflow(result, static_cast<std::uint64_t>(degree) + i, &next) ||
        next / i > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
      throw validation_error("basis_size: C(n+d, n) overflows 64-bit integer for n=" +
                             std::to_string(dimension) + ", d=" + std::to_string(degree));
    }
    result = next / i;
  }
  return static_cast<std::int64_t>(result);
}

namespace {

void enumerate_block(int remaining, int coord, int n, std::vector<int>& current,
                     Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>& out, Eigen::Index& row) {
  if (coord == n - 1) {
    current[coord] = remaining;
    for (int k = 0; k < n; ++k) out(row, k) = current[k];
    ++row;
    return;
  }
  for (int e = remaining; e >= 0; --e) {
    current[coord] = e;
    enumerate_block(remaining - e, coord + 1, n, current, out, row);
  }
}

} // namespace

MonomialBasis::MonomialBasis(int dimension, int degree)
    : dimension_(dimension), degree_(degree) {
  const std::int64_t s = basis_size(dimension, degree);
  exponents_.resize(s, dimension);
  std::vector<int> current(dimension, 0);
  Eigen::Index row = 0;
  for (int total = 0; total <= degree; ++total) {
    enumerate_block(total, 0, dimension, current, exponents_, row);
  }
}

Eigen::VectorXd MonomialBasis::operator()(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != dimension_) {
    throw validation_error("evaluate_basis: point has dimension " + std::to_string(x.size()) +
                           ", basis expects " + std::to_string(dimension_));
  }
  if (!x.allFinite()) throw validation_error("evaluate_basis: point has non-finite coordinates");

  // Incremental power table per coordinate, then one product per monomial.
  Eigen::MatrixXd powers(dimension_, degree_ + 1);
  powers.col(0).setOnes();
  for (int e = 1; e <= degree_; ++e) powers.col(e) = powers.col(e - 1).cwiseProduct(x);

  Eigen::VectorXd v(exponents_.rows());
  for (Eigen::Index j = 0; j < exponents_.rows(); ++j) {
    double prod = 1.0;
    for (int k = 0; k < dimension_; ++k) prod *= powers(k, exponents_(j, k));
    v[j] = prod;
  }
  return v;
}

Eigen::MatrixXd MonomialBasis::evaluate(const Eigen::Ref<const Eigen::MatrixXd>& points) const {
  if (points.cols() != dimension_) {
    throw validation_error("evaluate_basis: points have dimension " + std::to_string(points.cols()) +
                           ", basis expects " + std::to_string(dimension_));
  }
  if (!points.allFinite()) throw validation_error("evaluate_basis: points have non-finite coordinates");

  Eigen::MatrixXd out(points.rows(), exponents_.rows());
  Eigen::MatrixXd powers(dimension_, degree_ + 1);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    powers.col(0).setOnes();
    for (int e = 1; e <= degree_; ++e)
      powers.col(e) = powers.col(e - 1).cwiseProduct(points.row(i).transpose());
    for (Eigen::Index j = 0; j < exponents_.rows(); ++j) {
      double prod = 1.0;
      for (int k = 0; k < dimension_; ++k) prod *= powers(k, exponents_(j, k));
      out(i, j) = prod;
    }
  }
  return out;
}

} // namespace creach
