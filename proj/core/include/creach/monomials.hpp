#ifndef CREACH_MONOMIALS_HPP
#define CREACH_MONOMIALS_HPP

#include <cstdint>
#include <Eigen/Core>

namespace creach {

/// Canonical monomial basis of n-variate polynomials of degree <= d.
///
/// Exponent multi-indices are enumerated once at construction in graded
/// lexicographic order: ascending total degree, and within each degree
/// block lexicographically descending exponent tuples. For n=2, d=2 the
/// order is [1, x1, x2, x1^2, x1*x2, x2^2].
///
/// Immutable after construction; safe for concurrent shared reads.
class MonomialBasis {
public:
  MonomialBasis(int dimension, int degree);

  int dimension() const { return dimension_; }
  int degree() const { return degree_; }
  Eigen::Index size() const { return exponents_.rows(); }

  /// size() x dimension() integer matrix, one multi-index per row.
  const Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>& exponents() const {
    return exponents_;
  }

  /// Monomial vector v_d(x). Throws validation_error on dimension mismatch
  /// or non-finite coordinates.
  Eigen::VectorXd operator()(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  /// Row-wise evaluation: points is (count x n), result is (count x s(d)).
  Eigen::MatrixXd evaluate(const Eigen::Ref<const Eigen::MatrixXd>& points) const;

  /// s(d) = C(n+d, n), computed by iterative multiply/divide with overflow
  /// checks. Throws validation_error naming n and d if the count does not
  /// fit in a signed 64-bit integer.
  static std::int64_t basis_size(int dimension, int degree);

private:
  int dimension_;
  int degree_;
  Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic> exponents_;
};

} // namespace creach

#endif
