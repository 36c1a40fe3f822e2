#pragma once

#include "lrsetd/tensor.hpp"

#include <Eigen/Cholesky>

namespace lrsetd {

/// Reduced SVD m = u * diag(singular_values) * v^T, values nonincreasing.
struct SvdFactors {
  DenseMatrix u;
  Eigen::VectorXd singular_values;
  DenseMatrix v;

  DenseMatrix reconstruct() const;
};

/// Thin SVD with min(rows, cols) triplets. Throws NumericalError on
/// non-finite input.
SvdFactors svd_reduced(const DenseMatrix& m);

/// Singular value shrinkage U max(Sigma - tau, 0) V^T, the proximal map of
/// tau * nuclear norm.
DenseMatrix svd_shrink(const DenseMatrix& m, double tau);

/// Elementwise sign(x) * max(|x| - tau, 0).
DenseMatrix soft_shrink(const DenseMatrix& m, double tau);
DenseTensor soft_shrink(const DenseTensor& t, double tau);

double nuclear_norm(const DenseMatrix& m);

/// Cholesky factorization of a symmetric positive definite matrix, reusable
/// across right-hand sides.
class SpdFactorization {
 public:
  SpdFactorization() = default;
  /// Throws NumericalError when `a` is not symmetric positive definite.
  explicit SpdFactorization(const DenseMatrix& a);

  DenseMatrix solve(const DenseMatrix& b) const;
  Eigen::Index dim() const noexcept { return llt_.rows(); }

 private:
  Eigen::LLT<DenseMatrix> llt_;
};

/// x with a * x = b for symmetric positive definite a.
DenseMatrix spd_solve(const DenseMatrix& a, const DenseMatrix& b);

/// Largest singular value.
///
/// Power iteration on m^T m (tolerance 1e-10, at most 500 steps) for large
/// operands; when the iteration stalls the SVD value is returned scaled by
/// (1 + 1e-6) so callers using it as a Lipschitz bound never see an
/// underestimate. Operands whose smaller side is at most 64 go straight to
/// the SVD.
double spectral_norm(const DenseMatrix& m);

/// n x n matrix with ones on the diagonal and -1 on the first superdiagonal.
DenseMatrix toeplitz_diff(std::size_t n);

}  // namespace lrsetd
