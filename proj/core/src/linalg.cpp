#include "lrsetd/linalg.hpp"

#include "lrsetd/error.hpp"

#include <fmt/format.h>

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace lrsetd {

namespace {

constexpr double kPowerTol = 1e-10;
constexpr int kPowerMaxIter = 500;
constexpr Eigen::Index kExactNormLimit = 64;

void require_finite(const DenseMatrix& m, const char* what) {
  if (!m.allFinite()) throw NumericalError(fmt::format("{}: non-finite input", what));
}

void require_tau(double tau, const char* what) {
  if (!(tau >= 0.0)) throw InvalidArgument(fmt::format("{}: threshold must be nonnegative, got {}", what, tau));
}

double soft(double x, double tau) {
  const double mag = std::abs(x) - tau;
  if (mag <= 0.0) return 0.0;
  return x > 0.0 ? mag : -mag;
}

}  // namespace

DenseMatrix SvdFactors::reconstruct() const { return u * singular_values.asDiagonal() * v.transpose(); }

SvdFactors svd_reduced(const DenseMatrix& m) {
  require_finite(m, "svd_reduced");
  SvdFactors f;
  if (m.size() == 0) {
    f.u = DenseMatrix(m.rows(), 0);
    f.v = DenseMatrix(m.cols(), 0);
    return f;
  }
  // Jacobi is accurate to full relative precision on the small factor
  // matrices this library works with; BDC takes over for wide unfoldings.
  if (std::min(m.rows(), m.cols()) <= 16) {
    Eigen::JacobiSVD<DenseMatrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    f.u = svd.matrixU();
    f.singular_values = svd.singularValues();
    f.v = svd.matrixV();
  } else {
    Eigen::BDCSVD<DenseMatrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    f.u = svd.matrixU();
    f.singular_values = svd.singularValues();
    f.v = svd.matrixV();
  }
  if (!f.u.allFinite() || !f.v.allFinite() || !f.singular_values.allFinite()) {
    throw NumericalError("svd_reduced: decomposition produced non-finite factors");
  }
  return f;
}

DenseMatrix svd_shrink(const DenseMatrix& m, double tau) {
  require_tau(tau, "svd_shrink");
  if (tau == 0.0) return m;
  SvdFactors f = svd_reduced(m);
  Eigen::Index keep = 0;
  while (keep < f.singular_values.size() && f.singular_values[keep] > tau) ++keep;
  if (keep == 0) return DenseMatrix::Zero(m.rows(), m.cols());
  const Eigen::VectorXd shrunk = f.singular_values.head(keep).array() - tau;
  return f.u.leftCols(keep) * shrunk.asDiagonal() * f.v.leftCols(keep).transpose();
}

DenseMatrix soft_shrink(const DenseMatrix& m, double tau) {
  require_tau(tau, "soft_shrink");
  return m.unaryExpr([tau](double x) { return soft(x, tau); });
}

DenseTensor soft_shrink(const DenseTensor& t, double tau) {
  require_tau(tau, "soft_shrink");
  DenseTensor out = t;
  for (double& x : out.data()) x = soft(x, tau);
  return out;
}

double nuclear_norm(const DenseMatrix& m) {
  if (m.size() == 0) return 0.0;
  return svd_reduced(m).singular_values.sum();
}

SpdFactorization::SpdFactorization(const DenseMatrix& a) {
  if (a.rows() != a.cols()) throw InvalidArgument("SpdFactorization: matrix is not square");
  require_finite(a, "SpdFactorization");
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw NumericalError("SpdFactorization: matrix is not symmetric");
  }
  llt_.compute(a);
  if (llt_.info() != Eigen::Success) {
    throw NumericalError("SpdFactorization: matrix is not positive definite");
  }
  const Eigen::VectorXd diag = llt_.matrixLLT().diagonal();
  if (!(diag.minCoeff() > 0.0)) throw NumericalError("SpdFactorization: singular factor");
}

DenseMatrix SpdFactorization::solve(const DenseMatrix& b) const {
  if (b.rows() != llt_.rows()) {
    throw InvalidArgument(fmt::format("spd solve: rhs has {} rows, system is {}", b.rows(), llt_.rows()));
  }
  return llt_.solve(b);
}

DenseMatrix spd_solve(const DenseMatrix& a, const DenseMatrix& b) { return SpdFactorization(a).solve(b); }

double spectral_norm(const DenseMatrix& m) {
  require_finite(m, "spectral_norm");
  if (m.size() == 0) return 0.0;
  const Eigen::Index small = std::min(m.rows(), m.cols());
  if (small <= kExactNormLimit) {
    return svd_reduced(m).singular_values[0];
  }
  // Iterate on the smaller Gram matrix.
  const DenseMatrix gram = m.rows() < m.cols() ? DenseMatrix(m * m.transpose()) : DenseMatrix(m.transpose() * m);
  Eigen::VectorXd v = Eigen::VectorXd::Ones(gram.rows()) / std::sqrt(static_cast<double>(gram.rows()));
  double estimate = 0.0;
  for (int it = 0; it < kPowerMaxIter; ++it) {
    Eigen::VectorXd w = gram * v;
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    const double next = v.dot(w);
    v = w / norm;
    if (it > 0 && std::abs(next - estimate) <= kPowerTol * std::abs(next)) {
      return std::sqrt(std::max(next, 0.0));
    }
    estimate = next;
  }
  return svd_reduced(m).singular_values[0] * (1.0 + 1e-6);
}

DenseMatrix toeplitz_diff(std::size_t n) {
  if (n == 0) throw InvalidArgument("toeplitz_diff: size must be positive");
  const auto k = static_cast<Eigen::Index>(n);
  DenseMatrix a = DenseMatrix::Identity(k, k);
  for (Eigen::Index j = 0; j + 1 < k; ++j) a(j, j + 1) = -1.0;
  return a;
}

}  // namespace lrsetd
