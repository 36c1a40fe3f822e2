#include "lrsetd/hosvd.hpp"

#include "lrsetd/error.hpp"
#include "lrsetd/linalg.hpp"

#include <fmt/format.h>

#include <Eigen/Eigenvalues>

#include <cmath>

namespace lrsetd {

namespace {

void fix_signs(DenseMatrix& u) {
  for (Eigen::Index c = 0; c < u.cols(); ++c) {
    Eigen::Index arg = 0;
    u.col(c).cwiseAbs().maxCoeff(&arg);
    if (u(arg, c) < 0.0) u.col(c) *= -1.0;
  }
}

}  // namespace

DenseMatrix leading_left_singular_vectors(const DenseMatrix& m, std::size_t count) {
  const auto k = static_cast<Eigen::Index>(count);
  if (k < 1 || k > m.rows()) {
    throw InvalidArgument(fmt::format("requested {} singular vectors from a {}-row matrix", count, m.rows()));
  }
  DenseMatrix u;
  if (m.cols() >= k) {
    u = svd_reduced(m).u.leftCols(k);
  } else {
    // Fewer columns than requested vectors: the range is spanned by the
    // thin U, the rest is an orthonormal complement.
    Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(m * m.transpose());
    if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
    u = eig.eigenvectors().rowwise().reverse().leftCols(k);
  }
  fix_signs(u);
  return u;
}

TuckerModel hosvd(const DenseTensor& t, std::span<const std::size_t> ranks) {
  if (ranks.size() != t.order()) {
    throw InvalidArgument(fmt::format("hosvd: {} ranks for an order-{} tensor", ranks.size(), t.order()));
  }
  TuckerModel model;
  model.factors.reserve(t.order());
  for (std::size_t n = 0; n < t.order(); ++n) {
    if (ranks[n] < 1 || ranks[n] > t.dim(n)) {
      throw InvalidArgument(fmt::format("hosvd: rank {} out of range [1, {}] in mode {}", ranks[n], t.dim(n), n));
    }
    model.factors.push_back(leading_left_singular_vectors(unfold(t, n), ranks[n]));
  }
  model.core = multilinear_transposed(t, model.factors);
  return model;
}

TruncatedCore truncate_core(const TuckerModel& model, double tn) {
  if (!(tn >= 0.0)) throw InvalidArgument(fmt::format("truncate_core: threshold must be nonnegative, got {}", tn));
  TruncatedCore out{model, 0.0};
  std::size_t zeros = 0;
  for (double& s : out.model.core.data()) {
    if (std::abs(s) < tn) s = 0.0;
    if (s == 0.0) ++zeros;
  }
  out.sparsity = static_cast<double>(zeros) / static_cast<double>(out.model.core.size());
  return out;
}

double reconstruction_snr(const DenseTensor& truth, const DenseTensor& approx, double exact_floor) {
  if (!truth.same_shape(approx)) throw InvalidArgument("reconstruction_snr: shape mismatch");
  const double signal = frobenius(truth);
  if (signal == 0.0) throw InvalidArgument("reconstruction_snr: truth tensor is zero");
  const double error = (approx.vec() - truth.vec()).norm();
  if (error <= exact_floor * signal) return kExactSnr;
  return 20.0 * std::log10(signal / error);
}

}  // namespace lrsetd
