#pragma once

#include "lrsetd/tensor.hpp"

#include <limits>
#include <vector>

namespace lrsetd {

/// Tucker model [[core; factors...]] with orthonormal factor columns.
struct TuckerModel {
  DenseTensor core;
  std::vector<DenseMatrix> factors;

  DenseTensor reconstruct() const { return multilinear(core, factors); }
};

/// Truncated HOSVD: factors[n] are the leading ranks[n] left singular vectors
/// of unfold(t, n), each column signed so its largest-magnitude entry is
/// nonnegative; core = t x_n factors[n]^T for every n.
TuckerModel hosvd(const DenseTensor& t, std::span<const std::size_t> ranks);

/// Leading left singular vectors of a matrix with the sign convention above.
DenseMatrix leading_left_singular_vectors(const DenseMatrix& m, std::size_t count);

struct TruncatedCore {
  TuckerModel model;
  double sparsity = 0.0;  // fraction of zero core entries after truncation
};

/// Zeroes core entries with |s| < tn (strict).
TruncatedCore truncate_core(const TuckerModel& model, double tn);

inline constexpr double kExactSnr = std::numeric_limits<double>::infinity();

/// 20 log10(||truth|| / ||approx - truth||) in dB. Returns kExactSnr when the
/// error norm is at most `exact_floor * ||truth||` (default: exactly zero).
double reconstruction_snr(const DenseTensor& truth, const DenseTensor& approx, double exact_floor = 0.0);

}  // namespace lrsetd
