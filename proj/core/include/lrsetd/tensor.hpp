#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace lrsetd {

using DenseMatrix = Eigen::MatrixXd;
using Dims = std::vector<std::size_t>;

/// Product of all extents; throws InvalidArgument on overflow.
std::size_t element_count(std::span<const std::size_t> dims);

/// Dense N-order real tensor stored with the first index fastest.
///
/// Mode indices are zero-based throughout the API: mode 0 is the first
/// dimension. Entry (i_0, ..., i_{N-1}) lives at offset
/// i_0 + I_0 * (i_1 + I_1 * (i_2 + ...)).
class DenseTensor {
 public:
  DenseTensor() = default;

  /// Zero tensor with the given extents.
  explicit DenseTensor(Dims dims);
  DenseTensor(Dims dims, std::vector<double> data);

  static DenseTensor filled(Dims dims, double value);

  const Dims& dims() const noexcept { return dims_; }
  std::size_t dim(std::size_t mode) const { return dims_.at(mode); }
  std::size_t order() const noexcept { return dims_.size(); }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }
  const std::vector<double>& values() const noexcept { return data_; }

  double operator[](std::size_t offset) const { return data_[offset]; }
  double& operator[](std::size_t offset) { return data_[offset]; }

  std::size_t offset(std::span<const std::size_t> index) const;
  double at(std::span<const std::size_t> index) const { return data_[offset(index)]; }
  double& at(std::span<const std::size_t> index) { return data_[offset(index)]; }
  double at(std::initializer_list<std::size_t> index) const;
  double& at(std::initializer_list<std::size_t> index);

  /// Flat Eigen views over the storage, for elementwise arithmetic.
  Eigen::Map<const Eigen::VectorXd> vec() const;
  Eigen::Map<Eigen::VectorXd> vec();

  DenseTensor& operator+=(const DenseTensor& rhs);
  DenseTensor& operator-=(const DenseTensor& rhs);
  DenseTensor& operator*=(double scale);

  friend DenseTensor operator+(DenseTensor lhs, const DenseTensor& rhs) { return lhs += rhs; }
  friend DenseTensor operator-(DenseTensor lhs, const DenseTensor& rhs) { return lhs -= rhs; }
  friend DenseTensor operator*(DenseTensor lhs, double s) { return lhs *= s; }
  friend DenseTensor operator*(double s, DenseTensor rhs) { return rhs *= s; }

  bool same_shape(const DenseTensor& other) const noexcept { return dims_ == other.dims_; }
  bool all_finite() const noexcept;

  friend bool operator==(const DenseTensor&, const DenseTensor&) = default;

 private:
  Dims dims_;
  std::vector<double> data_;
};

/// Set of observed multi-indices over a dimension vector.
///
/// Indices are held as sorted, unique linear offsets (same layout as
/// DenseTensor) alongside a dense membership bitmap built once at
/// construction.
class ObservationMask {
 public:
  ObservationMask() = default;

  /// Throws InvalidArgument on out-of-range offsets. Duplicates are merged.
  ObservationMask(Dims dims, std::vector<std::size_t> observed_offsets);

  static ObservationMask full(Dims dims);
  static ObservationMask empty(Dims dims);
  /// Observed wherever `indicator` is nonzero.
  static ObservationMask from_indicator(const DenseTensor& indicator);
  static ObservationMask from_tuples(Dims dims, const std::vector<std::vector<std::size_t>>& tuples);

  const Dims& dims() const noexcept { return dims_; }
  std::size_t total() const noexcept { return dense_.size(); }
  std::size_t observed_count() const noexcept { return observed_.size(); }
  std::size_t complement_count() const noexcept { return total() - observed_count(); }

  bool contains(std::size_t offset) const { return dense_[offset] != 0; }
  bool contains(std::span<const std::size_t> index) const;

  /// Sorted observed offsets.
  std::span<const std::size_t> observed() const noexcept { return observed_; }
  /// Multi-index of the k-th observed entry.
  std::vector<std::size_t> tuple(std::size_t k) const;
  /// One byte per entry, 1 = observed.
  std::span<const std::uint8_t> dense() const noexcept { return dense_; }

  /// 0/1 indicator tensor.
  DenseTensor to_indicator() const;

  friend bool operator==(const ObservationMask& a, const ObservationMask& b) {
    return a.dims_ == b.dims_ && a.observed_ == b.observed_;
  }

 private:
  Dims dims_;
  std::vector<std::size_t> observed_;
  std::vector<std::uint8_t> dense_;
};

/// Mode-n matricization: I_n x prod_{l != n} I_l, columns ordered by
/// j = sum_{l != n} i_l J_l with J_l = prod_{t < l, t != n} I_t.
DenseMatrix unfold(const DenseTensor& t, std::size_t mode);

/// Inverse of unfold for the given target extents.
DenseTensor fold(const DenseMatrix& m, std::size_t mode, const Dims& dims);

/// t x_n m: replaces I_n by m.rows().
DenseTensor mode_product(const DenseTensor& t, const DenseMatrix& m, std::size_t mode);

/// [[s; A_0, ..., A_{N-1}]] by sequential mode products.
DenseTensor multilinear(const DenseTensor& s, std::span<const DenseMatrix> factors);

/// s x_0 A_0^T x_1 A_1^T ... (projection onto factor column spaces).
DenseTensor multilinear_transposed(const DenseTensor& t, std::span<const DenseMatrix> factors);

/// Block Kronecker product a (x) b.
DenseMatrix kron(const DenseMatrix& a, const DenseMatrix& b);

double inner(const DenseTensor& a, const DenseTensor& b);
double frobenius(const DenseTensor& a);

/// Copy of `t` with the entries in `mask` overwritten from `source`.
DenseTensor project_assign(const DenseTensor& t, const ObservationMask& mask, const DenseTensor& source);

/// P_Omega: keeps masked entries of `t`, zeroes the rest.
DenseTensor project(const DenseTensor& t, const ObservationMask& mask);

}  // namespace lrsetd
