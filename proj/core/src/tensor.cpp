#include "lrsetd/tensor.hpp"

#include "lrsetd/error.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace lrsetd {

namespace {

void require_same_shape(const DenseTensor& a, const DenseTensor& b, const char* what) {
  if (!a.same_shape(b)) {
    throw InvalidArgument(fmt::format("{}: shape mismatch ({}) vs ({})", what,
                                      fmt::join(a.dims(), "x"), fmt::join(b.dims(), "x")));
  }
}

void require_mode(const DenseTensor& t, std::size_t mode, const char* what) {
  if (mode >= t.order()) {
    throw InvalidArgument(fmt::format("{}: mode {} out of range for order {}", what, mode, t.order()));
  }
}

// Extents before the mode, at the mode, and after it.
struct Split {
  std::size_t before = 1;
  std::size_t extent = 1;
  std::size_t after = 1;
};

Split split_at(const Dims& dims, std::size_t mode) {
  Split s;
  for (std::size_t l = 0; l < mode; ++l) s.before *= dims[l];
  s.extent = dims[mode];
  for (std::size_t l = mode + 1; l < dims.size(); ++l) s.after *= dims[l];
  return s;
}

using ConstMatMap = Eigen::Map<const DenseMatrix>;
using MatMap = Eigen::Map<DenseMatrix>;

}  // namespace

std::size_t element_count(std::span<const std::size_t> dims) {
  std::size_t n = 1;
  for (std::size_t d : dims) {
    if (d != 0 && n > std::numeric_limits<std::size_t>::max() / d) {
      throw InvalidArgument("dimension product overflows");
    }
    n *= d;
  }
  return n;
}

DenseTensor::DenseTensor(Dims dims) : dims_(std::move(dims)) {
  if (dims_.empty()) throw InvalidArgument("tensor order must be at least 1");
  for (std::size_t d : dims_) {
    if (d == 0) throw InvalidArgument("tensor extents must be positive");
  }
  data_.assign(element_count(dims_), 0.0);
}

DenseTensor::DenseTensor(Dims dims, std::vector<double> data) : DenseTensor(std::move(dims)) {
  if (data.size() != data_.size()) {
    throw InvalidArgument(
        fmt::format("data length {} does not match extents product {}", data.size(), data_.size()));
  }
  data_ = std::move(data);
}

DenseTensor DenseTensor::filled(Dims dims, double value) {
  DenseTensor t(std::move(dims));
  std::fill(t.data_.begin(), t.data_.end(), value);
  return t;
}

std::size_t DenseTensor::offset(std::span<const std::size_t> index) const {
  if (index.size() != dims_.size()) {
    throw InvalidArgument(fmt::format("index arity {} does not match order {}", index.size(), dims_.size()));
  }
  std::size_t off = 0;
  std::size_t stride = 1;
  for (std::size_t l = 0; l < dims_.size(); ++l) {
    if (index[l] >= dims_[l]) {
      throw InvalidArgument(fmt::format("index {} out of range in mode {}", index[l], l));
    }
    off += index[l] * stride;
    stride *= dims_[l];
  }
  return off;
}

double DenseTensor::at(std::initializer_list<std::size_t> index) const {
  return at(std::span<const std::size_t>(index.begin(), index.size()));
}

double& DenseTensor::at(std::initializer_list<std::size_t> index) {
  return at(std::span<const std::size_t>(index.begin(), index.size()));
}

Eigen::Map<const Eigen::VectorXd> DenseTensor::vec() const {
  return {data_.data(), static_cast<Eigen::Index>(data_.size())};
}

Eigen::Map<Eigen::VectorXd> DenseTensor::vec() {
  return {data_.data(), static_cast<Eigen::Index>(data_.size())};
}

DenseTensor& DenseTensor::operator+=(const DenseTensor& rhs) {
  require_same_shape(*this, rhs, "operator+=");
  vec() += rhs.vec();
  return *this;
}

DenseTensor& DenseTensor::operator-=(const DenseTensor& rhs) {
  require_same_shape(*this, rhs, "operator-=");
  vec() -= rhs.vec();
  return *this;
}

DenseTensor& DenseTensor::operator*=(double scale) {
  vec() *= scale;
  return *this;
}

bool DenseTensor::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

ObservationMask::ObservationMask(Dims dims, std::vector<std::size_t> observed_offsets)
    : dims_(std::move(dims)), observed_(std::move(observed_offsets)) {
  const std::size_t n = element_count(dims_);
  std::sort(observed_.begin(), observed_.end());
  observed_.erase(std::unique(observed_.begin(), observed_.end()), observed_.end());
  if (!observed_.empty() && observed_.back() >= n) {
    throw InvalidArgument(fmt::format("observed offset {} out of range ({} entries)", observed_.back(), n));
  }
  dense_.assign(n, 0);
  for (std::size_t off : observed_) dense_[off] = 1;
}

ObservationMask ObservationMask::full(Dims dims) {
  std::vector<std::size_t> all(element_count(dims));
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return {std::move(dims), std::move(all)};
}

ObservationMask ObservationMask::empty(Dims dims) { return {std::move(dims), {}}; }

ObservationMask ObservationMask::from_indicator(const DenseTensor& indicator) {
  std::vector<std::size_t> obs;
  for (std::size_t i = 0; i < indicator.size(); ++i) {
    if (indicator[i] != 0.0) obs.push_back(i);
  }
  return {indicator.dims(), std::move(obs)};
}

ObservationMask ObservationMask::from_tuples(Dims dims, const std::vector<std::vector<std::size_t>>& tuples) {
  DenseTensor probe(dims);
  std::vector<std::size_t> obs;
  obs.reserve(tuples.size());
  for (const auto& t : tuples) obs.push_back(probe.offset(t));
  return {std::move(dims), std::move(obs)};
}

bool ObservationMask::contains(std::span<const std::size_t> index) const {
  std::size_t off = 0;
  std::size_t stride = 1;
  if (index.size() != dims_.size()) throw InvalidArgument("mask index arity mismatch");
  for (std::size_t l = 0; l < dims_.size(); ++l) {
    if (index[l] >= dims_[l]) throw InvalidArgument("mask index out of range");
    off += index[l] * stride;
    stride *= dims_[l];
  }
  return contains(off);
}

std::vector<std::size_t> ObservationMask::tuple(std::size_t k) const {
  std::size_t off = observed_.at(k);
  std::vector<std::size_t> idx(dims_.size());
  for (std::size_t l = 0; l < dims_.size(); ++l) {
    idx[l] = off % dims_[l];
    off /= dims_[l];
  }
  return idx;
}

DenseTensor ObservationMask::to_indicator() const {
  DenseTensor t(dims_);
  for (std::size_t off : observed_) t[off] = 1.0;
  return t;
}

DenseMatrix unfold(const DenseTensor& t, std::size_t mode) {
  require_mode(t, mode, "unfold");
  const Split s = split_at(t.dims(), mode);
  const auto rows = static_cast<Eigen::Index>(s.extent);
  const auto before = static_cast<Eigen::Index>(s.before);
  DenseMatrix out(rows, before * static_cast<Eigen::Index>(s.after));
  const double* src = t.data().data();
  if (s.before == 1) {
    out = ConstMatMap(src, rows, static_cast<Eigen::Index>(s.after));
    return out;
  }
  // Column block r holds the transposed (before x extent) slab r.
  for (std::size_t r = 0; r < s.after; ++r) {
    ConstMatMap slab(src + r * s.before * s.extent, before, rows);
    out.middleCols(static_cast<Eigen::Index>(r) * before, before) = slab.transpose();
  }
  return out;
}

DenseTensor fold(const DenseMatrix& m, std::size_t mode, const Dims& dims) {
  if (mode >= dims.size()) throw InvalidArgument(fmt::format("fold: mode {} out of range", mode));
  DenseTensor t(dims);
  const Split s = split_at(dims, mode);
  if (static_cast<std::size_t>(m.rows()) != s.extent || static_cast<std::size_t>(m.cols()) != s.before * s.after) {
    throw InvalidArgument(fmt::format("fold: matrix {}x{} does not match mode-{} unfolding of ({})", m.rows(),
                                      m.cols(), mode, fmt::join(dims, "x")));
  }
  double* dst = t.data().data();
  const auto rows = static_cast<Eigen::Index>(s.extent);
  const auto before = static_cast<Eigen::Index>(s.before);
  if (s.before == 1) {
    MatMap(dst, rows, static_cast<Eigen::Index>(s.after)) = m;
    return t;
  }
  for (std::size_t r = 0; r < s.after; ++r) {
    MatMap slab(dst + r * s.before * s.extent, before, rows);
    slab = m.middleCols(static_cast<Eigen::Index>(r) * before, before).transpose();
  }
  return t;
}

DenseTensor mode_product(const DenseTensor& t, const DenseMatrix& m, std::size_t mode) {
  require_mode(t, mode, "mode_product");
  if (static_cast<std::size_t>(m.cols()) != t.dim(mode)) {
    throw InvalidArgument(fmt::format("mode_product: matrix has {} columns, mode {} has extent {}", m.cols(), mode,
                                      t.dim(mode)));
  }
  if (m.rows() == 0) throw InvalidArgument("mode_product: matrix has no rows");
  Dims out_dims = t.dims();
  out_dims[mode] = static_cast<std::size_t>(m.rows());
  DenseTensor out(out_dims);
  const Split s = split_at(t.dims(), mode);
  const auto in_ext = static_cast<Eigen::Index>(s.extent);
  const auto out_ext = m.rows();
  const auto before = static_cast<Eigen::Index>(s.before);
  const double* src = t.data().data();
  double* dst = out.data().data();
  if (s.before == 1) {
    MatMap(dst, out_ext, static_cast<Eigen::Index>(s.after)).noalias() =
        m * ConstMatMap(src, in_ext, static_cast<Eigen::Index>(s.after));
    return out;
  }
  for (std::size_t r = 0; r < s.after; ++r) {
    ConstMatMap slab(src + r * s.before * s.extent, before, in_ext);
    MatMap res(dst + r * s.before * static_cast<std::size_t>(out_ext), before, out_ext);
    res.noalias() = slab * m.transpose();
  }
  return out;
}

DenseTensor multilinear(const DenseTensor& s, std::span<const DenseMatrix> factors) {
  if (factors.size() != s.order()) {
    throw InvalidArgument(fmt::format("multilinear: {} factors for order-{} core", factors.size(), s.order()));
  }
  DenseTensor out = s;
  for (std::size_t n = 0; n < factors.size(); ++n) out = mode_product(out, factors[n], n);
  return out;
}

DenseTensor multilinear_transposed(const DenseTensor& t, std::span<const DenseMatrix> factors) {
  if (factors.size() != t.order()) {
    throw InvalidArgument(fmt::format("multilinear_transposed: {} factors for order {}", factors.size(), t.order()));
  }
  DenseTensor out = t;
  for (std::size_t n = 0; n < factors.size(); ++n) out = mode_product(out, factors[n].transpose(), n);
  return out;
}

DenseMatrix kron(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

double inner(const DenseTensor& a, const DenseTensor& b) {
  require_same_shape(a, b, "inner");
  return a.vec().dot(b.vec());
}

double frobenius(const DenseTensor& a) { return a.vec().norm(); }

DenseTensor project_assign(const DenseTensor& t, const ObservationMask& mask, const DenseTensor& source) {
  require_same_shape(t, source, "project_assign");
  if (t.dims() != mask.dims()) throw InvalidArgument("project_assign: mask shape mismatch");
  DenseTensor out = t;
  for (std::size_t off : mask.observed()) out[off] = source[off];
  return out;
}

DenseTensor project(const DenseTensor& t, const ObservationMask& mask) {
  return project_assign(DenseTensor(t.dims()), mask, t);
}

}  // namespace lrsetd
