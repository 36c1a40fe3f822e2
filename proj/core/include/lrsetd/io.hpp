#pragma once

#include "lrsetd/tensor.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace lrsetd {

// Tensor files ("LRT1"), little-endian:
//   bytes 0-3   magic "LRT1"
//   u32         order N
//   u64 x N     extents
//   f64 x prod  payload, first index fastest
void write_tensor(const std::filesystem::path& path, const DenseTensor& t);
DenseTensor read_tensor(const std::filesystem::path& path);

/// Masks are stored as LRT1 tensors of 0/1 values.
void write_mask(const std::filesystem::path& path, const ObservationMask& mask);
ObservationMask read_mask(const std::filesystem::path& path);

/// Binary PPM (P6) -> H x W x 3 or PGM (P5) -> H x W x 1, values in [0, 255].
/// Only maxval 255 is accepted.
DenseTensor read_image(const std::filesystem::path& path);

/// Writes P6 for 3 channels and P5 for 1, rounding half away from zero and
/// clamping to [0, 255].
void write_image(const std::filesystem::path& path, const DenseTensor& image);

/// Every PGM in `dir`, lexicographic by filename, stacked as H x W x K.
DenseTensor read_pgm_stack(const std::filesystem::path& dir);

/// Rectangular CSV of reals, rows = OD pairs, columns = time.
DenseMatrix read_traffic_csv(const std::filesystem::path& path);
void write_traffic_csv(const std::filesystem::path& path, const DenseMatrix& m);

/// Reshaping of a traffic matrix into a third-order tensor.
struct Tensorization {
  enum class Kind { none, otd, oot };
  Kind kind = Kind::none;
  // otd: (pairs, intervals_per_day, days); oot: (sources, destinations, intervals)
  std::size_t a = 0;
  std::size_t b = 0;
  std::size_t c = 0;

  friend bool operator==(const Tensorization&, const Tensorization&) = default;
};

/// Parses "none", "otd:P,T,D" or "oot:S,D,T".
Tensorization parse_tensorization(std::string_view text);
std::string to_string(const Tensorization& t);

/// otd: entry (o, t, d) = m(o, d*T + t).
/// oot: entry (s, r, k) = m(r*S + s, k), pairs unpacked source-fastest.
/// none: the matrix as an I x J x 1 tensor.
DenseTensor tensorize(const DenseMatrix& m, const Tensorization& how);

/// Inverse of tensorize.
DenseMatrix flatten(const DenseTensor& t, const Tensorization& how);

}  // namespace lrsetd
