#pragma once

#include "lrsetd/tensor.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace lrsetd {

enum class MissingKind {
  random,                // uniform retention at `ratio`
  drop_every_kth_slice,  // slices phase, phase + k, ... of `mode` missing
  time_window,           // indices with (i mod period) in [window_start, window_start + window_length)
  whole_slices,          // explicit slice list of `mode` missing
  composite,             // `structure` drop plus uniform retention at `ratio` on the rest
};

std::string_view to_string(MissingKind k);
MissingKind parse_missing_kind(std::string_view s);

/// Description of a missing-data scenario. Modes and slice indices are
/// zero-based.
struct MissingSpec {
  MissingKind kind = MissingKind::random;
  std::size_t mode = 0;
  double ratio = 1.0;  // sample (retention) ratio for random / composite
  std::size_t k = 1;
  std::size_t phase = 0;
  std::size_t period = 0;  // 0: the full extent of `mode`
  std::size_t window_start = 0;
  std::size_t window_length = 0;
  std::vector<std::size_t> slices;
  MissingKind structure = MissingKind::whole_slices;  // composite only
  std::uint64_t seed = 0;

  friend bool operator==(const MissingSpec&, const MissingSpec&) = default;
};

/// Exactly round(ratio * prod(dims)) observed entries, uniform without
/// replacement, a pure function of (dims, ratio, seed).
ObservationMask random_mask(const Dims& dims, double ratio, std::uint64_t seed);

/// Mask for any MissingSpec; throws InvalidArgument when the spec does not
/// fit `dims`.
ObservationMask structured_mask(const Dims& dims, const MissingSpec& spec);

/// Flat JSON document: kind, mode, ratio, k, phase, period, window_start,
/// window_length, slices, structure, seed.
std::string to_json(const MissingSpec& spec);
MissingSpec missing_spec_from_json(std::string_view json);

}  // namespace lrsetd
