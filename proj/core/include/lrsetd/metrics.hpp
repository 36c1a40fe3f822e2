#pragma once

#include "lrsetd/tensor.hpp"

#include <limits>
#include <optional>

namespace lrsetd {

/// Sum |truth - recovered| / sum |truth| over the unobserved entries.
double nmae(const DenseTensor& truth, const DenseTensor& recovered, const ObservationMask& mask);

enum class PsnrMode {
  complement,   // squared error summed over the unobserved entries
  full_tensor,  // squared error summed over every entry
};

inline constexpr double kExactPsnr = std::numeric_limits<double>::infinity();

/// 10 log10(peak^2 / (SSE / |complement|)). `peak` defaults to the largest
/// entry of `truth`. Returns kExactPsnr for zero error.
double psnr(const DenseTensor& truth, const DenseTensor& recovered, const ObservationMask& mask,
            std::optional<double> peak = std::nullopt, PsnrMode mode = PsnrMode::complement);

/// ||recovered - truth||_F / ||truth||_F.
double rse(const DenseTensor& truth, const DenseTensor& recovered);

}  // namespace lrsetd
