#include "lrsetd/metrics.hpp"

#include "lrsetd/error.hpp"

#include <algorithm>
#include <cmath>

namespace lrsetd {

namespace {

void require_compatible(const DenseTensor& truth, const DenseTensor& recovered, const ObservationMask& mask) {
  if (!truth.same_shape(recovered)) throw InvalidArgument("metric: truth and recovered differ in shape");
  if (truth.dims() != mask.dims()) throw InvalidArgument("metric: mask shape differs from tensors");
  if (mask.complement_count() == 0) throw InvalidArgument("metric: mask has no unobserved entries");
}

}  // namespace

double nmae(const DenseTensor& truth, const DenseTensor& recovered, const ObservationMask& mask) {
  require_compatible(truth, recovered, mask);
  double err = 0.0;
  double ref = 0.0;
  const auto observed = mask.dense();
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (observed[i]) continue;
    err += std::abs(truth[i] - recovered[i]);
    ref += std::abs(truth[i]);
  }
  if (ref == 0.0) throw InvalidArgument("nmae: ground truth is zero on every unobserved entry");
  return err / ref;
}

double psnr(const DenseTensor& truth, const DenseTensor& recovered, const ObservationMask& mask,
            std::optional<double> peak, PsnrMode mode) {
  require_compatible(truth, recovered, mask);
  const double top = peak.value_or(*std::max_element(truth.values().begin(), truth.values().end()));
  double sse = 0.0;
  const auto observed = mask.dense();
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (mode == PsnrMode::complement && observed[i]) continue;
    const double d = truth[i] - recovered[i];
    sse += d * d;
  }
  if (sse == 0.0) return kExactPsnr;
  const double mse = sse / static_cast<double>(mask.complement_count());
  return 10.0 * std::log10(top * top / mse);
}

double rse(const DenseTensor& truth, const DenseTensor& recovered) {
  if (!truth.same_shape(recovered)) throw InvalidArgument("rse: shape mismatch");
  const double ref = frobenius(truth);
  if (ref == 0.0) throw InvalidArgument("rse: ground truth is zero");
  return (recovered.vec() - truth.vec()).norm() / ref;
}

}  // namespace lrsetd
