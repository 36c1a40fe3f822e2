#include "lrsetd/solver.hpp"

#include "lrsetd/error.hpp"
#include "lrsetd/hosvd.hpp"
#include "lrsetd/random.hpp"

#include <fmt/format.h>

#include <Eigen/QR>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <future>

namespace lrsetd {

namespace {

constexpr std::size_t kModes = 3;

// Runs fn(0), fn(1), fn(2), spreading them over up to `threads` workers.
template <class Fn>
void for_each_mode(unsigned threads, Fn&& fn) {
  if (threads <= 1) {
    for (std::size_t i = 0; i < kModes; ++i) fn(i);
    return;
  }
  const std::size_t workers = std::min<std::size_t>(threads, kModes);
  std::vector<std::future<void>> pending;
  for (std::size_t w = 1; w < workers; ++w) {
    pending.push_back(std::async(std::launch::async, [&fn, w, workers] {
      for (std::size_t i = w; i < kModes; i += workers) fn(i);
    }));
  }
  std::exception_ptr first;
  try {
    for (std::size_t i = 0; i < kModes; i += workers) fn(i);
  } catch (...) {
    first = std::current_exception();
  }
  for (auto& f : pending) {
    try {
      f.get();
    } catch (...) {
      if (!first) first = std::current_exception();
    }
  }
  if (first) std::rethrow_exception(first);
}

DenseMatrix symmetrized(const DenseMatrix& a) { return 0.5 * (a + a.transpose()); }

double squared(double v) { return v * v; }

void require_state_shapes(const SolverState& s) {
  if (s.z.order() != kModes || s.core.order() != kModes) {
    throw InvalidArgument("solver state is not initialized for a third-order tensor");
  }
}

}  // namespace

std::string_view to_string(StopDenominator d) { return d == StopDenominator::oracle ? "oracle" : "blind"; }

std::string_view to_string(InitKind k) { return k == InitKind::hosvd ? "hosvd" : "random"; }

std::string_view to_string(Termination t) { return t == Termination::tol ? "tol" : "max_iter"; }

StopDenominator parse_stop_denominator(std::string_view s) {
  if (s == "oracle") return StopDenominator::oracle;
  if (s == "blind") return StopDenominator::blind;
  throw InvalidArgument(fmt::format("unknown stop denominator '{}' (expected oracle|blind)", s));
}

InitKind parse_init_kind(std::string_view s) {
  if (s == "hosvd") return InitKind::hosvd;
  if (s == "random") return InitKind::random;
  throw InvalidArgument(fmt::format("unknown init '{}' (expected hosvd|random)", s));
}

SolverConfig preset_config(std::string_view name) {
  SolverConfig cfg;
  cfg.sigma = 1.0;
  cfg.lambda = 1e-2;
  cfg.alpha = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  cfg.tol = 1e-5;
  cfg.max_iter = 250;
  if (name == "traffic-random") {
    cfg.omega = {0.0, 1.0, 2e-3};
  } else if (name == "traffic-wholeday") {
    cfg.omega = {0.0, 1.0, 1.0};
  } else if (name == "image") {
    cfg.omega = {1.0, 1.0, 0.0};
  } else {
    throw InvalidArgument(fmt::format("unknown preset '{}'", name));
  }
  for (std::size_t i = 0; i < kModes; ++i) cfg.toeplitz_modes[i] = cfg.omega[i] > 0.0;
  cfg.preset = std::string(name);
  return cfg;
}

std::vector<std::string> preset_names() { return {"traffic-random", "traffic-wholeday", "image"}; }

std::array<std::size_t, 3> resolve_ranks(const SolverConfig& cfg, const Dims& dims) {
  if (dims.size() != kModes) {
    throw InvalidArgument(fmt::format("the solver handles third-order tensors, got order {}", dims.size()));
  }
  std::array<std::size_t, 3> r{};
  for (std::size_t i = 0; i < kModes; ++i) {
    r[i] = cfg.ranks[i] != 0 ? cfg.ranks[i] : std::clamp<std::size_t>((dims[i] + 3) / 4, 1, dims[i]);
  }
  return r;
}

void validate(const SolverConfig& cfg, const Dims& dims) {
  const auto ranks = resolve_ranks(cfg, dims);
  for (std::size_t i = 0; i < kModes; ++i) {
    if (ranks[i] > dims[i]) {
      throw InvalidArgument(fmt::format("rank {} exceeds dimension {} in mode {}", ranks[i], dims[i], i));
    }
    if (!(cfg.alpha[i] >= 0.0)) throw InvalidArgument("alpha entries must be nonnegative");
    if (!(cfg.omega[i] >= 0.0)) throw InvalidArgument("omega entries must be nonnegative");
  }
  if (!(cfg.sigma >= 0.0)) throw InvalidArgument("sigma must be nonnegative");
  if (!(cfg.lambda > 0.0)) throw InvalidArgument("lambda must be positive");
  if (!(cfg.beta > 0.0)) throw InvalidArgument("beta must be positive");
  if (!(cfg.tol > 0.0)) throw InvalidArgument("tol must be positive");
  if (cfg.max_iter < 1) throw InvalidArgument("max_iter must be at least 1");
}

SolverState init_state(const DenseTensor& observed, const ObservationMask& mask, const SolverConfig& cfg) {
  if (observed.dims() != mask.dims()) throw InvalidArgument("observed tensor and mask have different shapes");
  validate(cfg, observed.dims());
  const auto ranks = resolve_ranks(cfg, observed.dims());
  const Dims& dims = observed.dims();

  SolverState s;
  s.z = project(observed, mask);
  for (std::size_t i = 0; i < kModes; ++i) {
    const auto rows = static_cast<Eigen::Index>(dims[i]);
    const auto cols = static_cast<Eigen::Index>(ranks[i]);
    if (cfg.init == InitKind::hosvd) {
      s.x[i] = leading_left_singular_vectors(unfold(s.z, i), ranks[i]);
    } else {
      const CounterRng rng(cfg.seed, i);
      DenseMatrix g(rows, cols);
      for (Eigen::Index c = 0; c < cols; ++c) {
        for (Eigen::Index r = 0; r < rows; ++r) g(r, c) = rng.normal(static_cast<std::uint64_t>(c * rows + r));
      }
      Eigen::HouseholderQR<DenseMatrix> qr(g);
      s.x[i] = qr.householderQ() * DenseMatrix::Identity(rows, cols);
    }
    s.y[i] = s.x[i];
    s.t[i] = DenseMatrix::Zero(rows, cols);
    s.w[i] = s.z;
    s.u[i] = DenseTensor(dims);

    s.regularizer[i] = cfg.toeplitz_modes[i] ? toeplitz_diff(dims[i]) : DenseMatrix::Identity(rows, rows);
    const DenseMatrix system = cfg.beta * DenseMatrix::Identity(rows, rows) +
                               (2.0 * cfg.omega[i]) * (s.regularizer[i].transpose() * s.regularizer[i]);
    s.w_system[i] = SpdFactorization(system);
  }
  s.core = multilinear_transposed(s.z, s.x);
  return s;
}

void update_factors(SolverState& state, const SolverConfig& cfg) {
  require_state_shapes(state);
  for (std::size_t i = 0; i < kModes; ++i) {
    // Z x_j X_j^T and S x_j (X_j^T X_j) over the other two modes stand in for
    // Z_(i) B_i and S_(i) B_i^T B_i without forming the Kronecker factor.
    DenseTensor projected = state.z;
    DenseTensor weighted = state.core;
    for (std::size_t j = 0; j < kModes; ++j) {
      if (j == i) continue;
      projected = mode_product(projected, state.x[j].transpose(), j);
      weighted = mode_product(weighted, state.x[j].transpose() * state.x[j], j);
    }
    const DenseMatrix core_i = unfold(state.core, i);
    const DenseMatrix rhs = cfg.lambda * unfold(projected, i) * core_i.transpose() + cfg.beta * state.y[i] - state.t[i];
    const auto r = core_i.rows();
    const DenseMatrix system =
        symmetrized(cfg.beta * DenseMatrix::Identity(r, r) + cfg.lambda * unfold(weighted, i) * core_i.transpose());
    state.x[i] = spd_solve(system, rhs.transpose()).transpose();
  }
}

void update_y(SolverState& state, const SolverConfig& cfg) {
  for_each_mode(cfg.threads, [&](std::size_t i) {
    state.y[i] = svd_shrink(state.x[i] + state.t[i] / cfg.beta, cfg.alpha[i] / cfg.beta);
  });
}

void update_core(SolverState& state, const SolverConfig& cfg) {
  require_state_shapes(state);
  std::array<DenseMatrix, 3> grams;
  double zeta = 1.0;
  for (std::size_t i = 0; i < kModes; ++i) {
    grams[i] = symmetrized(state.x[i].transpose() * state.x[i]);
    zeta *= spectral_norm(grams[i]);
  }
  if (!(zeta > 0.0)) return;
  DenseTensor gradient = multilinear(state.core, grams);
  gradient -= multilinear_transposed(state.z, state.x);
  const double threshold = cfg.sigma == 0.0 ? 0.0 : cfg.sigma / (cfg.lambda * zeta);
  DenseTensor step = state.core;
  step.vec() -= gradient.vec() / zeta;
  state.core = soft_shrink(step, threshold);
}

void update_z(SolverState& state, const SolverConfig& cfg, const DenseTensor& observed, const ObservationMask& mask) {
  require_state_shapes(state);
  if (!observed.same_shape(state.z) || mask.dims() != state.z.dims()) {
    throw InvalidArgument("update_z: observed tensor or mask does not match the state");
  }
  DenseTensor next = multilinear(state.core, state.x);
  next *= cfg.lambda;
  for (std::size_t i = 0; i < kModes; ++i) {
    next.vec() += cfg.beta * state.w[i].vec() - state.u[i].vec();
  }
  next *= 1.0 / (cfg.lambda + 3.0 * cfg.beta);
  for (std::size_t off : mask.observed()) next[off] = observed[off];
  state.z = std::move(next);
}

void update_w(SolverState& state, const SolverConfig& cfg) {
  require_state_shapes(state);
  for_each_mode(cfg.threads, [&](std::size_t i) {
    DenseTensor rhs = state.u[i];
    rhs.vec() += cfg.beta * state.z.vec();
    state.w[i] = fold(state.w_system[i].solve(unfold(rhs, i)), i, state.z.dims());
  });
}

void update_duals(SolverState& state, const SolverConfig& cfg) {
  for_each_mode(cfg.threads, [&](std::size_t i) {
    state.u[i].vec() += cfg.beta * (state.z.vec() - state.w[i].vec());
    state.t[i] += cfg.beta * (state.x[i] - state.y[i]);
  });
}

double augmented_lagrangian(const SolverState& state, const SolverConfig& cfg) {
  require_state_shapes(state);
  double value = 0.0;
  for (std::size_t i = 0; i < kModes; ++i) {
    if (cfg.omega[i] != 0.0) {
      value += cfg.omega[i] * squared(frobenius(mode_product(state.w[i], state.regularizer[i], i)));
    }
    if (cfg.alpha[i] != 0.0) value += cfg.alpha[i] * nuclear_norm(state.y[i]);
  }
  value += cfg.sigma * state.core.vec().lpNorm<1>();
  value += 0.5 * cfg.lambda * (multilinear(state.core, state.x).vec() - state.z.vec()).squaredNorm();
  for (std::size_t i = 0; i < kModes; ++i) {
    const Eigen::VectorXd zw = state.z.vec() - state.w[i].vec();
    const DenseMatrix xy = state.x[i] - state.y[i];
    value += state.u[i].vec().dot(zw) + (state.t[i].array() * xy.array()).sum();
    value += 0.5 * cfg.beta * (zw.squaredNorm() + xy.squaredNorm());
  }
  return value;
}

double objective_value(const SolverState& state, const SolverConfig& cfg) {
  require_state_shapes(state);
  const DenseTensor tucker = multilinear(state.core, state.x);
  double value = 0.0;
  for (std::size_t i = 0; i < kModes; ++i) {
    // [[S; .., A_i X_i, ..]] = [[S; X]] x_i A_i
    if (cfg.omega[i] != 0.0) {
      value += cfg.omega[i] * squared(frobenius(mode_product(tucker, state.regularizer[i], i)));
    }
    if (cfg.alpha[i] != 0.0) value += cfg.alpha[i] * nuclear_norm(state.x[i]);
  }
  return value + cfg.sigma * state.core.vec().lpNorm<1>();
}

CompletionReport solve(const DenseTensor& observed, const ObservationMask& mask, const SolverConfig& cfg,
                       const DenseTensor* truth, const IterationObserver& observer) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();

  double oracle_norm = 0.0;
  if (cfg.stop_denominator == StopDenominator::oracle) {
    if (truth == nullptr) throw InvalidArgument("oracle stopping needs the ground-truth tensor");
    if (!truth->same_shape(observed)) throw InvalidArgument("ground truth and observation differ in shape");
    oracle_norm = frobenius(*truth);
    if (oracle_norm == 0.0) throw InvalidArgument("oracle stopping with an all-zero ground truth");
  }
  if (!observed.all_finite()) throw NumericalError("observed tensor has non-finite entries");

  SolverState state = init_state(observed, mask, cfg);
  CompletionReport report;
  report.trace.reserve(cfg.max_iter);

  for (std::size_t k = 1; k <= cfg.max_iter; ++k) {
    const DenseTensor previous = state.z;
    update_factors(state, cfg);
    update_y(state, cfg);
    update_core(state, cfg);
    update_z(state, cfg, observed, mask);
    update_w(state, cfg);
    update_duals(state, cfg);
    state.iteration = k;

    if (!state.z.all_finite() || !state.core.all_finite()) {
      throw NumericalError(fmt::format("non-finite iterate at iteration {}", k));
    }
    for (const auto& x : state.x) {
      if (!x.allFinite()) throw NumericalError(fmt::format("non-finite factor matrix at iteration {}", k));
    }

    const double denom =
        cfg.stop_denominator == StopDenominator::oracle ? oracle_norm : std::max(frobenius(previous), 1.0);
    IterationRecord rec;
    rec.iteration = k;
    rec.rel_change = (state.z.vec() - previous.vec()).norm() / denom;
    rec.lagrangian = augmented_lagrangian(state, cfg);
    rec.objective = objective_value(state, cfg);
    rec.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    report.trace.push_back(rec);
    if (observer) observer(state, rec);

    if (rec.rel_change <= cfg.tol) {
      report.termination = Termination::tol;
      break;
    }
  }
  report.iterations = report.trace.size();
  report.recovered = std::move(state.z);
  report.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return report;
}

}  // namespace lrsetd
