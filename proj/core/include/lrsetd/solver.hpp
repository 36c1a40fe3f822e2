#pragma once

#include "lrsetd/linalg.hpp"
#include "lrsetd/tensor.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lrsetd {

/// Denominator of the relative-change stopping rule.
enum class StopDenominator {
  oracle,  // ||Z_true||_F, needs ground truth
  blind,   // max(||Z^k||_F, 1)
};

enum class InitKind { hosvd, random };

enum class Termination { tol, max_iter };

std::string_view to_string(StopDenominator d);
std::string_view to_string(InitKind k);
std::string_view to_string(Termination t);
StopDenominator parse_stop_denominator(std::string_view s);
InitKind parse_init_kind(std::string_view s);

/// Scalars of the low-rank and sparse enhanced Tucker model and of the ADMM.
///
/// Objective: sum_i omega_i ||[[S; .., A_i X_i, ..]]||^2 + sum_i alpha_i ||X_i||_*
///            + sigma ||S||_1, with the Tucker-to-Z coupling penalized by
/// lambda/2 and all ADMM constraints by beta/2.
struct SolverConfig {
  /// Tucker ranks; a zero entry selects ceil(I_n / 4) clamped to [1, I_n].
  std::array<std::size_t, 3> ranks{0, 0, 0};
  std::array<double, 3> alpha{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  double sigma = 1.0;
  double lambda = 1e-2;
  double beta = 0.1;
  std::array<double, 3> omega{0.0, 0.0, 0.0};
  /// true: A_i is the first-difference Toeplitz matrix, false: identity.
  std::array<bool, 3> toeplitz_modes{false, false, false};
  double tol = 1e-5;
  std::size_t max_iter = 250;
  StopDenominator stop_denominator = StopDenominator::blind;
  InitKind init = InitKind::hosvd;
  std::uint64_t seed = 0;
  std::string preset;
  /// Upper bound on worker threads for the per-mode updates.
  unsigned threads = 1;

  friend bool operator==(const SolverConfig&, const SolverConfig&) = default;
};

/// Named parameter sets: "traffic-random", "traffic-wholeday", "image".
/// Throws InvalidArgument for unknown names.
SolverConfig preset_config(std::string_view name);
std::vector<std::string> preset_names();

/// Throws InvalidArgument if the config cannot be used on a tensor of `dims`.
void validate(const SolverConfig& cfg, const Dims& dims);

/// Ranks with the zero-entry heuristic applied.
std::array<std::size_t, 3> resolve_ranks(const SolverConfig& cfg, const Dims& dims);

using FactorSet = std::array<DenseMatrix, 3>;
using TensorSet = std::array<DenseTensor, 3>;

/// All ADMM iterates plus the iteration-invariant matrices.
struct SolverState {
  FactorSet x;      // X^(i), I_i x r_i
  FactorSet y;      // nuclear-norm copies of X^(i)
  FactorSet t;      // multipliers for X^(i) = Y^(i)
  DenseTensor core; // S, r_1 x r_2 x r_3
  DenseTensor z;    // completed tensor, I_1 x I_2 x I_3
  TensorSet w;      // smoothness copies of Z
  TensorSet u;      // multipliers for Z = W_i
  std::size_t iteration = 0;

  std::array<DenseMatrix, 3> regularizer;         // A_i
  std::array<SpdFactorization, 3> w_system;       // beta I + 2 omega_i A_i^T A_i
};

/// Starting point: Z = P_Omega(M), X from cfg.init, Y = X,
/// S = Z x_n X_n^T, W_i = Z, U = 0, T = 0.
SolverState init_state(const DenseTensor& observed, const ObservationMask& mask, const SolverConfig& cfg);

/// Gauss-Seidel sweep X^(1) -> X^(2) -> X^(3), each the exact minimizer of
/// its subproblem.
void update_factors(SolverState& state, const SolverConfig& cfg);

/// Y^(i) = D_{alpha_i / beta}(X^(i) + T^(i) / beta).
void update_y(SolverState& state, const SolverConfig& cfg);

/// One linearized proximal-gradient step on the core with step 1 / zeta.
void update_core(SolverState& state, const SolverConfig& cfg);

/// Averaged closed form off Omega, M on Omega.
void update_z(SolverState& state, const SolverConfig& cfg, const DenseTensor& observed, const ObservationMask& mask);

/// W_i = fold_i([beta I + 2 omega_i A_i^T A_i]^{-1} (beta Z_(i) + U_i,(i))).
void update_w(SolverState& state, const SolverConfig& cfg);

/// U_i += beta (Z - W_i), T^(i) += beta (X^(i) - Y^(i)).
void update_duals(SolverState& state, const SolverConfig& cfg);

/// Augmented Lagrangian at the current state.
double augmented_lagrangian(const SolverState& state, const SolverConfig& cfg);

/// Relaxed model objective Psi(X, S) + sum alpha_i ||X_i||_* + sigma ||S||_1.
double objective_value(const SolverState& state, const SolverConfig& cfg);

struct IterationRecord {
  std::size_t iteration = 0;
  double rel_change = 0.0;
  double lagrangian = 0.0;
  double objective = 0.0;
  double seconds = 0.0;  // wall clock since solve() started
};

struct CompletionReport {
  DenseTensor recovered;
  std::vector<IterationRecord> trace;
  std::size_t iterations = 0;
  Termination termination = Termination::max_iter;
  double seconds = 0.0;
};

/// Called after every full iteration with the updated state.
using IterationObserver = std::function<void(const SolverState&, const IterationRecord&)>;

/// Runs the ADMM until the relative change of Z drops to cfg.tol or
/// cfg.max_iter is reached. `truth` is required when cfg.stop_denominator is
/// oracle. Throws NumericalError if an iterate becomes non-finite.
CompletionReport solve(const DenseTensor& observed, const ObservationMask& mask, const SolverConfig& cfg,
                       const DenseTensor* truth = nullptr, const IterationObserver& observer = {});

}  // namespace lrsetd
