#pragma once

#include "lrsetd/solver.hpp"
#include "lrsetd/tensor.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <random>
#include <vector>

namespace lrsetd::testing {

DenseTensor random_tensor(const Dims& dims, std::mt19937_64& rng);
DenseMatrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng);
DenseMatrix random_orthonormal(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng);

/// Unfolding straight from the index formula, entry by entry.
DenseMatrix brute_unfold(const DenseTensor& t, std::size_t mode);

/// vec([[s; a0, a1, a2]]) = (a2 (x) a1 (x) a0) vec(s).
DenseTensor kron_multilinear(const DenseTensor& s, const DenseMatrix& a0, const DenseMatrix& a1, const DenseMatrix& a2);

/// Kronecker of the factors other than `mode`, highest mode first.
DenseMatrix kron_others(const FactorSet& x, std::size_t mode);

struct Synthetic {
  DenseTensor truth;
  ObservationMask mask;
};

/// 20 x 20 x 20 (or n^3) Tucker tensor with ranks (2, 2, 2): every factor is a
/// random rotation of the two smoothest eigenvectors of A^T A for the
/// first-difference matrix A, the core has round(0.1 * 8) = 1 nonzero of
/// magnitude in [100, 200] with a random sign, and `ratio` of the entries are
/// observed uniformly.
Synthetic smooth_tucker(std::uint64_t seed, std::size_t n = 20, double ratio = 0.6);

/// Random state of the right shapes for the solver block tests.
SolverState random_state(const Dims& dims, const std::array<std::size_t, 3>& ranks, const SolverConfig& cfg,
                         std::mt19937_64& rng);

// First-order optimality of each closed-form block, measured against
// explicit-Kronecker formulas. `before` is the state handed to the update and
// `after` the state it returned. Each returns a relative residual.

/// X^(i) normal equations for the Gauss-Seidel sweep, max over modes.
double factor_update_residual(const SolverState& before, const SolverState& after, const SolverConfig& cfg);
/// Subgradient condition beta (G - Y) / alpha in d||Y||_*, G = X + T / beta, max over modes.
double nuclear_update_residual(const SolverState& before, const SolverState& after, const SolverConfig& cfg);
/// Gradient of the Z subproblem on the unobserved entries plus |Z - M| on the observed ones.
double completion_update_residual(const SolverState& before, const SolverState& after, const SolverConfig& cfg,
                                  const DenseTensor& observed, const ObservationMask& mask);
/// Gradient of each W_i subproblem, max over modes.
double smoothing_update_residual(const SolverState& before, const SolverState& after, const SolverConfig& cfg);

/// One ADMM iteration that evaluates the augmented Lagrangian after every
/// primal block. Returns the largest increase seen across the five blocks.
double iterate_tracking_lagrangian(SolverState& state, const SolverConfig& cfg, const DenseTensor& observed,
                                   const ObservationMask& mask);

/// max over the mask of |a - b|.
double max_abs_on_mask(const DenseTensor& a, const DenseTensor& b, const ObservationMask& mask);

/// Fresh, empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

std::string slurp(const std::filesystem::path& path);
void spit(const std::filesystem::path& path, const std::string& bytes);

double rel_diff(const DenseMatrix& a, const DenseMatrix& b);
double rel_diff(const DenseTensor& a, const DenseTensor& b);

}  // namespace lrsetd::testing
