#include "support.hpp"

#include "lrsetd/linalg.hpp"
#include "lrsetd/masks.hpp"
#include "lrsetd/random.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <limits>

namespace lrsetd::testing {

DenseTensor random_tensor(const Dims& dims, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  DenseTensor t(dims);
  for (double& v : t.data()) v = normal(rng);
  return t;
}

DenseMatrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  DenseMatrix m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = normal(rng);
  }
  return m;
}

DenseMatrix random_orthonormal(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  Eigen::HouseholderQR<DenseMatrix> qr(random_matrix(rows, cols, rng));
  return qr.householderQ() * DenseMatrix::Identity(rows, cols);
}

DenseMatrix brute_unfold(const DenseTensor& t, std::size_t mode) {
  const Dims& dims = t.dims();
  const auto rows = static_cast<Eigen::Index>(dims[mode]);
  DenseMatrix m(rows, static_cast<Eigen::Index>(t.size()) / rows);
  std::vector<std::size_t> idx(dims.size(), 0);
  for (std::size_t off = 0; off < t.size(); ++off) {
    std::size_t rem = off;
    for (std::size_t l = 0; l < dims.size(); ++l) {
      idx[l] = rem % dims[l];
      rem /= dims[l];
    }
    std::size_t col = 0;
    std::size_t stride = 1;
    for (std::size_t l = 0; l < dims.size(); ++l) {
      if (l == mode) continue;
      col += idx[l] * stride;
      stride *= dims[l];
    }
    m(static_cast<Eigen::Index>(idx[mode]), static_cast<Eigen::Index>(col)) = t[off];
  }
  return m;
}

DenseTensor kron_multilinear(const DenseTensor& s, const DenseMatrix& a0, const DenseMatrix& a1, const DenseMatrix& a2) {
  const DenseMatrix big = kron(a2, kron(a1, a0));
  const Eigen::VectorXd v = big * s.vec();
  return {Dims{static_cast<std::size_t>(a0.rows()), static_cast<std::size_t>(a1.rows()),
               static_cast<std::size_t>(a2.rows())},
          std::vector<double>(v.data(), v.data() + v.size())};
}

DenseMatrix kron_others(const FactorSet& x, std::size_t mode) {
  DenseMatrix out = DenseMatrix::Identity(1, 1);
  for (std::size_t j = 3; j-- > 0;) {
    if (j == mode) continue;
    out = kron(out, x[j]);
  }
  return out;
}

Synthetic smooth_tucker(std::uint64_t seed, std::size_t n, double ratio) {
  const CounterRng rng(seed, 0x73796eULL);
  std::uint64_t counter = 0;
  const DenseMatrix a = toeplitz_diff(n);
  Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(a.transpose() * a);
  const DenseMatrix smooth = eig.eigenvectors().leftCols(2);

  std::vector<DenseMatrix> factors;
  for (int k = 0; k < 3; ++k) {
    DenseMatrix g(2, 2);
    for (Eigen::Index i = 0; i < 4; ++i) g(i % 2, i / 2) = rng.normal(counter++);
    Eigen::HouseholderQR<DenseMatrix> qr(g);
    const DenseMatrix q = qr.householderQ() * DenseMatrix::Identity(2, 2);
    factors.push_back(smooth * q);
  }
  DenseTensor core(Dims{2, 2, 2});
  const auto pick = static_cast<std::size_t>(rng.uniform(counter++) * 8.0);
  const double magnitude = 100.0 * (1.0 + rng.uniform(counter++));
  core[pick] = rng.uniform(counter++) < 0.5 ? -magnitude : magnitude;

  DenseTensor truth = multilinear(core, factors);
  ObservationMask mask = random_mask(truth.dims(), ratio, seed);
  return {std::move(truth), std::move(mask)};
}

SolverState random_state(const Dims& dims, const std::array<std::size_t, 3>& ranks, const SolverConfig& cfg,
                         std::mt19937_64& rng) {
  SolverConfig c = cfg;
  c.ranks = ranks;
  c.init = InitKind::random;
  const DenseTensor observed = random_tensor(dims, rng);
  SolverState s = init_state(observed, ObservationMask::full(dims), c);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto rows = static_cast<Eigen::Index>(dims[i]);
    const auto cols = static_cast<Eigen::Index>(ranks[i]);
    s.x[i] = random_matrix(rows, cols, rng);
    s.y[i] = random_matrix(rows, cols, rng);
    s.t[i] = random_matrix(rows, cols, rng);
    s.w[i] = random_tensor(dims, rng);
    s.u[i] = random_tensor(dims, rng);
  }
  s.core = random_tensor(Dims{ranks[0], ranks[1], ranks[2]}, rng);
  s.z = random_tensor(dims, rng);
  return s;
}

namespace {

double ratio(double num, double den) { return num / std::max(den, 1e-300); }

}  // namespace

double factor_update_residual(const SolverState& before, const SolverState& after, const SolverConfig& cfg) {
  double worst = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    // factors as seen by mode i in the sweep: new ones below i, old ones above
    FactorSet seen;
    for (std::size_t j = 0; j < 3; ++j) seen[j] = j < i ? after.x[j] : before.x[j];
    const DenseMatrix b = kron_others(seen, i);
    const DenseMatrix s = brute_unfold(before.core, i);
    const DenseMatrix z = brute_unfold(before.z, i);
    const auto r = s.rows();
    const DenseMatrix lhs = after.x[i] * (cfg.beta * DenseMatrix::Identity(r, r) +
                                          cfg.lambda * s * b.transpose() * b * s.transpose());
    const DenseMatrix rhs = cfg.lambda * z * b * s.transpose() + cfg.beta * before.y[i] - before.t[i];
    worst = std::max(worst, ratio((lhs - rhs).norm(), lhs.norm() + rhs.norm()));
  }
  return worst;
}

double nuclear_update_residual(const SolverState& before, const SolverState& after, const SolverConfig& cfg) {
  double worst = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    const DenseMatrix g = before.x[i] + before.t[i] / cfg.beta;
    const DenseMatrix& y = after.y[i];
    if (cfg.alpha[i] == 0.0) {
      worst = std::max(worst, ratio((y - g).norm(), g.norm()));
      continue;
    }
    const DenseMatrix m = (cfg.beta / cfg.alpha[i]) * (g - y);
    Eigen::JacobiSVD<DenseMatrix> svd(y, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double cut = 1e-10 * std::max(sv.size() ? sv(0) : 0.0, 1.0);
    const Eigen::Index rank = (sv.array() > cut).count();
    const DenseMatrix u = svd.matrixU().leftCols(rank);
    const DenseMatrix v = svd.matrixV().leftCols(rank);
    const DenseMatrix pu = DenseMatrix::Identity(y.rows(), y.rows()) - u * u.transpose();
    const DenseMatrix pv = DenseMatrix::Identity(y.cols(), y.cols()) - v * v.transpose();
    // M = U V^T + W with U^T W = 0, W V = 0, ||W||_2 <= 1
    double r = (u.transpose() * m * v - DenseMatrix::Identity(rank, rank)).norm();
    r = std::max(r, (pu * m * v).norm());
    r = std::max(r, (u.transpose() * m * pv).norm());
    const DenseMatrix w = pu * m * pv;
    if (w.size() > 0) {
      const double top = Eigen::JacobiSVD<DenseMatrix>(w).singularValues()(0);
      r = std::max(r, std::max(top - 1.0, 0.0));
    }
    worst = std::max(worst, r);
  }
  return worst;
}

double completion_update_residual(const SolverState& before, const SolverState& after, const SolverConfig& cfg,
                                  const DenseTensor& observed, const ObservationMask& mask) {
  const DenseTensor tucker = kron_multilinear(after.core, after.x[0], after.x[1], after.x[2]);
  double grad = 0.0;
  double scale = 0.0;
  double pinned = 0.0;
  for (std::size_t off = 0; off < after.z.size(); ++off) {
    if (mask.contains(off)) {
      pinned = std::max(pinned, std::abs(after.z[off] - observed[off]));
      continue;
    }
    double g = cfg.lambda * (after.z[off] - tucker[off]);
    double s = std::abs(cfg.lambda * tucker[off]);
    for (std::size_t i = 0; i < 3; ++i) {
      g += before.u[i][off] + cfg.beta * (after.z[off] - before.w[i][off]);
      s += std::abs(before.u[i][off]) + std::abs(cfg.beta * before.w[i][off]);
    }
    grad = std::max(grad, std::abs(g));
    scale = std::max(scale, s);
  }
  return std::max(ratio(grad, scale), pinned);
}

double smoothing_update_residual(const SolverState& before, const SolverState& after, const SolverConfig& cfg) {
  double worst = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    const DenseMatrix& a = after.regularizer[i];
    const DenseMatrix w = brute_unfold(after.w[i], i);
    const DenseMatrix z = brute_unfold(before.z, i);
    const DenseMatrix u = brute_unfold(before.u[i], i);
    const DenseMatrix smooth = 2.0 * cfg.omega[i] * a.transpose() * a * w;
    const DenseMatrix grad = smooth - u - cfg.beta * (z - w);
    worst = std::max(worst, ratio(grad.norm(), smooth.norm() + u.norm() + cfg.beta * (z.norm() + w.norm())));
  }
  return worst;
}

double iterate_tracking_lagrangian(SolverState& state, const SolverConfig& cfg, const DenseTensor& observed,
                                   const ObservationMask& mask) {
  double worst = -std::numeric_limits<double>::infinity();
  double level = augmented_lagrangian(state, cfg);
  auto record = [&] {
    const double next = augmented_lagrangian(state, cfg);
    worst = std::max(worst, next - level);
    level = next;
  };
  update_factors(state, cfg);
  record();
  update_y(state, cfg);
  record();
  update_core(state, cfg);
  record();
  update_z(state, cfg, observed, mask);
  record();
  update_w(state, cfg);
  record();
  update_duals(state, cfg);
  ++state.iteration;
  return worst;
}

double max_abs_on_mask(const DenseTensor& a, const DenseTensor& b, const ObservationMask& mask) {
  double worst = 0.0;
  for (std::size_t off : mask.observed()) worst = std::max(worst, std::abs(a[off] - b[off]));
  return worst;
}

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("lrsetd_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << bytes;
}

double rel_diff(const DenseMatrix& a, const DenseMatrix& b) {
  const double scale = std::max(b.norm(), 1e-300);
  return (a - b).norm() / scale;
}

double rel_diff(const DenseTensor& a, const DenseTensor& b) {
  const double scale = std::max(frobenius(b), 1e-300);
  return (a.vec() - b.vec()).norm() / scale;
}

}  // namespace lrsetd::testing
