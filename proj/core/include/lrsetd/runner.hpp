#pragma once

#include "lrsetd/io.hpp"
#include "lrsetd/masks.hpp"
#include "lrsetd/metrics.hpp"
#include "lrsetd/solver.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace lrsetd {

/// Process exit codes.
enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitIo = 3, kExitNumerical = 4 };

/// Exit code for an exception escaping a run: InvalidArgument -> 2,
/// IoError -> 3, NumericalError -> 4, anything else -> 1.
int exit_code_for(const std::exception& e) noexcept;

/// One experiment, shared by every subcommand. Each subcommand reads the
/// fields it needs and ignores the rest.
struct ExperimentConfig {
  std::filesystem::path input;
  std::string format;  // lrt | ppm | pgm | csv; empty: from the input extension
  Tensorization tensorization;

  // observation pattern: mask file, missing spec file, or uniform sample ratio
  std::filesystem::path mask;
  std::filesystem::path missing_spec;
  std::optional<double> sample_ratio;
  /// Dimensions for mask-gen when no input is given.
  Dims dims;

  /// Solver settings; experiments stop on the oracle denominator by default
  /// since the input doubles as ground truth.
  SolverConfig solver = [] {
    SolverConfig s;
    s.stop_denominator = StopDenominator::oracle;
    return s;
  }();

  /// Ground truth for the metrics; defaults to the input itself.
  std::filesystem::path truth;
  /// Recovered tensor for the metrics subcommand.
  std::filesystem::path recovered;

  std::filesystem::path out;
  std::filesystem::path report;
  std::filesystem::path trace_csv;

  std::vector<std::string> metrics{"nmae", "psnr", "rse"};
  std::optional<double> psnr_peak;
  PsnrMode psnr_mode = PsnrMode::complement;
  /// Wall-clock fields in reports; off keeps reports byte-reproducible.
  bool timings = false;

  // hosvd-demo
  std::vector<double> tn_grid{0.0, 0.01, 0.05, 0.1};
  std::vector<std::size_t> hosvd_ranks;  // empty: full extents
  bool normalize = true;
  double exact_floor = 1e-12;
  std::filesystem::path image_dir;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Builds a config from flat JSON layers applied in order, later layers
/// overriding earlier ones (e.g. {file, flags}). A "preset" key in the merged
/// document selects the solver base before the remaining solver keys apply.
/// Unknown keys are rejected with InvalidArgument.
ExperimentConfig experiment_from_json(const std::vector<std::string>& layers);

/// Flat JSON with every field; experiment_from_json({to_json(c)}) == c.
std::string to_json(const ExperimentConfig& cfg);

/// Reads cfg.input according to cfg.format and cfg.tensorization.
DenseTensor load_input(const ExperimentConfig& cfg);

/// Mask for `dims` from the mask file, the missing spec, or the sample ratio
/// (seeded by cfg.solver.seed). With none of them every entry is observed.
ObservationMask load_or_build_mask(const ExperimentConfig& cfg, const Dims& dims);

struct CompleteOutcome {
  CompletionReport completion;
  ObservationMask mask;
  std::string report_json;
};

/// The complete pipeline without the exit-code wrapper: load, mask, solve,
/// write outputs. Throws on failure.
CompleteOutcome complete_experiment(const ExperimentConfig& cfg);

/// Subcommands. Each returns an ExitCode and writes a one-line diagnostic to
/// `diag` on failure.
int run_complete(const ExperimentConfig& cfg, std::ostream& diag);
int run_hosvd_demo(const ExperimentConfig& cfg, std::ostream& diag);
int run_mask_gen(const ExperimentConfig& cfg, std::ostream& diag);
int run_metrics(const ExperimentConfig& cfg, std::ostream& diag);

/// hosvd-demo rows.
struct SparsityRow {
  double tn = 0.0;
  double sparsity = 0.0;
  double snr = 0.0;
};

/// Full-rank (or cfg.hosvd_ranks) HOSVD of `t`, then core truncation over
/// cfg.tn_grid.
std::vector<SparsityRow> hosvd_sparsity_sweep(const DenseTensor& t, const ExperimentConfig& cfg,
                                              std::vector<DenseTensor>* reconstructions = nullptr);

}  // namespace lrsetd
