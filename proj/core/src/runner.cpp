#include "lrsetd/runner.hpp"

#include "lrsetd/error.hpp"
#include "lrsetd/hosvd.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

namespace lrsetd {

namespace fs = std::filesystem;

namespace {

using json = nlohmann::ordered_json;

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "input",     "format",  "tensorize",       "mask",        "missing_spec", "sample_ratio", "dims",
      "preset",    "ranks",   "alpha",           "sigma",       "lambda",       "beta",         "omega",
      "toeplitz_modes",       "tol",             "max_iter",    "stop_denominator",             "init",
      "seed",      "truth",   "recovered",       "out",         "report",       "trace_csv",    "metrics",
      "psnr_peak", "psnr_mode",                  "timings",     "tn_grid",      "hosvd_ranks",  "normalize",
      "exact_floor",          "image_dir",       "description"};
  return keys;
}

SolverConfig experiment_solver_base(const std::string& preset) {
  SolverConfig s = preset.empty() ? SolverConfig{} : preset_config(preset);
  s.stop_denominator = StopDenominator::oracle;
  return s;
}

std::string_view to_string(PsnrMode m) { return m == PsnrMode::complement ? "complement" : "full_tensor"; }

PsnrMode parse_psnr_mode(std::string_view s) {
  if (s == "complement") return PsnrMode::complement;
  if (s == "full_tensor") return PsnrMode::full_tensor;
  throw InvalidArgument(fmt::format("unknown psnr mode '{}'", s));
}

// Infinite values become the strings "inf" / "-inf", NaN becomes null.
json number(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

std::string csv_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{}", v);
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  out << text;
  out.flush();
  if (!out) throw IoError(fmt::format("write to '{}' failed", path.string()));
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open '{}' for reading", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string format_of(const fs::path& path, const std::string& declared) {
  if (!declared.empty()) {
    if (declared != "lrt" && declared != "ppm" && declared != "pgm" && declared != "csv") {
      throw InvalidArgument(fmt::format("unknown input format '{}'", declared));
    }
    return declared;
  }
  if (fs::is_directory(path)) return "pgm";
  const std::string ext = path.extension().string();
  if (ext == ".ppm") return "ppm";
  if (ext == ".pgm") return "pgm";
  if (ext == ".csv") return "csv";
  return "lrt";
}

DenseTensor read_any_tensor(const fs::path& path) {
  const std::string f = format_of(path, "");
  if (f == "ppm" || (f == "pgm" && !fs::is_directory(path))) return read_image(path);
  if (f == "pgm") return read_pgm_stack(path);
  return read_tensor(path);
}

void write_output(const fs::path& path, const DenseTensor& t, const Tensorization& how) {
  const std::string ext = path.extension().string();
  if (ext == ".ppm" || ext == ".pgm") {
    write_image(path, t);
  } else if (ext == ".csv") {
    write_traffic_csv(path, flatten(t, how));
  } else {
    write_tensor(path, t);
  }
}

json metric_block(const DenseTensor& truth, const DenseTensor& recovered, const ObservationMask& mask,
                  const ExperimentConfig& cfg) {
  if (!truth.same_shape(recovered)) throw InvalidArgument("truth and recovered tensors differ in shape");
  if (truth.dims() != mask.dims()) throw InvalidArgument("mask shape differs from the tensors");
  json out = json::object();
  for (const std::string& name : cfg.metrics) {
    // degenerate denominators (no missing entries, zero truth) report null
    try {
      if (name == "nmae") {
        out["nmae"] = number(nmae(truth, recovered, mask));
      } else if (name == "psnr") {
        out["psnr"] = number(psnr(truth, recovered, mask, cfg.psnr_peak, cfg.psnr_mode));
      } else if (name == "rse") {
        out["rse"] = number(rse(truth, recovered));
      }
    } catch (const InvalidArgument&) {
      out[name] = nullptr;
    }
  }
  return out;
}

template <typename Fn>
int guarded(std::ostream& diag, Fn&& fn) {
  try {
    fn();
    return kExitOk;
  } catch (const std::exception& e) {
    diag << "lrsetd: " << e.what() << '\n';
    return exit_code_for(e);
  }
}

template <typename T>
void take(const json& j, const char* key, T& dst) {
  if (j.contains(key)) dst = j.at(key).get<T>();
}

void take_path(const json& j, const char* key, fs::path& dst) {
  if (j.contains(key)) dst = fs::path(j.at(key).get<std::string>());
}

}  // namespace

int exit_code_for(const std::exception& e) noexcept {
  if (dynamic_cast<const InvalidArgument*>(&e)) return kExitConfig;
  if (dynamic_cast<const IoError*>(&e)) return kExitIo;
  if (dynamic_cast<const NumericalError*>(&e)) return kExitNumerical;
  return 1;
}

ExperimentConfig experiment_from_json(const std::vector<std::string>& layers) {
  json merged = json::object();
  for (const std::string& text : layers) {
    json layer;
    try {
      layer = json::parse(text);
    } catch (const json::exception& e) {
      throw InvalidArgument(fmt::format("config is not valid JSON: {}", e.what()));
    }
    if (!layer.is_object()) throw InvalidArgument("config must be a JSON object");
    for (const auto& [key, value] : layer.items()) {
      if (std::find(known_keys().begin(), known_keys().end(), key) == known_keys().end()) {
        throw InvalidArgument(fmt::format("unknown config field '{}'", key));
      }
      merged[key] = value;
    }
  }

  ExperimentConfig cfg;
  try {
    const std::string preset = merged.value("preset", std::string{});
    cfg.solver = experiment_solver_base(preset);
    take_path(merged, "input", cfg.input);
    take(merged, "format", cfg.format);
    if (merged.contains("tensorize")) cfg.tensorization = parse_tensorization(merged.at("tensorize").get<std::string>());
    take_path(merged, "mask", cfg.mask);
    take_path(merged, "missing_spec", cfg.missing_spec);
    if (merged.contains("sample_ratio") && !merged.at("sample_ratio").is_null()) {
      cfg.sample_ratio = merged.at("sample_ratio").get<double>();
    }
    take(merged, "dims", cfg.dims);

    SolverConfig& s = cfg.solver;
    take(merged, "ranks", s.ranks);
    take(merged, "alpha", s.alpha);
    take(merged, "sigma", s.sigma);
    take(merged, "lambda", s.lambda);
    take(merged, "beta", s.beta);
    take(merged, "omega", s.omega);
    take(merged, "toeplitz_modes", s.toeplitz_modes);
    take(merged, "tol", s.tol);
    take(merged, "max_iter", s.max_iter);
    if (merged.contains("stop_denominator")) {
      s.stop_denominator = parse_stop_denominator(merged.at("stop_denominator").get<std::string>());
    }
    if (merged.contains("init")) s.init = parse_init_kind(merged.at("init").get<std::string>());
    take(merged, "seed", s.seed);

    take_path(merged, "truth", cfg.truth);
    take_path(merged, "recovered", cfg.recovered);
    take_path(merged, "out", cfg.out);
    take_path(merged, "report", cfg.report);
    take_path(merged, "trace_csv", cfg.trace_csv);
    take(merged, "metrics", cfg.metrics);
    if (merged.contains("psnr_peak") && !merged.at("psnr_peak").is_null()) {
      cfg.psnr_peak = merged.at("psnr_peak").get<double>();
    }
    if (merged.contains("psnr_mode")) cfg.psnr_mode = parse_psnr_mode(merged.at("psnr_mode").get<std::string>());
    take(merged, "timings", cfg.timings);
    take(merged, "tn_grid", cfg.tn_grid);
    take(merged, "hosvd_ranks", cfg.hosvd_ranks);
    take(merged, "normalize", cfg.normalize);
    take(merged, "exact_floor", cfg.exact_floor);
    take_path(merged, "image_dir", cfg.image_dir);
  } catch (const json::exception& e) {
    throw InvalidArgument(fmt::format("malformed config: {}", e.what()));
  }

  for (const std::string& m : cfg.metrics) {
    if (m != "nmae" && m != "psnr" && m != "rse") throw InvalidArgument(fmt::format("unknown metric '{}'", m));
  }
  if (cfg.sample_ratio && !(*cfg.sample_ratio >= 0.0 && *cfg.sample_ratio <= 1.0)) {
    throw InvalidArgument(fmt::format("sample ratio {} outside [0, 1]", *cfg.sample_ratio));
  }
  for (double tn : cfg.tn_grid) {
    if (!(tn >= 0.0)) throw InvalidArgument("tn grid values must be nonnegative");
  }
  if (!(cfg.exact_floor >= 0.0)) throw InvalidArgument("exact_floor must be nonnegative");
  return cfg;
}

std::string to_json(const ExperimentConfig& cfg) {
  const SolverConfig& s = cfg.solver;
  json j;
  j["input"] = cfg.input.generic_string();
  j["format"] = cfg.format;
  j["tensorize"] = to_string(cfg.tensorization);
  j["mask"] = cfg.mask.generic_string();
  j["missing_spec"] = cfg.missing_spec.generic_string();
  j["sample_ratio"] = cfg.sample_ratio ? json(*cfg.sample_ratio) : json(nullptr);
  j["dims"] = cfg.dims;
  j["preset"] = s.preset;
  j["ranks"] = s.ranks;
  j["alpha"] = s.alpha;
  j["sigma"] = s.sigma;
  j["lambda"] = s.lambda;
  j["beta"] = s.beta;
  j["omega"] = s.omega;
  j["toeplitz_modes"] = s.toeplitz_modes;
  j["tol"] = s.tol;
  j["max_iter"] = s.max_iter;
  j["stop_denominator"] = to_string(s.stop_denominator);
  j["init"] = to_string(s.init);
  j["seed"] = s.seed;
  j["truth"] = cfg.truth.generic_string();
  j["recovered"] = cfg.recovered.generic_string();
  j["out"] = cfg.out.generic_string();
  j["report"] = cfg.report.generic_string();
  j["trace_csv"] = cfg.trace_csv.generic_string();
  j["metrics"] = cfg.metrics;
  j["psnr_peak"] = cfg.psnr_peak ? json(*cfg.psnr_peak) : json(nullptr);
  j["psnr_mode"] = to_string(cfg.psnr_mode);
  j["timings"] = cfg.timings;
  j["tn_grid"] = cfg.tn_grid;
  j["hosvd_ranks"] = cfg.hosvd_ranks;
  j["normalize"] = cfg.normalize;
  j["exact_floor"] = cfg.exact_floor;
  j["image_dir"] = cfg.image_dir.generic_string();
  return j.dump(2);
}

DenseTensor load_input(const ExperimentConfig& cfg) {
  if (cfg.input.empty()) throw InvalidArgument("no input given");
  const std::string f = format_of(cfg.input, cfg.format);
  if (f == "csv") return tensorize(read_traffic_csv(cfg.input), cfg.tensorization);

  DenseTensor t;
  if (f == "ppm" || f == "pgm") {
    t = fs::is_directory(cfg.input) ? read_pgm_stack(cfg.input) : read_image(cfg.input);
  } else {
    t = read_tensor(cfg.input);
  }
  if (cfg.tensorization.kind != Tensorization::Kind::none) {
    if (t.order() != 2) throw InvalidArgument("tensorization applies to matrix inputs only");
    const DenseMatrix m = Eigen::Map<const DenseMatrix>(t.data().data(), static_cast<Eigen::Index>(t.dim(0)),
                                                        static_cast<Eigen::Index>(t.dim(1)));
    return tensorize(m, cfg.tensorization);
  }
  return t;
}

ObservationMask load_or_build_mask(const ExperimentConfig& cfg, const Dims& dims) {
  const int sources = int(!cfg.mask.empty()) + int(!cfg.missing_spec.empty()) + int(cfg.sample_ratio.has_value());
  if (sources > 1) throw InvalidArgument("give at most one of mask, missing spec, sample ratio");
  if (!cfg.mask.empty()) {
    ObservationMask m = read_mask(cfg.mask);
    if (m.dims() != dims) throw InvalidArgument(fmt::format("mask '{}' does not match the data shape", cfg.mask.string()));
    return m;
  }
  if (!cfg.missing_spec.empty()) return structured_mask(dims, missing_spec_from_json(read_text(cfg.missing_spec)));
  if (cfg.sample_ratio) return random_mask(dims, *cfg.sample_ratio, cfg.solver.seed);
  return ObservationMask::full(dims);
}

CompleteOutcome complete_experiment(const ExperimentConfig& cfg) {
  const auto started = std::chrono::steady_clock::now();
  const DenseTensor input = load_input(cfg);
  const DenseTensor truth = cfg.truth.empty() ? input : read_any_tensor(cfg.truth);
  if (!truth.same_shape(input)) throw InvalidArgument("truth and input differ in shape");
  validate(cfg.solver, input.dims());

  CompleteOutcome outcome{{}, load_or_build_mask(cfg, input.dims()), {}};
  const DenseTensor observed = project(input, outcome.mask);
  outcome.completion = solve(observed, outcome.mask, cfg.solver, &truth);
  const CompletionReport& rep = outcome.completion;

  json report;
  report["command"] = "complete";
  report["dims"] = input.dims();
  report["observed"] = outcome.mask.observed_count();
  report["total"] = outcome.mask.total();
  report["ranks"] = resolve_ranks(cfg.solver, input.dims());
  report["iterations"] = rep.iterations;
  report["termination"] = to_string(rep.termination);
  report["metrics"] = metric_block(truth, rep.recovered, outcome.mask, cfg);
  json trace = json::array();
  for (const IterationRecord& r : rep.trace) {
    json row;
    row["iteration"] = r.iteration;
    row["rel_change"] = number(r.rel_change);
    row["lagrangian"] = number(r.lagrangian);
    row["objective"] = number(r.objective);
    if (cfg.timings) row["seconds"] = r.seconds;
    trace.push_back(std::move(row));
  }
  report["trace"] = std::move(trace);
  report["config"] = json::parse(to_json(cfg));
  if (cfg.timings) {
    const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    report["timings"] = {{"solve_seconds", rep.seconds}, {"total_seconds", total}};
  }
  outcome.report_json = report.dump(2) + "\n";

  if (!cfg.out.empty()) write_output(cfg.out, rep.recovered, cfg.tensorization);
  if (!cfg.report.empty()) write_text(cfg.report, outcome.report_json);
  if (!cfg.trace_csv.empty()) {
    std::string csv = "iteration,rel_change,lagrangian,objective,seconds\n";
    for (const IterationRecord& r : rep.trace) {
      csv += fmt::format("{},{},{},{},{}\n", r.iteration, csv_number(r.rel_change), csv_number(r.lagrangian),
                         csv_number(r.objective), cfg.timings ? fmt::format("{}", r.seconds) : std::string{});
    }
    write_text(cfg.trace_csv, csv);
  }
  return outcome;
}

int run_complete(const ExperimentConfig& cfg, std::ostream& diag) {
  return guarded(diag, [&] {
    const CompleteOutcome outcome = complete_experiment(cfg);
    if (cfg.report.empty()) std::cout << outcome.report_json;
  });
}

std::vector<SparsityRow> hosvd_sparsity_sweep(const DenseTensor& t, const ExperimentConfig& cfg,
                                              std::vector<DenseTensor>* reconstructions) {
  const std::vector<std::size_t> ranks = cfg.hosvd_ranks.empty() ? t.dims() : cfg.hosvd_ranks;
  const TuckerModel model = hosvd(t, ranks);
  std::vector<SparsityRow> rows;
  for (double tn : cfg.tn_grid) {
    const TruncatedCore cut = truncate_core(model, tn);
    DenseTensor approx = cut.model.reconstruct();
    rows.push_back({tn, cut.sparsity, reconstruction_snr(t, approx, cfg.exact_floor)});
    if (reconstructions) reconstructions->push_back(std::move(approx));
  }
  return rows;
}

int run_hosvd_demo(const ExperimentConfig& cfg, std::ostream& diag) {
  return guarded(diag, [&] {
    DenseTensor t = load_input(cfg);
    const std::string f = format_of(cfg.input, cfg.format);
    double scale = 1.0;
    if (cfg.normalize) {
      // image intensities map to [0, 1]; other data is scaled by its largest magnitude
      scale = (f == "ppm" || f == "pgm") ? 255.0 : t.vec().cwiseAbs().maxCoeff();
      if (scale == 0.0) throw InvalidArgument("cannot normalize an all-zero input");
      t *= 1.0 / scale;
    }
    std::vector<DenseTensor> recon;
    const bool want_images = !cfg.image_dir.empty();
    const auto rows = hosvd_sparsity_sweep(t, cfg, want_images ? &recon : nullptr);

    std::string csv = "tn,sparsity,snr\n";
    for (const SparsityRow& r : rows) csv += fmt::format("{},{},{}\n", r.tn, r.sparsity, csv_number(r.snr));
    if (cfg.out.empty()) {
      std::cout << csv;
    } else {
      write_text(cfg.out, csv);
    }

    if (want_images) {
      if (t.order() != 3 || (t.dim(2) != 1 && t.dim(2) != 3)) {
        throw InvalidArgument("reconstructed images need an H x W x 1 or H x W x 3 input");
      }
      const char* ext = t.dim(2) == 3 ? "ppm" : "pgm";
      for (std::size_t i = 0; i < rows.size(); ++i) {
        recon[i] *= scale;
        write_image(cfg.image_dir / fmt::format("tn_{}.{}", rows[i].tn, ext), recon[i]);
      }
    }
  });
}

int run_mask_gen(const ExperimentConfig& cfg, std::ostream& diag) {
  return guarded(diag, [&] {
    if (cfg.out.empty()) throw InvalidArgument("mask-gen needs an output path");
    Dims dims = cfg.dims;
    if (!cfg.input.empty()) dims = load_input(cfg).dims();
    if (dims.empty()) throw InvalidArgument("mask-gen needs an input or dims");
    const ObservationMask mask = load_or_build_mask(cfg, dims);
    write_mask(cfg.out, mask);
    if (!cfg.report.empty()) {
      json report;
      report["command"] = "mask-gen";
      report["dims"] = dims;
      report["observed"] = mask.observed_count();
      report["total"] = mask.total();
      write_text(cfg.report, report.dump(2) + "\n");
    }
  });
}

int run_metrics(const ExperimentConfig& cfg, std::ostream& diag) {
  return guarded(diag, [&] {
    const fs::path truth_path = cfg.truth.empty() ? cfg.input : cfg.truth;
    if (truth_path.empty() || cfg.recovered.empty()) throw InvalidArgument("metrics needs truth and recovered tensors");
    const DenseTensor truth = read_any_tensor(truth_path);
    const DenseTensor recovered = read_any_tensor(cfg.recovered);
    const ObservationMask mask = load_or_build_mask(cfg, truth.dims());
    json report;
    report["command"] = "metrics";
    report["metrics"] = metric_block(truth, recovered, mask, cfg);
    const std::string text = report.dump(2) + "\n";
    if (cfg.report.empty()) {
      std::cout << text;
    } else {
      write_text(cfg.report, text);
    }
  });
}

}  // namespace lrsetd
