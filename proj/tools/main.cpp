#include "lrsetd/error.hpp"
#include "lrsetd/runner.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <future>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace {

using json = nlohmann::json;

// Options whose values go into the flag layer only when given on the command line.
class FlagLayer {
 public:
  template <typename T>
  CLI::Option* add(CLI::App* app, const std::string& name, const std::string& key, const std::string& help) {
    auto value = std::make_shared<T>();
    CLI::Option* opt = app->add_option(name, *value, help);
    emitters_.push_back([opt, value, key](json& j) {
      if (opt->count() > 0) j[key] = *value;
    });
    return opt;
  }

  void add_switch(CLI::App* app, const std::string& name, const std::string& key, bool value, const std::string& help) {
    CLI::Option* opt = app->add_flag(name, help);
    emitters_.push_back([opt, key, value](json& j) {
      if (opt->count() > 0) j[key] = value;
    });
  }

  json collect() const {
    json j = json::object();
    for (const auto& emit : emitters_) emit(j);
    return j;
  }

 private:
  std::vector<std::function<void(json&)>> emitters_;
};

struct Command {
  CLI::App* app = nullptr;
  FlagLayer flags;
  std::vector<std::string> configs;
  unsigned jobs = 1;
  std::function<int(const lrsetd::ExperimentConfig&, std::ostream&)> run;
};

void add_input_flags(Command& c) {
  c.flags.add<std::string>(c.app, "--input,-i", "input", "input tensor, image, PGM directory or CSV");
  c.flags.add<std::string>(c.app, "--format", "format", "lrt | ppm | pgm | csv (default: from extension)")
      ->check(CLI::IsMember({"lrt", "ppm", "pgm", "csv"}));
  c.flags.add<std::string>(c.app, "--tensorize", "tensorize", "none | otd:P,T,D | oot:S,D,T");
}

void add_mask_flags(Command& c) {
  c.flags.add<std::string>(c.app, "--mask", "mask", "observation mask file (LRT1, 0/1 entries)");
  c.flags.add<std::string>(c.app, "--missing-spec", "missing_spec", "missing-data scenario JSON");
  c.flags.add<double>(c.app, "--sample-ratio", "sample_ratio", "uniform observation ratio");
  c.flags.add<std::uint64_t>(c.app, "--seed", "seed", "seed for random masks and random init");
}

void add_common(Command& c) {
  c.app->add_option("--config", c.configs, "flat JSON config; several files with --jobs run as a sweep");
  c.flags.add<std::string>(c.app, "--out,-o", "out", "output path");
  c.flags.add<std::string>(c.app, "--report", "report", "JSON report path (default: stdout)");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw lrsetd::IoError("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

unsigned env_threads() {
  const char* raw = std::getenv("LRSETD_THREADS");
  if (raw == nullptr) return 1;
  unsigned v = 0;
  const std::string_view s(raw);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || v == 0) {
    throw lrsetd::InvalidArgument("LRSETD_THREADS must be a positive integer");
  }
  return v;
}

int execute(const Command& c) {
  const std::string flag_layer = c.flags.collect().dump();
  std::vector<std::vector<std::string>> experiments;
  try {
    if (c.configs.size() > 1) {
      const json f = json::parse(flag_layer);
      if (f.contains("out") || f.contains("report") || f.contains("trace_csv")) {
        throw lrsetd::InvalidArgument("output paths must come from each config in a sweep");
      }
    }
    if (c.configs.empty()) {
      experiments.push_back({flag_layer});
    } else {
      for (const auto& path : c.configs) experiments.push_back({read_file(path), flag_layer});
    }
  } catch (const std::exception& e) {
    std::cerr << "lrsetd: " << e.what() << '\n';
    return lrsetd::exit_code_for(e);
  }

  unsigned threads = 1;
  try {
    threads = env_threads();
  } catch (const std::exception& e) {
    std::cerr << "lrsetd: " << e.what() << '\n';
    return lrsetd::exit_code_for(e);
  }

  auto run_one = [&](const std::vector<std::string>& layers, std::ostream& diag) {
    lrsetd::ExperimentConfig cfg;
    try {
      cfg = lrsetd::experiment_from_json(layers);
    } catch (const std::exception& e) {
      diag << "lrsetd: " << e.what() << '\n';
      return lrsetd::exit_code_for(e);
    }
    cfg.solver.threads = threads;
    return c.run(cfg, diag);
  };

  if (experiments.size() == 1) return run_one(experiments.front(), std::cerr);

  // sweep: independent experiments, at most `jobs` at a time, diagnostics in input order
  std::vector<std::ostringstream> diags(experiments.size());
  std::vector<int> codes(experiments.size(), 0);
  const std::size_t width = std::max(1u, c.jobs);
  for (std::size_t begin = 0; begin < experiments.size(); begin += width) {
    const std::size_t end = std::min(experiments.size(), begin + width);
    std::vector<std::future<int>> running;
    for (std::size_t k = begin; k < end; ++k) {
      running.push_back(std::async(std::launch::async, [&, k] { return run_one(experiments[k], diags[k]); }));
    }
    for (std::size_t k = begin; k < end; ++k) codes[k] = running[k - begin].get();
  }
  int status = 0;
  for (std::size_t k = 0; k < experiments.size(); ++k) {
    std::cerr << diags[k].str();
    if (status == 0) status = codes[k];
  }
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Low-rank and sparse enhanced Tucker tensor completion"};
  app.require_subcommand(1);

  Command complete;
  complete.app = app.add_subcommand("complete", "recover missing entries of a tensor");
  complete.run = lrsetd::run_complete;
  add_input_flags(complete);
  add_mask_flags(complete);
  add_common(complete);
  complete.flags.add<std::string>(complete.app, "--truth", "truth", "ground truth for metrics (default: the input)");
  complete.flags.add<std::string>(complete.app, "--preset", "preset", "traffic-random | traffic-wholeday | image");
  complete.flags.add<std::vector<std::size_t>>(complete.app, "--ranks", "ranks", "Tucker ranks r1,r2,r3 (0: auto)")
      ->delimiter(',')
      ->expected(3);
  complete.flags.add<double>(complete.app, "--tol", "tol", "relative-change tolerance");
  complete.flags.add<std::size_t>(complete.app, "--max-iter", "max_iter", "iteration cap");
  complete.flags.add<double>(complete.app, "--beta", "beta", "ADMM penalty");
  complete.flags.add<std::string>(complete.app, "--stop-denominator", "stop_denominator", "oracle | blind")
      ->check(CLI::IsMember({"oracle", "blind"}));
  complete.flags.add<std::string>(complete.app, "--init", "init", "hosvd | random")
      ->check(CLI::IsMember({"hosvd", "random"}));
  complete.flags.add<std::string>(complete.app, "--trace-csv", "trace_csv", "per-iteration CSV trace path");
  complete.flags.add_switch(complete.app, "--timings", "timings", true, "include wall-clock timings in the report");
  complete.app->add_option("--jobs,-j", complete.jobs, "parallel experiments in a --config sweep")
      ->check(CLI::PositiveNumber);

  Command demo;
  demo.app = app.add_subcommand("hosvd-demo", "core sparsity and SNR of a truncated HOSVD");
  demo.run = lrsetd::run_hosvd_demo;
  add_input_flags(demo);
  add_common(demo);
  demo.flags.add<std::vector<double>>(demo.app, "--tn-grid", "tn_grid", "truncation thresholds, comma separated")
      ->delimiter(',');
  demo.flags.add<std::vector<std::size_t>>(demo.app, "--hosvd-ranks", "hosvd_ranks", "HOSVD ranks (default: full)")
      ->delimiter(',');
  demo.flags.add_switch(demo.app, "--no-normalize", "normalize", false, "keep raw intensities");
  demo.flags.add<double>(demo.app, "--exact-floor", "exact_floor", "relative error reported as exact");
  demo.flags.add<std::string>(demo.app, "--image-dir", "image_dir", "write reconstructed images here");

  Command maskgen;
  maskgen.app = app.add_subcommand("mask-gen", "write an observation mask");
  maskgen.run = lrsetd::run_mask_gen;
  add_input_flags(maskgen);
  add_mask_flags(maskgen);
  add_common(maskgen);
  maskgen.flags.add<std::vector<std::size_t>>(maskgen.app, "--dims", "dims", "tensor extents when no input is given")
      ->delimiter(',');

  Command metrics;
  metrics.app = app.add_subcommand("metrics", "NMAE, PSNR and RSE between two tensors");
  metrics.run = lrsetd::run_metrics;
  add_mask_flags(metrics);
  add_common(metrics);
  metrics.flags.add<std::string>(metrics.app, "--truth,--input", "truth", "ground-truth tensor or image");
  metrics.flags.add<std::string>(metrics.app, "--recovered", "recovered", "recovered tensor or image");
  metrics.flags.add<std::vector<std::string>>(metrics.app, "--metrics", "metrics", "subset of nmae,psnr,rse")
      ->delimiter(',');
  metrics.flags.add<double>(metrics.app, "--psnr-peak", "psnr_peak", "PSNR peak (default: max of truth)");
  metrics.flags.add<std::string>(metrics.app, "--psnr-mode", "psnr_mode", "complement | full_tensor")
      ->check(CLI::IsMember({"complement", "full_tensor"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : lrsetd::kExitConfig;
  }

  for (Command* c : {&complete, &demo, &maskgen, &metrics}) {
    if (c->app->parsed()) return execute(*c);
  }
  return lrsetd::kExitConfig;
}
