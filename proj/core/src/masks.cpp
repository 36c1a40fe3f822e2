#include "lrsetd/masks.hpp"

#include "lrsetd/error.hpp"
#include "lrsetd/random.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <utility>

namespace lrsetd {

namespace {

using json = nlohmann::json;

void require_ratio(double ratio) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) throw InvalidArgument(fmt::format("sample ratio {} outside [0, 1]", ratio));
}

// Uniform subset of `candidates` of size round(ratio * |candidates|).
std::vector<std::size_t> retain_uniform(const std::vector<std::size_t>& candidates, double ratio, std::uint64_t seed) {
  require_ratio(ratio);
  const auto keep = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(candidates.size())));
  if (keep >= candidates.size()) return candidates;
  if (keep == 0) return {};
  const CounterRng rng(seed, 0x6d61736bULL);
  std::vector<std::pair<std::uint64_t, std::size_t>> keyed;
  keyed.reserve(candidates.size());
  for (std::size_t off : candidates) keyed.emplace_back(rng.bits(off), off);
  std::nth_element(keyed.begin(), keyed.begin() + static_cast<std::ptrdiff_t>(keep), keyed.end());
  std::vector<std::size_t> out;
  out.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) out.push_back(keyed[i].second);
  return out;
}

std::vector<std::uint8_t> dropped_slices(const Dims& dims, const MissingSpec& spec, MissingKind kind) {
  if (spec.mode >= dims.size()) {
    throw InvalidArgument(fmt::format("missing spec mode {} out of range for order {}", spec.mode, dims.size()));
  }
  const std::size_t extent = dims[spec.mode];
  std::vector<std::uint8_t> drop(extent, 0);
  switch (kind) {
    case MissingKind::drop_every_kth_slice:
      if (spec.k == 0) throw InvalidArgument("drop_every_kth_slice needs k >= 1");
      if (spec.phase >= spec.k) throw InvalidArgument("drop_every_kth_slice phase must be below k");
      for (std::size_t i = spec.phase; i < extent; i += spec.k) drop[i] = 1;
      break;
    case MissingKind::time_window: {
      const std::size_t period = spec.period == 0 ? extent : spec.period;
      if (spec.window_length == 0 || spec.window_start + spec.window_length > period) {
        throw InvalidArgument(fmt::format("time window [{}, {}) does not fit period {}", spec.window_start,
                                          spec.window_start + spec.window_length, period));
      }
      if (extent % period != 0) {
        throw InvalidArgument(fmt::format("period {} does not divide extent {}", period, extent));
      }
      for (std::size_t i = 0; i < extent; ++i) {
        const std::size_t phase = i % period;
        if (phase >= spec.window_start && phase < spec.window_start + spec.window_length) drop[i] = 1;
      }
      break;
    }
    case MissingKind::whole_slices:
      for (std::size_t s : spec.slices) {
        if (s >= extent) throw InvalidArgument(fmt::format("slice {} out of range for extent {}", s, extent));
        drop[s] = 1;
      }
      break;
    default:
      throw InvalidArgument(fmt::format("'{}' is not a structural missing kind", to_string(kind)));
  }
  return drop;
}

// Offsets whose `mode` index is not dropped.
std::vector<std::size_t> surviving_offsets(const Dims& dims, std::size_t mode, const std::vector<std::uint8_t>& drop) {
  const std::size_t n = element_count(dims);
  std::size_t before = 1;
  for (std::size_t l = 0; l < mode; ++l) before *= dims[l];
  std::vector<std::size_t> out;
  out.reserve(n);
  for (std::size_t off = 0; off < n; ++off) {
    if (!drop[(off / before) % dims[mode]]) out.push_back(off);
  }
  return out;
}

}  // namespace

std::string_view to_string(MissingKind k) {
  switch (k) {
    case MissingKind::random: return "random";
    case MissingKind::drop_every_kth_slice: return "drop_every_kth_slice";
    case MissingKind::time_window: return "time_window";
    case MissingKind::whole_slices: return "whole_slices";
    case MissingKind::composite: return "composite";
  }
  return "unknown";
}

MissingKind parse_missing_kind(std::string_view s) {
  for (auto k : {MissingKind::random, MissingKind::drop_every_kth_slice, MissingKind::time_window,
                 MissingKind::whole_slices, MissingKind::composite}) {
    if (s == to_string(k)) return k;
  }
  throw InvalidArgument(fmt::format("unknown missing kind '{}'", s));
}

ObservationMask random_mask(const Dims& dims, double ratio, std::uint64_t seed) {
  require_ratio(ratio);
  std::vector<std::size_t> all(element_count(dims));
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return {dims, retain_uniform(all, ratio, seed)};
}

ObservationMask structured_mask(const Dims& dims, const MissingSpec& spec) {
  switch (spec.kind) {
    case MissingKind::random:
      return random_mask(dims, spec.ratio, spec.seed);
    case MissingKind::composite: {
      if (spec.structure == MissingKind::random || spec.structure == MissingKind::composite) {
        throw InvalidArgument("composite spec needs a structural kind");
      }
      const auto drop = dropped_slices(dims, spec, spec.structure);
      return {dims, retain_uniform(surviving_offsets(dims, spec.mode, drop), spec.ratio, spec.seed)};
    }
    default: {
      const auto drop = dropped_slices(dims, spec, spec.kind);
      return {dims, surviving_offsets(dims, spec.mode, drop)};
    }
  }
}

std::string to_json(const MissingSpec& spec) {
  json j;
  j["kind"] = to_string(spec.kind);
  j["mode"] = spec.mode;
  j["ratio"] = spec.ratio;
  j["k"] = spec.k;
  j["phase"] = spec.phase;
  j["period"] = spec.period;
  j["window_start"] = spec.window_start;
  j["window_length"] = spec.window_length;
  j["slices"] = spec.slices;
  j["structure"] = to_string(spec.structure);
  j["seed"] = spec.seed;
  return j.dump(2);
}

MissingSpec missing_spec_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidArgument(fmt::format("missing spec is not valid JSON: {}", e.what()));
  }
  if (!j.is_object()) throw InvalidArgument("missing spec must be a JSON object");
  static const std::vector<std::string> known = {"kind",   "mode",         "ratio",         "k",
                                                 "phase",  "period",       "window_start",  "window_length",
                                                 "slices", "structure",    "seed",          "description"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw InvalidArgument(fmt::format("unknown missing spec field '{}'", key));
    }
  }
  MissingSpec spec;
  try {
    spec.kind = parse_missing_kind(j.at("kind").get<std::string>());
    spec.mode = j.value("mode", spec.mode);
    spec.ratio = j.value("ratio", spec.ratio);
    spec.k = j.value("k", spec.k);
    spec.phase = j.value("phase", spec.phase);
    spec.period = j.value("period", spec.period);
    spec.window_start = j.value("window_start", spec.window_start);
    spec.window_length = j.value("window_length", spec.window_length);
    spec.slices = j.value("slices", spec.slices);
    if (j.contains("structure")) spec.structure = parse_missing_kind(j.at("structure").get<std::string>());
    spec.seed = j.value("seed", spec.seed);
  } catch (const json::exception& e) {
    throw InvalidArgument(fmt::format("malformed missing spec: {}", e.what()));
  }
  require_ratio(spec.ratio);
  return spec;
}

}  // namespace lrsetd
