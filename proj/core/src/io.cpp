#include "lrsetd/io.hpp"

#include "lrsetd/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace lrsetd {

namespace fs = std::filesystem;

namespace {

static_assert(std::endian::native == std::endian::little, "LRT1 I/O assumes a little-endian host");

constexpr char kMagic[4] = {'L', 'R', 'T', '1'};
constexpr std::uint32_t kMaxOrder = 16;

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open '{}' for reading", path.string()));
  return in;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  return out;
}

template <typename T>
void read_exact(std::istream& in, T* dst, std::size_t count, const fs::path& path) {
  in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(count * sizeof(T)));
  if (static_cast<std::size_t>(in.gcount()) != count * sizeof(T)) {
    throw IoError(fmt::format("'{}' is truncated", path.string()));
  }
}

void finish_write(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw IoError(fmt::format("write to '{}' failed", path.string()));
}

// Netpbm header token, skipping whitespace and '#' comments.
std::size_t header_number(std::istream& in, const fs::path& path) {
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (!std::isspace(c)) {
      break;
    }
    c = in.get();
  }
  if (c == EOF || !std::isdigit(c)) throw IoError(fmt::format("'{}': malformed image header", path.string()));
  std::size_t value = 0;
  while (c != EOF && std::isdigit(c)) {
    value = value * 10 + static_cast<std::size_t>(c - '0');
    if (value > (1u << 24)) throw IoError(fmt::format("'{}': image header value too large", path.string()));
    c = in.get();
  }
  // exactly one whitespace byte separates the header from the raster
  if (c == EOF || !std::isspace(c)) throw IoError(fmt::format("'{}': malformed image header", path.string()));
  return value;
}

std::size_t parse_size(std::string_view s, std::string_view what) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || v == 0) {
    throw InvalidArgument(fmt::format("invalid {} '{}'", what, s));
  }
  return v;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

void write_tensor(const fs::path& path, const DenseTensor& t) {
  auto out = open_out(path);
  out.write(kMagic, 4);
  const auto order = static_cast<std::uint32_t>(t.order());
  out.write(reinterpret_cast<const char*>(&order), sizeof order);
  for (std::size_t d : t.dims()) {
    const auto e = static_cast<std::uint64_t>(d);
    out.write(reinterpret_cast<const char*>(&e), sizeof e);
  }
  out.write(reinterpret_cast<const char*>(t.data().data()), static_cast<std::streamsize>(t.size() * sizeof(double)));
  finish_write(out, path);
}

DenseTensor read_tensor(const fs::path& path) {
  auto in = open_in(path);
  char magic[4];
  read_exact(in, magic, 4, path);
  if (std::memcmp(magic, kMagic, 4) != 0) throw IoError(fmt::format("'{}' is not an LRT1 tensor file", path.string()));
  std::uint32_t order = 0;
  read_exact(in, &order, 1, path);
  if (order == 0 || order > kMaxOrder) throw IoError(fmt::format("'{}': unsupported order {}", path.string(), order));
  std::vector<std::uint64_t> raw(order);
  read_exact(in, raw.data(), order, path);
  Dims dims(raw.begin(), raw.end());
  std::size_t count = 0;
  try {
    count = element_count(dims);
  } catch (const InvalidArgument&) {
    throw IoError(fmt::format("'{}': extents overflow", path.string()));
  }
  std::vector<double> data(count);
  read_exact(in, data.data(), count, path);
  if (in.peek() != EOF) throw IoError(fmt::format("'{}': trailing bytes after payload", path.string()));
  return {std::move(dims), std::move(data)};
}

void write_mask(const fs::path& path, const ObservationMask& mask) { write_tensor(path, mask.to_indicator()); }

ObservationMask read_mask(const fs::path& path) {
  const DenseTensor t = read_tensor(path);
  for (double v : t.values()) {
    if (v != 0.0 && v != 1.0) throw IoError(fmt::format("'{}': mask entries must be 0 or 1", path.string()));
  }
  return ObservationMask::from_indicator(t);
}

DenseTensor read_image(const fs::path& path) {
  auto in = open_in(path);
  char magic[2];
  read_exact(in, magic, 2, path);
  std::size_t channels = 0;
  if (magic[0] == 'P' && magic[1] == '6') {
    channels = 3;
  } else if (magic[0] == 'P' && magic[1] == '5') {
    channels = 1;
  } else {
    throw IoError(fmt::format("'{}' is not a binary PPM/PGM image", path.string()));
  }
  const std::size_t width = header_number(in, path);
  const std::size_t height = header_number(in, path);
  const std::size_t maxval = header_number(in, path);
  if (maxval != 255) throw IoError(fmt::format("'{}': maxval {} unsupported (need 255)", path.string(), maxval));
  if (width == 0 || height == 0) throw IoError(fmt::format("'{}': empty image", path.string()));
  std::vector<unsigned char> raster(width * height * channels);
  read_exact(in, raster.data(), raster.size(), path);

  DenseTensor t(Dims{height, width, channels});
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      for (std::size_t k = 0; k < channels; ++k) {
        t[r + height * (c + width * k)] = raster[(r * width + c) * channels + k];
      }
    }
  }
  return t;
}

void write_image(const fs::path& path, const DenseTensor& image) {
  if (image.order() != 3 || (image.dim(2) != 1 && image.dim(2) != 3)) {
    throw InvalidArgument("write_image needs an H x W x 1 or H x W x 3 tensor");
  }
  const std::size_t height = image.dim(0);
  const std::size_t width = image.dim(1);
  const std::size_t channels = image.dim(2);
  std::vector<unsigned char> raster(height * width * channels);
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      for (std::size_t k = 0; k < channels; ++k) {
        const double v = image[r + height * (c + width * k)];
        const double q = std::isnan(v) ? 0.0 : std::clamp(std::round(v), 0.0, 255.0);
        raster[(r * width + c) * channels + k] = static_cast<unsigned char>(q);
      }
    }
  }
  auto out = open_out(path);
  const std::string header = fmt::format("{}\n{} {}\n255\n", channels == 3 ? "P6" : "P5", width, height);
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  out.write(reinterpret_cast<const char*>(raster.data()), static_cast<std::streamsize>(raster.size()));
  finish_write(out, path);
}

DenseTensor read_pgm_stack(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError(fmt::format("'{}' is not a directory", dir.string()));
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".pgm") files.push_back(entry.path());
  }
  if (files.empty()) throw IoError(fmt::format("no .pgm files in '{}'", dir.string()));
  std::sort(files.begin(), files.end());

  DenseTensor stack;
  for (std::size_t k = 0; k < files.size(); ++k) {
    const DenseTensor frame = read_image(files[k]);
    if (frame.dim(2) != 1) throw IoError(fmt::format("'{}' is not grayscale", files[k].string()));
    if (k == 0) {
      stack = DenseTensor(Dims{frame.dim(0), frame.dim(1), files.size()});
    } else if (frame.dim(0) != stack.dim(0) || frame.dim(1) != stack.dim(1)) {
      throw IoError(fmt::format("'{}' differs in size from '{}'", files[k].string(), files[0].string()));
    }
    std::copy(frame.data().begin(), frame.data().end(), stack.data().begin() + static_cast<std::ptrdiff_t>(k * frame.size()));
  }
  return stack;
}

DenseMatrix read_traffic_csv(const fs::path& path) {
  auto in = open_in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view view = trim(line);
    if (view.empty()) continue;
    std::vector<double> row;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = view.find(',', start);
      const std::string_view field = trim(view.substr(start, comma == std::string_view::npos ? view.npos : comma - start));
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size()) {
        throw IoError(fmt::format("'{}' line {}: non-numeric field '{}'", path.string(), lineno, field));
      }
      row.push_back(v);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw IoError(fmt::format("'{}' line {}: {} fields, expected {}", path.string(), lineno, row.size(),
                                rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError(fmt::format("'{}' has no data rows", path.string()));
  DenseMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  }
  return m;
}

void write_traffic_csv(const fs::path& path, const DenseMatrix& m) {
  auto out = open_out(path);
  std::string buf;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    buf.clear();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) buf += ',';
      buf += fmt::format("{}", m(r, c));
    }
    buf += '\n';
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  }
  finish_write(out, path);
}

Tensorization parse_tensorization(std::string_view text) {
  Tensorization t;
  if (text == "none" || text.empty()) return t;
  const std::size_t colon = text.find(':');
  const std::string_view kind = text.substr(0, colon);
  if (kind == "otd") {
    t.kind = Tensorization::Kind::otd;
  } else if (kind == "oot") {
    t.kind = Tensorization::Kind::oot;
  } else {
    throw InvalidArgument(fmt::format("unknown tensorization '{}'", text));
  }
  if (colon == std::string_view::npos) throw InvalidArgument(fmt::format("tensorization '{}' needs extents", text));
  std::string_view rest = text.substr(colon + 1);
  std::size_t* slots[3] = {&t.a, &t.b, &t.c};
  for (int i = 0; i < 3; ++i) {
    const std::size_t comma = rest.find(',');
    if ((i < 2) == (comma == std::string_view::npos)) {
      throw InvalidArgument(fmt::format("tensorization '{}' needs three extents", text));
    }
    *slots[i] = parse_size(rest.substr(0, comma), "tensorization extent");
    if (comma != std::string_view::npos) rest = rest.substr(comma + 1);
  }
  return t;
}

std::string to_string(const Tensorization& t) {
  switch (t.kind) {
    case Tensorization::Kind::otd: return fmt::format("otd:{},{},{}", t.a, t.b, t.c);
    case Tensorization::Kind::oot: return fmt::format("oot:{},{},{}", t.a, t.b, t.c);
    default: return "none";
  }
}

DenseTensor tensorize(const DenseMatrix& m, const Tensorization& how) {
  const auto rows = static_cast<std::size_t>(m.rows());
  const auto cols = static_cast<std::size_t>(m.cols());
  switch (how.kind) {
    case Tensorization::Kind::none: {
      DenseTensor t(Dims{rows, cols, 1});
      Eigen::Map<DenseMatrix>(t.data().data(), m.rows(), m.cols()) = m;
      return t;
    }
    case Tensorization::Kind::otd: {
      if (rows != how.a || cols != how.b * how.c) {
        throw InvalidArgument(fmt::format("otd:{},{},{} does not fit a {} x {} matrix", how.a, how.b, how.c, rows, cols));
      }
      // column d*T + t already lies at offset o + P*(t + T*d)
      DenseTensor t(Dims{how.a, how.b, how.c});
      Eigen::Map<DenseMatrix>(t.data().data(), m.rows(), m.cols()) = m;
      return t;
    }
    case Tensorization::Kind::oot: {
      if (rows != how.a * how.b || cols != how.c) {
        throw InvalidArgument(fmt::format("oot:{},{},{} does not fit a {} x {} matrix", how.a, how.b, how.c, rows, cols));
      }
      DenseTensor t(Dims{how.a, how.b, how.c});
      Eigen::Map<DenseMatrix>(t.data().data(), m.rows(), m.cols()) = m;
      return t;
    }
  }
  throw InvalidArgument("unknown tensorization");
}

DenseMatrix flatten(const DenseTensor& t, const Tensorization& how) {
  if (t.order() != 3) throw InvalidArgument("flatten needs a third-order tensor");
  Eigen::Index rows = 0;
  switch (how.kind) {
    case Tensorization::Kind::none:
      if (t.dim(2) != 1) throw InvalidArgument("flatten(none) needs a trailing extent of 1");
      rows = static_cast<Eigen::Index>(t.dim(0));
      break;
    case Tensorization::Kind::otd:
      if (t.dims() != Dims{how.a, how.b, how.c}) throw InvalidArgument("flatten: tensor does not match otd extents");
      rows = static_cast<Eigen::Index>(how.a);
      break;
    case Tensorization::Kind::oot:
      if (t.dims() != Dims{how.a, how.b, how.c}) throw InvalidArgument("flatten: tensor does not match oot extents");
      rows = static_cast<Eigen::Index>(how.a * how.b);
      break;
  }
  return Eigen::Map<const DenseMatrix>(t.data().data(), rows, static_cast<Eigen::Index>(t.size()) / rows);
}

}  // namespace lrsetd
