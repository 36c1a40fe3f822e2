#include "support.hpp"

#include "lrsetd/error.hpp"
#include "lrsetd/io.hpp"

#include <gtest/gtest.h>

#include <cstring>

namespace lrsetd {
namespace {

namespace fs = std::filesystem;
using testing::scratch_dir;
using testing::slurp;
using testing::spit;

TEST(TensorFile, RoundTripIsBitIdentical) {
  const auto dir = scratch_dir("tensor_rt");
  std::mt19937_64 rng(90);
  const DenseTensor t = testing::random_tensor(Dims{3, 4, 5}, rng);
  write_tensor(dir / "t.lrt", t);
  EXPECT_EQ(read_tensor(dir / "t.lrt"), t);
  EXPECT_EQ(fs::file_size(dir / "t.lrt"), 4 + 4 + 3 * 8 + 60 * 8u);

  const DenseTensor v(Dims{4}, {1.0, -0.0, 1e-300, 7.25});
  write_tensor(dir / "v.lrt", v);
  const DenseTensor back = read_tensor(dir / "v.lrt");
  EXPECT_EQ(back.dims(), v.dims());
  EXPECT_EQ(std::memcmp(back.data().data(), v.data().data(), 32), 0);
}

TEST(TensorFile, Errors) {
  const auto dir = scratch_dir("tensor_err");
  write_tensor(dir / "t.lrt", DenseTensor::filled(Dims{2, 3}, 1.0));
  std::string bytes = slurp(dir / "t.lrt");

  spit(dir / "short.lrt", bytes.substr(0, bytes.size() - 8));
  EXPECT_THROW(read_tensor(dir / "short.lrt"), IoError);

  std::string bad = bytes;
  bad[3] = '2';
  spit(dir / "magic.lrt", bad);
  EXPECT_THROW(read_tensor(dir / "magic.lrt"), IoError);

  // two extents of 2^40 overflow the element count
  std::string huge = bytes.substr(0, 8);
  const std::uint64_t big = std::uint64_t{1} << 40;
  huge.append(reinterpret_cast<const char*>(&big), 8);
  huge.append(reinterpret_cast<const char*>(&big), 8);
  spit(dir / "huge.lrt", huge);
  EXPECT_THROW(read_tensor(dir / "huge.lrt"), IoError);

  spit(dir / "long.lrt", bytes + "x");
  EXPECT_THROW(read_tensor(dir / "long.lrt"), IoError);
  EXPECT_THROW(read_tensor(dir / "missing.lrt"), IoError);
}

TEST(MaskFile, RoundTripAndValidation) {
  const auto dir = scratch_dir("mask_rt");
  const ObservationMask m(Dims{3, 2, 2}, {0, 4, 11});
  write_mask(dir / "m.lrt", m);
  EXPECT_EQ(read_mask(dir / "m.lrt"), m);
  write_tensor(dir / "bad.lrt", DenseTensor::filled(Dims{2}, 0.5));
  EXPECT_THROW(read_mask(dir / "bad.lrt"), IoError);
}

TEST(Image, WhitePixel) {
  const auto dir = scratch_dir("img_white");
  spit(dir / "w.ppm", std::string("P6\n1 1\n255\n") + std::string(3, '\xff'));
  const DenseTensor t = read_image(dir / "w.ppm");
  EXPECT_EQ(t, DenseTensor::filled(Dims{1, 1, 3}, 255.0));
}

TEST(Image, GrayRampWithComment) {
  const auto dir = scratch_dir("img_ramp");
  spit(dir / "r.pgm", std::string("P5\n# ramp\n2 2\n255\n") + std::string("\x00\x55\xaa\xff", 4));
  const DenseTensor t = read_image(dir / "r.pgm");
  ASSERT_EQ(t.dims(), (Dims{2, 2, 1}));
  // raster is row-major: (0,0)=0 (0,1)=85 (1,0)=170 (1,1)=255
  EXPECT_EQ(t.at({0, 0, 0}), 0.0);
  EXPECT_EQ(t.at({0, 1, 0}), 85.0);
  EXPECT_EQ(t.at({1, 0, 0}), 170.0);
  EXPECT_EQ(t.at({1, 1, 0}), 255.0);
}

TEST(Image, WriteReadIsIdempotent) {
  const auto dir = scratch_dir("img_rt");
  std::string raster;
  for (int i = 0; i < 5 * 3 * 3; ++i) raster.push_back(static_cast<char>((i * 37) % 256));
  spit(dir / "a.ppm", "P6 3 5 255\n" + raster);
  const DenseTensor a = read_image(dir / "a.ppm");
  EXPECT_EQ(a.dims(), (Dims{5, 3, 3}));
  write_image(dir / "b.ppm", a);
  EXPECT_EQ(read_image(dir / "b.ppm"), a);
  EXPECT_EQ(slurp(dir / "b.ppm").substr(slurp(dir / "b.ppm").size() - raster.size()), raster);
}

TEST(Image, WriteRoundsAndClamps) {
  const auto dir = scratch_dir("img_clamp");
  write_image(dir / "c.pgm", DenseTensor(Dims{1, 5, 1}, {-3.0, 0.5, 1.49, 254.5, 300.0}));
  const DenseTensor t = read_image(dir / "c.pgm");
  EXPECT_EQ(t, DenseTensor(Dims{1, 5, 1}, {0.0, 1.0, 1.0, 255.0, 255.0}));
  EXPECT_THROW(write_image(dir / "x.ppm", DenseTensor(Dims{2, 2, 2})), InvalidArgument);
}

TEST(Image, Errors) {
  const auto dir = scratch_dir("img_err");
  spit(dir / "a.ppm", "P3\n1 1\n255\n1 2 3\n");
  EXPECT_THROW(read_image(dir / "a.ppm"), IoError);
  spit(dir / "b.ppm", std::string("P6\n1 1\n65535\n") + std::string(6, '\0'));
  EXPECT_THROW(read_image(dir / "b.ppm"), IoError);
  spit(dir / "c.ppm", "P6\n1 x\n255\n");
  EXPECT_THROW(read_image(dir / "c.ppm"), IoError);
  spit(dir / "d.ppm", std::string("P6\n2 2\n255\n") + std::string(5, '\0'));
  EXPECT_THROW(read_image(dir / "d.ppm"), IoError);
}

TEST(Image, PgmStackInFilenameOrder) {
  const auto dir = scratch_dir("img_stack");
  spit(dir / "b.pgm", std::string("P5\n2 1\n255\n") + std::string("\x02\x03", 2));
  spit(dir / "a.pgm", std::string("P5\n2 1\n255\n") + std::string("\x00\x01", 2));
  spit(dir / "notes.txt", "ignored");
  const DenseTensor t = read_pgm_stack(dir);
  EXPECT_EQ(t, DenseTensor(Dims{1, 2, 2}, {0, 1, 2, 3}));
  spit(dir / "c.pgm", std::string("P5\n1 1\n255\n") + "\x09");
  EXPECT_THROW(read_pgm_stack(dir), IoError);
}

TEST(TrafficCsv, ReadAndErrors) {
  const auto dir = scratch_dir("csv");
  spit(dir / "ok.csv", "1, 2.5,3\n4,5,-6e1\n\n");
  DenseMatrix expected(2, 3);
  expected << 1, 2.5, 3, 4, 5, -60;
  EXPECT_EQ(read_traffic_csv(dir / "ok.csv"), expected);
  write_traffic_csv(dir / "back.csv", expected);
  EXPECT_EQ(read_traffic_csv(dir / "back.csv"), expected);

  spit(dir / "ragged.csv", "1,2,3\n4,5\n");
  EXPECT_THROW(read_traffic_csv(dir / "ragged.csv"), IoError);
  spit(dir / "text.csv", "1,two,3\n");
  EXPECT_THROW(read_traffic_csv(dir / "text.csv"), IoError);
  spit(dir / "empty.csv", "\n");
  EXPECT_THROW(read_traffic_csv(dir / "empty.csv"), IoError);
}

TEST(Tensorize, OtdDays) {
  DenseMatrix m(1, 6);
  m << 1, 2, 3, 4, 5, 6;
  const DenseTensor t = tensorize(m, parse_tensorization("otd:1,3,2"));
  ASSERT_EQ(t.dims(), (Dims{1, 3, 2}));
  for (std::size_t d = 0; d < 2; ++d) {
    for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(t.at({0, k, d}), static_cast<double>(3 * d + k + 1));
  }
}

TEST(Tensorize, OotPairs) {
  DenseMatrix m(4, 1);
  m << 10, 20, 30, 40;
  const DenseTensor t = tensorize(m, parse_tensorization("oot:2,2,1"));
  // row (dst * 2 + src)
  EXPECT_EQ(t.at({0, 0, 0}), 10.0);
  EXPECT_EQ(t.at({1, 0, 0}), 20.0);
  EXPECT_EQ(t.at({0, 1, 0}), 30.0);
  EXPECT_EQ(t.at({1, 1, 0}), 40.0);
}

TEST(Tensorize, RoundTripsAndRejectsMismatch) {
  std::mt19937_64 rng(91);
  const DenseMatrix m = testing::random_matrix(6, 10, rng);
  for (const char* how : {"otd:6,5,2", "otd:6,2,5", "none"}) {
    const Tensorization t = parse_tensorization(how);
    EXPECT_EQ(flatten(tensorize(m, t), t), m);
    EXPECT_EQ(to_string(t), how);
  }
  const Tensorization oot = parse_tensorization("oot:3,2,10");
  EXPECT_EQ(flatten(tensorize(m, oot), oot), m);
  EXPECT_THROW(tensorize(m, parse_tensorization("otd:6,3,3")), InvalidArgument);
  EXPECT_THROW(parse_tensorization("otd:1,2"), InvalidArgument);
  EXPECT_THROW(parse_tensorization("otd:1,2,0"), InvalidArgument);
  EXPECT_THROW(parse_tensorization("cube:1,1,1"), InvalidArgument);
  EXPECT_THROW(parse_tensorization("oot:1,1,1,1"), InvalidArgument);
}

}  // namespace
}  // namespace lrsetd
