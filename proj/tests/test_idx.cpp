#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <zlib.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "kmfl/csv.hpp"
#include "kmfl/dataset.hpp"
#include "kmfl/error.hpp"
#include "kmfl/idx.hpp"

using namespace kmfl;
using Bytes = std::vector<std::uint8_t>;

namespace {

// 3 images of 2x2, then labels 4, 6, 1.
const Bytes kImages{0x00, 0x00, 0x08, 0x03, 0, 0, 0, 3, 0, 0, 0, 2, 0, 0, 0, 2,
                    0, 255, 10, 20,  // image 0
                    1, 2, 3, 4,      // image 1
                    9, 9, 9, 9};     // image 2
const Bytes kLabels{0x00, 0x00, 0x08, 0x01, 0, 0, 0, 3, 4, 6, 1};

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error raised");
  return ErrorKind::kIo;
}

std::filesystem::path scratch() {
  const auto dir = std::filesystem::temp_directory_path() / "kmfl_test_idx";
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("image fixture parses") {
  const auto img = parse_idx_images(kImages);
  CHECK(img.count == 3);
  CHECK(img.rows == 2);
  CHECK(img.cols == 2);
  CHECK(img.at(0, 0, 1) == 255);
  CHECK(img.at(1, 1, 1) == 4);
  CHECK(img.image(2).size() == 4);
  CHECK(img.image(2)[3] == 9);
  CHECK(parse_idx_labels(kLabels) == Bytes{4, 6, 1});
}

TEST_CASE("fixtures round-trip bitwise") {
  CHECK(serialize_idx_images(parse_idx_images(kImages)) == kImages);
  CHECK(serialize_idx_labels(parse_idx_labels(kLabels)) == kLabels);
}

TEST_CASE("malformed files are rejected") {
  Bytes bad = kImages;
  bad[3] = 0x01;
  CHECK(kind_of([&] { parse_idx_images(bad); }) == ErrorKind::kBadMagic);
  CHECK(kind_of([&] { parse_idx_labels(kImages); }) == ErrorKind::kBadMagic);

  Bytes truncated(kImages.begin(), kImages.end() - 1);
  CHECK(kind_of([&] { parse_idx_images(truncated); }) == ErrorKind::kTruncatedPayload);
  CHECK(kind_of([&] { parse_idx_images(Bytes(kImages.begin(), kImages.begin() + 10)); }) ==
        ErrorKind::kTruncatedPayload);
  Bytes short_labels(kLabels.begin(), kLabels.end() - 1);
  CHECK(kind_of([&] { parse_idx_labels(short_labels); }) == ErrorKind::kTruncatedPayload);

  Bytes trailing = kImages;
  trailing.push_back(0);
  CHECK(kind_of([&] { parse_idx_images(trailing); }) == ErrorKind::kTrailingBytes);
  Bytes trailing_labels = kLabels;
  trailing_labels.push_back(7);
  CHECK(kind_of([&] { parse_idx_labels(trailing_labels); }) == ErrorKind::kTrailingBytes);
}

TEST_CASE("raw and gzip files read identically") {
  const auto dir = scratch();
  {
    std::ofstream raw(dir / "img.idx", std::ios::binary);
    raw.write(reinterpret_cast<const char*>(kImages.data()), static_cast<std::streamsize>(kImages.size()));
  }
  gzFile gz = gzopen((dir / "img.idx.gz").c_str(), "wb");
  REQUIRE(gz != nullptr);
  gzwrite(gz, kImages.data(), static_cast<unsigned>(kImages.size()));
  gzclose(gz);
  CHECK(read_maybe_gzip(dir / "img.idx") == kImages);
  CHECK(read_maybe_gzip(dir / "img.idx.gz") == kImages);
  CHECK_THROWS_AS(read_maybe_gzip(dir / "missing"), Error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("binary filtering") {
  const auto data = filter_binary_classes(parse_idx_images(kImages), parse_idx_labels(kLabels), 4, 6, 10, 0);
  REQUIRE(data.size() == 2);
  CHECK(data.input_dim() == 4);
  CHECK(data.output_dim() == 2);
  CHECK(data.features(0, 1) == 1.0);
  CHECK(data.features(0, 2) == doctest::Approx(10.0 / 255.0));
  CHECK(data.features(1, 3) == doctest::Approx(4.0 / 255.0));
  CHECK(data.labels(0, 0) == 1.0);
  CHECK(data.labels(0, 1) == 0.0);
  CHECK(data.labels(1, 0) == 0.0);
  CHECK(data.labels(1, 1) == 1.0);
  CHECK_NOTHROW(data.validate());

  const auto one = filter_binary_classes(parse_idx_images(kImages), parse_idx_labels(kLabels), 4, 6, 1, 5);
  CHECK(one.size() == 1);

  const auto none = filter_binary_classes(parse_idx_images(kImages), parse_idx_labels(kLabels), 2, 3, 10, 0);
  CHECK(none.size() == 0);

  CHECK_THROWS_AS(filter_binary_classes(parse_idx_images(kImages), Bytes{4, 6}, 4, 6, 10, 0), Error);
}

TEST_CASE("subsampling keeps file order and is seeded") {
  IdxImages img;
  img.count = 200;
  img.rows = 1;
  img.cols = 1;
  Bytes labels;
  for (std::uint32_t k = 0; k < 200; ++k) {
    img.pixels.push_back(static_cast<std::uint8_t>(k));
    labels.push_back(k % 2 == 0 ? 4 : 6);
  }
  const auto a = filter_binary_classes(img, labels, 4, 6, 50, 1);
  const auto b = filter_binary_classes(img, labels, 4, 6, 50, 1);
  const auto c = filter_binary_classes(img, labels, 4, 6, 50, 2);
  REQUIRE(a.size() == 50);
  CHECK(a.features == b.features);
  CHECK(a.features != c.features);
  for (Index r = 1; r < a.size(); ++r) CHECK(a.features(r, 0) > a.features(r - 1, 0));
  CHECK(filter_binary_classes(img, labels, 4, 6, 10000, 1).size() == 200);
}

TEST_CASE("synthetic dataset") {
  const auto a = synthetic_dataset(300, 5, 11), b = synthetic_dataset(300, 5, 11);
  CHECK(a.features == b.features);
  CHECK(a.labels == b.labels);
  CHECK_NOTHROW(a.validate());
  CHECK(a.features.minCoeff() >= 0.0);
  CHECK(a.features.maxCoeff() <= 1.0);
  CHECK(synthetic_dataset(300, 5, 12).features != a.features);

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto d = synthetic_dataset(10000, 16, seed);
    const double frac = d.labels.col(0).sum() / 10000.0;
    CHECK(frac >= 0.4);
    CHECK(frac <= 0.6);
  }
  CHECK(synthetic_dataset(0, 4, 1).size() == 0);
}

TEST_CASE("dataset validation and csv export") {
  Dataset d;
  d.features = Matrix::Constant(2, 2, 0.5);
  d.labels = Matrix::Zero(2, 2);
  d.labels(0, 0) = 1;
  CHECK_THROWS_AS(d.validate(), Error);  // second row not one-hot
  d.labels(1, 1) = 1;
  CHECK_NOTHROW(d.validate());
  d.features(1, 1) = 1.5;
  CHECK_THROWS_AS(d.validate(), Error);
  d.features(1, 1) = 0.25;

  const auto path = scratch() / "ds.csv";
  write_dataset_csv(d, path);
  const auto table = read_csv(path);
  CHECK(table.header == std::vector<std::string>{"feature_0", "feature_1", "label_0", "label_1"});
  REQUIRE(table.rows.size() == 2);
  CHECK(table.rows[1] == std::vector<double>{0.5, 0.25, 0.0, 1.0});
  std::filesystem::remove_all(path.parent_path());
}

TEST_CASE("csv doubles round-trip") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) {
    CHECK(std::stod(format_double(v)) == v);
  }
}
