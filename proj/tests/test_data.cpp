#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "nlnl/data.hpp"
#include "nlnl/error.hpp"

using namespace nlnl;
namespace fs = std::filesystem;

namespace {

// Nearest class-mean classifier accuracy, computed from scratch.
double nearest_centroid_accuracy(const LabeledDataset& ds) {
  std::vector<double> mean(ds.classes * ds.dim, 0.0);
  std::vector<std::size_t> count(ds.classes, 0);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    ++count[ds.labels[i]];
    for (std::size_t j = 0; j < ds.dim; ++j) mean[ds.labels[i] * ds.dim + j] += ds.row(i)[j];
  }
  for (std::size_t k = 0; k < ds.classes; ++k)
    for (std::size_t j = 0; j < ds.dim; ++j) mean[k * ds.dim + j] /= static_cast<double>(count[k]);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    std::size_t best = 0;
    double best_d = INFINITY;
    for (std::size_t k = 0; k < ds.classes; ++k) {
      double d2 = 0.0;
      for (std::size_t j = 0; j < ds.dim; ++j) d2 += std::pow(ds.row(i)[j] - mean[k * ds.dim + j], 2);
      if (d2 < best_d) best_d = d2, best = k;
    }
    correct += best == ds.labels[i];
  }
  return static_cast<double>(correct) / static_cast<double>(ds.size());
}

void write_bytes(const fs::path& p, const std::vector<unsigned char>& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void put_u32(std::vector<unsigned char>& b, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) b.push_back(static_cast<unsigned char>(v >> s));
}

struct IdxFiles {
  fs::path dir, images, labels;
  explicit IdxFiles(const std::string& tag) {
    dir = fs::temp_directory_path() / ("nlnl_idx_" + tag);
    fs::create_directories(dir);
    images = dir / "images.idx";
    labels = dir / "labels.idx";
  }
  ~IdxFiles() { fs::remove_all(dir); }

  // n images of rows x cols with pixel value (i + j) % 256; labels i % 10.
  void write(std::uint32_t n, std::uint32_t rows, std::uint32_t cols, std::uint32_t img_magic = 0x803,
             std::uint32_t lab_magic = 0x801, std::uint32_t n_labels = 0, std::size_t drop = 0) {
    std::vector<unsigned char> img, lab;
    put_u32(img, img_magic);
    put_u32(img, n);
    put_u32(img, rows);
    put_u32(img, cols);
    for (std::uint32_t i = 0; i < n; ++i)
      for (std::uint32_t j = 0; j < rows * cols; ++j) img.push_back(static_cast<unsigned char>((i + j) % 256));
    img.resize(img.size() - drop);
    put_u32(lab, lab_magic);
    put_u32(lab, n_labels ? n_labels : n);
    for (std::uint32_t i = 0; i < n; ++i) lab.push_back(static_cast<unsigned char>(i % 10));
    write_bytes(images, img);
    write_bytes(labels, lab);
  }
};

}  // namespace

TEST_CASE("well separated blobs are nearly perfectly separable by class means") {
  Rng rng(1);
  const auto ds = make_blobs({10, 500, 16, 10.0}, rng);
  CHECK(ds.size() == 5000);
  CHECK(nearest_centroid_accuracy(ds) >= 0.999);
}

TEST_CASE("one sample per class") {
  Rng rng(2);
  const auto ds = make_blobs({3, 1, 4, 4.0}, rng);
  CHECK(ds.size() == 3);
  CHECK(ds.labels == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("blob centers are at least separation * sqrt(dim) apart") {
  for (BlobSpec spec : {BlobSpec{4, 1, 16, 4.0}, BlobSpec{10, 1, 3, 2.0}, BlobSpec{16, 1, 16, 1.5}}) {
    Rng rng(3);
    const auto centers = blob_centers(spec, rng);
    const double min_dist = spec.separation * std::sqrt(static_cast<double>(spec.dim));
    for (std::size_t a = 0; a < spec.classes; ++a)
      for (std::size_t b = a + 1; b < spec.classes; ++b) {
        double d2 = 0.0;
        for (std::size_t j = 0; j < spec.dim; ++j)
          d2 += std::pow(centers[a * spec.dim + j] - centers[b * spec.dim + j], 2);
        CHECK(std::sqrt(d2) >= min_dist * (1.0 - 1e-9));
      }
  }
}

TEST_CASE("blobs are standardized and the normalization record inverts exactly") {
  Rng rng(4);
  const auto ds = make_blobs({4, 200, 8, 4.0}, rng);
  for (std::size_t j = 0; j < ds.dim; ++j) {
    double mean = 0.0, var = 0.0;
    for (std::size_t i = 0; i < ds.size(); ++i) mean += ds.row(i)[j];
    mean /= static_cast<double>(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) var += std::pow(ds.row(i)[j] - mean, 2);
    CHECK(std::abs(mean) <= 1e-9);
    CHECK(var / static_cast<double>(ds.size()) == doctest::Approx(1.0));
  }
  const auto raw = raw_features(ds);
  for (std::size_t i = 0; i < ds.size(); ++i)
    for (std::size_t j = 0; j < ds.dim; ++j) {
      const double back = (raw[i * ds.dim + j] - ds.normalization.offset[j]) / ds.normalization.scale[j];
      CHECK(std::abs(back - ds.row(i)[j]) <= 1e-9);
    }
}

TEST_CASE("blob generation is deterministic") {
  Rng a(9), b(9), c(10);
  const auto x = make_blobs({}, a), y = make_blobs({}, b), z = make_blobs({}, c);
  CHECK(x.features == y.features);
  CHECK(x.features != z.features);
}

TEST_CASE("blob spec validation") {
  Rng rng(1);
  CHECK_THROWS_AS(make_blobs({1, 10, 4, 1.0}, rng), ConfigError);
  CHECK_THROWS_AS(make_blobs({3, 0, 4, 1.0}, rng), ConfigError);
  CHECK_THROWS_AS(make_blobs({3, 10, 4, 0.0}, rng), ConfigError);
}

TEST_CASE("stratified split keeps class proportions and partitions the indices") {
  Rng rng(5);
  const auto ds = make_blobs({10, 100, 4, 4.0}, rng);
  Rng srng(6);
  const auto [a, b] = split_indices(ds, 0.9, srng);
  CHECK(a.size() == 900);
  CHECK(b.size() == 100);
  std::vector<std::size_t> per_a(10, 0), per_b(10, 0);
  for (auto i : a) ++per_a[ds.labels[i]];
  for (auto i : b) ++per_b[ds.labels[i]];
  for (std::size_t k = 0; k < 10; ++k) {
    CHECK(per_a[k] == 90);
    CHECK(per_b[k] == 10);
  }
  std::set<std::size_t> all(a.begin(), a.end());
  all.insert(b.begin(), b.end());
  CHECK(all.size() == 1000);
  CHECK(std::is_sorted(a.begin(), a.end()));

  Rng s1(7), s2(7);
  CHECK(split_indices(ds, 0.5, s1) == split_indices(ds, 0.5, s2));
  const auto [ta, tb] = split(ds, 0.9, s1);
  CHECK(ta.size() + tb.size() == ds.size());
  CHECK(ta.normalization.offset == ds.normalization.offset);
}

TEST_CASE("split rejects singleton classes and bad fractions") {
  LabeledDataset ds;
  ds.dim = 1;
  ds.classes = 2;
  ds.features = {0, 1, 2};
  ds.labels = {0, 0, 1};
  Rng rng(1);
  CHECK_THROWS_AS(split_indices(ds, 0.5, rng), InvalidProblem);
  ds.labels = {0, 1, 1};
  ds.features = {0, 1, 2};
  CHECK_THROWS_AS(split_indices(ds, 1.0, rng), ConfigError);
}

TEST_CASE("CSV round-trip preserves labels and features exactly") {
  Rng rng(8);
  const auto ds = make_blobs({3, 20, 5, 2.0}, rng);
  const auto back = dataset_from_csv(dataset_to_csv(ds), 3);
  CHECK(back.labels == ds.labels);
  CHECK(back.features == ds.features);
  CHECK(back.dim == 5);
}

TEST_CASE("IDX files load with pixel scaling") {
  IdxFiles f("ok");
  f.write(12, 2, 3);
  const auto ds = load_idx(f.images, f.labels);
  CHECK(ds.size() == 12);
  CHECK(ds.dim == 6);
  CHECK(ds.classes == 10);
  CHECK(ds.labels[11] == 1);
  CHECK(ds.row(1)[2] == doctest::Approx(3.0 / 255.0));
  CHECK(load_idx(f.images, f.labels, 12).classes == 12);
}

TEST_CASE("IDX errors are reported precisely") {
  IdxFiles f("bad");
  f.write(4, 2, 2, 0x802);
  CHECK_THROWS_WITH_AS(load_idx(f.images, f.labels), doctest::Contains("0x00000803"), ParseError);
  f.write(4, 2, 2, 0x803, 0x800);
  CHECK_THROWS_WITH_AS(load_idx(f.images, f.labels), doctest::Contains("0x00000801"), ParseError);
  f.write(4, 2, 2, 0x803, 0x801, 5);
  CHECK_THROWS_WITH_AS(load_idx(f.images, f.labels), doctest::Contains("count mismatch"), ParseError);
  f.write(4, 2, 2, 0x803, 0x801, 0, 3);
  CHECK_THROWS_WITH_AS(load_idx(f.images, f.labels), doctest::Contains("truncated"), ParseError);
  write_bytes(f.images, {});
  CHECK_THROWS_AS(load_idx(f.images, f.labels), ParseError);
  CHECK_THROWS_AS(load_idx(f.dir / "missing", f.labels), ParseError);
}
