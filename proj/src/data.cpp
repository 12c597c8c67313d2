#include "nlnl/data.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "nlnl/error.hpp"
#include "nlnl/io.hpp"
#include "nlnl/numeric.hpp"

namespace nlnl {

void LabeledDataset::validate() const {
  if (labels.empty()) throw InvalidProblem("dataset is empty");
  if (dim == 0) throw InvalidProblem("dataset has zero feature dimension");
  if (classes < 2) throw InvalidProblem("dataset needs at least 2 classes");
  if (features.size() != labels.size() * dim) throw ShapeError("feature matrix does not match N x d");
  for (std::size_t y : labels)
    if (y >= classes) throw InvalidProblem("label " + std::to_string(y) + " out of range for " +
                                           std::to_string(classes) + " classes");
  if (!all_finite(features)) throw InvalidProblem("dataset has non-finite features");
  if (!normalization.identity() &&
      (normalization.offset.size() != dim || normalization.scale.size() != dim))
    throw ShapeError("normalization record does not match feature dimension");
}

std::vector<double> blob_centers(const BlobSpec& spec, Rng& rng) {
  const std::size_t c = spec.classes, d = spec.dim;
  const double min_dist = spec.separation * std::sqrt(static_cast<double>(d));
  std::vector<double> centers(c * d, 0.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  if (c <= d) {
    // Random orthonormal frame scaled so every pair is exactly min_dist apart.
    const double radius = min_dist / std::sqrt(2.0);
    for (std::size_t k = 0; k < c; ++k) {
      std::span<double> v(centers.data() + k * d, d);
      while (true) {
        for (double& x : v) x = gauss(rng);
        for (std::size_t j = 0; j < k; ++j) {
          std::span<const double> u(centers.data() + j * d, d);
          double proj = 0.0;
          for (std::size_t i = 0; i < d; ++i) proj += v[i] * u[i];
          for (std::size_t i = 0; i < d; ++i) v[i] -= proj * u[i];
        }
        double norm = 0.0;
        for (double x : v) norm += x * x;
        norm = std::sqrt(norm);
        if (norm > 1e-6) {
          for (double& x : v) x /= norm;
          break;
        }
      }
    }
    for (double& x : centers) x *= radius;
  } else {
    // Integer lattice with spacing min_dist; distinct points are >= min_dist apart.
    std::size_t side = 2;
    while (std::pow(static_cast<double>(side), static_cast<double>(d)) < static_cast<double>(c)) ++side;
    for (std::size_t k = 0; k < c; ++k) {
      std::size_t code = k;
      for (std::size_t i = 0; i < d; ++i) {
        centers[k * d + i] = static_cast<double>(code % side) * min_dist;
        code /= side;
      }
    }
  }
  return centers;
}

LabeledDataset make_blobs(const BlobSpec& spec, Rng& rng) {
  if (spec.classes < 2) throw ConfigError("dataset.classes", "must be >= 2");
  if (spec.dim < 2) throw ConfigError("dataset.dim", "must be >= 2");
  if (spec.per_class < 1) throw ConfigError("dataset.per_class", "must be >= 1");
  if (!(spec.separation > 0.0)) throw ConfigError("dataset.separation", "must be > 0");

  const std::size_t c = spec.classes, d = spec.dim, n = c * spec.per_class;
  const std::vector<double> centers = blob_centers(spec, rng);

  LabeledDataset ds;
  ds.dim = d;
  ds.classes = c;
  ds.features.resize(n * d);
  ds.labels.resize(n);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t k = 0; k < c; ++k) {
    for (std::size_t s = 0; s < spec.per_class; ++s) {
      const std::size_t i = k * spec.per_class + s;
      ds.labels[i] = k;
      for (std::size_t j = 0; j < d; ++j) ds.features[i * d + j] = centers[k * d + j] + gauss(rng);
    }
  }

  Normalization norm;
  norm.offset.assign(d, 0.0);
  norm.scale.assign(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += ds.features[i * d + j];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) var += (ds.features[i * d + j] - mean) * (ds.features[i * d + j] - mean);
    var /= static_cast<double>(n);
    const double sd = var > 0.0 ? std::sqrt(var) : 1.0;
    norm.offset[j] = mean;
    norm.scale[j] = sd;
    for (std::size_t i = 0; i < n; ++i) ds.features[i * d + j] = (ds.features[i * d + j] - mean) / sd;
  }
  ds.normalization = std::move(norm);
  ds.provenance = "blobs(classes=" + std::to_string(c) + ",per_class=" + std::to_string(spec.per_class) +
                  ",dim=" + std::to_string(d) + ",separation=" + io::format_double(spec.separation) + ")";
  return ds;
}

namespace {

std::string read_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open IDX file " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

std::uint32_t be32(const std::string& buf, std::size_t off, const std::filesystem::path& path) {
  if (buf.size() < off + 4) throw ParseError(path.string() + ": truncated IDX header");
  std::uint32_t v = 0;
  for (std::size_t i = 0; i < 4; ++i) v = (v << 8) | static_cast<unsigned char>(buf[off + i]);
  return v;
}

constexpr std::uint32_t kIdxImages = 0x00000803;
constexpr std::uint32_t kIdxLabels = 0x00000801;

std::string hex(std::uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%08X", v);
  return buf;
}

}  // namespace

LabeledDataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                        std::size_t classes) {
  const std::string img = read_binary(images);
  const std::string lab = read_binary(labels);

  const std::uint32_t img_magic = be32(img, 0, images);
  if (img_magic != kIdxImages)
    throw ParseError(images.string() + ": bad image magic " + hex(img_magic) + ", expected " + hex(kIdxImages));
  const std::uint32_t lab_magic = be32(lab, 0, labels);
  if (lab_magic != kIdxLabels)
    throw ParseError(labels.string() + ": bad label magic " + hex(lab_magic) + ", expected " + hex(kIdxLabels));

  const std::size_t n = be32(img, 4, images);
  const std::size_t rows = be32(img, 8, images);
  const std::size_t cols = be32(img, 12, images);
  const std::size_t n_labels = be32(lab, 4, labels);
  if (n != n_labels)
    throw ParseError("IDX count mismatch: " + std::to_string(n) + " images vs " + std::to_string(n_labels) + " labels");
  const std::size_t d = rows * cols;
  if (img.size() < 16 + n * d)
    throw ParseError(images.string() + ": truncated, expected " + std::to_string(16 + n * d) + " bytes, got " +
                     std::to_string(img.size()));
  if (lab.size() < 8 + n)
    throw ParseError(labels.string() + ": truncated, expected " + std::to_string(8 + n) + " bytes, got " +
                     std::to_string(lab.size()));

  LabeledDataset ds;
  ds.dim = d;
  ds.features.resize(n * d);
  ds.labels.resize(n);
  for (std::size_t i = 0; i < n * d; ++i)
    ds.features[i] = static_cast<double>(static_cast<unsigned char>(img[16 + i])) / 255.0;
  std::size_t max_label = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ds.labels[i] = static_cast<unsigned char>(lab[8 + i]);
    max_label = std::max(max_label, ds.labels[i]);
  }
  ds.classes = classes ? classes : std::max<std::size_t>(2, max_label + 1);
  ds.normalization.offset.assign(d, 0.0);
  ds.normalization.scale.assign(d, 1.0 / 255.0);
  ds.provenance = "idx(" + images.string() + "," + labels.string() + ")";
  ds.validate();
  return ds;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(const LabeledDataset& data,
                                                                             double fraction, Rng& rng) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw ConfigError("split.fraction", "must be in (0, 1)");
  std::vector<std::vector<std::size_t>> by_class(data.classes);
  for (std::size_t i = 0; i < data.size(); ++i) by_class[data.labels[i]].push_back(i);
  std::vector<std::size_t> a, b;
  for (std::size_t k = 0; k < data.classes; ++k) {
    auto& idx = by_class[k];
    if (idx.empty()) continue;
    if (idx.size() < 2)
      throw InvalidProblem("cannot stratify: class " + std::to_string(k) + " has fewer than 2 samples");
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto take = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(idx.size())));
    a.insert(a.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(take));
    b.insert(b.end(), idx.begin() + static_cast<std::ptrdiff_t>(take), idx.end());
  }
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return {std::move(a), std::move(b)};
}

LabeledDataset subset(const LabeledDataset& data, std::span<const std::size_t> indices) {
  LabeledDataset out;
  out.dim = data.dim;
  out.classes = data.classes;
  out.provenance = data.provenance;
  out.normalization = data.normalization;
  out.features.reserve(indices.size() * data.dim);
  out.labels.reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= data.size()) throw InvalidProblem("subset index out of range");
    auto r = data.row(i);
    out.features.insert(out.features.end(), r.begin(), r.end());
    out.labels.push_back(data.labels[i]);
  }
  return out;
}

std::pair<LabeledDataset, LabeledDataset> split(const LabeledDataset& data, double fraction, Rng& rng) {
  auto [a, b] = split_indices(data, fraction, rng);
  return {subset(data, a), subset(data, b)};
}

std::vector<double> raw_features(const LabeledDataset& data) {
  std::vector<double> raw = data.features;
  if (data.normalization.identity()) return raw;
  for (std::size_t i = 0; i < data.size(); ++i)
    for (std::size_t j = 0; j < data.dim; ++j)
      raw[i * data.dim + j] = raw[i * data.dim + j] * data.normalization.scale[j] + data.normalization.offset[j];
  return raw;
}

std::string dataset_to_csv(const LabeledDataset& data) {
  std::vector<std::string> header{"id", "label"};
  for (std::size_t j = 0; j < data.dim; ++j) header.push_back("x" + std::to_string(j));
  io::CsvWriter w(std::move(header));
  for (std::size_t i = 0; i < data.size(); ++i) {
    w.field(i).field(data.labels[i]);
    for (double v : data.row(i)) w.field(v);
    w.end_row();
  }
  return w.str();
}

LabeledDataset dataset_from_csv(const std::string& text, std::size_t classes) {
  const io::CsvTable t = io::parse_csv(text);
  const std::size_t label_col = t.column("label");
  std::vector<std::size_t> feature_cols;
  for (std::size_t j = 0;; ++j) {
    const std::string name = "x" + std::to_string(j);
    auto it = std::find(t.header.begin(), t.header.end(), name);
    if (it == t.header.end()) break;
    feature_cols.push_back(static_cast<std::size_t>(it - t.header.begin()));
  }
  LabeledDataset ds;
  ds.dim = feature_cols.size();
  ds.classes = classes;
  for (const auto& row : t.rows) {
    const double y = io::parse_double(row[label_col]);
    if (y < 0 || y != std::floor(y)) throw ParseError("CSV label is not a non-negative integer: " + row[label_col]);
    ds.labels.push_back(static_cast<std::size_t>(y));
    for (std::size_t c : feature_cols) ds.features.push_back(io::parse_double(row[c]));
  }
  ds.provenance = "csv";
  ds.validate();
  return ds;
}

}  // namespace nlnl
