#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nlnl/rng.hpp"

namespace nlnl {

// Per-feature affine map applied at construction: stored = (raw - offset) / scale.
struct Normalization {
  std::vector<double> offset;
  std::vector<double> scale;

  bool identity() const { return offset.empty(); }
};

struct LabeledDataset {
  std::size_t dim = 0;
  std::size_t classes = 0;
  std::vector<double> features;    // row-major [size() x dim]
  std::vector<std::size_t> labels;  // 0-based
  std::string provenance;
  Normalization normalization;

  std::size_t size() const { return labels.size(); }
  std::span<const double> row(std::size_t i) const { return {features.data() + i * dim, dim}; }

  // N >= 1, labels < classes, features finite, shapes consistent.
  void validate() const;
};

struct BlobSpec {
  std::size_t classes = 4;
  std::size_t per_class = 500;
  std::size_t dim = 16;
  double separation = 4.0;
};

// c isotropic unit-variance Gaussian clusters whose centers are pairwise at
// least separation * sqrt(dim) apart, then per-feature standardized.
LabeledDataset make_blobs(const BlobSpec& spec, Rng& rng);

// Cluster centers used by make_blobs for the same spec and RNG state, in raw
// (unnormalized) coordinates; row-major [classes x dim].
std::vector<double> blob_centers(const BlobSpec& spec, Rng& rng);

// MNIST-style IDX pair (0x00000803 images, 0x00000801 labels). Pixels are
// scaled to [0, 1]. `classes` = 0 infers max(label) + 1 (at least 2).
LabeledDataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                        std::size_t classes = 0);

// Stratified split: each class contributes round(fraction * n_class) samples
// to the first part. Both parts keep the original sample order.
std::pair<LabeledDataset, LabeledDataset> split(const LabeledDataset& data, double fraction, Rng& rng);

// Same, returning the original indices of each part.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(const LabeledDataset& data,
                                                                             double fraction, Rng& rng);

LabeledDataset subset(const LabeledDataset& data, std::span<const std::size_t> indices);

// Undo the normalization record: raw features, row-major.
std::vector<double> raw_features(const LabeledDataset& data);

// CSV with header "id,label,x0,...,x{d-1}"; features in stored (normalized) space.
std::string dataset_to_csv(const LabeledDataset& data);
LabeledDataset dataset_from_csv(const std::string& text, std::size_t classes);

}  // namespace nlnl
