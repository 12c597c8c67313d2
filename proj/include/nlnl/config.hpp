#pragma once

// Experiment configuration in INI form (Boost.PropertyTree dialect):
//
//   seed = 1
//   out = runs/bench30
//   [dataset]   kind = blobs|idx, classes, per_class, dim, separation,
//               test_fraction, train_images, train_labels, test_images,
//               test_labels, limit
//   [noise]     kind = symm_inc|symm_exc|asymm, ratio, map, exact_count
//   [network]   hidden = 64,64
//   [optimizer] momentum, weight_decay, batch_size
//   [selnlpl]   phases = NL,SelNL,SelPL, gamma, complementary_labels
//   [nl] [selnl] [selpl]       epochs, lr
//   [pseudo]    enabled, epochs, lr, decay_at, decay_factor
//   [baseline]  enabled, epochs, lr
//   [report]    histogram_bins
//
// Unknown sections or keys are rejected. Every field has a default, so a
// config only needs what differs. to_config_text() emits every field.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "nlnl/data.hpp"
#include "nlnl/noise.hpp"
#include "nlnl/pipeline.hpp"

namespace nlnl {

struct DatasetConfig {
  std::string kind = "blobs";
  BlobSpec blobs;
  double test_fraction = 0.2;  // blobs: held-out share of the generated set
  std::string train_images, train_labels, test_images, test_labels;
  std::size_t classes = 0;  // idx: 0 = infer
  std::size_t limit = 0;    // idx: keep only the first `limit` training samples (0 = all)
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  std::string out;
  DatasetConfig dataset;
  NoiseSpec noise;  // noise.seed is derived from `seed`, not configured
  std::vector<std::size_t> hidden{64, 64};
  double momentum = 0.9;
  double weight_decay = 1e-4;
  std::size_t batch_size = 128;
  std::vector<PhaseKind> phases{PhaseKind::NL, PhaseKind::SelNL, PhaseKind::SelPL};
  double gamma = 0.5;
  std::size_t complementary_labels = 0;
  PhaseConfig nl{PhaseKind::NL, 50, 0.02};
  PhaseConfig selnl{PhaseKind::SelNL, 50, 0.02};
  PhaseConfig selpl{PhaseKind::SelPL, 50, 0.1};
  bool pseudo_enabled = true;
  PseudoLabelConfig pseudo = default_pseudo();
  bool baseline_enabled = true;
  PhaseConfig baseline{PhaseKind::PL, 150, 0.1};
  std::size_t histogram_bins = 20;

  static PseudoLabelConfig default_pseudo();

  // Fully resolved per-phase settings (shared optimizer fields copied in).
  std::vector<PhaseConfig> phase_configs() const;
  PseudoLabelConfig pseudo_configs() const;
  PhaseConfig baseline_config() const;

  void validate() const;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string to_config_text(const ExperimentConfig& cfg);

}  // namespace nlnl
