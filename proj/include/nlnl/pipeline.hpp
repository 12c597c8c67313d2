#pragma once

// Phase-based training: NL, SelNL, SelPL (and plain PL) phases composed into
// SelNLPL filtering, followed by soft-label pseudo-labeling.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nlnl/data.hpp"
#include "nlnl/engine.hpp"
#include "nlnl/metrics.hpp"
#include "nlnl/noise.hpp"
#include "nlnl/rng.hpp"

namespace nlnl {

enum class PhaseKind { NL, SelNL, SelPL, PL, PseudoCleanTrain, PseudoFinalTrain };

std::string to_string(PhaseKind k);
PhaseKind parse_phase_kind(std::string_view s);
bool is_negative(PhaseKind k);

struct PhaseConfig {
  PhaseConfig() = default;
  PhaseConfig(PhaseKind k, std::size_t n_epochs = 50, double lr = 0.02)
      : kind(k), epochs(n_epochs), learning_rate(lr) {}

  PhaseKind kind = PhaseKind::NL;
  std::size_t epochs = 50;
  double learning_rate = 0.02;
  std::size_t batch_size = 128;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  double gamma = 0.5;                     // SelPL only
  std::size_t complementary_labels = 0;   // NL phases; 0 = default_complementary_count(c)
  std::vector<std::size_t> decay_epochs;  // 0-based epochs at which lr is multiplied by decay_factor
  double decay_factor = 0.1;

  void validate() const;
  // Confidence a sample must exceed to be trained on; -inf when unselective.
  double selection_threshold(std::size_t classes) const;
  double learning_rate_at(std::size_t epoch) const;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss_eq1 = 0.0;  // mean -log p_y over the epoch, whatever the training loss
  double train_acc = 0.0;       // vs. the training labels, at batch time
  double test_acc = std::numeric_limits<double>::quiet_NaN();
  std::size_t n_selected = 0;
  double learning_rate = 0.0;
};

struct PhaseTrace {
  PhaseKind kind = PhaseKind::NL;
  std::vector<EpochRecord> epochs;
  bool nl_clamped = false;  // some NL loss hit the probability clamp
};

// CSV: epoch,train_loss_eq1,train_acc,test_acc,n_selected
std::string trace_csv(const PhaseTrace& trace);

// Trains `net` for one phase. Each mini-batch is forwarded once with the
// current parameters; samples passing the phase's selection rule contribute
// the phase loss, averaged over the selected count. NL phases draw fresh
// complementary labels per sample per step. `soft_targets[i]`, when
// non-empty, replaces the one-hot target of sample i (PseudoFinalTrain only).
// Throws StarvationError if an epoch selects nothing.
PhaseTrace train_phase(Network& net, const LabeledDataset& train, const PhaseConfig& cfg, Rng& rng,
                       const LabeledDataset* test = nullptr,
                       std::span<const std::vector<double>> soft_targets = {});

struct SelNLPLResult {
  FilterPartition partition;
  std::vector<PhaseTrace> traces;
  std::vector<std::vector<double>> phase_confidences;  // p_y after each phase
};

// Called after each phase with its index, trace, and the confidences it left.
using PhaseObserver = std::function<void(std::size_t, const PhaseTrace&, const std::vector<double>&)>;

// Runs the phases in order, then partitions by confidence > gamma.
SelNLPLResult run_selnlpl(Network& net, const NoisyDataset& data, std::span<const PhaseConfig> phases, Rng& rng,
                          double gamma = 0.5, const LabeledDataset* test = nullptr,
                          const PhaseObserver& observer = {});

// SelNLPL and the three phase-deletion variants, in order #1..#4.
std::vector<std::vector<PhaseKind>> ablation_compositions();
std::string composition_name(std::span<const PhaseKind> kinds);

struct PseudoLabelConfig {
  PhaseConfig clean_train{PhaseKind::PseudoCleanTrain};
  PhaseConfig final_train{PhaseKind::PseudoFinalTrain};
};

struct PseudoLabelResult {
  Network network;                            // final (c-step) network
  Network clean_network;                      // b-step network
  PhaseTrace clean_trace;
  PhaseTrace final_trace;
  std::vector<std::vector<double>> relabels;  // soft label per noisy-subset sample, partition order
  double final_test_acc = std::numeric_limits<double>::quiet_NaN();
};

// (b) fresh network trained with PL on the clean subset; noisy-subset samples
// relabeled with its softmax output; (c) second fresh network trained with
// soft cross-entropy on clean (one-hot) + relabeled (soft) samples.
// Network seeds derive from `seed` via sub_seed with the pseudo_* stages.
PseudoLabelResult pseudo_label_pipeline(const NoisyDataset& data, const FilterPartition& partition,
                                        const PseudoLabelConfig& cfg, const std::vector<std::size_t>& dims,
                                        std::uint64_t seed, const LabeledDataset* test = nullptr);

}  // namespace nlnl
