#pragma once

// Label corruption models with ground-truth bookkeeping.
//
//   symm_inc  with probability r the label is redrawn uniformly from all c
//             classes (so it may stay correct); actual noise = r (c-1)/c.
//   symm_exc  with probability r the label is redrawn uniformly from the
//             other c-1 classes; actual noise = r.
//   asymm     each sample whose class is a source of the map is flipped to
//             the mapped target with probability r. Other classes are never
//             touched. Note r is a per-source-sample probability, not a
//             fraction of the whole dataset.
//
// exact_count replaces the i.i.d. coin flips with a uniformly chosen subset
// of exactly round(r * eligible) samples.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nlnl/data.hpp"

namespace nlnl {

enum class NoiseKind { symm_inc, symm_exc, asymm };

std::string to_string(NoiseKind k);
NoiseKind parse_noise_kind(std::string_view s);

using AsymmMap = std::map<std::size_t, std::size_t>;

struct NoiseSpec {
  NoiseKind kind = NoiseKind::symm_inc;
  double ratio = 0.0;
  std::optional<AsymmMap> asymm_map;
  std::uint64_t seed = 0;
  bool exact_count = false;

  void validate(std::size_t classes) const;
};

struct NoisyDataset {
  LabeledDataset data;  // labels are the observed (possibly corrupted) ones
  std::vector<std::size_t> clean_labels;
  std::vector<std::uint8_t> is_noisy;

  std::size_t size() const { return data.size(); }
  std::size_t classes() const { return data.classes; }
  double noise_fraction() const;
  void validate() const;
};

NoisyDataset inject_noise(const LabeledDataset& clean, const NoiseSpec& spec);

// Wraps an uncorrupted dataset (observed == clean).
NoisyDataset as_clean(const LabeledDataset& clean);

// "mnist" or "cifar10" (standard 0-based class order: airplane=0, automobile=1,
// bird=2, cat=3, deer=4, dog=5, frog=6, horse=7, ship=8, truck=9).
AsymmMap builtin_asymm_map(std::string_view dataset_name);

// Either a builtin name or explicit pairs "2:7,3:8,5:6,6:5".
AsymmMap parse_asymm_map(std::string_view text);
std::string format_asymm_map(const AsymmMap& map);

// Audit CSV: id,y_observed,y_clean,is_noisy
std::string noise_audit_csv(const NoisyDataset& data);

}  // namespace nlnl
