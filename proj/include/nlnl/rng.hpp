#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace nlnl {

using Rng = std::mt19937_64;

// Stage identifiers for seed fan-out. Values are part of the reproducibility
// contract: changing one changes every run that uses it.
enum class Stage : std::uint64_t {
  data = 1,
  noise = 2,
  init = 3,
  selnlpl = 4,
  pseudo_clean_init = 5,
  pseudo_clean_train = 6,
  pseudo_final_init = 7,
  pseudo_final_train = 8,
  split = 9,
  baseline_init = 10,
  baseline_train = 11,
};

// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

// sub_seed(master, stage) = mix64(master + 0x9E3779B97F4A7C15 * stage).
std::uint64_t sub_seed(std::uint64_t master, Stage stage) noexcept;
std::uint64_t sub_seed(std::uint64_t master, std::uint64_t stream) noexcept;

inline Rng make_rng(std::uint64_t seed) { return Rng{seed}; }

}  // namespace nlnl
