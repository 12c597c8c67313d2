#include "nlnl/rng.hpp"

namespace nlnl {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

std::uint64_t sub_seed(std::uint64_t master, std::uint64_t stream) noexcept {
  return mix64(master + 0x9E3779B97F4A7C15ULL * stream);
}

std::uint64_t sub_seed(std::uint64_t master, Stage stage) noexcept {
  return sub_seed(master, static_cast<std::uint64_t>(stage));
}

}  // namespace nlnl
