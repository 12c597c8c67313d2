#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace nlnl {

// Probabilities are clamped to [kProbClamp, 1 - kProbClamp] before any log.
inline constexpr double kProbClamp = 1e-12;

inline double clamp_prob(double p) noexcept { return std::clamp(p, kProbClamp, 1.0 - kProbClamp); }

// Max-subtracted softmax.
std::vector<double> softmax(std::span<const double> logits);
void softmax_into(std::span<const double> logits, std::span<double> out);

inline bool all_finite(std::span<const double> v) noexcept {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

// Index of the largest element; ties resolve to the lowest index.
std::size_t argmax(std::span<const double> v) noexcept;

}  // namespace nlnl
