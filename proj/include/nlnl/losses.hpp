#pragma once

// Positive (cross-entropy), negative (complementary-label), and soft-target
// losses over softmax probabilities, each returning its gradient with respect
// to the logits. Class indices are 0-based throughout.

#include <cstddef>
#include <span>
#include <vector>

#include "nlnl/rng.hpp"

namespace nlnl {

struct ComplementaryLabel {
  std::size_t value = 0;   // the class the sample is asserted NOT to belong to
  std::size_t source = 0;  // the observed label it was drawn against
};

// Target distribution on the simplex.
class SoftLabel {
 public:
  // Throws InvalidProblem unless q_k >= 0 and |sum q - 1| <= 1e-9.
  explicit SoftLabel(std::vector<double> q);
  static SoftLabel one_hot(std::size_t y, std::size_t c);

  std::span<const double> values() const { return q_; }
  std::size_t size() const { return q_.size(); }

 private:
  std::vector<double> q_;
};

struct LossResult {
  double loss = 0.0;
  std::vector<double> grad;  // d loss / d logits
  bool clamped = false;      // p_ybar hit the clamp ceiling; loss is capped
};

// Uniform draw from {0..c-1} \ {y}.
ComplementaryLabel gen_complementary(std::size_t y, std::size_t c, Rng& rng);

// k complementary labels (duplicates allowed) for one sample.
void gen_complementary(std::size_t y, std::size_t c, std::size_t k, Rng& rng, std::vector<ComplementaryLabel>& out);

// Default number of complementary labels per sample: max(1, round(c(c-1)/90)).
// Matches gradient mass at the true class to the 10-class, k=1 case.
std::size_t default_complementary_count(std::size_t c);

// -log p_y ; grad = p - onehot(y)
LossResult pl_loss(std::span<const double> p, std::size_t y);
double pl_loss_into(std::span<const double> p, std::size_t y, std::span<double> grad);

// -log(1 - p_ybar) ; grad_i = p_ybar if i == ybar, else -p_ybar/(1-p_ybar) * p_i
LossResult nl_loss(std::span<const double> p, const ComplementaryLabel& label);
LossResult nl_loss(std::span<const double> p, std::size_t ybar);

// Sum over labels of nl_loss. `grad` is accumulated (+=), not overwritten.
double nl_loss_accumulate(std::span<const double> p, std::size_t ybar, std::span<double> grad, bool& clamped);
LossResult nl_loss_multi(std::span<const double> p, std::span<const ComplementaryLabel> labels);

// -sum_k q_k log p_k ; grad = p - q
LossResult soft_ce_loss(std::span<const double> p, const SoftLabel& q);
double soft_ce_loss_into(std::span<const double> p, std::span<const double> q, std::span<double> grad);

}  // namespace nlnl
