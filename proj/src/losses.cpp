#include "nlnl/losses.hpp"

#include <cmath>
#include <random>
#include <string>

#include "nlnl/error.hpp"
#include "nlnl/numeric.hpp"

namespace nlnl {

SoftLabel::SoftLabel(std::vector<double> q) : q_(std::move(q)) {
  if (q_.size() < 2) throw InvalidProblem("soft label needs at least 2 classes");
  double sum = 0.0;
  for (double v : q_) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidProblem("soft label has a negative or non-finite entry");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw InvalidProblem("soft label does not sum to 1 (sum = " + std::to_string(sum) + ")");
}

SoftLabel SoftLabel::one_hot(std::size_t y, std::size_t c) {
  if (y >= c) throw InvalidProblem("one_hot: label out of range");
  std::vector<double> q(c, 0.0);
  q[y] = 1.0;
  return SoftLabel(std::move(q));
}

ComplementaryLabel gen_complementary(std::size_t y, std::size_t c, Rng& rng) {
  if (c < 2) throw InvalidProblem("complementary label needs c >= 2");
  if (y >= c) throw InvalidProblem("label " + std::to_string(y) + " out of range for c = " + std::to_string(c));
  std::uniform_int_distribution<std::size_t> dist(0, c - 2);
  std::size_t v = dist(rng);
  if (v >= y) ++v;
  return {v, y};
}

void gen_complementary(std::size_t y, std::size_t c, std::size_t k, Rng& rng, std::vector<ComplementaryLabel>& out) {
  if (k == 0) throw InvalidProblem("complementary label count k must be >= 1");
  out.clear();
  for (std::size_t i = 0; i < k; ++i) out.push_back(gen_complementary(y, c, rng));
}

std::size_t default_complementary_count(std::size_t c) {
  const double raw = static_cast<double>(c) * static_cast<double>(c - 1) / 90.0;
  const auto k = static_cast<std::size_t>(std::llround(raw));
  return k < 1 ? 1 : k;
}

namespace {

void check_label(std::span<const double> p, std::size_t y) {
  if (y >= p.size())
    throw InvalidProblem("label " + std::to_string(y) + " out of range for " + std::to_string(p.size()) + " classes");
}

}  // namespace

double pl_loss_into(std::span<const double> p, std::size_t y, std::span<double> grad) {
  check_label(p, y);
  if (grad.size() != p.size()) throw ShapeError("pl_loss: gradient length mismatch");
  for (std::size_t k = 0; k < p.size(); ++k) grad[k] = p[k];
  grad[y] -= 1.0;
  return -std::log(clamp_prob(p[y]));
}

LossResult pl_loss(std::span<const double> p, std::size_t y) {
  LossResult r;
  r.grad.resize(p.size());
  r.loss = pl_loss_into(p, y, r.grad);
  return r;
}

double nl_loss_accumulate(std::span<const double> p, std::size_t ybar, std::span<double> grad, bool& clamped) {
  check_label(p, ybar);
  if (grad.size() != p.size()) throw ShapeError("nl_loss: gradient length mismatch");
  const double raw = p[ybar];
  const double pb = clamp_prob(raw);
  if (raw >= 1.0 - kProbClamp) clamped = true;
  const double ratio = pb / (1.0 - pb);
  for (std::size_t i = 0; i < p.size(); ++i) grad[i] += (i == ybar) ? pb : -ratio * p[i];
  return -std::log(1.0 - pb);
}

LossResult nl_loss(std::span<const double> p, std::size_t ybar) {
  LossResult r;
  r.grad.assign(p.size(), 0.0);
  r.loss = nl_loss_accumulate(p, ybar, r.grad, r.clamped);
  return r;
}

LossResult nl_loss(std::span<const double> p, const ComplementaryLabel& label) {
  if (label.value == label.source) throw InvalidProblem("complementary label equals its source label");
  return nl_loss(p, label.value);
}

LossResult nl_loss_multi(std::span<const double> p, std::span<const ComplementaryLabel> labels) {
  if (labels.empty()) throw InvalidProblem("nl_loss_multi: k must be >= 1");
  LossResult r;
  r.grad.assign(p.size(), 0.0);
  for (const ComplementaryLabel& l : labels) r.loss += nl_loss_accumulate(p, l.value, r.grad, r.clamped);
  return r;
}

double soft_ce_loss_into(std::span<const double> p, std::span<const double> q, std::span<double> grad) {
  if (q.size() != p.size() || grad.size() != p.size()) throw ShapeError("soft_ce_loss: length mismatch");
  double loss = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (q[k] != 0.0) loss -= q[k] * std::log(clamp_prob(p[k]));
    grad[k] = p[k] - q[k];
  }
  return loss;
}

LossResult soft_ce_loss(std::span<const double> p, const SoftLabel& q) {
  LossResult r;
  r.grad.resize(p.size());
  r.loss = soft_ce_loss_into(p, q.values(), r.grad);
  return r;
}

}  // namespace nlnl
