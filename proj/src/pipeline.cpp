#include "nlnl/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nlnl/error.hpp"
#include "nlnl/io.hpp"
#include "nlnl/losses.hpp"

namespace nlnl {

std::string to_string(PhaseKind k) {
  switch (k) {
    case PhaseKind::NL: return "NL";
    case PhaseKind::SelNL: return "SelNL";
    case PhaseKind::SelPL: return "SelPL";
    case PhaseKind::PL: return "PL";
    case PhaseKind::PseudoCleanTrain: return "PseudoCleanTrain";
    case PhaseKind::PseudoFinalTrain: return "PseudoFinalTrain";
  }
  return "?";
}

PhaseKind parse_phase_kind(std::string_view s) {
  for (PhaseKind k : {PhaseKind::NL, PhaseKind::SelNL, PhaseKind::SelPL, PhaseKind::PL, PhaseKind::PseudoCleanTrain,
                      PhaseKind::PseudoFinalTrain})
    if (s == to_string(k)) return k;
  throw ConfigError("selnlpl.phases", "unknown phase '" + std::string(s) + "' (expected NL, SelNL, SelPL, PL)");
}

bool is_negative(PhaseKind k) { return k == PhaseKind::NL || k == PhaseKind::SelNL; }

void PhaseConfig::validate() const {
  const std::string p = to_string(kind) + ".";
  if (epochs == 0) throw ConfigError(p + "epochs", "must be >= 1");
  if (batch_size == 0) throw ConfigError(p + "batch_size", "must be >= 1");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw ConfigError(p + "lr", "must be finite and >= 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError(p + "momentum", "must be in [0, 1)");
  if (!(weight_decay >= 0.0)) throw ConfigError(p + "weight_decay", "must be >= 0");
  if (kind == PhaseKind::SelPL && !(gamma > 0.0 && gamma < 1.0)) throw ConfigError(p + "gamma", "must be in (0, 1)");
  if (!(decay_factor > 0.0)) throw ConfigError(p + "decay_factor", "must be > 0");
}

double PhaseConfig::selection_threshold(std::size_t classes) const {
  switch (kind) {
    case PhaseKind::SelNL: return 1.0 / static_cast<double>(classes);
    case PhaseKind::SelPL: return gamma;
    default: return -std::numeric_limits<double>::infinity();
  }
}

double PhaseConfig::learning_rate_at(std::size_t epoch) const {
  double lr = learning_rate;
  for (std::size_t e : decay_epochs)
    if (epoch >= e) lr *= decay_factor;
  return lr;
}

std::string trace_csv(const PhaseTrace& trace) {
  io::CsvWriter w({"epoch", "train_loss_eq1", "train_acc", "test_acc", "n_selected"});
  for (const EpochRecord& r : trace.epochs) {
    w.field(r.epoch).field(r.train_loss_eq1).field(r.train_acc);
    if (std::isnan(r.test_acc)) w.field(std::string_view("nan"));
    else w.field(r.test_acc);
    w.field(r.n_selected).end_row();
  }
  return w.str();
}

PhaseTrace train_phase(Network& net, const LabeledDataset& train, const PhaseConfig& cfg, Rng& rng,
                       const LabeledDataset* test, std::span<const std::vector<double>> soft_targets) {
  cfg.validate();
  train.validate();
  const std::size_t c = net.num_classes();
  if (train.classes != c)
    throw ShapeError("train_phase: network has " + std::to_string(c) + " outputs, dataset has " +
                     std::to_string(train.classes) + " classes");
  if (train.dim != net.input_dim()) throw ShapeError("train_phase: feature dimension does not match network");
  if (!soft_targets.empty() && soft_targets.size() != train.size())
    throw ShapeError("train_phase: soft target count != sample count");

  const std::size_t n = train.size();
  const bool negative = is_negative(cfg.kind);
  const std::size_t k = cfg.complementary_labels ? cfg.complementary_labels : default_complementary_count(c);
  const double threshold = cfg.selection_threshold(c);

  PhaseTrace trace;
  trace.kind = cfg.kind;
  OptimizerState opt = OptimizerState::for_network(net, cfg.learning_rate, cfg.momentum, cfg.weight_decay);
  Gradients grads = Gradients::zeros_like(net);
  ForwardTrace fwd;
  std::vector<double> logit_grad(c);
  std::vector<ComplementaryLabel> comp;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    opt.learning_rate = cfg.learning_rate_at(epoch);
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t correct = 0, selected = 0;

    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t end = std::min(n, start + cfg.batch_size);
      grads.zero();
      std::size_t batch_selected = 0;
      for (std::size_t j = start; j < end; ++j) {
        const std::size_t i = order[j];
        const std::size_t y = train.labels[i];
        forward(net, train.row(i), fwd);
        const double py = fwd.probs[y];
        loss_sum += -std::log(clamp_prob(py));
        if (argmax(fwd.logits()) == y) ++correct;
        if (!(py > threshold)) continue;
        ++batch_selected;

        if (negative) {
          std::fill(logit_grad.begin(), logit_grad.end(), 0.0);
          gen_complementary(y, c, k, rng, comp);
          for (const ComplementaryLabel& l : comp) nl_loss_accumulate(fwd.probs, l.value, logit_grad, trace.nl_clamped);
        } else if (cfg.kind == PhaseKind::PseudoFinalTrain && !soft_targets.empty() && !soft_targets[i].empty()) {
          soft_ce_loss_into(fwd.probs, soft_targets[i], logit_grad);
        } else {
          pl_loss_into(fwd.probs, y, logit_grad);
        }
        backward_accumulate(net, fwd, logit_grad, grads);
      }
      if (batch_selected == 0) continue;
      grads.scale(1.0 / static_cast<double>(batch_selected));
      sgd_step(net, grads, opt);
      selected += batch_selected;
    }

    if (selected == 0) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.6g", threshold);
      throw StarvationError("phase " + to_string(cfg.kind) + " selected no samples in epoch " + std::to_string(epoch) +
                            " (rule: p_y > " + buf + ")");
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss_eq1 = loss_sum / static_cast<double>(n);
    rec.train_acc = 100.0 * static_cast<double>(correct) / static_cast<double>(n);
    if (test) rec.test_acc = accuracy(net, *test);
    rec.n_selected = selected;
    rec.learning_rate = opt.learning_rate;
    trace.epochs.push_back(rec);
  }
  return trace;
}

SelNLPLResult run_selnlpl(Network& net, const NoisyDataset& data, std::span<const PhaseConfig> phases, Rng& rng,
                          double gamma, const LabeledDataset* test, const PhaseObserver& observer) {
  if (phases.empty()) throw ConfigError("selnlpl.phases", "at least one phase is required");
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("selnlpl.gamma", "must be in (0, 1)");
  SelNLPLResult result;
  for (std::size_t idx = 0; idx < phases.size(); ++idx) {
    result.traces.push_back(train_phase(net, data.data, phases[idx], rng, test));
    result.phase_confidences.push_back(confidences(net, data.data));
    if (observer) observer(idx, result.traces.back(), result.phase_confidences.back());
  }
  result.partition = FilterPartition::from_confidences(result.phase_confidences.back(), gamma);
  return result;
}

std::vector<std::vector<PhaseKind>> ablation_compositions() {
  return {{PhaseKind::NL, PhaseKind::SelNL, PhaseKind::SelPL},
          {PhaseKind::NL, PhaseKind::SelNL},
          {PhaseKind::NL, PhaseKind::SelPL},
          {PhaseKind::NL}};
}

std::string composition_name(std::span<const PhaseKind> kinds) {
  std::string s;
  for (PhaseKind k : kinds) {
    if (!s.empty()) s += '-';
    s += to_string(k);
  }
  return s;
}

PseudoLabelResult pseudo_label_pipeline(const NoisyDataset& data, const FilterPartition& partition,
                                        const PseudoLabelConfig& cfg, const std::vector<std::size_t>& dims,
                                        std::uint64_t seed, const LabeledDataset* test) {
  partition.validate();
  if (partition.size() != data.size()) throw ShapeError("pseudo labeling: partition size != dataset size");
  if (partition.clean.empty()) throw InvalidProblem("pseudo labeling: clean subset is empty, cannot bootstrap");

  const LabeledDataset clean = subset(data.data, partition.clean);
  Network clean_net = Network::init(dims, sub_seed(seed, Stage::pseudo_clean_init));
  Rng clean_rng(sub_seed(seed, Stage::pseudo_clean_train));
  PhaseConfig clean_cfg = cfg.clean_train;
  clean_cfg.kind = PhaseKind::PseudoCleanTrain;
  PhaseTrace clean_trace = train_phase(clean_net, clean, clean_cfg, clean_rng, test);

  // Clean samples first, then relabeled noisy samples with soft targets.
  std::vector<std::size_t> all(partition.clean);
  all.insert(all.end(), partition.noisy.begin(), partition.noisy.end());
  const LabeledDataset merged = subset(data.data, all);
  std::vector<std::vector<double>> soft(merged.size());
  std::vector<std::vector<double>> relabels;
  LabeledDataset relabeled = merged;
  for (std::size_t j = partition.clean.size(); j < merged.size(); ++j) {
    Prediction pred = forward(clean_net, merged.row(j));
    SoftLabel q(pred.probs);  // validates the simplex
    relabeled.labels[j] = argmax(pred.probs);
    soft[j] = pred.probs;
    relabels.push_back(std::move(pred.probs));
  }

  Network final_net = Network::init(dims, sub_seed(seed, Stage::pseudo_final_init));
  Rng final_rng(sub_seed(seed, Stage::pseudo_final_train));
  PhaseConfig final_cfg = cfg.final_train;
  final_cfg.kind = PhaseKind::PseudoFinalTrain;
  PhaseTrace final_trace = train_phase(final_net, relabeled, final_cfg, final_rng, test, soft);

  PseudoLabelResult r{std::move(final_net), std::move(clean_net), std::move(clean_trace), std::move(final_trace),
                      std::move(relabels)};
  if (test) r.final_test_acc = accuracy(r.network, *test);
  return r;
}

}  // namespace nlnl
