#include "nlnl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "nlnl/error.hpp"
#include "nlnl/io.hpp"

namespace nlnl {

FilterPartition FilterPartition::from_confidences(std::vector<double> confidence, double threshold) {
  FilterPartition p;
  p.threshold = threshold;
  p.confidence = std::move(confidence);
  for (std::size_t i = 0; i < p.confidence.size(); ++i)
    (p.confidence[i] > threshold ? p.clean : p.noisy).push_back(i);
  return p;
}

std::vector<std::uint8_t> FilterPartition::predicted_noisy() const {
  std::vector<std::uint8_t> out(size(), 0);
  for (std::size_t i : noisy) out.at(i) = 1;
  return out;
}

void FilterPartition::validate() const {
  if (clean.size() + noisy.size() != size()) throw InvalidProblem("partition does not cover the training set");
  std::vector<std::uint8_t> seen(size(), 0);
  for (std::size_t i : clean) {
    if (i >= size() || seen[i]++) throw InvalidProblem("partition index repeated or out of range");
    if (!(confidence[i] > threshold)) throw InvalidProblem("clean sample below threshold");
  }
  for (std::size_t i : noisy)
    if (i >= size() || seen[i]++) throw InvalidProblem("partition index repeated or out of range");
}

FilterReport filter_metrics(const FilterPartition& partition, std::span<const std::uint8_t> true_noisy) {
  if (true_noisy.size() != partition.size()) throw ShapeError("filter_metrics: truth length != partition size");
  if (partition.size() == 0) throw InvalidProblem("filter_metrics: empty partition");
  FilterReport r;
  const auto predicted = partition.predicted_noisy();
  r.samples.reserve(partition.size());
  for (std::size_t i = 0; i < partition.size(); ++i) {
    const bool pred = predicted[i] != 0, truth = true_noisy[i] != 0;
    r.samples.push_back({partition.confidence[i], pred, truth});
    if (pred && truth) ++r.true_positive;
    else if (pred) ++r.false_positive;
    else if (truth) ++r.false_negative;
    else ++r.true_negative;
  }
  const double n = static_cast<double>(partition.size());
  r.estimated_noise_pct = 100.0 * static_cast<double>(partition.noisy.size()) / n;
  if (r.true_positive + r.false_negative > 0)
    r.recall_pct = 100.0 * static_cast<double>(r.true_positive) / static_cast<double>(r.true_positive + r.false_negative);
  if (r.true_positive + r.false_positive > 0)
    r.precision_pct =
        100.0 * static_cast<double>(r.true_positive) / static_cast<double>(r.true_positive + r.false_positive);
  return r;
}

PrCurve pr_curve(std::span<const double> confidence, std::span<const std::uint8_t> true_noisy) {
  if (confidence.size() != true_noisy.size()) throw ShapeError("pr_curve: length mismatch");
  const std::size_t n = confidence.size();
  const std::size_t positives = static_cast<std::size_t>(std::count_if(true_noisy.begin(), true_noisy.end(),
                                                                       [](std::uint8_t v) { return v != 0; }));
  if (positives == 0 || positives == n)
    throw InvalidProblem("pr_curve: need at least one noisy and one clean sample");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return confidence[a] < confidence[b]; });

  PrCurve curve;
  std::size_t tp = 0, fp = 0;
  for (std::size_t j = 0; j < n;) {
    const double t = confidence[order[j]];
    while (j < n && confidence[order[j]] == t) {
      (true_noisy[order[j]] ? tp : fp)++;
      ++j;
    }
    curve.points.push_back({t, static_cast<double>(tp) / static_cast<double>(positives),
                            static_cast<double>(tp) / static_cast<double>(tp + fp)});
  }
  double prev_r = 0.0, prev_p = 1.0;
  for (const PrPoint& pt : curve.points) {
    curve.auc += (pt.recall - prev_r) * 0.5 * (pt.precision + prev_p);
    prev_r = pt.recall;
    prev_p = pt.precision;
  }
  return curve;
}

ConfidenceHistogram confidence_histogram(std::span<const double> confidence, std::span<const std::uint8_t> true_noisy,
                                         std::size_t bins) {
  if (bins < 2) throw InvalidProblem("histogram needs at least 2 bins");
  if (confidence.size() != true_noisy.size()) throw ShapeError("histogram: length mismatch");
  ConfidenceHistogram h{bins, std::vector<std::size_t>(bins, 0), std::vector<std::size_t>(bins, 0)};
  for (std::size_t i = 0; i < confidence.size(); ++i) {
    const double c = std::clamp(confidence[i], 0.0, 1.0);
    const auto b = std::min(bins - 1, static_cast<std::size_t>(c * static_cast<double>(bins)));
    (true_noisy[i] ? h.noisy : h.clean)[b]++;
  }
  return h;
}

double accuracy(const Network& net, const LabeledDataset& data) {
  if (data.size() == 0) throw InvalidProblem("accuracy of an empty dataset");
  ForwardTrace trace;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    forward(net, data.row(i), trace);
    if (argmax(trace.logits()) == data.labels[i]) ++correct;
  }
  return 100.0 * static_cast<double>(correct) / static_cast<double>(data.size());
}

std::vector<double> confidences(const Network& net, const LabeledDataset& data) {
  ForwardTrace trace;
  std::vector<double> out(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    forward(net, data.row(i), trace);
    out[i] = trace.probs.at(data.labels[i]);
  }
  return out;
}

std::string pr_curve_csv(const PrCurve& curve) {
  io::CsvWriter w({"recall", "precision"});
  for (const PrPoint& p : curve.points) w.field(p.recall).field(p.precision).end_row();
  return w.str();
}

std::string histogram_csv(const ConfidenceHistogram& h) {
  io::CsvWriter w({"group", "bin", "lower", "upper", "count"});
  for (int g = 0; g < 2; ++g) {
    const auto& counts = g == 0 ? h.clean : h.noisy;
    for (std::size_t b = 0; b < h.bins; ++b)
      w.field(g == 0 ? "clean" : "noisy").field(b).field(h.bin_lower(b)).field(h.bin_upper(b)).field(counts[b]).end_row();
  }
  return w.str();
}

std::string filter_report_json(const FilterReport& r) {
  nlohmann::json j;
  j["estimated_noise"] = r.estimated_noise_pct;
  j["recall"] = r.recall_pct ? nlohmann::json(*r.recall_pct) : nlohmann::json(nullptr);
  j["precision"] = r.precision_pct ? nlohmann::json(*r.precision_pct) : nlohmann::json(nullptr);
  j["true_positive"] = r.true_positive;
  j["false_positive"] = r.false_positive;
  j["false_negative"] = r.false_negative;
  j["true_negative"] = r.true_negative;
  return j.dump(2) + "\n";
}

}  // namespace nlnl
