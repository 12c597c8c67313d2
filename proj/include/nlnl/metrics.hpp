#pragma once

// Filtering quality (positive class = noisy), precision-recall sweeps,
// confidence histograms, and classification accuracy.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nlnl/data.hpp"
#include "nlnl/engine.hpp"

namespace nlnl {

// Split of the training set into presumed-clean and presumed-noisy samples.
struct FilterPartition {
  double threshold = 0.5;               // clean iff confidence > threshold
  std::vector<double> confidence;       // p_y per sample, observed label y
  std::vector<std::size_t> clean;       // ascending sample indices
  std::vector<std::size_t> noisy;       // ascending sample indices

  static FilterPartition from_confidences(std::vector<double> confidence, double threshold);
  std::size_t size() const { return confidence.size(); }
  std::vector<std::uint8_t> predicted_noisy() const;
  void validate() const;
};

struct FilterReport {
  double estimated_noise_pct = 0.0;
  std::optional<double> recall_pct;     // empty when there are no truly noisy samples
  std::optional<double> precision_pct;  // empty when nothing is predicted noisy
  std::size_t true_positive = 0, false_positive = 0, false_negative = 0, true_negative = 0;

  struct Sample {
    double confidence;
    bool predicted_noisy;
    bool true_noisy;
  };
  std::vector<Sample> samples;
};

FilterReport filter_metrics(const FilterPartition& partition, std::span<const std::uint8_t> true_noisy);

struct PrPoint {
  double threshold;
  double recall;
  double precision;
};

struct PrCurve {
  std::vector<PrPoint> points;  // ascending threshold; "noisy" = confidence <= threshold
  double auc = 0.0;             // trapezoid over recall, anchored at (recall 0, precision 1)
};

PrCurve pr_curve(std::span<const double> confidence, std::span<const std::uint8_t> true_noisy);

struct ConfidenceHistogram {
  std::size_t bins = 0;
  std::vector<std::size_t> clean;
  std::vector<std::size_t> noisy;

  double bin_lower(std::size_t b) const { return static_cast<double>(b) / static_cast<double>(bins); }
  double bin_upper(std::size_t b) const { return static_cast<double>(b + 1) / static_cast<double>(bins); }
};

// Equal-width bins over [0, 1]; a confidence of exactly 1 lands in the last bin.
ConfidenceHistogram confidence_histogram(std::span<const double> confidence, std::span<const std::uint8_t> true_noisy,
                                         std::size_t bins);

// Percentage of samples whose argmax prediction equals the label; ties go to
// the lowest class index.
double accuracy(const Network& net, const LabeledDataset& data);

// p_y for every sample, y the stored label.
std::vector<double> confidences(const Network& net, const LabeledDataset& data);

// CSV/JSON renderings.
std::string pr_curve_csv(const PrCurve& curve);            // recall,precision
std::string histogram_csv(const ConfidenceHistogram& h);   // group,bin,lower,upper,count
std::string filter_report_json(const FilterReport& r);     // summary only

}  // namespace nlnl
