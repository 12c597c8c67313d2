#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "nlnl/error.hpp"
#include "nlnl/metrics.hpp"
#include "oracles.hpp"

using namespace nlnl;

namespace {

std::vector<std::uint8_t> flags(std::initializer_list<int> v) { return {v.begin(), v.end()}; }

// PR curve by brute force: for each distinct threshold, count directly.
double brute_force_auc(const std::vector<double>& conf, const std::vector<std::uint8_t>& noisy) {
  std::set<double> thresholds(conf.begin(), conf.end());
  double positives = 0;
  for (auto f : noisy) positives += f;
  double auc = 0.0, prev_r = 0.0, prev_p = 1.0;
  for (double t : thresholds) {
    double tp = 0, flagged = 0;
    for (std::size_t i = 0; i < conf.size(); ++i) {
      if (conf[i] <= t) {
        ++flagged;
        tp += noisy[i];
      }
    }
    const double r = tp / positives, p = tp / flagged;
    auc += (r - prev_r) * 0.5 * (p + prev_p);
    prev_r = r;
    prev_p = p;
  }
  return auc;
}

}  // namespace

TEST_CASE("perfect partition scores 100/100") {
  const std::vector<double> conf{0.9, 0.1, 0.8, 0.2, 0.7};
  const auto truth = flags({0, 1, 0, 1, 0});
  const auto part = FilterPartition::from_confidences(conf, 0.5);
  CHECK(part.noisy == std::vector<std::size_t>{1, 3});
  CHECK(part.clean == std::vector<std::size_t>{0, 2, 4});
  const auto r = filter_metrics(part, truth);
  CHECK(r.estimated_noise_pct == doctest::Approx(40.0));
  CHECK(*r.recall_pct == doctest::Approx(100.0));
  CHECK(*r.precision_pct == doctest::Approx(100.0));
}

TEST_CASE("flagging everything gives full recall at the base rate") {
  std::vector<double> conf(100, 0.1);
  std::vector<std::uint8_t> truth(100, 0);
  for (std::size_t i = 0; i < 27; ++i) truth[i] = 1;
  const auto r = filter_metrics(FilterPartition::from_confidences(conf, 0.5), truth);
  CHECK(r.estimated_noise_pct == doctest::Approx(100.0));
  CHECK(*r.recall_pct == doctest::Approx(100.0));
  CHECK(*r.precision_pct == doctest::Approx(27.0));
}

TEST_CASE("the threshold itself counts as noisy") {
  const auto part = FilterPartition::from_confidences({0.5, 0.5000001}, 0.5);
  CHECK(part.noisy == std::vector<std::size_t>{0});
}

TEST_CASE("undefined recall and precision are reported as absent") {
  const auto r = filter_metrics(FilterPartition::from_confidences({0.9, 0.8}, 0.5), flags({0, 0}));
  CHECK_FALSE(r.recall_pct.has_value());
  CHECK_FALSE(r.precision_pct.has_value());
  CHECK(r.estimated_noise_pct == 0.0);
}

TEST_CASE("filter metrics agree with a brute-force confusion matrix") {
  Rng rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> conf(20);
    std::vector<std::uint8_t> truth(20);
    for (std::size_t i = 0; i < 20; ++i) {
      conf[i] = u(rng);
      truth[i] = u(rng) < 0.3;
    }
    const double threshold = u(rng);
    const auto r = filter_metrics(FilterPartition::from_confidences(conf, threshold), truth);
    int tp = 0, fp = 0, fn = 0, tn = 0;
    for (std::size_t i = 0; i < 20; ++i) {
      const bool pred = conf[i] <= threshold;
      tp += pred && truth[i];
      fp += pred && !truth[i];
      fn += !pred && truth[i];
      tn += !pred && !truth[i];
    }
    CHECK(r.true_positive == static_cast<std::size_t>(tp));
    CHECK(r.false_positive == static_cast<std::size_t>(fp));
    CHECK(r.false_negative == static_cast<std::size_t>(fn));
    CHECK(r.true_negative == static_cast<std::size_t>(tn));
    CHECK(r.estimated_noise_pct == doctest::Approx(100.0 * (tp + fp) / 20.0));
    if (tp + fn > 0) CHECK(*r.recall_pct == doctest::Approx(100.0 * tp / (tp + fn)));
    if (tp + fp > 0) CHECK(*r.precision_pct == doctest::Approx(100.0 * tp / (tp + fp)));
  }
}

TEST_CASE("partition invariants") {
  Rng rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> conf(300);
  for (double& c : conf) c = u(rng);
  const auto part = FilterPartition::from_confidences(conf, 0.4);
  CHECK_NOTHROW(part.validate());
  CHECK(part.clean.size() + part.noisy.size() == conf.size());
  for (auto i : part.clean) CHECK(conf[i] > 0.4);
  for (auto i : part.noisy) CHECK(conf[i] <= 0.4);
  const auto pred = part.predicted_noisy();
  for (std::size_t i = 0; i < conf.size(); ++i) CHECK(static_cast<bool>(pred[i]) == (conf[i] <= 0.4));
}

TEST_CASE("separable confidences give PR AUC 1") {
  const std::vector<double> conf{0.1, 0.2, 0.3, 0.6, 0.7, 0.8, 0.9};
  const auto curve = pr_curve(conf, flags({1, 1, 1, 0, 0, 0, 0}));
  CHECK(curve.auc == doctest::Approx(1.0));
  CHECK(curve.points.back().recall == 1.0);
}

TEST_CASE("random confidences give PR AUC near the base rate of 0.5") {
  Rng rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> conf(10'000);
  std::vector<std::uint8_t> truth(10'000);
  for (std::size_t i = 0; i < conf.size(); ++i) {
    conf[i] = u(rng);
    truth[i] = i % 2;
  }
  CHECK(std::abs(pr_curve(conf, truth).auc - 0.5) <= 0.03);
}

TEST_CASE("PR curve matches brute force and recall is monotone") {
  Rng rng(6);
  std::uniform_int_distribution<int> level(0, 9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> conf(40);
    std::vector<std::uint8_t> truth(40);
    for (std::size_t i = 0; i < 40; ++i) {
      conf[i] = level(rng) / 10.0;  // many ties
      truth[i] = i < 10 || u(rng) < 0.2;
    }
    truth[39] = 0;
    const auto curve = pr_curve(conf, truth);
    CHECK(curve.auc == doctest::Approx(brute_force_auc(conf, truth)).epsilon(1e-12));
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
      CHECK(curve.points[i].recall >= curve.points[i - 1].recall);
      CHECK(curve.points[i].threshold > curve.points[i - 1].threshold);
    }
    CHECK(curve.auc >= 0.0);
    CHECK(curve.auc <= 1.0);
  }
}

TEST_CASE("PR curve needs both classes") {
  CHECK_THROWS_AS(pr_curve(std::vector<double>{0.1, 0.2}, flags({0, 0})), InvalidProblem);
  CHECK_THROWS_AS(pr_curve(std::vector<double>{0.1, 0.2}, flags({1, 1})), InvalidProblem);
  CHECK_THROWS_AS(pr_curve(std::vector<double>{0.1}, flags({1, 0})), ShapeError);
}

TEST_CASE("confidence histogram") {
  const std::vector<double> conf{0.0, 0.05, 0.5, 0.5, 0.99, 1.0};
  const auto truth = flags({1, 0, 1, 0, 0, 0});
  const auto h = confidence_histogram(conf, truth, 10);
  CHECK(h.clean.size() == 10);
  CHECK(h.clean[0] == 1);
  CHECK(h.noisy[0] == 1);
  CHECK(h.clean[5] == 1);
  CHECK(h.noisy[5] == 1);
  CHECK(h.clean[9] == 2);
  std::size_t total = 0;
  for (std::size_t b = 0; b < 10; ++b) total += h.clean[b] + h.noisy[b];
  CHECK(total == conf.size());
  CHECK(h.bin_upper(9) == 1.0);

  const auto flat = confidence_histogram(std::vector<double>(50, 0.5), std::vector<std::uint8_t>(50, 0), 4);
  CHECK(flat.clean == std::vector<std::size_t>{0, 0, 50, 0});
  CHECK_THROWS_AS(confidence_histogram(conf, truth, 1), InvalidProblem);

  const auto csv = histogram_csv(h);
  CHECK(csv.rfind("group,bin,lower,upper,count\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 2 * 10);
}

TEST_CASE("accuracy of a constant classifier and of a random network") {
  // Single identity layer whose bias makes class 2 win everywhere.
  Layer l;
  l.fan_in = 1;
  l.fan_out = 3;
  l.weights = {0.0, 0.0, 0.0};
  l.bias = {0.0, 0.0, 5.0};
  const Network constant({l}, 0);
  LabeledDataset ds;
  ds.dim = 1;
  ds.classes = 3;
  ds.features = {1, 2, 3, 4};
  ds.labels = {2, 2, 2, 2};
  CHECK(accuracy(constant, ds) == 100.0);
  ds.labels = {2, 0, 1, 2};
  CHECK(accuracy(constant, ds) == 50.0);
  const auto conf = confidences(constant, ds);
  CHECK(conf[0] == doctest::Approx(forward(constant, ds.row(0)).probs[2]));

  // Ties break toward the lowest index: all-zero logits predict class 0.
  l.bias = {0.0, 0.0, 0.0};
  ds.labels = {0, 0, 1, 2};
  CHECK(accuracy(Network({l}, 0), ds) == 50.0);

  // Labels independent of the inputs: any fixed classifier scores 1/c.
  Rng rng(13);
  LabeledDataset rnd;
  rnd.dim = 8;
  rnd.classes = 10;
  rnd.features = oracle::random_vector(rng, 10'000 * 8);
  std::uniform_int_distribution<std::size_t> y(0, 9);
  for (int i = 0; i < 10'000; ++i) rnd.labels.push_back(y(rng));
  CHECK(std::abs(accuracy(Network::init({8, 32, 10}, 77), rnd) - 10.0) <= 1.0);

  rnd.labels.clear();
  rnd.features.clear();
  CHECK_THROWS_AS(accuracy(constant, rnd), InvalidProblem);
}
