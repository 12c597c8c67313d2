#include "nlnl/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

#include "nlnl/checkpoint.hpp"
#include "nlnl/error.hpp"
#include "nlnl/io.hpp"
#include "nlnl/metrics.hpp"
#include "nlnl/pipeline.hpp"

namespace nlnl {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json optional_pct(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string phase_tag(std::size_t idx, PhaseKind k) { return std::to_string(idx) + "_" + to_string(k); }

std::string confidences_csv(const std::vector<double>& conf, const NoisyDataset& data) {
  io::CsvWriter w({"id", "confidence", "is_noisy"});
  for (std::size_t i = 0; i < conf.size(); ++i) w.field(i).field(conf[i]).field(static_cast<int>(data.is_noisy[i])).end_row();
  return w.str();
}

std::string partition_csv(const FilterPartition& p, const NoisyDataset& data) {
  io::CsvWriter w({"id", "confidence", "assigned", "is_noisy"});
  const auto pred = p.predicted_noisy();
  for (std::size_t i = 0; i < p.size(); ++i)
    w.field(i).field(p.confidence[i]).field(pred[i] ? "noisy" : "clean").field(static_cast<int>(data.is_noisy[i])).end_row();
  return w.str();
}

double best_test_acc(const PhaseTrace& t) {
  double best = std::numeric_limits<double>::quiet_NaN();
  for (const EpochRecord& r : t.epochs)
    if (std::isfinite(r.test_acc) && !(r.test_acc <= best)) best = r.test_acc;
  return best;
}

void write_json(const fs::path& path, const json& j) { io::write_atomic(path, j.dump(2) + "\n"); }

}  // namespace

PreparedData prepare_data(const ExperimentConfig& cfg) {
  cfg.validate();
  LabeledDataset train;
  std::optional<LabeledDataset> test;
  if (cfg.dataset.kind == "blobs") {
    Rng data_rng(sub_seed(cfg.seed, Stage::data));
    const LabeledDataset all = make_blobs(cfg.dataset.blobs, data_rng);
    Rng split_rng(sub_seed(cfg.seed, Stage::split));
    auto [a, b] = split(all, 1.0 - cfg.dataset.test_fraction, split_rng);
    train = std::move(a);
    test = std::move(b);
  } else {
    train = load_idx(cfg.dataset.train_images, cfg.dataset.train_labels, cfg.dataset.classes);
    if (cfg.dataset.limit && cfg.dataset.limit < train.size()) {
      std::vector<std::size_t> keep(cfg.dataset.limit);
      for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = i;
      train = subset(train, keep);
    }
    if (!cfg.dataset.test_images.empty()) {
      test = load_idx(cfg.dataset.test_images, cfg.dataset.test_labels, train.classes);
    }
  }
  NoiseSpec spec = cfg.noise;
  spec.seed = sub_seed(cfg.seed, Stage::noise);
  return PreparedData{inject_noise(train, spec), std::move(test)};
}

json run_experiment(const ExperimentConfig& cfg, const fs::path& out_dir) {
  cfg.validate();
  fs::create_directories(out_dir);
  io::write_atomic(out_dir / "config.resolved.cfg", to_config_text(cfg));

  PreparedData prepared = prepare_data(cfg);
  const NoisyDataset& data = prepared.train;
  const LabeledDataset* test = prepared.test ? &*prepared.test : nullptr;
  io::write_atomic(out_dir / "noise_audit.csv", noise_audit_csv(data));

  std::vector<std::size_t> dims{data.data.dim};
  dims.insert(dims.end(), cfg.hidden.begin(), cfg.hidden.end());
  dims.push_back(data.classes());

  json report;
  report["seed"] = cfg.seed;
  report["n_train"] = data.size();
  report["n_test"] = test ? test->size() : 0;
  report["classes"] = data.classes();
  report["actual_noise"] = 100.0 * data.noise_fraction();

  const std::vector<PhaseConfig> phases = cfg.phase_configs();
  json phase_list = json::array();
  auto observer = [&](std::size_t idx, const PhaseTrace& trace, const std::vector<double>& conf) {
    const std::string tag = phase_tag(idx, trace.kind);
    io::write_atomic(out_dir / ("trace_" + tag + ".csv"), trace_csv(trace));
    io::write_atomic(out_dir / ("confidences_" + tag + ".csv"), confidences_csv(conf, data));
    json entry{{"index", idx},
               {"kind", to_string(trace.kind)},
               {"trace_file", "trace_" + tag + ".csv"},
               {"confidences_file", "confidences_" + tag + ".csv"},
               {"final_test_acc", finite_or_null(trace.epochs.back().test_acc)},
               {"nl_clamped", trace.nl_clamped}};
    try {
      entry["pr_auc"] = pr_curve(conf, data.is_noisy).auc;
    } catch (const InvalidProblem&) {
      entry["pr_auc"] = nullptr;
    }
    phase_list.push_back(std::move(entry));
  };

  Network net = Network::init(dims, sub_seed(cfg.seed, Stage::init));
  Rng train_rng(sub_seed(cfg.seed, Stage::selnlpl));
  SelNLPLResult sel;
  try {
    sel = run_selnlpl(net, data, phases, train_rng, cfg.gamma, test, observer);
  } catch (const Error& e) {
    report["status"] = "failed";
    report["error"] = e.what();
    report["phases"] = phase_list;
    write_json(out_dir / "report.json", report);
    throw;
  }
  report["composition"] = composition_name(cfg.phases);
  report["phases"] = phase_list;

  io::write_atomic(out_dir / "partition.csv", partition_csv(sel.partition, data));
  save_checkpoint(out_dir / "model_selnlpl.json", net);
  const FilterReport filter = filter_metrics(sel.partition, data.is_noisy);
  io::write_atomic(out_dir / "filter_report.json", filter_report_json(filter));
  report["estimated_noise"] = filter.estimated_noise_pct;
  report["recall"] = optional_pct(filter.recall_pct);
  report["precision"] = optional_pct(filter.precision_pct);
  report["n_clean"] = sel.partition.clean.size();
  report["n_noisy"] = sel.partition.noisy.size();
  const double selnlpl_acc = test ? accuracy(net, *test) : std::numeric_limits<double>::quiet_NaN();
  report["selnlpl_test_acc"] = finite_or_null(selnlpl_acc);

  double final_acc = selnlpl_acc;
  if (cfg.pseudo_enabled) {
    PseudoLabelResult pseudo = pseudo_label_pipeline(data, sel.partition, cfg.pseudo_configs(), dims, cfg.seed, test);
    io::write_atomic(out_dir / "trace_pseudo_clean.csv", trace_csv(pseudo.clean_trace));
    io::write_atomic(out_dir / "trace_pseudo_final.csv", trace_csv(pseudo.final_trace));
    save_checkpoint(out_dir / "model_final.json", pseudo.network);
    final_acc = pseudo.final_test_acc;
    report["pseudo_test_acc"] = finite_or_null(pseudo.final_test_acc);
  }
  report["final_test_acc"] = finite_or_null(final_acc);

  if (cfg.baseline_enabled) {
    Network base = Network::init(dims, sub_seed(cfg.seed, Stage::baseline_init));
    Rng base_rng(sub_seed(cfg.seed, Stage::baseline_train));
    PhaseConfig bc = cfg.baseline_config();
    bc.kind = PhaseKind::PL;
    const PhaseTrace bt = train_phase(base, data.data, bc, base_rng, test);
    io::write_atomic(out_dir / "trace_baseline.csv", trace_csv(bt));
    report["baseline_final_test_acc"] = finite_or_null(bt.epochs.back().test_acc);
    report["baseline_best_test_acc"] = finite_or_null(best_test_acc(bt));
  }
  report["histogram_bins"] = cfg.histogram_bins;
  report["status"] = "ok";
  write_json(out_dir / "report.json", report);
  return report;
}

json run_ablation(const ExperimentConfig& cfg, const fs::path& out_dir, std::size_t threads) {
  const auto comps = ablation_compositions();
  std::vector<json> results(comps.size());
  std::vector<std::exception_ptr> errors(comps.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < comps.size();) {
      try {
        ExperimentConfig c = cfg;
        c.phases = comps[i];
        c.baseline_enabled = false;
        results[i] = run_experiment(c, out_dir / ("ablation_" + std::to_string(i + 1)));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n_threads = std::clamp<std::size_t>(threads, 1, comps.size());
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  io::CsvWriter w({"id", "composition", "final_test_acc", "estimated_noise", "recall", "precision", "status"});
  json table = json::array();
  for (std::size_t i = 0; i < comps.size(); ++i) {
    json row{{"id", i + 1}, {"composition", composition_name(comps[i])}};
    if (errors[i]) {
      try {
        std::rethrow_exception(errors[i]);
      } catch (const std::exception& e) {
        row["status"] = "failed";
        row["error"] = e.what();
      }
    } else {
      row["status"] = "ok";
      for (const char* key : {"final_test_acc", "estimated_noise", "recall", "precision"}) row[key] = results[i][key];
    }
    auto num = [&](const char* key) -> std::string {
      return row.contains(key) && row[key].is_number() ? io::format_double(row[key].get<double>()) : "nan";
    };
    w.field(i + 1).field(row["composition"].get<std::string>()).field(num("final_test_acc"))
        .field(num("estimated_noise")).field(num("recall")).field(num("precision"))
        .field(row["status"].get<std::string>()).end_row();
    table.push_back(std::move(row));
  }
  io::write_atomic(out_dir / "ablation.csv", w.str());
  json out{{"ablation", table}};
  write_json(out_dir / "ablation.json", out);
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

json build_report(const fs::path& run_dir) {
  std::vector<std::string> expected{"report.json", "partition.csv"};
  std::vector<std::string> missing;
  for (const auto& f : expected)
    if (!fs::exists(run_dir / f)) missing.push_back(f);
  if (!missing.empty()) {
    std::string msg = "run directory " + run_dir.string() + " is missing expected artifacts:";
    for (const auto& f : missing) msg += " " + f;
    throw MissingArtifact(msg);
  }
  json report;
  try {
    report = json::parse(io::read_file(run_dir / "report.json"));
  } catch (const json::exception& e) {
    throw ParseError(std::string("report.json: ") + e.what());
  }
  if (!report.contains("phases") || !report["phases"].is_array())
    throw ParseError("report.json has no phase list");
  for (const json& ph : report["phases"]) {
    const std::string f = ph.at("confidences_file").get<std::string>();
    if (!fs::exists(run_dir / f)) missing.push_back(f);
  }
  if (!missing.empty()) {
    std::string msg = "run directory " + run_dir.string() + " is missing expected artifacts:";
    for (const auto& f : missing) msg += " " + f;
    throw MissingArtifact(msg);
  }

  const std::size_t bins = report.value("histogram_bins", std::size_t{20});
  json phases = json::array();
  for (const json& ph : report["phases"]) {
    const io::CsvTable t = io::read_csv(run_dir / ph.at("confidences_file").get<std::string>());
    const std::size_t cc = t.column("confidence"), nc = t.column("is_noisy");
    std::vector<double> conf;
    std::vector<std::uint8_t> noisy;
    for (const auto& row : t.rows) {
      conf.push_back(io::parse_double(row[cc]));
      noisy.push_back(io::parse_double(row[nc]) != 0.0);
    }
    const std::string tag = phase_tag(ph.at("index").get<std::size_t>(), parse_phase_kind(ph.at("kind").get<std::string>()));
    json entry{{"index", ph["index"]}, {"kind", ph["kind"]}};
    try {
      const PrCurve curve = pr_curve(conf, noisy);
      io::write_atomic(run_dir / ("pr_curve_" + tag + ".csv"), pr_curve_csv(curve));
      entry["pr_auc"] = curve.auc;
      entry["pr_curve_file"] = "pr_curve_" + tag + ".csv";
    } catch (const InvalidProblem&) {
      entry["pr_auc"] = nullptr;
    }
    const ConfidenceHistogram h = confidence_histogram(conf, noisy, bins);
    io::write_atomic(run_dir / ("histogram_" + tag + ".csv"), histogram_csv(h));
    entry["histogram_file"] = "histogram_" + tag + ".csv";
    phases.push_back(std::move(entry));
  }
  json summary;
  summary["phases"] = phases;
  for (const char* key : {"actual_noise", "estimated_noise", "recall", "precision", "final_test_acc"})
    summary[key] = report.contains(key) ? report[key] : json(nullptr);
  summary["auc_ordering_holds"] = auc_ordering_holds(summary);
  write_json(run_dir / "summary.json", summary);
  return summary;
}

bool auc_ordering_holds(const json& summary, double slack) {
  double prev = -std::numeric_limits<double>::infinity();
  for (const json& ph : summary.at("phases")) {
    if (!ph.at("pr_auc").is_number()) return false;
    const double auc = ph["pr_auc"].get<double>();
    if (auc + slack < prev) return false;
    prev = auc;
  }
  return true;
}

fs::path resolve_out_dir(const std::optional<std::string>& explicit_out, const ExperimentConfig& cfg,
                         const fs::path& config_path) {
  if (explicit_out && !explicit_out->empty()) return *explicit_out;
  if (!cfg.out.empty()) return cfg.out;
  const std::string stem = config_path.stem().string();
  if (const char* root = std::getenv("NLNL_OUT_ROOT"); root && *root) return fs::path(root) / stem;
  return fs::path("runs") / stem;
}

}  // namespace nlnl
