// nlnl: experiment runner for negative-learning noisy-label training.
//
//   nlnl run      --config FILE [--seed N] [--out DIR] [--ablation] [--threads N]
//   nlnl ablation --config FILE [--seed N] [--out DIR] [--threads N]
//   nlnl inject   [--config FILE | blob flags | --idx-images F --idx-labels F]
//                 --kind K --ratio R [--map M] [--exact-count] [--seed N] --out FILE
//   nlnl report   RUN_DIR
//
// Exit status: 0 ok, 1 runtime failure, 2 usage/config error, 3 phase starvation.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "nlnl/config.hpp"
#include "nlnl/error.hpp"
#include "nlnl/experiment.hpp"
#include "nlnl/io.hpp"
#include "nlnl/kernels.hpp"
#include "nlnl/noise.hpp"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;
constexpr int kExitStarved = 3;

struct RunArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::size_t threads = 1;
  bool ablation = false;
};

int cmd_run(const RunArgs& a) {
  nlnl::ExperimentConfig cfg = nlnl::load_config(a.config);
  if (a.seed) cfg.seed = *a.seed;
  const auto out = nlnl::resolve_out_dir(a.out, cfg, a.config);
  if (a.ablation) {
    const auto result = nlnl::run_ablation(cfg, out, a.threads);
    std::cout << "id  composition            final_acc  est_noise  recall  precision\n";
    for (const auto& row : result["ablation"]) {
      auto num = [&](const char* k) { return row.contains(k) && row[k].is_number() ? row[k].get<double>() : -1.0; };
      std::printf("#%-2d %-22s %9.2f  %9.2f  %6.2f  %9.2f\n", row["id"].get<int>(),
                  row["composition"].get<std::string>().c_str(), num("final_test_acc"), num("estimated_noise"),
                  num("recall"), num("precision"));
    }
    std::cout << "wrote " << (out / "ablation.csv").string() << "\n";
    return 0;
  }
  const auto report = nlnl::run_experiment(cfg, out);
  std::cout << report.dump(2) << "\n";
  std::cout << "wrote " << out.string() << "\n";
  return 0;
}

struct InjectArgs {
  std::string config;
  std::size_t classes = 10, per_class = 1000, dim = 16;
  double separation = 4.0;
  std::string idx_images, idx_labels;
  std::string kind = "symm_inc";
  double ratio = 0.0;
  std::string map;
  bool exact_count = false;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_inject(const InjectArgs& a) {
  nlnl::ExperimentConfig cfg;
  if (!a.config.empty()) {
    cfg = nlnl::load_config(a.config);
  } else if (!a.idx_images.empty() || !a.idx_labels.empty()) {
    cfg.dataset.kind = "idx";
    cfg.dataset.train_images = a.idx_images;
    cfg.dataset.train_labels = a.idx_labels;
  } else {
    cfg.dataset.blobs = {a.classes, a.per_class, a.dim, a.separation};
  }
  cfg.seed = a.seed;
  cfg.noise.kind = nlnl::parse_noise_kind(a.kind);
  cfg.noise.ratio = a.ratio;
  cfg.noise.exact_count = a.exact_count;
  cfg.noise.asymm_map.reset();
  if (cfg.noise.kind == nlnl::NoiseKind::asymm) {
    if (a.map.empty()) throw CLI::ValidationError("--map", "asymm noise requires --map (pairs like 2:7,3:8 or mnist|cifar10)");
    cfg.noise.asymm_map = nlnl::parse_asymm_map(a.map);
  } else if (!a.map.empty()) {
    throw CLI::ValidationError("--map", "only valid with --kind asymm");
  }
  const nlnl::PreparedData data = nlnl::prepare_data(cfg);
  nlnl::io::write_atomic(a.out, nlnl::noise_audit_csv(data.train));
  std::printf("wrote %s: %zu samples, actual noise %.4f\n", a.out.c_str(), data.train.size(), data.train.noise_fraction());
  return 0;
}

int cmd_report(const std::string& run_dir) {
  const auto summary = nlnl::build_report(run_dir);
  std::cout << summary.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Negative learning for noisy labels: SelNLPL filtering, pseudo labeling, and reports"};
  app.require_subcommand(1);
  std::string kernels;
  app.add_option("--kernels", kernels, "Force kernel backend (scalar|avx2)");

  RunArgs run_args;
  auto add_run_flags = [&](CLI::App* sub) {
    sub->add_option("--config", run_args.config, "Experiment config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", run_args.seed, "Override the master seed");
    sub->add_option("--out", run_args.out, "Output directory (default: config 'out', $NLNL_OUT_ROOT/<name>, runs/<name>)");
    sub->add_option("--threads", run_args.threads, "Parallel runs for ablation sweeps")->check(CLI::PositiveNumber);
  };
  auto* run = app.add_subcommand("run", "Run one experiment from a config file");
  add_run_flags(run);
  run->add_flag("--ablation", run_args.ablation, "Run the four phase compositions instead");
  auto* ablation = app.add_subcommand("ablation", "Run the four phase-composition variants");
  add_run_flags(ablation);

  InjectArgs inj;
  auto* inject = app.add_subcommand("inject", "Corrupt a dataset's labels and write the audit CSV");
  inject->add_option("--config", inj.config, "Take the dataset section from this config")->check(CLI::ExistingFile);
  inject->add_option("--classes", inj.classes, "Blob classes")->capture_default_str();
  inject->add_option("--per-class", inj.per_class, "Blob samples per class")->capture_default_str();
  inject->add_option("--dim", inj.dim, "Blob feature dimension")->capture_default_str();
  inject->add_option("--separation", inj.separation, "Blob separation")->capture_default_str();
  inject->add_option("--idx-images", inj.idx_images, "IDX image file");
  inject->add_option("--idx-labels", inj.idx_labels, "IDX label file");
  inject->add_option("--kind", inj.kind, "symm_inc | symm_exc | asymm")->capture_default_str();
  inject->add_option("--ratio", inj.ratio, "Corruption probability")->required()->check(CLI::Range(0.0, 1.0));
  inject->add_option("--map", inj.map, "asymm map: src:dst pairs or mnist|cifar10");
  inject->add_flag("--exact-count", inj.exact_count, "Corrupt exactly round(r * eligible) samples");
  inject->add_option("--seed", inj.seed, "Master seed")->capture_default_str();
  inject->add_option("--out", inj.out, "Audit CSV path")->required();

  std::string run_dir;
  auto* report = app.add_subcommand("report", "Aggregate a run directory into PR curves and histograms");
  report->add_option("run_dir", run_dir, "Directory written by 'run'")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitUsage;
  }

  try {
    if (!kernels.empty()) {
      auto b = nlnl::kernels::parse_backend(kernels);
      if (!b) throw nlnl::ConfigError("--kernels", "expected scalar or avx2");
      nlnl::kernels::set_backend(*b);
    }
    if (*run) return cmd_run(run_args);
    if (*ablation) {
      run_args.ablation = true;
      return cmd_run(run_args);
    }
    if (*inject) return cmd_inject(inj);
    if (*report) return cmd_report(run_dir);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const nlnl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const nlnl::StarvationError& e) {
    std::cerr << "phase starvation: " << e.what() << "\n";
    return kExitStarved;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
