#include <doctest.h>

#include <cstdlib>
#include <filesystem>

#include "nlnl/error.hpp"
#include "nlnl/experiment.hpp"
#include "nlnl/io.hpp"

using namespace nlnl;
namespace fs = std::filesystem;

namespace {

ExperimentConfig tiny(std::uint64_t seed = 5) {
  auto c = parse_config(
      "[dataset]\nclasses = 3\nper_class = 40\ndim = 6\n"
      "[noise]\nratio = 0.3\n[network]\nhidden = 12\n[optimizer]\nbatch_size = 16\n"
      "[nl]\nepochs = 3\n[selnl]\nepochs = 3\n[selpl]\nepochs = 3\n"
      "[pseudo]\nepochs = 3\ndecay_at = 1\n[baseline]\nepochs = 3\n[report]\nhistogram_bins = 8\n");
  c.seed = seed;
  return c;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) : path(fs::temp_directory_path() / ("nlnl_exp_" + tag)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("a run writes every artifact and a complete report") {
  TempDir dir("full");
  const auto report = run_experiment(tiny(), dir.path);
  for (const char* f : {"config.resolved.cfg", "noise_audit.csv", "trace_0_NL.csv", "trace_1_SelNL.csv",
                        "trace_2_SelPL.csv", "confidences_2_SelPL.csv", "partition.csv", "filter_report.json",
                        "model_selnlpl.json", "model_final.json", "trace_pseudo_clean.csv", "trace_pseudo_final.csv",
                        "trace_baseline.csv", "report.json"}) {
    CAPTURE(f);
    CHECK(fs::exists(dir.path / f));
  }
  for (const char* key : {"estimated_noise", "recall", "precision", "final_test_acc", "actual_noise",
                          "baseline_final_test_acc", "baseline_best_test_acc", "phases", "status"}) {
    CAPTURE(key);
    CHECK(report.contains(key));
  }
  CHECK(report["status"] == "ok");
  CHECK(report["phases"].size() == 3);
  CHECK(report["n_train"].get<int>() + report["n_test"].get<int>() == 120);

  // The resolved config reproduces the run.
  const auto again = load_config(dir.path / "config.resolved.cfg");
  CHECK(to_config_text(again) == to_config_text(tiny()));

  const auto trace = io::read_csv(dir.path / "trace_0_NL.csv");
  CHECK(trace.rows.size() == 3);
  const auto part = io::read_csv(dir.path / "partition.csv");
  CHECK(part.header == std::vector<std::string>{"id", "confidence", "assigned", "is_noisy"});
}

TEST_CASE("identical seeds give byte-identical reports") {
  TempDir a("det_a"), b("det_b");
  run_experiment(tiny(8), a.path);
  run_experiment(tiny(8), b.path);
  CHECK(io::read_file(a.path / "report.json") == io::read_file(b.path / "report.json"));
  CHECK(io::read_file(a.path / "model_final.json") == io::read_file(b.path / "model_final.json"));
}

TEST_CASE("report aggregation writes PR curves and histograms") {
  TempDir dir("report");
  run_experiment(tiny(), dir.path);
  const auto summary = build_report(dir.path);
  REQUIRE(summary["phases"].size() == 3);
  for (const auto& ph : summary["phases"]) {
    const auto h = io::read_csv(dir.path / ph["histogram_file"].get<std::string>());
    CHECK(h.rows.size() == 2 * 8);
    if (ph["pr_auc"].is_number()) CHECK(fs::exists(dir.path / ph["pr_curve_file"].get<std::string>()));
  }
  CHECK(fs::exists(dir.path / "summary.json"));
  CHECK(summary.contains("auc_ordering_holds"));
}

TEST_CASE("report on an empty directory lists the missing artifacts") {
  TempDir dir("empty");
  CHECK_THROWS_WITH_AS(build_report(dir.path), doctest::Contains("report.json"), MissingArtifact);
  CHECK_THROWS_WITH_AS(build_report(dir.path), doctest::Contains("partition.csv"), MissingArtifact);
}

TEST_CASE("AUC ordering check") {
  using nlohmann::json;
  auto s = [](std::vector<double> aucs) {
    json phases = json::array();
    for (double a : aucs) phases.push_back({{"pr_auc", a}});
    return json{{"phases", phases}};
  };
  CHECK(auc_ordering_holds(s({0.8, 0.9, 0.95})));
  CHECK(auc_ordering_holds(s({0.9, 0.895, 0.95})));
  CHECK_FALSE(auc_ordering_holds(s({0.9, 0.85, 0.95})));
  CHECK(auc_ordering_holds(s({1.0, 1.0, 1.0})));
}

TEST_CASE("starvation stops the run but keeps completed phases") {
  TempDir dir("starve");
  auto c = tiny();
  c.phases = {PhaseKind::NL, PhaseKind::SelPL};
  c.nl.learning_rate = 0.0;
  c.gamma = 0.999999;
  CHECK_THROWS_AS(run_experiment(c, dir.path), StarvationError);
  CHECK(fs::exists(dir.path / "trace_0_NL.csv"));
  const auto report = nlohmann::json::parse(io::read_file(dir.path / "report.json"));
  CHECK(report["status"] == "failed");
  CHECK(report["phases"].size() == 1);
}

TEST_CASE("ablation runs all four compositions") {
  TempDir dir("ablation");
  auto c = tiny();
  c.pseudo_enabled = false;
  const auto out = run_ablation(c, dir.path, 2);
  REQUIRE(out["ablation"].size() == 4);
  CHECK(out["ablation"][3]["composition"] == "NL");
  for (int i = 1; i <= 4; ++i) CHECK(fs::exists(dir.path / ("ablation_" + std::to_string(i)) / "report.json"));
  CHECK(io::read_csv(dir.path / "ablation.csv").rows.size() == 4);
}

TEST_CASE("output directory resolution") {
  ExperimentConfig c;
  CHECK(resolve_out_dir(std::string("x/y"), c, "cfg/a.cfg") == fs::path("x/y"));
  c.out = "from_cfg";
  CHECK(resolve_out_dir(std::nullopt, c, "cfg/a.cfg") == fs::path("from_cfg"));
  c.out.clear();
  ::setenv("NLNL_OUT_ROOT", "/tmp/root", 1);
  CHECK(resolve_out_dir(std::nullopt, c, "cfg/a.cfg") == fs::path("/tmp/root/a"));
  ::unsetenv("NLNL_OUT_ROOT");
  CHECK(resolve_out_dir(std::nullopt, c, "cfg/a.cfg") == fs::path("runs/a"));
}
