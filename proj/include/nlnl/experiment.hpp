#pragma once

// End-to-end experiment driver behind the CLI. Every artifact is written
// atomically into the run directory:
//
//   config.resolved.cfg              fully expanded config (re-runnable)
//   noise_audit.csv                  id,y_observed,y_clean,is_noisy
//   trace_<i>_<phase>.csv            epoch,train_loss_eq1,train_acc,test_acc,n_selected
//   confidences_<i>_<phase>.csv      id,confidence,is_noisy (after phase i)
//   partition.csv                    id,confidence,assigned,is_noisy
//   filter_report.json               estimated_noise/recall/precision (percent)
//   model_selnlpl.json, model_final.json   checkpoints
//   trace_pseudo_clean.csv, trace_pseudo_final.csv, trace_baseline.csv
//   report.json                      summary (keys below)
//
// Seeds: every stage draws from sub_seed(seed, Stage::...).

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "nlnl/config.hpp"
#include "nlnl/data.hpp"
#include "nlnl/noise.hpp"

namespace nlnl {

struct PreparedData {
  NoisyDataset train;
  std::optional<LabeledDataset> test;
};

PreparedData prepare_data(const ExperimentConfig& cfg);

// Runs data -> noise -> SelNLPL -> (pseudo labeling) -> (PL baseline) and
// returns the report.json content. report.json keys include estimated_noise,
// recall, precision, final_test_acc (all percentages; null when undefined).
nlohmann::json run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

// Runs the four phase compositions (#1 NL-SelNL-SelPL, #2 NL-SelNL,
// #3 NL-SelPL, #4 NL) into out_dir/ablation_<n>, up to `threads` at once, and
// writes ablation.csv / ablation.json comparison tables.
nlohmann::json run_ablation(const ExperimentConfig& cfg, const std::filesystem::path& out_dir, std::size_t threads);

// Aggregates a finished run directory: per-phase PR curves and AUCs,
// confidence histograms. Writes summary.json, pr_curve_<i>_<phase>.csv and
// histogram_<i>_<phase>.csv. Throws MissingArtifact listing what is absent.
nlohmann::json build_report(const std::filesystem::path& run_dir);

// PR AUCs non-decreasing across phases, allowing `slack`.
bool auc_ordering_holds(const nlohmann::json& summary, double slack = 0.01);

// Directory for a run: explicit > config `out` > $NLNL_OUT_ROOT/<stem> > runs/<stem>.
std::filesystem::path resolve_out_dir(const std::optional<std::string>& explicit_out, const ExperimentConfig& cfg,
                                      const std::filesystem::path& config_path);

}  // namespace nlnl
