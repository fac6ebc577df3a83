#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ppl/config.hpp"
#include "ppl/datagen.hpp"
#include "ppl/metrics.hpp"
#include "ppl/trainer.hpp"

namespace ppl {

TrainConfig train_config_from(const Config& cfg);
// synth: gaussian mixture from the profile keys; file: tabular load with a
// balanced validation split of data.val_per_class rows per class carved out
DataBundle data_from(const Config& cfg);
HmtThresholds hmt_from(const Config& cfg, const ClassHistogram& hist);

// method presets as config-level patches (weight/sampler/mix modes + loss
// family)
std::vector<std::pair<std::string, std::string>> method_patch(
    const std::string& method);

std::string epoch_csv(const RunRecord& record);
std::string summary_text(const Config& cfg, const RunRecord& record);
std::string schedule_dump_csv(const Config& cfg);

// trains one run; when out_dir is set, writes epochs.csv, summary.txt,
// config.resolved and model.json into it
TrainResult run_single(const Config& cfg,
                       const std::optional<std::filesystem::path>& out_dir);

struct GridAxis {
  std::string key;  // config key, or "method"
  std::vector<std::string> values;
};

struct GridCell {
  std::size_t index = 0;
  std::string dir_name;
  std::vector<std::pair<std::string, std::string>> assignment;
  std::string error;  // empty on success
  double overall = 0.0;
  double macro_avg = 0.0;
  double head = 0.0;
  double medium = 0.0;
  double tail = 0.0;
  int best_epoch = 0;
  double best_overall = 0.0;
};

struct GridOutput {
  std::vector<GridCell> cells;
  std::string aggregate_csv;  // one row per cell, deterministic order
  std::string mean_csv;       // mean/stddev over the train.seed axis
  int failures = 0;
};

// Cartesian product of the axes over the base config. Cells are independent
// and may run on up to `jobs` threads; outputs are assembled in cell-index
// order so the CSVs do not depend on scheduling.
GridOutput run_grid(const Config& base, const std::vector<GridAxis>& axes,
                    const std::optional<std::filesystem::path>& out_dir,
                    int jobs);

struct LossCheckResult {
  double worst_abs = 0.0;
  double worst_ratio = 0.0;  // deviation over the mixed tolerance; <= 1 passes
  bool pass = false;
};

// Central-finite-difference audit of the analytic loss gradients at step
// 1e-5 under the mixed tolerance abs 1e-6 + rel 1e-4, skipping draws within
// 1e-3 of the threshold kink. `corrupt` perturbs the analytic gradient to
// prove the audit can fail.
LossCheckResult loss_check(const Config& cfg, int cases, bool corrupt);

}  // namespace ppl
