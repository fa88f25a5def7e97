#pragma once

#include "strnn/eval.hpp"
#include "strnn/json_io.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace strnn::experiment {

struct Split {
  paths::LabeledDataset train;
  paths::LabeledDataset test;
};

// per-label test count is llround(test_fraction * class size); test examples keep
// the original dataset order, training examples are shuffled so size-grid prefixes
// form random subsamples
Split stratified_split(const paths::LabeledDataset& d, double test_fraction,
                       std::uint64_t seed);

struct ReportRow {
  int train_size = 0;
  double delta = 0.0;
  double mislabel_fraction = 0.0;
  double train_risk = 0.0;
  double test_risk = 0.0;
  double gap = 0.0;
  double bound = 0.0;
  bool bound_holds = true;
  double noiseless_accuracy = 0.0;
  std::vector<double> stochastic_trials;
  double stochastic_min = 0.0;
  double stochastic_max = 0.0;
  double stochastic_avg = 0.0;
  double robustness_ratio = 1.0;
};

struct ExperimentReport {
  std::string kind;
  nlohmann::json config;
  double theta = 0.0;
  double radius = 0.0;
  std::vector<ReportRow> rows;
};

// linearly spaced training sizes from `smallest` to `full`, deduplicated
std::vector<int> default_size_grid(int full, int points = 8, int smallest = 10);

// trains on the first m examples for every m in the grid and reports risks,
// accuracies on the test set, and the generalisation bound with Theta = max |b|
// observed across the grid and R the L2 radius of all available paths
ExperimentReport bound_check_experiment(const paths::LabeledDataset& train,
                                        const paths::LabeledDataset& test,
                                        const reservoir::ReservoirSystem& sys,
                                        const learn::TrainConfig& cfg,
                                        const std::vector<int>& grid, int trials,
                                        std::uint64_t eval_seed,
                                        double delta_confidence = 0.01);

// retrains on label-corrupted copies of the training set and reports test
// accuracies relative to the clean-training average
ExperimentReport robustness_experiment(const paths::LabeledDataset& train,
                                       const paths::LabeledDataset& test,
                                       const reservoir::ReservoirSystem& sys,
                                       const learn::TrainConfig& cfg,
                                       const std::vector<double>& fractions, int trials,
                                       std::uint64_t corrupt_seed, std::uint64_t eval_seed,
                                       double delta_confidence = 0.01);

// one row per (grid point, stochastic trial); a nonempty comment becomes a
// leading '#' line, used to embed the resolved run config
void save_report_csv(const ExperimentReport& rep, const std::string& file,
                     const std::string& comment = "");
void save_report_json(const ExperimentReport& rep, const std::string& file);

}  // namespace strnn::experiment
