#include "strnn/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace strnn::experiment {

namespace {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t k) {
  return splitmix64(splitmix64(seed) + k);
}

void check_horizon(const paths::LabeledDataset& d, const reservoir::ReservoirSystem& sys) {
  if (std::abs(d.horizon() - sys.T) > 1e-9 * std::max(1.0, sys.T))
    throw std::invalid_argument("dataset horizon must match the reservoir horizon");
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct RunOutcome {
  learn::ModelParams params;
  double train_risk = 0.0;
  double test_risk = 0.0;
  double noiseless = 0.0;
  eval::AccuracyStats stochastic;
};

// one training run on the first train_size stacks plus its test-set evaluation;
// trials draw from rng_stream(stoch_seed, t) inside stochastic_accuracy
RunOutcome run_point(const std::vector<features::BasisMeans>& train_stacks,
                     const std::vector<int>& train_labels, int train_size,
                     const std::vector<features::BasisMeans>& test_stacks,
                     const std::vector<int>& test_labels,
                     const reservoir::ReservoirSystem& sys, const learn::TrainConfig& cfg,
                     int trials, std::uint64_t stoch_seed) {
  std::vector<features::BasisMeans> sub(train_stacks.begin(),
                                        train_stacks.begin() + train_size);
  std::vector<int> sub_labels(train_labels.begin(), train_labels.begin() + train_size);
  auto res = learn::train_on_features(sub, sub_labels, sys.A, cfg);

  RunOutcome out;
  out.params = std::move(res.params);
  out.train_risk = res.final_risk;

  std::vector<Vector> test_means;
  test_means.reserve(test_stacks.size());
  for (const auto& bm : test_stacks) test_means.push_back(bm.mean_of(out.params.u));
  out.test_risk = learn::empirical_risk(test_means, test_labels, out.params, sys.A);
  out.noiseless = eval::noiseless_accuracy(test_means, test_labels, out.params);
  out.stochastic =
      eval::stochastic_accuracy(test_means, test_labels, out.params, sys.A, trials, stoch_seed);
  return out;
}

void fill_row(ReportRow& row, const RunOutcome& out) {
  row.train_risk = out.train_risk;
  row.test_risk = out.test_risk;
  row.gap = std::abs(out.test_risk - out.train_risk);
  row.noiseless_accuracy = out.noiseless;
  row.stochastic_trials = out.stochastic.per_trial;
  row.stochastic_min = out.stochastic.min;
  row.stochastic_max = out.stochastic.max;
  row.stochastic_avg = out.stochastic.avg;
}

// Theta enters the bound as max |b| over the trained models, so it is only
// known after all runs; the bound column is filled in this second pass
void fill_bounds(ExperimentReport& rep, const learn::TrainConfig& cfg,
                 const reservoir::ReservoirSystem& sys, double delta_confidence,
                 const std::vector<std::int64_t>& sample_sizes) {
  eval::BoundInputs bi;
  bi.theta = rep.theta;
  bi.lambda_cap = cfg.lambda_cap;
  bi.radius = rep.radius;
  bi.lambda_min = sys.lambda_min;
  bi.exp_norm_int = sys.exp_norm_int;
  bi.delta = delta_confidence;
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    bi.m = sample_sizes[i];
    rep.rows[i].bound = eval::pac_bound(bi);
    rep.rows[i].bound_holds = rep.rows[i].gap <= rep.rows[i].bound;
  }
}

nlohmann::json common_config(const paths::LabeledDataset& train,
                             const paths::LabeledDataset& test,
                             const reservoir::ReservoirSystem& sys,
                             const learn::TrainConfig& cfg, int trials,
                             double delta_confidence) {
  return {{"train_name", train.name},
          {"train_size", train.size()},
          {"test_name", test.name},
          {"test_size", test.size()},
          {"n", sys.n},
          {"r", sys.r},
          {"horizon", sys.T},
          {"delta", sys.delta},
          {"lambda_cap", cfg.lambda_cap},
          {"theta_cap", cfg.theta_cap},
          {"restarts", cfg.restarts},
          {"max_iters", cfg.max_iters},
          {"train_seed", cfg.seed},
          {"trials", trials},
          {"delta_confidence", delta_confidence}};
}

}  // namespace

Split stratified_split(const paths::LabeledDataset& d, double test_fraction,
                       std::uint64_t seed) {
  d.validate();
  if (d.size() == 0) throw std::invalid_argument("cannot split an empty dataset");
  if (!(test_fraction >= 0.0 && test_fraction <= 1.0))
    throw std::invalid_argument("test fraction must lie in [0, 1]");

  auto rng = rng_stream(seed, 0);
  std::vector<int> train_idx, test_idx;
  for (int label : {-1, 1}) {
    std::vector<int> cls;
    for (int i = 0; i < d.size(); ++i)
      if (d.labels[i] == label) cls.push_back(i);
    auto take = static_cast<int>(std::llround(test_fraction * cls.size()));
    std::shuffle(cls.begin(), cls.end(), rng);
    test_idx.insert(test_idx.end(), cls.begin(), cls.begin() + take);
    train_idx.insert(train_idx.end(), cls.begin() + take, cls.end());
  }
  std::shuffle(train_idx.begin(), train_idx.end(), rng);
  std::sort(test_idx.begin(), test_idx.end());

  Split s;
  s.train.name = d.name + "/train";
  s.test.name = d.name + "/test";
  for (int i : train_idx) {
    s.train.paths.push_back(d.paths[i]);
    s.train.labels.push_back(d.labels[i]);
  }
  for (int i : test_idx) {
    s.test.paths.push_back(d.paths[i]);
    s.test.labels.push_back(d.labels[i]);
  }
  return s;
}

std::vector<int> default_size_grid(int full, int points, int smallest) {
  if (full < 1) throw std::invalid_argument("grid needs a positive full size");
  if (points < 1) throw std::invalid_argument("grid needs at least one point");
  smallest = std::clamp(smallest, 1, full);
  std::vector<int> grid;
  for (int i = 0; i < points; ++i) {
    double frac = points == 1 ? 1.0 : static_cast<double>(i) / (points - 1);
    grid.push_back(
        static_cast<int>(std::llround(smallest + frac * (full - smallest))));
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

ExperimentReport bound_check_experiment(const paths::LabeledDataset& train,
                                        const paths::LabeledDataset& test,
                                        const reservoir::ReservoirSystem& sys,
                                        const learn::TrainConfig& cfg,
                                        const std::vector<int>& grid, int trials,
                                        std::uint64_t eval_seed, double delta_confidence) {
  train.validate();
  test.validate();
  check_horizon(train, sys);
  check_horizon(test, sys);
  if (train.dim() != sys.r || test.dim() != sys.r)
    throw std::invalid_argument("path dimension must match the reservoir input dimension");
  if (grid.empty()) throw std::invalid_argument("size grid is empty");
  for (int m : grid)
    if (m < 1 || m > train.size())
      throw std::invalid_argument("grid size outside the training set");
  if (!(delta_confidence > 0.0 && delta_confidence < 1.0))
    throw std::invalid_argument("confidence level must lie in (0, 1)");

  auto train_stacks = features::dataset_basis_means(sys.W0, train);
  auto test_stacks = features::dataset_basis_means(sys.W0, test);

  ExperimentReport rep;
  rep.kind = "bound-check";
  rep.config = common_config(train, test, sys, cfg, trials, delta_confidence);
  rep.config["grid"] = grid;
  rep.config["eval_seed"] = eval_seed;
  rep.radius = std::max(paths::dataset_radius(train, paths::PathNorm::L2),
                        paths::dataset_radius(test, paths::PathNorm::L2));

  std::vector<std::int64_t> sample_sizes;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    auto out = run_point(train_stacks, train.labels, grid[i], test_stacks, test.labels, sys,
                         cfg, trials, derive_seed(eval_seed, i));
    ReportRow row;
    row.train_size = grid[i];
    row.delta = sys.delta;
    fill_row(row, out);
    rep.theta = std::max(rep.theta, std::abs(out.params.b));
    rep.rows.push_back(std::move(row));
    sample_sizes.push_back(grid[i]);
  }
  fill_bounds(rep, cfg, sys, delta_confidence, sample_sizes);
  return rep;
}

ExperimentReport robustness_experiment(const paths::LabeledDataset& train,
                                       const paths::LabeledDataset& test,
                                       const reservoir::ReservoirSystem& sys,
                                       const learn::TrainConfig& cfg,
                                       const std::vector<double>& fractions, int trials,
                                       std::uint64_t corrupt_seed, std::uint64_t eval_seed,
                                       double delta_confidence) {
  train.validate();
  test.validate();
  check_horizon(train, sys);
  check_horizon(test, sys);
  if (train.dim() != sys.r || test.dim() != sys.r)
    throw std::invalid_argument("path dimension must match the reservoir input dimension");
  if (fractions.empty()) throw std::invalid_argument("fraction grid is empty");
  for (double f : fractions)
    if (!(f >= 0.0 && f <= 1.0))
      throw std::invalid_argument("mislabel fraction must lie in [0, 1]");
  if (!(delta_confidence > 0.0 && delta_confidence < 1.0))
    throw std::invalid_argument("confidence level must lie in (0, 1)");

  auto train_stacks = features::dataset_basis_means(sys.W0, train);
  auto test_stacks = features::dataset_basis_means(sys.W0, test);

  ExperimentReport rep;
  rep.kind = "robustness";
  rep.config = common_config(train, test, sys, cfg, trials, delta_confidence);
  rep.config["fractions"] = fractions;
  rep.config["corrupt_seed"] = corrupt_seed;
  rep.config["eval_seed"] = eval_seed;
  rep.radius = std::max(paths::dataset_radius(train, paths::PathNorm::L2),
                        paths::dataset_radius(test, paths::PathNorm::L2));

  double clean_avg = -1.0;
  std::vector<std::int64_t> sample_sizes;
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    auto corrupted = paths::corrupt_labels(train, fractions[i], derive_seed(corrupt_seed, i));
    auto out = run_point(train_stacks, corrupted.labels, train.size(), test_stacks,
                         test.labels, sys, cfg, trials, derive_seed(eval_seed, i));
    ReportRow row;
    row.train_size = train.size();
    row.delta = sys.delta;
    row.mislabel_fraction = fractions[i];
    fill_row(row, out);
    rep.theta = std::max(rep.theta, std::abs(out.params.b));
    if (fractions[i] == 0.0 && clean_avg < 0.0) clean_avg = out.stochastic.avg;
    rep.rows.push_back(std::move(row));
    sample_sizes.push_back(train.size());
  }
  if (clean_avg < 0.0) {
    auto out = run_point(train_stacks, train.labels, train.size(), test_stacks, test.labels,
                         sys, cfg, trials, derive_seed(eval_seed, fractions.size()));
    clean_avg = out.stochastic.avg;
  }
  for (auto& row : rep.rows)
    row.robustness_ratio = clean_avg == 0.0 ? 1.0 : row.stochastic_avg / clean_avg;
  fill_bounds(rep, cfg, sys, delta_confidence, sample_sizes);
  return rep;
}

void save_report_csv(const ExperimentReport& rep, const std::string& file,
                     const std::string& comment) {
  std::ofstream out(file);
  if (!out) throw IoError("cannot write file: " + file);
  if (!comment.empty()) out << "# " << comment << '\n';
  out << "train_size,delta,mislabel_fraction,trial,stochastic_accuracy,"
         "noiseless_accuracy,train_risk,test_risk,gap,bound,bound_holds,"
         "stochastic_min,stochastic_max,stochastic_avg,robustness_ratio\n";
  for (const auto& row : rep.rows) {
    for (std::size_t t = 0; t < row.stochastic_trials.size(); ++t) {
      out << row.train_size << ',' << fmt_double(row.delta) << ','
          << fmt_double(row.mislabel_fraction) << ',' << t << ','
          << fmt_double(row.stochastic_trials[t]) << ','
          << fmt_double(row.noiseless_accuracy) << ',' << fmt_double(row.train_risk) << ','
          << fmt_double(row.test_risk) << ',' << fmt_double(row.gap) << ','
          << fmt_double(row.bound) << ',' << (row.bound_holds ? 1 : 0) << ','
          << fmt_double(row.stochastic_min) << ',' << fmt_double(row.stochastic_max) << ','
          << fmt_double(row.stochastic_avg) << ',' << fmt_double(row.robustness_ratio)
          << '\n';
    }
  }
  if (!out) throw IoError("failed while writing file: " + file);
}

void save_report_json(const ExperimentReport& rep, const std::string& file) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : rep.rows) {
    rows.push_back({{"train_size", row.train_size},
                    {"delta", row.delta},
                    {"mislabel_fraction", row.mislabel_fraction},
                    {"train_risk", row.train_risk},
                    {"test_risk", row.test_risk},
                    {"gap", row.gap},
                    {"bound", row.bound},
                    {"bound_holds", row.bound_holds},
                    {"noiseless_accuracy", row.noiseless_accuracy},
                    {"stochastic_trials", row.stochastic_trials},
                    {"stochastic_min", row.stochastic_min},
                    {"stochastic_max", row.stochastic_max},
                    {"stochastic_avg", row.stochastic_avg},
                    {"robustness_ratio", row.robustness_ratio}});
  }
  nlohmann::json j = {{"kind", rep.kind},
                      {"config", rep.config},
                      {"theta", rep.theta},
                      {"radius", rep.radius},
                      {"rows", rows}};
  save_json_file(j, file);
}

}  // namespace strnn::experiment
