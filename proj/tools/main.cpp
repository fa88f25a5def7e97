#include "strnn/dataset_io.hpp"
#include "strnn/experiment.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

using namespace strnn;

namespace {

struct CliArgs {
  std::string config_file;
  std::string out_dir = "out";
  int truncated = -1;
  int trials = -1;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

const nlohmann::json& need(const nlohmann::json& j, const std::string& key) {
  auto it = j.find(key);
  if (it == j.end()) throw FormatError("config: missing field '" + key + "'");
  return *it;
}

template <typename T>
T field(const nlohmann::json& j, const std::string& key) {
  try {
    return need(j, key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("config: bad field '" + key + "': " + e.what());
  }
}

template <typename T>
T field_or(const nlohmann::json& j, const std::string& key, T def) {
  if (!j.contains(key)) return def;
  return field<T>(j, key);
}

reservoir::ReservoirSystem reservoir_from(const nlohmann::json& cfg) {
  const auto& r = need(cfg, "reservoir");
  return reservoir::make_reservoir(field<int>(r, "n"), field<int>(r, "r"),
                                   field<double>(r, "T"), field<double>(r, "delta"),
                                   field<std::uint64_t>(r, "seed_w"),
                                   field<std::uint64_t>(r, "seed_sigma"),
                                   field_or<int>(r, "d", -1),
                                   field_or<double>(r, "cov_tol", 1e-9));
}

learn::TrainConfig training_from(const nlohmann::json& cfg) {
  const auto& t = need(cfg, "training");
  learn::TrainConfig c;
  c.lambda_cap = field_or(t, "lambda_cap", c.lambda_cap);
  c.theta_cap = field_or(t, "theta_cap", c.theta_cap);
  c.restarts = field_or(t, "restarts", c.restarts);
  c.max_iters = field_or(t, "max_iters", c.max_iters);
  c.init_step = field_or(t, "init_step", c.init_step);
  c.tol = field_or(t, "tol", c.tol);
  c.seed = field<std::uint64_t>(t, "seed");
  return c;
}

struct DataBundle {
  paths::LabeledDataset train;
  paths::LabeledDataset test;
};

DataBundle load_bundle(const nlohmann::json& cfg) {
  const auto& d = need(cfg, "dataset");
  const auto kind = field<std::string>(d, "kind");
  auto split_full = [&](paths::LabeledDataset full) {
    const auto& e = need(cfg, "experiment");
    auto s = experiment::stratified_split(full, field_or(e, "test_fraction", 0.3),
                                          field<std::uint64_t>(e, "split_seed"));
    return DataBundle{std::move(s.train), std::move(s.test)};
  };
  if (kind == "synthetic")
    return split_full(paths::gen_trig_dataset(field<std::uint64_t>(d, "seed"),
                                              field<int>(d, "samples_per_class"),
                                              field_or<int>(d, "num_samples_per_path", 256)));
  if (kind == "vowels") {
    auto [train, test] = paths::load_japanese_vowels(field<std::string>(d, "train_file"),
                                                     field<std::string>(d, "test_file"));
    return {std::move(train), std::move(test)};
  }
  if (kind == "csv") {
    if (d.contains("test_file"))
      return {paths::load_dataset_csv(field<std::string>(d, "train_file")),
              paths::load_dataset_csv(field<std::string>(d, "test_file"))};
    return split_full(paths::load_dataset_csv(field<std::string>(d, "file")));
  }
  throw FormatError("config: unknown dataset.kind '" + kind + "'");
}

std::string out_path(const CliArgs& cli, const std::string& name) {
  std::filesystem::create_directories(cli.out_dir);
  return (std::filesystem::path(cli.out_dir) / name).string();
}

nlohmann::json dataset_summary(const paths::LabeledDataset& d) {
  int positive = 0;
  for (int l : d.labels) positive += l == 1;
  return {{"name", d.name},
          {"size", d.size()},
          {"positive", positive},
          {"dim", d.dim()},
          {"horizon", d.horizon()},
          {"l2_radius", d.size() ? paths::dataset_radius(d, paths::PathNorm::L2) : 0.0}};
}

int cmd_generate(const nlohmann::json& cfg, const CliArgs& cli) {
  const auto bundle = load_bundle(cfg);
  const auto comment = cfg.dump();
  const auto train_file = out_path(cli, "train.csv");
  const auto test_file = out_path(cli, "test.csv");
  paths::save_dataset_csv(bundle.train, train_file, comment);
  paths::save_dataset_csv(bundle.test, test_file, comment);
  save_json_file({{"config", cfg},
                  {"train", dataset_summary(bundle.train)},
                  {"test", dataset_summary(bundle.test)}},
                 out_path(cli, "dataset.json"));
  std::printf("wrote %s (%d paths) and %s (%d paths)\n", train_file.c_str(),
              bundle.train.size(), test_file.c_str(), bundle.test.size());
  return 0;
}

int cmd_train(const nlohmann::json& cfg, const CliArgs& cli) {
  const auto bundle = load_bundle(cfg);
  const auto sys = reservoir_from(cfg);
  const auto tc = training_from(cfg);
  const int order = cli.truncated >= 0
                        ? cli.truncated
                        : field_or<int>(need(cfg, "training"), "truncated", -1);
  const auto res = order >= 0 ? learn::truncated_erm_train(bundle.train, sys, tc, order)
                              : learn::erm_train(bundle.train, sys, tc);

  nlohmann::json extra = {{"config", cfg},
                          {"truncated", order},
                          {"final_risk", res.final_risk},
                          {"winner", res.winner},
                          {"train_size", bundle.train.size()}};
  const auto model_file = out_path(cli, "model.json");
  learn::save_model_json(res.params, model_file, extra);

  const auto trace_file = out_path(cli, "risk_trace.csv");
  std::ofstream trace(trace_file);
  if (!trace) throw IoError("cannot write file: " + trace_file);
  trace << "# " << cfg.dump() << "\niter,risk\n";
  for (std::size_t i = 0; i < res.risk_trace.size(); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", res.risk_trace[i]);
    trace << i << ',' << buf << '\n';
  }
  if (!trace) throw IoError("failed while writing file: " + trace_file);

  std::printf("trained on %d paths (%s): risk %.6g -> %.6g over %zu accepted steps\n",
              bundle.train.size(), order >= 0 ? "truncated" : "exact", res.risk_trace.front(),
              res.final_risk, res.risk_trace.size() - 1);
  std::printf("wrote %s and %s\n", model_file.c_str(), trace_file.c_str());
  return 0;
}

void print_report(const experiment::ExperimentReport& rep) {
  for (const auto& row : rep.rows)
    std::printf(
        "  m=%-4d f=%.2f train_risk=%.4f test_risk=%.4f gap=%.4f bound=%.4g holds=%s "
        "noiseless=%.4f stoch_avg=%.4f ratio=%.4f\n",
        row.train_size, row.mislabel_fraction, row.train_risk, row.test_risk, row.gap,
        row.bound, row.bound_holds ? "yes" : "no", row.noiseless_accuracy,
        row.stochastic_avg, row.robustness_ratio);
}

void write_report(const experiment::ExperimentReport& rep, const nlohmann::json& cfg,
                  const CliArgs& cli) {
  const auto csv_file = out_path(cli, "report.csv");
  const auto json_file = out_path(cli, "report.json");
  experiment::save_report_csv(rep, csv_file, cfg.dump());
  experiment::save_report_json(rep, json_file);
  std::printf("wrote %s and %s\n", csv_file.c_str(), json_file.c_str());
}

int cmd_experiment(const nlohmann::json& cfg, const CliArgs& cli, const std::string& kind) {
  const auto bundle = load_bundle(cfg);
  const auto sys = reservoir_from(cfg);
  const auto tc = training_from(cfg);
  const auto& e = need(cfg, "experiment");
  const auto eval_seed = field<std::uint64_t>(e, "eval_seed");
  const auto delta_conf = field_or(e, "delta_confidence", 0.01);
  const int trials =
      cli.trials > 0 ? cli.trials : field_or<int>(e, "trials", kind == "evaluate" ? 10 : 5);

  experiment::ExperimentReport rep;
  if (kind == "robustness") {
    const auto fractions = field_or<std::vector<double>>(
        e, "fractions", std::vector<double>{0.0, 0.05, 0.1, 0.15});
    rep = experiment::robustness_experiment(bundle.train, bundle.test, sys, tc, fractions,
                                            trials, field<std::uint64_t>(e, "corrupt_seed"),
                                            eval_seed, delta_conf);
  } else {
    std::vector<int> grid;
    if (kind == "evaluate")
      grid = {bundle.train.size()};
    else if (e.contains("grid"))
      grid = field<std::vector<int>>(e, "grid");
    else
      grid = experiment::default_size_grid(bundle.train.size(),
                                           field_or<int>(e, "grid_points", 8),
                                           field_or<int>(e, "grid_smallest", 10));
    rep = experiment::bound_check_experiment(bundle.train, bundle.test, sys, tc, grid, trials,
                                             eval_seed, delta_conf);
    rep.kind = kind;
  }
  rep.config["source"] = cfg;
  std::printf("%s on %s (train %d / test %d):\n", kind.c_str(), bundle.train.name.c_str(),
              bundle.train.size(), bundle.test.size());
  print_report(rep);
  write_report(rep, cfg, cli);
  return 0;
}

int cmd_simulate_sde(const nlohmann::json& cfg, const CliArgs& cli) {
  const auto bundle = load_bundle(cfg);
  const auto sys = reservoir_from(cfg);
  const auto& s = need(cfg, "sde");
  const double dt = field<double>(s, "dt");
  const auto seed = field<std::uint64_t>(s, "seed");
  const int trials = cli.trials > 0 ? cli.trials : field_or<int>(s, "trials", 100);
  const int path_index = field_or<int>(s, "path_index", 0);
  if (path_index < 0 || path_index >= bundle.train.size())
    throw FormatError("config: sde.path_index outside the training set");
  const auto model = learn::load_model_json(field<std::string>(s, "model"));
  const auto& path = bundle.train.paths[path_index];

  const Vector nu = features::exact_mean(sys.W0, model.u, path);
  Vector sample_mean = Vector::Zero(sys.n);
  const auto csv_file = out_path(cli, "sde.csv");
  std::ofstream out(csv_file);
  if (!out) throw IoError("cannot write file: " + csv_file);
  out << "# " << cfg.dump() << "\ntrial";
  for (int i = 0; i < sys.n; ++i) out << ",y_" << i + 1;
  out << '\n';
  for (int t = 0; t < trials; ++t) {
    Rng rng = rng_stream(seed, static_cast<std::uint64_t>(t));
    const Vector y = eval::simulate_sde(path, model.u, sys, dt, rng);
    sample_mean += y;
    out << t;
    for (int i = 0; i < sys.n; ++i) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.17g", y(i));
      out << ',' << buf;
    }
    out << '\n';
  }
  if (!out) throw IoError("failed while writing file: " + csv_file);
  sample_mean /= trials;

  save_json_file({{"config", cfg},
                  {"path_index", path_index},
                  {"label", bundle.train.labels[path_index]},
                  {"dt", dt},
                  {"trials", trials},
                  {"exact_mean", std::vector<double>(nu.begin(), nu.end())},
                  {"sample_mean", std::vector<double>(sample_mean.begin(), sample_mean.end())},
                  {"max_mean_deviation", (sample_mean - nu).cwiseAbs().maxCoeff()}},
                 out_path(cli, "sde.json"));
  std::printf("simulated %d terminal states (dt=%g): max |sample mean - exact mean| = %.4g\n",
              trials, dt, (sample_mean - nu).cwiseAbs().maxCoeff());
  std::printf("wrote %s and %s\n", csv_file.c_str(), out_path(cli, "sde.json").c_str());
  return 0;
}

// --seed retargets the subcommand's primary stream: the dataset seed for
// generate, the restart seed for train, the accuracy-trial seed for the
// experiment subcommands, and the Brownian seed for simulate-sde
void apply_overrides(nlohmann::json& cfg, const CliArgs& cli, const std::string& cmd) {
  if (!cli.seed_set) return;
  if (cmd == "generate")
    cfg["dataset"]["seed"] = cli.seed;
  else if (cmd == "train")
    cfg["training"]["seed"] = cli.seed;
  else if (cmd == "simulate-sde")
    cfg["sde"]["seed"] = cli.seed;
  else
    cfg["experiment"]["eval_seed"] = cli.seed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"continuous-time stochastic linear RNN path classifier"};
  app.require_subcommand(1);
  app.footer(
      "exit codes: 0 success, 2 bad config or arguments, 3 file I/O failure,\n"
      "            4 noise regime unsuitable, 5 numerical failure, 1 unexpected error");

  CliArgs cli;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", cli.config_file, "JSON config file")->required();
    sub->add_option("--out", cli.out_dir, "output directory (default: out)");
    sub->add_option("--seed", cli.seed, "override the subcommand's primary seed");
    return sub;
  };

  add_common(app.add_subcommand(
      "generate", "resolve the configured dataset and write train/test CSVs"));
  auto* train = add_common(
      app.add_subcommand("train", "fit the readout by Gaussian-risk descent"));
  train->add_option("--truncated", cli.truncated,
                    "train on the order-N signature expansion of the means");
  auto* eval_cmd = add_common(app.add_subcommand(
      "evaluate", "train on the full split and report test risk and accuracies"));
  auto* bound = add_common(app.add_subcommand(
      "bound-check", "sweep training sizes and compare the risk gap to the bound"));
  auto* robust = add_common(app.add_subcommand(
      "robustness", "retrain under label corruption and report accuracy ratios"));
  auto* sde = add_common(app.add_subcommand(
      "simulate-sde", "Euler-Maruyama terminal states for one training path"));
  for (auto* sub : {eval_cmd, bound, robust, sde})
    sub->add_option("--trials", cli.trials, "override the number of stochastic trials");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  CLI::App* sub = app.get_subcommands().front();
  cli.seed_set = sub->count("--seed") > 0;

  const std::string cmd = sub->get_name();
  try {
    nlohmann::json cfg = load_json_file(cli.config_file);
    if (!cfg.is_object()) throw FormatError("config: root must be a JSON object");
    apply_overrides(cfg, cli, cmd);
    if (cmd == "generate") return cmd_generate(cfg, cli);
    if (cmd == "train") return cmd_train(cfg, cli);
    if (cmd == "simulate-sde") return cmd_simulate_sde(cfg, cli);
    return cmd_experiment(cfg, cli, cmd);
  } catch (const FormatError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const RegimeError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  } catch (const NumericsError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 5;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "unexpected error: %s\n", e.what());
    return 1;
  }
}
