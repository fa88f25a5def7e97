#include "strnn/dataset_io.hpp"
#include "strnn/experiment.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace strnn;

PYBIND11_MODULE(_core, m) {
  m.doc() = "continuous-time stochastic linear RNN path classifier";

  py::register_exception<FormatError>(m, "FormatError");
  py::register_exception<IoError>(m, "IoError");
  py::register_exception<RegimeError>(m, "RegimeError");
  py::register_exception<NumericsError>(m, "NumericsError");

  py::class_<paths::Path>(m, "Path")
      .def(py::init<>())
      .def_readwrite("times", &paths::Path::times)
      .def_readwrite("values", &paths::Path::values)
      .def("dim", &paths::Path::dim)
      .def("num_samples", &paths::Path::num_samples)
      .def("horizon", &paths::Path::horizon)
      .def("validate", &paths::Path::validate);

  py::class_<paths::LabeledDataset>(m, "LabeledDataset")
      .def(py::init<>())
      .def_readwrite("paths", &paths::LabeledDataset::paths)
      .def_readwrite("labels", &paths::LabeledDataset::labels)
      .def_readwrite("name", &paths::LabeledDataset::name)
      .def("size", &paths::LabeledDataset::size)
      .def("dim", &paths::LabeledDataset::dim)
      .def("horizon", &paths::LabeledDataset::horizon)
      .def("validate", &paths::LabeledDataset::validate);

  m.def("gen_trig_dataset", &paths::gen_trig_dataset, py::arg("seed"),
        py::arg("samples_per_class"), py::arg("num_samples_per_path") = 256);
  m.def("corrupt_labels", &paths::corrupt_labels, py::arg("dataset"), py::arg("fraction"),
        py::arg("seed"));
  m.def("path_l2_norm", &paths::path_l2_norm, py::arg("path"));
  m.def(
      "dataset_radius",
      [](const paths::LabeledDataset& d) { return paths::dataset_radius(d, paths::PathNorm::L2); },
      py::arg("dataset"));
  m.def("save_dataset_csv", &paths::save_dataset_csv, py::arg("dataset"), py::arg("file"),
        py::arg("comment") = "");
  m.def("load_dataset_csv", &paths::load_dataset_csv, py::arg("file"));
  m.def(
      "load_japanese_vowels",
      [](const std::string& train_file, const std::string& test_file) {
        return paths::load_japanese_vowels(train_file, test_file);
      },
      py::arg("train_file"), py::arg("test_file"));

  py::class_<reservoir::ReservoirSystem>(m, "ReservoirSystem")
      .def_readonly("n", &reservoir::ReservoirSystem::n)
      .def_readonly("r", &reservoir::ReservoirSystem::r)
      .def_readonly("d", &reservoir::ReservoirSystem::d)
      .def_readonly("T", &reservoir::ReservoirSystem::T)
      .def_readonly("delta", &reservoir::ReservoirSystem::delta)
      .def_readonly("W", &reservoir::ReservoirSystem::W)
      .def_readonly("W0", &reservoir::ReservoirSystem::W0)
      .def_readonly("Sigma", &reservoir::ReservoirSystem::Sigma)
      .def_readonly("A", &reservoir::ReservoirSystem::A)
      .def_readonly("lambda_min", &reservoir::ReservoirSystem::lambda_min)
      .def_readonly("exp_norm_int", &reservoir::ReservoirSystem::exp_norm_int);

  m.def("make_reservoir", &reservoir::make_reservoir, py::arg("n"), py::arg("r"),
        py::arg("T"), py::arg("delta"), py::arg("seed_w"), py::arg("seed_sigma"),
        py::arg("d") = -1, py::arg("cov_tol") = 1e-9);
  m.def("save_reservoir_json", &reservoir::save_reservoir_json, py::arg("system"),
        py::arg("file"));
  m.def("load_reservoir_json", &reservoir::load_reservoir_json, py::arg("file"));

  py::class_<features::PartialSignature>(m, "PartialSignature")
      .def_readonly("horizon", &features::PartialSignature::horizon)
      .def_readonly("levels", &features::PartialSignature::levels)
      .def("order", &features::PartialSignature::order)
      .def("dim", &features::PartialSignature::dim);

  m.def("partial_signature", &features::partial_signature, py::arg("path"), py::arg("order"));
  m.def("exact_mean", &features::exact_mean, py::arg("W0"), py::arg("u"), py::arg("path"));
  m.def("truncated_mean", &features::truncated_mean, py::arg("W0"), py::arg("u"),
        py::arg("signature"));
  m.def("risk_gap_bound", &features::risk_gap_bound, py::arg("w0_norm"), py::arg("T"),
        py::arg("lambda_cap"), py::arg("radius_l1"), py::arg("lambda_min"), py::arg("order"));
  m.def("default_truncation_order", &features::default_truncation_order, py::arg("w0_norm"),
        py::arg("T"), py::arg("scale"), py::arg("tol"));

  py::class_<learn::ModelParams>(m, "ModelParams")
      .def(py::init<>())
      .def_readwrite("u", &learn::ModelParams::u)
      .def_readwrite("omega", &learn::ModelParams::omega)
      .def_readwrite("b", &learn::ModelParams::b);

  py::class_<learn::TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("lambda_cap", &learn::TrainConfig::lambda_cap)
      .def_readwrite("theta_cap", &learn::TrainConfig::theta_cap)
      .def_readwrite("restarts", &learn::TrainConfig::restarts)
      .def_readwrite("max_iters", &learn::TrainConfig::max_iters)
      .def_readwrite("init_step", &learn::TrainConfig::init_step)
      .def_readwrite("tol", &learn::TrainConfig::tol)
      .def_readwrite("seed", &learn::TrainConfig::seed)
      .def_readwrite("warm_starts", &learn::TrainConfig::warm_starts);

  py::class_<learn::TrainResult>(m, "TrainResult")
      .def_readonly("params", &learn::TrainResult::params)
      .def_readonly("risk_trace", &learn::TrainResult::risk_trace)
      .def_readonly("final_risk", &learn::TrainResult::final_risk)
      .def_readonly("winner", &learn::TrainResult::winner);

  py::class_<learn::SvmResult>(m, "SvmResult")
      .def_readonly("theta", &learn::SvmResult::theta)
      .def_readonly("alpha", &learn::SvmResult::alpha)
      .def_readonly("direction", &learn::SvmResult::direction)
      .def_readonly("b", &learn::SvmResult::b)
      .def_readonly("free_support_vector", &learn::SvmResult::free_support_vector)
      .def_readonly("iterations", &learn::SvmResult::iterations)
      .def_readonly("dual_objective", &learn::SvmResult::dual_objective)
      .def_readonly("primal_objective", &learn::SvmResult::primal_objective);

  m.def("loss", &learn::loss, py::arg("nu"), py::arg("label"), py::arg("params"),
        py::arg("A"));
  m.def(
      "empirical_risk",
      [](const std::vector<Vector>& means, const std::vector<int>& labels,
         const learn::ModelParams& p, const Matrix& A) {
        return learn::empirical_risk(means, labels, p, A);
      },
      py::arg("means"), py::arg("labels"), py::arg("params"), py::arg("A"));
  m.def("erm_train", &learn::erm_train, py::arg("dataset"), py::arg("system"),
        py::arg("config"));
  m.def("truncated_erm_train", &learn::truncated_erm_train, py::arg("dataset"),
        py::arg("system"), py::arg("config"), py::arg("order"));
  m.def("svm_baseline", &learn::svm_baseline, py::arg("means"), py::arg("labels"),
        py::arg("A"), py::arg("lambda_reg"), py::arg("kkt_tol") = 1e-6,
        py::arg("max_updates") = 0);
  m.def(
      "save_model_json",
      [](const learn::ModelParams& p, const std::string& file) {
        learn::save_model_json(p, file);
      },
      py::arg("params"), py::arg("file"));
  m.def(
      "load_model_json",
      [](const std::string& file) { return learn::load_model_json(file); }, py::arg("file"));

  py::class_<eval::AccuracyStats>(m, "AccuracyStats")
      .def_readonly("per_trial", &eval::AccuracyStats::per_trial)
      .def_readonly("min", &eval::AccuracyStats::min)
      .def_readonly("max", &eval::AccuracyStats::max)
      .def_readonly("avg", &eval::AccuracyStats::avg);

  py::class_<eval::BoundInputs>(m, "BoundInputs")
      .def(py::init<>())
      .def_readwrite("theta", &eval::BoundInputs::theta)
      .def_readwrite("lambda_cap", &eval::BoundInputs::lambda_cap)
      .def_readwrite("radius", &eval::BoundInputs::radius)
      .def_readwrite("lambda_min", &eval::BoundInputs::lambda_min)
      .def_readwrite("exp_norm_int", &eval::BoundInputs::exp_norm_int)
      .def_readwrite("delta", &eval::BoundInputs::delta)
      .def_readwrite("m", &eval::BoundInputs::m);

  m.def("classify_noiseless", &eval::classify_noiseless, py::arg("nu"), py::arg("params"));
  m.def("dataset_means", &eval::dataset_means, py::arg("system"), py::arg("dataset"),
        py::arg("u"));
  m.def(
      "noiseless_accuracy",
      [](const paths::LabeledDataset& d, const learn::ModelParams& p,
         const reservoir::ReservoirSystem& sys) { return eval::noiseless_accuracy(d, p, sys); },
      py::arg("dataset"), py::arg("params"), py::arg("system"));
  m.def(
      "stochastic_accuracy",
      [](const paths::LabeledDataset& d, const learn::ModelParams& p,
         const reservoir::ReservoirSystem& sys, int trials, std::uint64_t seed) {
        return eval::stochastic_accuracy(d, p, sys, trials, seed);
      },
      py::arg("dataset"), py::arg("params"), py::arg("system"), py::arg("trials"),
      py::arg("seed"));
  m.def(
      "simulate_sde",
      [](const paths::Path& p, const Matrix& u, const reservoir::ReservoirSystem& sys,
         double dt, std::uint64_t seed, std::uint64_t stream) {
        Rng rng = rng_stream(seed, stream);
        return eval::simulate_sde(p, u, sys, dt, rng);
      },
      py::arg("path"), py::arg("u"), py::arg("system"), py::arg("dt"), py::arg("seed"),
      py::arg("stream") = 0);
  m.def("pac_bound", &eval::pac_bound, py::arg("inputs"));
  m.def("sample_complexity", &eval::sample_complexity, py::arg("epsilon"), py::arg("delta"),
        py::arg("theta"), py::arg("lambda_cap"), py::arg("radius"), py::arg("lambda_min"),
        py::arg("exp_norm_int"));
  m.def("vc_bound", &eval::vc_bound, py::arg("risk_hat"), py::arg("n"), py::arg("m"),
        py::arg("delta"));

  py::class_<experiment::Split>(m, "Split")
      .def_readonly("train", &experiment::Split::train)
      .def_readonly("test", &experiment::Split::test);

  py::class_<experiment::ReportRow>(m, "ReportRow")
      .def_readonly("train_size", &experiment::ReportRow::train_size)
      .def_readonly("delta", &experiment::ReportRow::delta)
      .def_readonly("mislabel_fraction", &experiment::ReportRow::mislabel_fraction)
      .def_readonly("train_risk", &experiment::ReportRow::train_risk)
      .def_readonly("test_risk", &experiment::ReportRow::test_risk)
      .def_readonly("gap", &experiment::ReportRow::gap)
      .def_readonly("bound", &experiment::ReportRow::bound)
      .def_readonly("bound_holds", &experiment::ReportRow::bound_holds)
      .def_readonly("noiseless_accuracy", &experiment::ReportRow::noiseless_accuracy)
      .def_readonly("stochastic_trials", &experiment::ReportRow::stochastic_trials)
      .def_readonly("stochastic_min", &experiment::ReportRow::stochastic_min)
      .def_readonly("stochastic_max", &experiment::ReportRow::stochastic_max)
      .def_readonly("stochastic_avg", &experiment::ReportRow::stochastic_avg)
      .def_readonly("robustness_ratio", &experiment::ReportRow::robustness_ratio);

  py::class_<experiment::ExperimentReport>(m, "ExperimentReport")
      .def_readonly("kind", &experiment::ExperimentReport::kind)
      .def_readonly("theta", &experiment::ExperimentReport::theta)
      .def_readonly("radius", &experiment::ExperimentReport::radius)
      .def_readonly("rows", &experiment::ExperimentReport::rows)
      .def_property_readonly("config_json", [](const experiment::ExperimentReport& r) {
        return r.config.dump();
      });

  m.def("stratified_split", &experiment::stratified_split, py::arg("dataset"),
        py::arg("test_fraction"), py::arg("seed"));
  m.def("default_size_grid", &experiment::default_size_grid, py::arg("full"),
        py::arg("points") = 8, py::arg("smallest") = 10);
  m.def("bound_check_experiment", &experiment::bound_check_experiment, py::arg("train"),
        py::arg("test"), py::arg("system"), py::arg("config"), py::arg("grid"),
        py::arg("trials"), py::arg("eval_seed"), py::arg("delta_confidence") = 0.01);
  m.def("robustness_experiment", &experiment::robustness_experiment, py::arg("train"),
        py::arg("test"), py::arg("system"), py::arg("config"), py::arg("fractions"),
        py::arg("trials"), py::arg("corrupt_seed"), py::arg("eval_seed"),
        py::arg("delta_confidence") = 0.01);
  m.def("save_report_csv", &experiment::save_report_csv, py::arg("report"), py::arg("file"),
        py::arg("comment") = "");
  m.def("save_report_json", &experiment::save_report_json, py::arg("report"),
        py::arg("file"));
}
