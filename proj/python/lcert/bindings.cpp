#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lcert/attacks.hpp"
#include "lcert/certify.hpp"
#include "lcert/common.hpp"
#include "lcert/dataset.hpp"
#include "lcert/model.hpp"
#include "lcert/pue.hpp"
#include "lcert/smoothing.hpp"

namespace py = pybind11;
using namespace lcert;

namespace {

data::LabeledDataset dataset_from_arrays(py::array_t<double, py::array::c_style> samples,
                                         py::array_t<int, py::array::c_style> labels,
                                         int class_count, const std::string& domain_id) {
  if (samples.ndim() != 2) throw Error("samples must be a 2-D array");
  if (labels.ndim() != 1 || labels.shape(0) != samples.shape(0))
    throw Error("labels must be 1-D with one entry per sample row");
  data::LabeledDataset d;
  d.input_dim = static_cast<int>(samples.shape(1));
  d.class_count = class_count;
  d.domain_id = domain_id;
  d.samples.assign(samples.data(), samples.data() + samples.size());
  d.labels.assign(labels.data(), labels.data() + labels.size());
  d.validate();
  return d;
}

py::array_t<double> samples_array(const data::LabeledDataset& d) {
  py::array_t<double> out({static_cast<py::ssize_t>(d.size()),
                           static_cast<py::ssize_t>(d.input_dim)});
  std::copy(d.samples.begin(), d.samples.end(), out.mutable_data());
  return out;
}

py::array_t<int> labels_array(const data::LabeledDataset& d) {
  py::array_t<int> out(static_cast<py::ssize_t>(d.size()));
  std::copy(d.labels.begin(), d.labels.end(), out.mutable_data());
  return out;
}

nn::ParamVector params_from_array(py::array_t<double, py::array::c_style> values) {
  return nn::ParamVector(std::vector<double>(values.data(), values.data() + values.size()));
}

py::array_t<double> params_to_array(const nn::ParamVector& theta) {
  py::array_t<double> out(static_cast<py::ssize_t>(theta.size()));
  std::copy(theta.values().begin(), theta.values().end(), out.mutable_data());
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "certified learnability toolkit: weight-space smoothing certificates and "
            "provably unlearnable data crafting";
  m.attr("__version__") = kVersion;

  py::register_exception<Error>(m, "LcertError");

  // --- model ---
  py::class_<nn::ModelSpec>(m, "ModelSpec")
      .def(py::init([](std::vector<int> widths, const std::string& activation) {
             nn::ModelSpec s;
             s.layer_widths = std::move(widths);
             s.activation = nn::activation_from_name(activation);
             s.validate();
             return s;
           }),
           py::arg("layer_widths"), py::arg("activation") = "relu")
      .def_readonly("layer_widths", &nn::ModelSpec::layer_widths)
      .def_property_readonly("param_count", &nn::ModelSpec::param_count)
      .def_property_readonly("input_dim", &nn::ModelSpec::input_dim)
      .def_property_readonly("class_count", &nn::ModelSpec::class_count);

  py::class_<nn::TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("learning_rate", &nn::TrainConfig::learning_rate)
      .def_readwrite("momentum", &nn::TrainConfig::momentum)
      .def_readwrite("batch_size", &nn::TrainConfig::batch_size)
      .def_readwrite("steps", &nn::TrainConfig::steps)
      .def_readwrite("weight_decay", &nn::TrainConfig::weight_decay)
      .def_readwrite("seed", &nn::TrainConfig::seed);

  py::class_<nn::ParamVector>(m, "ParamVector")
      .def(py::init(&params_from_array), py::arg("values"))
      .def_property_readonly("values", &params_to_array)
      .def("__len__", &nn::ParamVector::size)
      .def("l2_norm", &nn::ParamVector::l2_norm);

  m.def("init_params", &nn::init_params, py::arg("spec"), py::arg("seed"));
  m.def("train", &nn::train, py::arg("spec"), py::arg("dataset"), py::arg("config"),
        py::call_guard<py::gil_scoped_release>());
  m.def("accuracy", &nn::accuracy, py::arg("theta"), py::arg("spec"), py::arg("dataset"));

  // --- data ---
  py::class_<data::LabeledDataset>(m, "LabeledDataset")
      .def(py::init(&dataset_from_arrays), py::arg("samples"), py::arg("labels"),
           py::arg("class_count"), py::arg("domain_id") = "python")
      .def_property_readonly("samples", &samples_array)
      .def_property_readonly("labels", &labels_array)
      .def_readonly("class_count", &data::LabeledDataset::class_count)
      .def_readonly("input_dim", &data::LabeledDataset::input_dim)
      .def_readonly("domain_id", &data::LabeledDataset::domain_id)
      .def("__len__", &data::LabeledDataset::size)
      .def("id", &data::LabeledDataset::id);

  py::class_<data::ClasswisePerturbation>(m, "ClasswisePerturbation")
      .def_property_readonly("rows",
                             [](const data::ClasswisePerturbation& p) {
                               py::array_t<double> out(
                                   {static_cast<py::ssize_t>(p.class_count),
                                    static_cast<py::ssize_t>(p.input_dim)});
                               std::copy(p.rows.begin(), p.rows.end(), out.mutable_data());
                               return out;
                             })
      .def_readonly("budget", &data::ClasswisePerturbation::budget);

  py::class_<data::BlobSpec>(m, "BlobSpec")
      .def(py::init<>())
      .def_readwrite("class_count", &data::BlobSpec::class_count)
      .def_readwrite("input_dim", &data::BlobSpec::input_dim)
      .def_readwrite("samples_per_class", &data::BlobSpec::samples_per_class)
      .def_readwrite("cluster_spread", &data::BlobSpec::cluster_spread)
      .def_readwrite("center_spread", &data::BlobSpec::center_spread)
      .def_readwrite("seed", &data::BlobSpec::seed);

  m.def("make_blobs", &data::make_blobs, py::arg("spec"));
  m.def("apply_perturbation", &data::apply_perturbation, py::arg("dataset"), py::arg("delta"));

  // --- smoothing ---
  py::class_<smooth::SmoothingConfig>(m, "SmoothingConfig")
      .def(py::init<>())
      .def_readwrite("sigma", &smooth::SmoothingConfig::sigma)
      .def_readwrite("draws", &smooth::SmoothingConfig::draws)
      .def_readwrite("seed", &smooth::SmoothingConfig::seed);

  py::class_<smooth::AccuracySamples>(m, "AccuracySamples")
      .def_property_readonly("values",
                             [](const smooth::AccuracySamples& s) {
                               py::array_t<double> out(
                                   static_cast<py::ssize_t>(s.values.size()));
                               std::copy(s.values.begin(), s.values.end(),
                                         out.mutable_data());
                               return out;
                             })
      .def_property_readonly("sigma",
                             [](const smooth::AccuracySamples& s) { return s.config.sigma; })
      .def_property_readonly("n", &smooth::AccuracySamples::n)
      .def_readonly("dataset_id", &smooth::AccuracySamples::dataset_id);

  m.def("perturb_params", &smooth::perturb_params, py::arg("theta"), py::arg("sigma"),
        py::arg("draw_index"), py::arg("seed"));
  m.def("sample_accuracies", &smooth::sample_accuracies, py::arg("theta"), py::arg("spec"),
        py::arg("dataset"), py::arg("config"), py::arg("threads") = 0,
        py::call_guard<py::gil_scoped_release>());
  m.def("empirical_qps", &smooth::empirical_qps, py::arg("samples"), py::arg("q"));

  // --- certification ---
  py::class_<cert::Certificate>(m, "Certificate")
      .def_readonly("q", &cert::Certificate::q)
      .def_readonly("eta", &cert::Certificate::eta)
      .def_readonly("sigma", &cert::Certificate::sigma)
      .def_readonly("n", &cert::Certificate::n)
      .def_readonly("alpha", &cert::Certificate::alpha)
      .def_readonly("q_bar", &cert::Certificate::q_bar)
      .def_readonly("k", &cert::Certificate::k)
      .def_readonly("bound", &cert::Certificate::bound)
      .def_readonly("generalization_addend", &cert::Certificate::generalization_addend)
      .def_readonly("dataset_id", &cert::Certificate::dataset_id)
      .def("abstained", &cert::Certificate::abstained)
      .def("to_json", &cert::certificate_to_json);

  m.def("q_bar", &cert::q_bar, py::arg("q"), py::arg("eta"), py::arg("sigma"));
  m.def("binomial_cdf", &cert::binomial_cdf, py::arg("m"), py::arg("n"), py::arg("p"));
  m.def("quantile_upper_bound", &cert::quantile_upper_bound, py::arg("n"), py::arg("alpha"),
        py::arg("sigma"), py::arg("eta"), py::arg("q"));
  m.def(
      "certify_learnability",
      [](const smooth::AccuracySamples& samples, double q, double eta, double alpha) {
        return cert::certify_learnability(samples, {q, eta, alpha});
      },
      py::arg("samples"), py::arg("q") = 0.9, py::arg("eta") = 0.0, py::arg("alpha") = 0.01);
  m.def("max_certifiable_eta", &cert::max_certifiable_eta, py::arg("q"), py::arg("sigma"),
        py::arg("n"), py::arg("alpha"));
  m.def("hoeffding_addend", &cert::hoeffding_addend, py::arg("n_test"), py::arg("n"),
        py::arg("beta"));
  m.def("hoeffding_addend_1n", &cert::hoeffding_addend_1n, py::arg("n_test"), py::arg("n"),
        py::arg("beta"));
  m.def("hoeffding_generalization", &cert::hoeffding_generalization, py::arg("t"),
        py::arg("n_test"), py::arg("n"), py::arg("beta"));
  m.def("pac_bayes_lower_bound", &cert::pac_bayes_lower_bound, py::arg("mean_acc"),
        py::arg("theta_norm"), py::arg("sigma"), py::arg("n_test"), py::arg("alpha"));
  m.def(
      "tightness_gap",
      [](double estimate, const cert::Certificate& c) {
        auto g = cert::tightness_gap(estimate, c);
        return py::make_tuple(g.value, g.underestimate);
      },
      py::arg("true_learnability_estimate"), py::arg("certificate"));

  // --- crafting ---
  py::class_<pue::CraftConfig>(m, "CraftConfig")
      .def(py::init([](const std::string& mode) {
             pue::CraftConfig cfg;
             cfg.mode = pue::mode_from_name(mode);
             return cfg;
           }),
           py::arg("mode") = "pue")
      .def_readwrite("u_train", &pue::CraftConfig::u_train)
      .def_readwrite("u_perturb", &pue::CraftConfig::u_perturb)
      .def_readwrite("noise_cap", &pue::CraftConfig::noise_cap)
      .def_readwrite("noise_step", &pue::CraftConfig::noise_step)
      .def_readwrite("surrogate_steps", &pue::CraftConfig::surrogate_steps)
      .def_readwrite("stop_error", &pue::CraftConfig::stop_error)
      .def_readwrite("warmup_error", &pue::CraftConfig::warmup_error)
      .def_readwrite("budget", &pue::CraftConfig::budget)
      .def_readwrite("delta_lr", &pue::CraftConfig::delta_lr)
      .def_readwrite("validation_fraction", &pue::CraftConfig::validation_fraction)
      .def_readwrite("max_rounds", &pue::CraftConfig::max_rounds)
      .def_readwrite("seed", &pue::CraftConfig::seed)
      .def("label", &pue::CraftConfig::label);

  py::class_<pue::CraftResult>(m, "CraftResult")
      .def_readonly("delta", &pue::CraftResult::delta)
      .def_readonly("surrogate", &pue::CraftResult::surrogate)
      .def("label", &pue::CraftResult::label)
      .def_property_readonly("rounds",
                             [](const pue::CraftResult& r) { return r.history.size(); })
      .def_property_readonly("final_error", [](const pue::CraftResult& r) {
        return r.history.empty() ? 1.0 : r.history.back().perturbed_error;
      });

  m.def("craft", &pue::craft, py::arg("source"), py::arg("spec"), py::arg("config"),
        py::arg("train_config"), py::call_guard<py::gil_scoped_release>());
  m.def("train_offline_surrogate", &pue::train_offline_surrogate, py::arg("poisoned"),
        py::arg("spec"), py::arg("config"), py::arg("train_config"),
        py::call_guard<py::gil_scoped_release>());

  // --- attacks ---
  py::class_<attack::RecoveryConfig>(m, "RecoveryConfig")
      .def(py::init<>())
      .def_readwrite("eta_budget", &attack::RecoveryConfig::eta_budget)
      .def_readwrite("lr", &attack::RecoveryConfig::lr)
      .def_readwrite("steps", &attack::RecoveryConfig::steps)
      .def_readwrite("clean_fraction", &attack::RecoveryConfig::clean_fraction)
      .def_readwrite("seed", &attack::RecoveryConfig::seed);

  m.def("project_l2", &attack::project_l2, py::arg("theta"), py::arg("center"), py::arg("eta"));
  m.def(
      "recovery_attack",
      [](const nn::ParamVector& theta, const nn::ModelSpec& spec,
         const data::LabeledDataset& pool, const data::LabeledDataset& test,
         const attack::RecoveryConfig& cfg) {
        attack::RecoveryOutcome out = [&] {
          py::gil_scoped_release release;
          return attack::recovery_attack(theta, spec, pool, test, cfg);
        }();
        return py::make_tuple(out.weights, out.clean_test_accuracy);
      },
      py::arg("theta"), py::arg("spec"), py::arg("clean_pool"), py::arg("clean_test"),
      py::arg("config"));
  m.def("estimate_true_learnability", &attack::estimate_true_learnability, py::arg("theta"),
        py::arg("spec"), py::arg("test"), py::arg("eta"), py::arg("config"),
        py::call_guard<py::gil_scoped_release>());
  m.def("validate_certificate", &attack::validate_certificate, py::arg("theta"),
        py::arg("spec"), py::arg("test"), py::arg("certificate"), py::arg("m_trials"),
        py::arg("seed"), py::arg("interior") = false, py::arg("threads") = 0,
        py::call_guard<py::gil_scoped_release>());
}
