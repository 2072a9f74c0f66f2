// lcert: craft unlearnable datasets, certify their (q, eta)-learnability via
// weight-space Gaussian smoothing, and stress the certificates with recovery
// attacks. Every subcommand writes a manifest so each emitted number can be
// recomputed from the recorded configs and seeds.

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lcert/attacks.hpp"
#include "lcert/certify.hpp"
#include "lcert/common.hpp"
#include "lcert/dataset.hpp"
#include "lcert/hash.hpp"
#include "lcert/kvconfig.hpp"
#include "lcert/manifest.hpp"
#include "lcert/model.hpp"
#include "lcert/pue.hpp"
#include "lcert/report.hpp"
#include "lcert/smoothing.hpp"

namespace fs = std::filesystem;
using namespace lcert;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) fail("cannot open '%s' for writing", path.c_str());
  out << text;
  if (!out) fail("write to '%s' failed", path.c_str());
}

void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail("cannot create output directory '%s': %s", dir.c_str(), ec.message().c_str());
}

// Shared model/training flag bundle.
struct ModelFlags {
  std::vector<int> hidden = {128};
  std::string activation = "relu";

  void attach(CLI::App* cmd) {
    cmd->add_option("--hidden", hidden, "hidden layer widths")->delimiter(',');
    cmd->add_option("--activation", activation, "hidden activation: relu or tanh");
  }
  nn::ModelSpec spec(int input_dim, int class_count) const {
    return nn::ModelSpec::mlp(input_dim, hidden, class_count,
                              nn::activation_from_name(activation));
  }
};

struct TrainFlags {
  double lr = 0.05;
  double momentum = 0.9;
  int batch_size = 64;
  double weight_decay = 5e-4;

  void attach(CLI::App* cmd) {
    cmd->add_option("--lr", lr, "SGD learning rate");
    cmd->add_option("--momentum", momentum, "SGD momentum");
    cmd->add_option("--batch-size", batch_size, "mini-batch size");
    cmd->add_option("--weight-decay", weight_decay, "L2 weight decay");
  }
  nn::TrainConfig config(std::uint64_t seed, int steps = 0) const {
    nn::TrainConfig tc;
    tc.learning_rate = lr;
    tc.momentum = momentum;
    tc.batch_size = batch_size;
    tc.weight_decay = weight_decay;
    tc.seed = seed;
    if (steps > 0) tc.steps = steps;
    return tc;
  }
  void echo(KvConfig& kv) const {
    kv.set_f64("lr", lr);
    kv.set_f64("momentum", momentum);
    kv.set_int("batch_size", batch_size);
    kv.set_f64("weight_decay", weight_decay);
  }
};

struct CraftFlags {
  std::string mode = "pue";
  int u_train = 5;
  int u_perturb = 10;
  double noise_cap = 0.25;
  double noise_step = 0.05;
  int surrogate_steps = 10;
  double tau = 0.1;
  double warmup_error = 0.5;
  double xi = 8.0 / 255.0;
  double delta_lr = 0.0;  // 0 = xi/10
  double validation_fraction = 0.2;
  int max_rounds = 200;

  void attach(CLI::App* cmd, bool with_mode) {
    if (with_mode)
      cmd->add_option("--mode", mode, "crafting mode: emn, pue-b, or pue");
    cmd->add_option("--u-train", u_train, "noise draws per surrogate update");
    if (with_mode)
      cmd->add_option("--u-perturb", u_perturb, "noise draws per delta update");
    cmd->add_option("--noise-cap", noise_cap, "train-time noise ramp cap S");
    cmd->add_option("--noise-step", noise_step, "train-time noise ramp step s");
    if (with_mode)
      cmd->add_option("--surrogate-steps", surrogate_steps,
                      "surrogate mini-batch steps per round (M)");
    cmd->add_option("--tau", tau, "stop error rate");
    cmd->add_option("--warmup-error", warmup_error,
                    "weight noise activates below this error");
    if (with_mode) {
      cmd->add_option("--xi", xi, "linf budget per class");
      cmd->add_option("--delta-lr", delta_lr, "delta step size (default xi/10)");
      cmd->add_option("--validation-fraction", validation_fraction,
                      "share of the data reserved for noise optimization/validation");
    }
    cmd->add_option("--max-rounds", max_rounds, "round (or epoch) cap");
  }
  pue::CraftConfig config(std::uint64_t seed) const {
    pue::CraftConfig cfg;
    cfg.mode = pue::mode_from_name(mode);
    cfg.u_train = u_train;
    cfg.u_perturb = u_perturb;
    cfg.noise_cap = noise_cap;
    cfg.noise_step = noise_step;
    cfg.surrogate_steps = surrogate_steps;
    cfg.stop_error = tau;
    cfg.warmup_error = warmup_error;
    cfg.budget = xi;
    cfg.delta_lr = delta_lr > 0.0 ? delta_lr : xi / 10.0;
    cfg.validation_fraction = validation_fraction;
    cfg.max_rounds = max_rounds;
    cfg.seed = seed;
    return cfg;
  }
  void echo(KvConfig& kv, const pue::CraftConfig& cfg) const {
    kv.set("mode", pue::mode_name(cfg.mode));
    kv.set_int("u_train", cfg.u_train);
    kv.set_int("u_perturb", cfg.u_perturb);
    kv.set_f64("noise_cap", cfg.noise_cap);
    kv.set_f64("noise_step", cfg.noise_step);
    kv.set_int("surrogate_steps", cfg.surrogate_steps);
    kv.set_f64("tau", cfg.stop_error);
    kv.set_f64("warmup_error", cfg.warmup_error);
    kv.set_f64("xi", cfg.budget);
    kv.set_f64("delta_lr", cfg.delta_lr);
    kv.set_f64("validation_fraction", cfg.validation_fraction);
    kv.set_int("max_rounds", cfg.max_rounds);
  }
};

data::BlobSpec blob_spec_from_file(const std::string& path) {
  KvConfig kv = KvConfig::parse_file(path);
  data::BlobSpec spec;
  spec.class_count = static_cast<int>(kv.get_int("class_count", spec.class_count));
  spec.input_dim = static_cast<int>(kv.get_int("input_dim", spec.input_dim));
  spec.samples_per_class =
      static_cast<int>(kv.get_int("samples_per_class", spec.samples_per_class));
  spec.cluster_spread = kv.get_f64("cluster_spread", spec.cluster_spread);
  spec.center_spread = kv.get_f64("center_spread", spec.center_spread);
  spec.seed = kv.get_u64("seed", spec.seed);
  spec.validate();
  return spec;
}

int cmd_gen_data(const std::string& spec_path, const std::string& out) {
  data::BlobSpec spec = blob_spec_from_file(spec_path);
  ensure_out_dir(out);
  auto [train_d, test_d] = data::make_blobs(spec);
  data::save_dataset(train_d, out + "/train-data");
  data::save_dataset(test_d, out + "/test-data");

  KvConfig kv;
  kv.set_int("class_count", spec.class_count);
  kv.set_int("input_dim", spec.input_dim);
  kv.set_int("samples_per_class", spec.samples_per_class);
  kv.set_f64("cluster_spread", spec.cluster_spread);
  kv.set_f64("center_spread", spec.center_spread);
  kv.set_u64("seed", spec.seed);
  kv.write_file(out + "/gen-data.cfg");

  RunManifest m = RunManifest::create(spec.seed, kv.to_text());
  m.add_artifact("config", out, "gen-data.cfg");
  m.add_artifact("train-dataset", out, "train-data");
  m.add_artifact("test-dataset", out, "test-data");
  m.save(out + "/manifest.json");
  std::cout << "wrote " << out << "/train-data (" << train_d.size() << " samples), "
            << out << "/test-data (" << test_d.size() << " samples)\n";
  return 0;
}

int cmd_craft(const std::string& data_path, const std::string& out, const CraftFlags& cf,
              const ModelFlags& mf, const TrainFlags& tf, std::uint64_t master_seed) {
  data::LabeledDataset source = data::load_dataset(data_path);
  nn::ModelSpec spec = mf.spec(source.input_dim, source.class_count);
  pue::CraftConfig cfg = cf.config(derive_seed(master_seed, "craft"));
  nn::TrainConfig tc = tf.config(cfg.seed);
  ensure_out_dir(out);

  KvConfig kv;
  cf.echo(kv, cfg);
  tf.echo(kv);
  kv.set_u64("seed", master_seed);
  kv.set("data", fs::path(data_path).filename().string());
  kv.write_file(out + "/craft.cfg");
  nn::save_model_spec(spec, out + "/model.cfg");

  RunManifest m = RunManifest::create(master_seed, kv.to_text());
  m.add_artifact("config", out, "craft.cfg");
  m.add_artifact("model-spec", out, "model.cfg");

  auto persist = [&](const pue::CraftResult& result, bool converged) {
    double final_error = result.history.empty() ? 1.0 : result.history.back().perturbed_error;
    data::save_perturbation(result.delta, out + "/delta");
    nn::save_params(result.surrogate, spec, out + "/surrogate");
    pue::save_history(result, final_error, converged, out + "/history.json");
    m.add_artifact("perturbation", out, "delta");
    m.add_artifact("surrogate", out, "surrogate");
    m.add_artifact("history", out, "history.json");
    m.save(out + "/manifest.json");
    std::cout << result.label() << " final perturbed-validation error: "
              << strfmt("%.4f", final_error) << (converged ? "" : " (did not converge)")
              << "\n";
  };

  try {
    pue::CraftResult result = pue::craft(source, spec, cfg, tc);
    persist(result, true);
  } catch (const pue::CraftNonConvergence& e) {
    persist(e.partial, false);
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return 0;
}

int cmd_train_surrogate(const std::string& data_path, const std::string& out,
                        const CraftFlags& cf, const ModelFlags& mf, const TrainFlags& tf,
                        std::uint64_t master_seed) {
  data::LabeledDataset poisoned = data::load_dataset(data_path);
  nn::ModelSpec spec = mf.spec(poisoned.input_dim, poisoned.class_count);
  pue::CraftConfig cfg = cf.config(derive_seed(master_seed, "train-surrogate"));
  nn::TrainConfig tc = tf.config(cfg.seed);
  ensure_out_dir(out);

  nn::ParamVector theta = pue::train_offline_surrogate(poisoned, spec, cfg, tc);
  nn::save_params(theta, spec, out + "/surrogate");
  nn::save_model_spec(spec, out + "/model.cfg");

  KvConfig kv;
  cf.echo(kv, cfg);
  tf.echo(kv);
  kv.set_u64("seed", master_seed);
  kv.set("data", fs::path(data_path).filename().string());
  kv.write_file(out + "/train-surrogate.cfg");

  RunManifest m = RunManifest::create(master_seed, kv.to_text());
  m.add_artifact("config", out, "train-surrogate.cfg");
  m.add_artifact("model-spec", out, "model.cfg");
  m.add_artifact("surrogate", out, "surrogate");
  m.save(out + "/manifest.json");
  std::cout << "offline surrogate training accuracy: "
            << strfmt("%.4f", nn::accuracy(theta, spec, poisoned)) << "\n";
  return 0;
}

int cmd_apply_noise(const std::string& data_path, const std::string& delta_path,
                    const std::string& out) {
  data::LabeledDataset d = data::load_dataset(data_path);
  data::ClasswisePerturbation delta = data::load_perturbation(delta_path);
  data::LabeledDataset poisoned = data::apply_perturbation(d, delta);
  ensure_out_dir(out);
  data::save_dataset(poisoned, out + "/poisoned-data");

  RunManifest m = RunManifest::create(d.seed, data_path + "\n" + delta_path);
  m.add_artifact("poisoned-dataset", out, "poisoned-data");
  m.save(out + "/manifest.json");
  std::cout << "wrote " << out << "/poisoned-data\n";
  return 0;
}

int cmd_certify(const std::string& surrogate_path, const std::string& model_path,
                const std::string& data_path, double sigma, int n, double q, double alpha,
                std::vector<double> etas, double beta, long long test_n,
                const std::string& label, const std::string& out,
                std::uint64_t master_seed) {
  nn::ModelSpec spec = nn::load_model_spec(model_path);
  nn::ParamVector theta = nn::load_params(surrogate_path, spec);
  data::LabeledDataset test = data::load_dataset(data_path);
  require(!etas.empty(), "certify needs at least one eta");

  smooth::SmoothingConfig scfg;
  scfg.sigma = sigma;
  scfg.draws = n;
  scfg.seed = derive_seed(master_seed, "certify");
  ensure_out_dir(out);

  KvConfig kv;
  kv.set_f64("sigma", sigma);
  kv.set_int("n", n);
  kv.set_f64("q", q);
  kv.set_f64("alpha", alpha);
  kv.set_u64("seed", master_seed);
  kv.set("label", label);
  if (beta > 0.0) kv.set_f64("beta", beta);
  kv.write_file(out + "/certify.cfg");

  smooth::AccuracySamples samples = smooth::sample_accuracies(theta, spec, test, scfg);
  smooth::save_samples(samples, out + "/samples.txt");

  RunManifest m = RunManifest::create(master_seed, kv.to_text());
  m.add_artifact("config", out, "certify.cfg");
  m.add_artifact("accuracy-samples", out, "samples.txt");

  const long long n_test = test_n > 0 ? test_n : test.size();
  std::vector<std::pair<std::string, cert::Certificate>> labeled;
  for (double eta : etas) {
    cert::Certificate c = cert::certify_learnability(samples, {q, eta, alpha});
    if (beta > 0.0 && !c.abstained())
      c.generalization_addend = cert::hoeffding_addend(n_test, n, beta);
    std::string name = strfmt("cert-eta%g.json", eta);
    cert::save_certificate(c, out + "/" + name);
    m.add_artifact("certificate", out, name);
    labeled.emplace_back(label, c);
    if (c.abstained())
      std::cout << strfmt("eta=%g: ABSTAIN\n", eta);
    else
      std::cout << strfmt("eta=%g: bound=%.4f (k=%d)\n", eta, *c.bound, *c.k);
  }

  report::CertTable table = report::build_table(labeled);
  write_text(out + "/certificates.csv", report::table_to_csv(table));
  m.add_artifact("table", out, "certificates.csv");
  m.save(out + "/manifest.json");
  return 0;
}

int cmd_recover(const std::string& surrogate_path, const std::string& model_path,
                const std::string& data_path, const std::string& test_path,
                std::vector<double> etas, const std::string& mode, double clean_fraction,
                int steps, double lr, const std::string& out, std::uint64_t master_seed) {
  nn::ModelSpec spec = nn::load_model_spec(model_path);
  nn::ParamVector theta = nn::load_params(surrogate_path, spec);
  data::LabeledDataset pool = data::load_dataset(data_path);
  data::LabeledDataset test = data::load_dataset(test_path);
  require(!etas.empty(), "recover needs at least one eta");
  for (std::size_t i = 1; i < etas.size(); ++i)
    require(etas[i] > etas[i - 1], "eta values must be strictly increasing");

  attack::RecoveryMode rmode;
  if (mode == "generalized")
    rmode = attack::RecoveryMode::generalized;
  else if (mode == "best-case" || mode == "best_case")
    rmode = attack::RecoveryMode::best_case;
  else
    fail("unknown recovery mode '%s' (expected generalized or best-case)", mode.c_str());

  attack::RecoveryConfig cfg;
  cfg.lr = lr;
  cfg.steps = steps;
  cfg.clean_fraction = clean_fraction;
  cfg.seed = derive_seed(master_seed, "recover");

  attack::RecoveryCurve curve;
  curve.mode = rmode;
  curve.seed = master_seed;
  for (double eta : etas) {
    double acc;
    if (rmode == attack::RecoveryMode::generalized) {
      cfg.eta_budget = eta;
      acc = attack::recovery_attack(theta, spec, pool, test, cfg).clean_test_accuracy;
    } else {
      acc = attack::estimate_true_learnability(theta, spec, test, eta, cfg);
    }
    curve.points.emplace_back(eta, acc);
    std::cout << strfmt("eta=%g: recovered accuracy %.4f\n", eta, acc);
  }

  ensure_out_dir(out);
  attack::save_recovery_curve(curve, out + "/recovery.csv");
  KvConfig kv;
  kv.set("mode", mode);
  kv.set_f64("clean_fraction", clean_fraction);
  kv.set_int("steps", steps);
  kv.set_f64("lr", lr);
  kv.set_u64("seed", master_seed);
  kv.write_file(out + "/recover.cfg");
  RunManifest m = RunManifest::create(master_seed, kv.to_text());
  m.add_artifact("config", out, "recover.cfg");
  m.add_artifact("recovery-curve", out, "recovery.csv");
  m.save(out + "/manifest.json");
  return 0;
}

int cmd_validate(const std::string& surrogate_path, const std::string& model_path,
                 const std::string& data_path, const std::string& cert_path, int trials,
                 bool interior, const std::string& out, std::uint64_t master_seed) {
  nn::ModelSpec spec = nn::load_model_spec(model_path);
  nn::ParamVector theta = nn::load_params(surrogate_path, spec);
  data::LabeledDataset test = data::load_dataset(data_path);
  cert::Certificate c = cert::load_certificate(cert_path);
  if (c.abstained()) fail("certificate '%s' abstained; nothing to validate", cert_path.c_str());

  double rate = attack::validate_certificate(theta, spec, test, c, trials,
                                             derive_seed(master_seed, "validate"), interior);
  ensure_out_dir(out);
  nlohmann::json j;
  j["m_trials"] = trials;
  j["violation_rate"] = rate;
  j["bound"] = *c.bound;
  j["q"] = c.q;
  write_text(out + "/validation.json", j.dump(2) + "\n");
  RunManifest m = RunManifest::create(master_seed, cert_path);
  m.add_artifact("validation-report", out, "validation.json");
  m.save(out + "/manifest.json");
  std::cout << strfmt("violation rate: %.4f over %d trials (bound %.4f, q %.2f)\n", rate,
                      trials, *c.bound, c.q);
  return 0;
}

int cmd_report(const std::vector<std::string>& cert_args,
               const std::vector<std::string>& offset_args, bool allow_mixed,
               const std::string& out, const std::string& svg) {
  require(!cert_args.empty(), "report needs at least one --cert label=path");
  std::vector<std::pair<std::string, cert::Certificate>> labeled;
  for (const auto& arg : cert_args) {
    auto eq = arg.find('=');
    if (eq == std::string::npos)
      fail("--cert expects label=path, got '%s'", arg.c_str());
    labeled.emplace_back(arg.substr(0, eq), cert::load_certificate(arg.substr(eq + 1)));
  }
  report::CertTable table = report::build_table(labeled, allow_mixed);
  for (const auto& arg : offset_args) {
    auto eq = arg.find('=');
    if (eq == std::string::npos)
      fail("--offset expects label=value, got '%s'", arg.c_str());
    std::string label = arg.substr(0, eq);
    bool known = false;
    for (const auto& mname : table.methods) known |= mname == label;
    if (!known) fail("--offset names unknown method '%s'", label.c_str());
    table.offsets[label] = std::strtod(arg.c_str() + eq + 1, nullptr);
  }

  ensure_out_dir(fs::path(out).parent_path().empty()
                     ? "."
                     : fs::path(out).parent_path().string());
  write_text(out, report::table_to_csv(table));
  std::cout << "wrote " << out << "\n";
  if (!svg.empty()) {
    write_text(svg, report::table_to_svg(table));
    std::cout << "wrote " << svg << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"learnability certification toolkit"};
  app.set_version_flag("--version", std::string("lcert ") + kVersion);
  app.require_subcommand(1);

  std::uint64_t master_seed = 0;

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "generate a synthetic blob dataset");
  std::string gen_spec, gen_out;
  gen->add_option("--spec", gen_spec, "blob spec config file")->required();
  gen->add_option("--out", gen_out, "output directory")->required();

  // craft
  auto* craft = app.add_subcommand("craft", "craft anti-learning noise and a surrogate");
  std::string craft_data, craft_out;
  CraftFlags craft_flags;
  ModelFlags craft_model;
  TrainFlags craft_train;
  craft->add_option("--data", craft_data, "training dataset file")->required();
  craft->add_option("--out", craft_out, "output directory")->required();
  craft->add_option("--seed", master_seed, "master seed");
  craft_flags.attach(craft, true);
  craft_model.attach(craft);
  craft_train.attach(craft);

  // train-surrogate
  auto* tsur = app.add_subcommand("train-surrogate",
                                  "fit an offline surrogate on perturbed data");
  std::string tsur_data, tsur_out;
  CraftFlags tsur_flags;
  ModelFlags tsur_model;
  TrainFlags tsur_train;
  tsur->add_option("--data", tsur_data, "perturbed dataset file")->required();
  tsur->add_option("--out", tsur_out, "output directory")->required();
  tsur->add_option("--seed", master_seed, "master seed");
  tsur_flags.attach(tsur, false);
  tsur_model.attach(tsur);
  tsur_train.attach(tsur);

  // apply-noise
  auto* apply = app.add_subcommand("apply-noise", "apply a perturbation file to a dataset");
  std::string apply_data, apply_delta, apply_out;
  apply->add_option("--data", apply_data, "dataset file")->required();
  apply->add_option("--delta", apply_delta, "perturbation file")->required();
  apply->add_option("--out", apply_out, "output directory")->required();

  // certify
  auto* certify = app.add_subcommand("certify", "certify (q, eta)-learnability");
  std::string cert_surrogate, cert_model, cert_data, cert_label = "surrogate", cert_out;
  double cert_sigma = 0.25, cert_q = 0.9, cert_alpha = 0.01, cert_beta = 0.0;
  int cert_n = 1000;
  long long cert_test_n = 0;
  std::vector<double> cert_etas;
  certify->add_option("--surrogate", cert_surrogate, "surrogate weights file")->required();
  certify->add_option("--model", cert_model, "model spec file")->required();
  certify->add_option("--data", cert_data, "clean test dataset file")->required();
  certify->add_option("--sigma", cert_sigma, "smoothing noise STD");
  certify->add_option("--n", cert_n, "Monte Carlo draws");
  certify->add_option("--q", cert_q, "guarantee probability");
  certify->add_option("--alpha", cert_alpha, "1 - confidence");
  certify->add_option("--eta", cert_etas, "certified radii")->delimiter(',')->required();
  certify->add_option("--beta", cert_beta,
                      "generalization failure probability (enables the addend)");
  certify->add_option("--test-n", cert_test_n,
                      "generalization test-set size (default: dataset size)");
  certify->add_option("--label", cert_label, "method label for the CSV");
  certify->add_option("--out", cert_out, "output directory")->required();
  certify->add_option("--seed", master_seed, "master seed");

  // recover
  auto* recover = app.add_subcommand("recover", "projected-SGD recovery attack curve");
  std::string rec_surrogate, rec_model, rec_data, rec_test, rec_mode = "generalized", rec_out;
  std::vector<double> rec_etas;
  double rec_fraction = 0.2, rec_lr = 0.01;
  int rec_steps = 400;
  recover->add_option("--surrogate", rec_surrogate, "surrogate weights file")->required();
  recover->add_option("--model", rec_model, "model spec file")->required();
  recover->add_option("--data", rec_data, "clean pool the attacker samples from")->required();
  recover->add_option("--test", rec_test, "held-out clean test dataset")->required();
  recover->add_option("--eta", rec_etas, "l2 budgets, strictly increasing")
      ->delimiter(',')
      ->required();
  recover->add_option("--mode", rec_mode, "generalized or best-case");
  recover->add_option("--clean-fraction", rec_fraction, "attacker's share of the pool");
  recover->add_option("--steps", rec_steps, "projected SGD steps");
  recover->add_option("--lr", rec_lr, "projected SGD learning rate");
  recover->add_option("--out", rec_out, "output directory")->required();
  recover->add_option("--seed", master_seed, "master seed");

  // validate
  auto* validate = app.add_subcommand("validate", "empirically stress a certificate");
  std::string val_surrogate, val_model, val_data, val_cert, val_out;
  int val_trials = 500;
  bool val_interior = false;
  validate->add_option("--surrogate", val_surrogate, "surrogate weights file")->required();
  validate->add_option("--model", val_model, "model spec file")->required();
  validate->add_option("--data", val_data, "clean test dataset file")->required();
  validate->add_option("--cert", val_cert, "certificate JSON")->required();
  validate->add_option("--trials", val_trials, "Monte Carlo trials");
  validate->add_flag("--interior", val_interior,
                     "sample |upsilon| <= eta instead of the boundary");
  validate->add_option("--out", val_out, "output directory")->required();
  validate->add_option("--seed", master_seed, "master seed");

  // report
  auto* report_cmd = app.add_subcommand("report", "merge certificates into a table");
  std::vector<std::string> rep_certs, rep_offsets;
  std::string rep_out, rep_svg;
  bool rep_allow_mixed = false;
  report_cmd->add_option("--cert", rep_certs, "label=path (repeatable)")->required();
  report_cmd->add_option("--offset", rep_offsets, "label=value reporting offset");
  report_cmd->add_flag("--allow-mixed", rep_allow_mixed,
                       "permit mixed (q, sigma, n, alpha) in one table");
  report_cmd->add_option("--out", rep_out, "output CSV path")->required();
  report_cmd->add_option("--svg", rep_svg, "optional SVG plot path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (gen->parsed()) return cmd_gen_data(gen_spec, gen_out);
    if (craft->parsed())
      return cmd_craft(craft_data, craft_out, craft_flags, craft_model, craft_train,
                       master_seed);
    if (tsur->parsed())
      return cmd_train_surrogate(tsur_data, tsur_out, tsur_flags, tsur_model, tsur_train,
                                 master_seed);
    if (apply->parsed()) return cmd_apply_noise(apply_data, apply_delta, apply_out);
    if (certify->parsed())
      return cmd_certify(cert_surrogate, cert_model, cert_data, cert_sigma, cert_n, cert_q,
                         cert_alpha, cert_etas, cert_beta, cert_test_n, cert_label, cert_out,
                         master_seed);
    if (recover->parsed())
      return cmd_recover(rec_surrogate, rec_model, rec_data, rec_test, rec_etas, rec_mode,
                         rec_fraction, rec_steps, rec_lr, rec_out, master_seed);
    if (validate->parsed())
      return cmd_validate(val_surrogate, val_model, val_data, val_cert, val_trials,
                          val_interior, val_out, master_seed);
    if (report_cmd->parsed())
      return cmd_report(rep_certs, rep_offsets, rep_allow_mixed, rep_out, rep_svg);
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
