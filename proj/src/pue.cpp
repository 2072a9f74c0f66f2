#include "lcert/pue.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "lcert/hash.hpp"
#include "lcert/rng.hpp"
#include "lcert/smoothing.hpp"

namespace lcert::pue {

const char* mode_name(CraftMode m) {
  switch (m) {
    case CraftMode::emn: return "EMN";
    case CraftMode::pue_b: return "PUE-B";
    case CraftMode::pue: return "PUE";
  }
  return "?";
}

CraftMode mode_from_name(const std::string& name) {
  std::string s;
  for (char c : name) s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (s == "emn") return CraftMode::emn;
  if (s == "pue-b" || s == "pue_b" || s == "pueb") return CraftMode::pue_b;
  if (s == "pue") return CraftMode::pue;
  fail("unknown craft mode '%s' (expected emn, pue-b, or pue)", name.c_str());
}

void CraftConfig::validate() const {
  require(u_train >= 1, "u_train must be positive");
  require(u_perturb >= 1, "u_perturb must be positive");
  require(noise_step > 0.0, "noise step s must be positive");
  require(noise_cap >= 0.0, "noise cap S must be nonnegative");
  if (noise_cap > 0.0 && noise_step > noise_cap)
    fail("noise step %g exceeds cap %g", noise_step, noise_cap);
  require(surrogate_steps >= 1, "surrogate step count M must be positive");
  require(stop_error > 0.0 && stop_error < 1.0, "stop error tau must lie in (0,1)");
  require(warmup_error > 0.0 && warmup_error <= 1.0, "warmup error must lie in (0,1]");
  require(delta_lr > 0.0, "delta step size r_p must be positive");
  require(budget > 0.0, "perturbation budget xi must be positive");
  require(validation_fraction > 0.0 && validation_fraction < 1.0,
          "validation fraction must lie in (0,1)");
  require(max_rounds >= 1, "max_rounds must be positive");
}

std::string CraftConfig::label() const {
  if (mode == CraftMode::pue) return strfmt("PUE-%d", u_perturb);
  return mode_name(mode);
}

std::string CraftResult::label() const {
  if (mode == CraftMode::pue) return strfmt("PUE-%d", u_perturb);
  return mode_name(mode);
}

namespace {

// sigma' ramp {s, 2s, ..., S}; empty when S == 0.
std::vector<double> ramp_levels(double cap, double step) {
  std::vector<double> levels;
  if (cap <= 0.0) return levels;
  for (int i = 1;; ++i) {
    double level = i * step;
    if (level > cap + 1e-12) break;
    levels.push_back(std::min(level, cap));
  }
  return levels;
}

// Effective schedule for one phase: {0} disables weight noise entirely.
std::vector<double> phase_levels(const CraftConfig& cfg, bool delta_phase, bool warmed_up) {
  const bool noise_on = warmed_up && (cfg.mode == CraftMode::pue ||
                                      (cfg.mode == CraftMode::pue_b && !delta_phase));
  if (!noise_on) return {0.0};
  std::vector<double> levels = ramp_levels(cfg.noise_cap, cfg.noise_step);
  if (levels.empty()) return {0.0};
  return levels;
}

void gather_poisoned_batch(const data::LabeledDataset& d, const data::ClasswisePerturbation& delta,
                           std::span<const int> indices, std::vector<double>& x,
                           std::vector<int>& y) {
  const int dim = d.input_dim;
  x.resize(indices.size() * static_cast<std::size_t>(dim));
  y.resize(indices.size());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    auto src = d.row(indices[r]);
    auto noise = delta.row(d.labels[indices[r]]);
    double* dst = x.data() + r * dim;
    for (int j = 0; j < dim; ++j)
      dst[j] = std::min(1.0, std::max(0.0, src[j] + noise[j]));
    y[r] = d.labels[indices[r]];
  }
}

struct BatchCursor {
  // Cycles through shuffled mini-batches of [0, n); reshuffles every epoch.
  BatchCursor(int n, int batch_size, std::uint64_t seed, std::uint64_t tag)
      : n_(n), bsz_(std::min(batch_size, n)), seed_(seed), tag_(tag) {}

  std::vector<int> next() {
    const int per_epoch = (n_ + bsz_ - 1) / bsz_;
    const int epoch = step_ / per_epoch;
    const int b = step_ % per_epoch;
    if (b == 0) reshuffle(epoch);
    ++step_;
    const int lo = b * bsz_;
    const int hi = std::min(n_, lo + bsz_);
    return {perm_.begin() + lo, perm_.begin() + hi};
  }

 private:
  void reshuffle(int epoch) {
    perm_.resize(n_);
    for (int i = 0; i < n_; ++i) perm_[i] = i;
    RandomStream rs(seed_, tag_ ^ static_cast<std::uint64_t>(epoch));
    for (int i = n_ - 1; i > 0; --i)
      std::swap(perm_[i], perm_[rs.uniform_int(i, static_cast<std::uint64_t>(i) + 1)]);
  }
  int n_, bsz_;
  std::uint64_t seed_, tag_;
  int step_ = 0;
  std::vector<int> perm_;
};

double perturbed_error(const nn::ParamVector& theta, const nn::ModelSpec& spec,
                       const data::LabeledDataset& d, const data::ClasswisePerturbation& delta) {
  return 1.0 - nn::accuracy(theta, spec, data::apply_perturbation(d, delta));
}

// Mean parameter gradient over u draws of theta + sigma'*eps, one sigma'
// level. Returns the loss averaged over draws as well.
double noisy_param_grad(const nn::ParamVector& theta, const nn::ModelSpec& spec,
                        std::span<const double> x, std::span<const int> y, double sigma,
                        int draws, std::uint64_t noise_seed, std::uint64_t& draw_counter,
                        std::vector<double>& grad_out) {
  grad_out.assign(theta.size(), 0.0);
  double loss = 0.0;
  for (int j = 0; j < draws; ++j) {
    nn::ParamVector drawn = smooth::perturb_params(theta, sigma, draw_counter++, noise_seed);
    nn::LossGrad lg = nn::loss_and_grad(drawn, spec, x, y);
    loss += lg.loss / draws;
    for (std::size_t i = 0; i < grad_out.size(); ++i) grad_out[i] += lg.wrt_params[i] / draws;
  }
  return loss;
}

// Per-class stratified split: the trailing fraction of every class forms the
// validation slice, so both splits keep all K classes.
void split_for_validation(const data::LabeledDataset& d, double fraction,
                          std::vector<int>& train_idx, std::vector<int>& val_idx) {
  std::vector<std::vector<int>> by_class(d.class_count);
  for (int i = 0; i < d.size(); ++i) by_class[d.labels[i]].push_back(i);
  for (auto& members : by_class) {
    int n_val = std::max(1, static_cast<int>(std::lround(members.size() * fraction)));
    n_val = std::min<int>(n_val, static_cast<int>(members.size()) - 1);
    if (n_val < 1) fail("class with %zu samples cannot be split for validation", members.size());
    for (std::size_t j = 0; j < members.size(); ++j) {
      if (j + n_val >= members.size())
        val_idx.push_back(members[j]);
      else
        train_idx.push_back(members[j]);
    }
  }
}

data::LabeledDataset subset(const data::LabeledDataset& d, const std::vector<int>& idx,
                            const char* tag) {
  data::LabeledDataset out;
  out.input_dim = d.input_dim;
  out.class_count = d.class_count;
  out.seed = d.seed;
  out.domain_id = d.domain_id + tag;
  out.samples.reserve(idx.size() * static_cast<std::size_t>(d.input_dim));
  out.labels.reserve(idx.size());
  for (int i : idx) {
    auto r = d.row(i);
    out.samples.insert(out.samples.end(), r.begin(), r.end());
    out.labels.push_back(d.labels[i]);
  }
  return out;
}

}  // namespace

std::uint64_t opt_step(data::ClasswisePerturbation& delta, std::span<const double> batch_x,
                       std::span<const int> batch_y, const nn::ParamVector& theta,
                       const nn::ModelSpec& spec, const std::vector<double>& sigma_levels,
                       int u_perturb, double delta_lr, std::uint64_t noise_seed,
                       std::uint64_t draw_base) {
  require(!batch_y.empty(), "opt_step needs a nonempty batch");
  require(!sigma_levels.empty(), "opt_step needs at least one sigma level");
  const int dim = delta.input_dim;
  const int rows = static_cast<int>(batch_y.size());

  std::vector<double> grad_sum(delta.rows.size(), 0.0);
  std::vector<bool> seen(delta.class_count, false);
  std::uint64_t counter = draw_base;
  for (double sigma : sigma_levels) {
    for (int j = 0; j < u_perturb; ++j) {
      nn::ParamVector drawn = smooth::perturb_params(theta, sigma, counter++, noise_seed);
      nn::LossGrad lg = nn::loss_and_grad(drawn, spec, batch_x, batch_y, true);
      for (int r = 0; r < rows; ++r) {
        const int cls = batch_y[r];
        seen[cls] = true;
        const double* g = lg.wrt_inputs.data() + static_cast<std::size_t>(r) * dim;
        double* acc = grad_sum.data() + static_cast<std::size_t>(cls) * dim;
        for (int i = 0; i < dim; ++i) {
          if (!std::isfinite(g[i])) fail_numeric("non-finite input gradient in delta update");
          acc[i] += g[i];
        }
      }
    }
  }

  for (int cls = 0; cls < delta.class_count; ++cls) {
    if (!seen[cls]) continue;
    double* row = delta.rows.data() + static_cast<std::size_t>(cls) * dim;
    const double* g = grad_sum.data() + static_cast<std::size_t>(cls) * dim;
    for (int i = 0; i < dim; ++i) {
      double step = g[i] > 0.0 ? delta_lr : (g[i] < 0.0 ? -delta_lr : 0.0);
      row[i] = std::clamp(row[i] - step, -delta.budget, delta.budget);
    }
  }
  return counter - draw_base;
}

CraftResult craft(const data::LabeledDataset& source, const nn::ModelSpec& spec,
                  const CraftConfig& cfg, const nn::TrainConfig& train_cfg) {
  cfg.validate();
  source.validate();
  spec.validate();
  if (source.input_dim != spec.input_dim())
    fail("dataset width %d does not match model input width %d", source.input_dim,
         spec.input_dim());
  if (source.class_count != spec.class_count())
    fail("dataset has %d classes but the model outputs %d", source.class_count,
         spec.class_count());
  nn::TrainConfig tc = train_cfg;
  tc.validate(source.size());

  std::vector<int> train_idx, val_idx;
  split_for_validation(source, cfg.validation_fraction, train_idx, val_idx);
  data::LabeledDataset noise_slice = subset(source, val_idx, "/noise-opt");

  data::ClasswisePerturbation delta =
      data::ClasswisePerturbation::zeros(source.class_count, source.input_dim, cfg.budget);
  nn::ParamVector theta = nn::init_params(spec, derive_seed(cfg.seed, "craft-init"));
  nn::MomentumState momentum = nn::MomentumState::zeros(theta.size());

  const std::uint64_t noise_seed = derive_seed(cfg.seed, "craft-noise");
  std::uint64_t draw_counter = 0;
  BatchCursor train_batches(source.size(), tc.batch_size, cfg.seed, 0x545241494eULL);
  BatchCursor delta_batches(noise_slice.size(), tc.batch_size, cfg.seed, 0x44454c5441ULL);

  std::vector<RoundRecord> history;
  std::vector<double> xbatch, grad;
  std::vector<int> ybatch;
  bool warmed_up = false;

  const int delta_batches_per_pass =
      (noise_slice.size() + std::min(tc.batch_size, noise_slice.size()) - 1) /
      std::min(tc.batch_size, noise_slice.size());

  for (int round = 0; round < cfg.max_rounds; ++round) {
    if (!warmed_up)
      warmed_up = perturbed_error(theta, spec, noise_slice, delta) < cfg.warmup_error;

    RoundRecord rec;
    // Surrogate phase: M mini-batch steps over the full source set.
    rec.train_sigmas = phase_levels(cfg, false, warmed_up);
    for (int m = 0; m < cfg.surrogate_steps; ++m) {
      std::vector<int> idx = train_batches.next();
      gather_poisoned_batch(source, delta, idx, xbatch, ybatch);
      for (double sigma : rec.train_sigmas) {
        double loss = noisy_param_grad(theta, spec, xbatch, ybatch, sigma, cfg.u_train,
                                       noise_seed, draw_counter, grad);
        if (!std::isfinite(loss))
          fail_numeric("craft: surrogate loss diverged in round %d (loss %.17g)", round, loss);
        auto [next, next_state] = nn::sgd_step(theta, grad, tc, momentum);
        theta = std::move(next);
        momentum = std::move(next_state);
      }
    }

    // Delta phase: one pass over the noise-optimization slice.
    rec.perturb_sigmas = phase_levels(cfg, true, warmed_up);
    for (int b = 0; b < delta_batches_per_pass; ++b) {
      std::vector<int> idx = delta_batches.next();
      gather_poisoned_batch(noise_slice, delta, idx, xbatch, ybatch);
      draw_counter += opt_step(delta, xbatch, ybatch, theta, spec, rec.perturb_sigmas,
                               cfg.u_perturb, cfg.delta_lr, noise_seed, draw_counter);
    }

    rec.perturbed_error = perturbed_error(theta, spec, noise_slice, delta);
    history.push_back(rec);
    if (rec.perturbed_error <= cfg.stop_error) {
      delta.validate();
      return CraftResult{std::move(delta), std::move(theta), std::move(history), cfg.mode,
                         cfg.u_perturb};
    }
  }

  CraftResult state{std::move(delta), std::move(theta), std::move(history), cfg.mode,
                    cfg.u_perturb};
  std::string msg =
      strfmt("craft did not reach stop error %.3g within %d rounds (last error %.3g)",
             cfg.stop_error, cfg.max_rounds, state.history.back().perturbed_error);
  throw CraftNonConvergence(msg, std::move(state));
}

nn::ParamVector train_offline_surrogate(const data::LabeledDataset& poisoned,
                                        const nn::ModelSpec& spec, const CraftConfig& cfg,
                                        const nn::TrainConfig& train_cfg) {
  cfg.validate();
  poisoned.validate();
  nn::TrainConfig tc = train_cfg;
  tc.validate(poisoned.size());

  nn::ParamVector theta = nn::init_params(spec, derive_seed(cfg.seed, "offline-init"));
  nn::MomentumState momentum = nn::MomentumState::zeros(theta.size());
  const std::uint64_t noise_seed = derive_seed(cfg.seed, "offline-noise");
  std::uint64_t draw_counter = 0;
  BatchCursor batches(poisoned.size(), tc.batch_size, cfg.seed, 0x4f46464cULL);
  const int per_epoch = (poisoned.size() + std::min(tc.batch_size, poisoned.size()) - 1) /
                        std::min(tc.batch_size, poisoned.size());

  std::vector<double> xbatch, grad;
  std::vector<int> ybatch;
  bool warmed_up = false;
  int noisy_epochs = 0;

  for (int epoch = 0; epoch < cfg.max_rounds; ++epoch) {
    if (!warmed_up) warmed_up = 1.0 - nn::accuracy(theta, spec, poisoned) < cfg.warmup_error;
    std::vector<double> levels =
        warmed_up ? ramp_levels(cfg.noise_cap, cfg.noise_step) : std::vector<double>{};
    if (levels.empty()) levels = {0.0};
    const bool noisy = warmed_up && cfg.noise_cap > 0.0;

    for (int b = 0; b < per_epoch; ++b) {
      std::vector<int> idx = batches.next();
      xbatch.resize(idx.size() * static_cast<std::size_t>(poisoned.input_dim));
      ybatch.resize(idx.size());
      for (std::size_t r = 0; r < idx.size(); ++r) {
        auto src = poisoned.row(idx[r]);
        std::copy(src.begin(), src.end(),
                  xbatch.begin() + r * static_cast<std::size_t>(poisoned.input_dim));
        ybatch[r] = poisoned.labels[idx[r]];
      }
      for (double sigma : levels) {
        double loss = noisy_param_grad(theta, spec, xbatch, ybatch, sigma, cfg.u_train,
                                       noise_seed, draw_counter, grad);
        if (!std::isfinite(loss))
          fail_numeric("offline surrogate training diverged at epoch %d (loss %.17g)", epoch, loss);
        auto [next, next_state] = nn::sgd_step(theta, grad, tc, momentum);
        theta = std::move(next);
        momentum = std::move(next_state);
      }
    }
    if (noisy) ++noisy_epochs;

    const double err = 1.0 - nn::accuracy(theta, spec, poisoned);
    const bool noise_done = cfg.noise_cap == 0.0 || noisy_epochs >= 1;
    if (err < cfg.stop_error && noise_done) return theta;
  }
  fail_numeric("offline surrogate did not reach training error %.3g within %d epochs", cfg.stop_error,
       cfg.max_rounds);
}

void save_history(const CraftResult& result, double final_error, bool converged,
                  const std::string& path) {
  nlohmann::json j;
  j["mode"] = mode_name(result.mode);
  j["label"] = result.label();
  j["u_perturb"] = result.u_perturb;
  j["converged"] = converged;
  j["final_perturbed_error"] = final_error;
  nlohmann::json rounds = nlohmann::json::array();
  for (const auto& r : result.history) {
    nlohmann::json jr;
    jr["perturbed_error"] = r.perturbed_error;
    jr["train_sigmas"] = r.train_sigmas;
    jr["perturb_sigmas"] = r.perturb_sigmas;
    rounds.push_back(jr);
  }
  j["rounds"] = rounds;
  std::ofstream out(path);
  if (!out) fail("cannot open '%s' for writing", path.c_str());
  out << j.dump(2) << "\n";
  if (!out) fail("write to '%s' failed", path.c_str());
}

}  // namespace lcert::pue
