#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lcert/common.hpp"
#include "lcert/dataset.hpp"
#include "lcert/model.hpp"

namespace lcert::pue {

/// Crafting modes. emn never perturbs weights; pue_b perturbs them only in
/// surrogate updates; pue perturbs them in both surrogate and noise updates.
enum class CraftMode { emn, pue_b, pue };

const char* mode_name(CraftMode m);
CraftMode mode_from_name(const std::string& name);

struct CraftConfig {
  CraftMode mode = CraftMode::pue;
  int u_train = 5;             // noise draws per surrogate update
  int u_perturb = 10;          // noise draws per delta update (1 -> PUE-1, 10 -> PUE-10)
  double noise_cap = 0.25;     // S: top of the train-time noise ramp
  double noise_step = 0.05;    // s: ramp increment
  int surrogate_steps = 10;    // M: surrogate mini-batch steps per round
  double stop_error = 0.1;     // tau: perturbed-validation error target
  double warmup_error = 0.5;   // weight noise activates below this error
  double budget = 8.0 / 255.0; // xi: per-class linf cap on delta
  double delta_lr = 8.0 / 2550.0;  // r_p = xi/10
  double validation_fraction = 0.2;
  int max_rounds = 200;
  std::uint64_t seed = 0;

  void validate() const;
  /// Paper-style run label: EMN, PUE-B, or PUE-<u_perturb>.
  std::string label() const;
};

struct RoundRecord {
  double perturbed_error = 1.0;        // error on the perturbed validation slice
  std::vector<double> train_sigmas;    // sigma' schedule used for surrogate steps
  std::vector<double> perturb_sigmas;  // sigma' schedule used for delta steps
};

struct CraftResult {
  data::ClasswisePerturbation delta;
  nn::ParamVector surrogate;
  std::vector<RoundRecord> history;
  CraftMode mode = CraftMode::pue;
  int u_perturb = 0;

  std::string label() const;
};

/// Raised after max_rounds without reaching the stop error; carries the
/// state so callers can still persist the history.
struct CraftNonConvergence : NumericError {
  CraftNonConvergence(const std::string& msg, CraftResult state)
      : NumericError(msg), partial(std::move(state)) {}
  CraftResult partial;
};

/// One sign-step update of delta on a batch. For every class present in the
/// batch, the input-gradient of the cross-entropy is averaged over the
/// sigma' levels and u_perturb weight-noise draws per level, then
/// delta[class] <- clip_{±xi}(delta[class] - r_p * sign(mean grad)).
/// Classes absent from the batch are untouched. Returns the number of noise
/// draws consumed so callers can advance their draw counter.
std::uint64_t opt_step(data::ClasswisePerturbation& delta, std::span<const double> batch_x,
                       std::span<const int> batch_y, const nn::ParamVector& theta,
                       const nn::ModelSpec& spec, const std::vector<double>& sigma_levels,
                       int u_perturb, double delta_lr, std::uint64_t noise_seed,
                       std::uint64_t draw_base);

/// Alternating min-min crafting of delta and the online surrogate.
CraftResult craft(const data::LabeledDataset& source, const nn::ModelSpec& spec,
                  const CraftConfig& cfg, const nn::TrainConfig& train_cfg);

/// Surrogate fit on an already perturbed dataset with the same ramped
/// weight-noise augmentation; stops once the training error drops below
/// cfg.stop_error after at least one full noise-augmented epoch.
nn::ParamVector train_offline_surrogate(const data::LabeledDataset& poisoned,
                                        const nn::ModelSpec& spec, const CraftConfig& cfg,
                                        const nn::TrainConfig& train_cfg);

void save_history(const CraftResult& result, double final_error, bool converged,
                  const std::string& path);

}  // namespace lcert::pue
