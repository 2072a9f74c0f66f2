#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lcert/certify.hpp"
#include "lcert/dataset.hpp"
#include "lcert/model.hpp"

namespace lcert::attack {

struct RecoveryConfig {
  double eta_budget = 0.0;     // l2 radius around the poisoned weights
  double lr = 0.01;
  int steps = 400;
  double clean_fraction = 0.2; // share of the clean pool the attacker sees
  std::uint64_t seed = 0;

  void validate() const;
};

enum class RecoveryMode { generalized, best_case };
const char* recovery_mode_name(RecoveryMode m);

struct RecoveryCurve {
  std::vector<std::pair<double, double>> points;  // (eta, recovered accuracy)
  RecoveryMode mode = RecoveryMode::generalized;
  std::uint64_t seed = 0;
};

/// l2 projection of theta onto the ball of radius eta around center.
nn::ParamVector project_l2(const nn::ParamVector& theta, const nn::ParamVector& center,
                           double eta);

struct RecoveryOutcome {
  nn::ParamVector weights;
  double clean_test_accuracy = 0.0;
};

/// Projected SGD fine-tuning on the attacker's clean subset; the weights
/// never leave the eta ball, including between steps. Accuracy is measured
/// on the held-out clean test set.
RecoveryOutcome recovery_attack(const nn::ParamVector& surrogate, const nn::ModelSpec& spec,
                                const data::LabeledDataset& clean_pool,
                                const data::LabeledDataset& clean_test,
                                const RecoveryConfig& cfg);

/// Best-case protocol: fine-tune directly on the test set inside the eta
/// ball and report accuracy there. Feeds the tightness gap.
double estimate_true_learnability(const nn::ParamVector& surrogate, const nn::ModelSpec& spec,
                                  const data::LabeledDataset& test, double eta,
                                  const RecoveryConfig& cfg);

/// Draws a uniform direction on the unit sphere in R^d.
std::vector<double> sphere_direction(std::size_t d, std::uint64_t seed, std::uint64_t trial);

/// Stress-tests a certificate: m trials of theta* = theta + eta*u + eps with
/// u uniform on the sphere (boundary of the certified mean shift) and
/// eps ~ N(0, sigma^2 I). Returns the fraction of draws whose clean accuracy
/// exceeds the certified bound. interior=true samples |upsilon| <= eta
/// instead of the boundary.
double validate_certificate(const nn::ParamVector& surrogate, const nn::ModelSpec& spec,
                            const data::LabeledDataset& test, const cert::Certificate& cert,
                            int m_trials, std::uint64_t seed, bool interior = false,
                            unsigned threads = 0);

void save_recovery_curve(const RecoveryCurve& curve, const std::string& path);

}  // namespace lcert::attack
