#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lcert/dataset.hpp"
#include "lcert/model.hpp"

namespace lcert::smooth {

struct SmoothingConfig {
  double sigma = 0.25;      // smoothing noise STD
  int draws = 1000;         // n
  std::uint64_t seed = 0;

  void validate() const;
};

/// Sorted Monte Carlo accuracies of weight-perturbed classifiers; the
/// empirical substrate every certificate is computed from.
struct AccuracySamples {
  std::vector<double> values;  // nondecreasing, in [0,1]
  SmoothingConfig config;
  std::uint64_t surrogate_digest = 0;
  std::string dataset_id;

  int n() const { return static_cast<int>(values.size()); }
  void validate() const;
};

/// theta + sigma * eps with eps ~ N(0, I), drawn from the (seed, draw_index)
/// substream: draw j is the same whether evaluated serially or in parallel.
nn::ParamVector perturb_params(const nn::ParamVector& theta, double sigma,
                               std::uint64_t draw_index, std::uint64_t seed);

/// n accuracy draws around the surrogate, sorted ascending.
AccuracySamples sample_accuracies(const nn::ParamVector& theta, const nn::ModelSpec& spec,
                                  const data::LabeledDataset& d, const SmoothingConfig& cfg,
                                  unsigned threads = 0);

/// Empirical quantile a_ceil(n*q) (1-based), the smallest order statistic
/// whose empirical CDF reaches q.
double empirical_qps(const AccuracySamples& samples, double q);

/// Line-oriented record: header keys then one value per line at 17
/// significant digits.
void save_samples(const AccuracySamples& samples, const std::string& path);
AccuracySamples load_samples(const std::string& path);

}  // namespace lcert::smooth
