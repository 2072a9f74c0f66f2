#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lcert/common.hpp"

namespace lcert::data {

/// Labeled samples with entries in [0,1]. Immutable after construction by
/// convention: every transformation returns a new dataset.
struct LabeledDataset {
  int input_dim = 0;              // I
  int class_count = 0;            // K
  std::vector<double> samples;    // N x I, row-major
  std::vector<int> labels;        // length N, values in [0, K)
  std::string domain_id;          // names the generating distribution
  std::uint64_t seed = 0;         // generator seed, recorded in the file header

  int size() const { return static_cast<int>(labels.size()); }
  std::span<const double> row(int i) const {
    return {samples.data() + static_cast<std::size_t>(i) * input_dim,
            static_cast<std::size_t>(input_dim)};
  }
  void validate() const;
  std::uint64_t digest() const;
  /// domain_id plus content digest; identifies the dataset in certificates.
  std::string id() const;
};

/// Class-wise additive noise: one row per label, each within the linf budget.
struct ClasswisePerturbation {
  int class_count = 0;
  int input_dim = 0;
  std::vector<double> rows;  // K x I, row-major
  double budget = 0.0;       // xi

  std::span<const double> row(int k) const {
    return {rows.data() + static_cast<std::size_t>(k) * input_dim,
            static_cast<std::size_t>(input_dim)};
  }
  static ClasswisePerturbation zeros(int class_count, int input_dim, double budget);
  void validate() const;
  std::uint64_t digest() const;
};

/// Synthetic Gaussian-cluster benchmark generator parameters.
struct BlobSpec {
  int class_count = 10;        // K
  int input_dim = 64;          // I
  int samples_per_class = 200; // training split; test split is a quarter of it
  double cluster_spread = 0.08;
  double center_spread = 0.18; // half-width of the box centers are drawn from
  std::uint64_t seed = 0;

  void validate() const;
  std::string domain_id() const;
};

/// Draws K Gaussian clusters clipped to [0,1] and returns disjoint
/// (train, test) splits. Pure function of the spec.
std::pair<LabeledDataset, LabeledDataset> make_blobs(const BlobSpec& spec);

/// x -> clip_[0,1](x + delta[label]); labels unchanged, input not mutated.
LabeledDataset apply_perturbation(const LabeledDataset& d, const ClasswisePerturbation& delta);

void save_dataset(const LabeledDataset& d, const std::string& path);
LabeledDataset load_dataset(const std::string& path);
void save_perturbation(const ClasswisePerturbation& p, const std::string& path);
ClasswisePerturbation load_perturbation(const std::string& path);

}  // namespace lcert::data
