#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lcert/dataset.hpp"

namespace lcert::nn {

enum class Activation { relu, tanh };

const char* activation_name(Activation a);
Activation activation_from_name(const std::string& name);

/// Fully-connected classifier architecture. The whole parameter set is one
/// flat vector so weight-space noise and l2 projection stay trivial.
struct ModelSpec {
  std::vector<int> layer_widths;  // input I, hidden sizes..., output K
  Activation activation = Activation::relu;

  int input_dim() const { return layer_widths.front(); }
  int class_count() const { return layer_widths.back(); }
  int layer_count() const { return static_cast<int>(layer_widths.size()) - 1; }
  std::size_t param_count() const;
  /// Offset of layer l's weight block; biases follow the weights.
  std::size_t layer_offset(int l) const;
  std::uint64_t hash() const;
  void validate() const;

  static ModelSpec mlp(int input_dim, std::vector<int> hidden, int class_count,
                       Activation act = Activation::relu);
};

/// Flat weight vector theta in R^d. Entries are checked finite on
/// construction and the length is fixed for the vector's lifetime.
class ParamVector {
 public:
  explicit ParamVector(std::vector<double> values);
  static ParamVector zeros(std::size_t d) { return ParamVector(std::vector<double>(d, 0.0)); }

  std::size_t size() const { return values_.size(); }
  const std::vector<double>& values() const { return values_; }
  const double* data() const { return values_.data(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double l2_norm() const;
  std::uint64_t digest() const;

 private:
  std::vector<double> values_;
};

/// Digest binding surrogate weights to their architecture; recorded in
/// accuracy-sample records and certificates.
std::uint64_t surrogate_digest(const ParamVector& theta, const ModelSpec& spec);

struct TrainConfig {
  double learning_rate = 0.05;
  double momentum = 0.9;
  int batch_size = 64;
  int steps = 1500;
  double weight_decay = 5e-4;
  std::uint64_t seed = 0;

  void validate(int dataset_size) const;
};

struct MomentumState {
  std::vector<double> velocity;
  static MomentumState zeros(std::size_t d) { return {std::vector<double>(d, 0.0)}; }
};

struct LossGrad {
  double loss = 0.0;
  std::vector<double> wrt_params;  // length d
  std::vector<double> wrt_inputs;  // rows x I, filled only when requested
};

/// Logits for a batch (rows x K, row-major). x entries must lie in [0,1].
std::vector<double> forward(const ParamVector& theta, const ModelSpec& spec,
                            std::span<const double> x, int rows);

/// Argmax over logits; ties resolve to the lowest class index.
int predict_one(std::span<const double> logits);
std::vector<int> predict(const ParamVector& theta, const ModelSpec& spec,
                         std::span<const double> x, int rows);

double accuracy(const ParamVector& theta, const ModelSpec& spec, const data::LabeledDataset& d);

/// Mean softmax cross-entropy over the batch plus gradients.
LossGrad loss_and_grad(const ParamVector& theta, const ModelSpec& spec,
                       std::span<const double> x, std::span<const int> y,
                       bool want_input_grad = false);

/// Classical momentum update: v <- m*v + (g + wd*theta); theta <- theta - r*v.
/// Pure in its inputs; throws on non-finite gradient entries.
std::pair<ParamVector, MomentumState> sgd_step(const ParamVector& theta,
                                               const std::vector<double>& grad,
                                               const TrainConfig& cfg,
                                               const MomentumState& state);

/// Glorot-uniform initialization drawn from the run seed; biases start at 0.
ParamVector init_params(const ModelSpec& spec, std::uint64_t seed);

/// Deterministic mini-batch SGD. Batch order is a pure function of the seed;
/// identical seeds give bit-identical weights. Throws with the step index if
/// the loss stops being finite.
ParamVector train(const ModelSpec& spec, const data::LabeledDataset& d, const TrainConfig& cfg);

void save_params(const ParamVector& theta, const ModelSpec& spec, const std::string& path);
/// Loads weights; the stored spec hash must match the supplied spec.
ParamVector load_params(const std::string& path, const ModelSpec& spec);

void save_model_spec(const ModelSpec& spec, const std::string& path);
ModelSpec load_model_spec(const std::string& path);

}  // namespace lcert::nn
