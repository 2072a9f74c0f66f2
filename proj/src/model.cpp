#include "lcert/model.hpp"

#include <algorithm>
#include <cmath>

#include "lcert/binio.hpp"
#include "lcert/common.hpp"
#include "lcert/hash.hpp"
#include "lcert/kvconfig.hpp"
#include "lcert/rng.hpp"

namespace lcert::nn {

const char* activation_name(Activation a) {
  return a == Activation::relu ? "relu" : "tanh";
}

Activation activation_from_name(const std::string& name) {
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  fail("unknown activation '%s' (expected relu or tanh)", name.c_str());
}

std::size_t ModelSpec::param_count() const {
  std::size_t d = 0;
  for (int l = 0; l < layer_count(); ++l)
    d += static_cast<std::size_t>(layer_widths[l]) * layer_widths[l + 1] + layer_widths[l + 1];
  return d;
}

std::size_t ModelSpec::layer_offset(int l) const {
  std::size_t off = 0;
  for (int i = 0; i < l; ++i)
    off += static_cast<std::size_t>(layer_widths[i]) * layer_widths[i + 1] + layer_widths[i + 1];
  return off;
}

std::uint64_t ModelSpec::hash() const {
  Fnv1a h;
  h.update("lcert-model-spec");
  h.update_vec(layer_widths);
  h.update_u64(static_cast<std::uint64_t>(activation));
  return h.digest();
}

void ModelSpec::validate() const {
  require(layer_widths.size() >= 2, "model needs at least input and output widths");
  for (int w : layer_widths)
    if (w <= 0) fail("layer width %d must be positive", w);
}

ModelSpec ModelSpec::mlp(int input_dim, std::vector<int> hidden, int class_count,
                         Activation act) {
  ModelSpec spec;
  spec.layer_widths.push_back(input_dim);
  for (int h : hidden) spec.layer_widths.push_back(h);
  spec.layer_widths.push_back(class_count);
  spec.activation = act;
  spec.validate();
  return spec;
}

ParamVector::ParamVector(std::vector<double> values) : values_(std::move(values)) {
  for (double v : values_)
    if (!std::isfinite(v)) fail("parameter vector contains non-finite entry %.17g", v);
}

double ParamVector::l2_norm() const {
  double s = 0.0;
  for (double v : values_) s += v * v;
  return std::sqrt(s);
}

std::uint64_t ParamVector::digest() const {
  Fnv1a h;
  h.update("lcert-params");
  h.update_vec(values_);
  return h.digest();
}

std::uint64_t surrogate_digest(const ParamVector& theta, const ModelSpec& spec) {
  Fnv1a h;
  h.update_u64(spec.hash());
  h.update_u64(theta.digest());
  return h.digest();
}

void TrainConfig::validate(int dataset_size) const {
  require(learning_rate > 0.0, "learning rate must be positive");
  require(momentum >= 0.0 && momentum < 1.0, "momentum must lie in [0,1)");
  require(batch_size >= 1, "batch size must be positive");
  if (batch_size > dataset_size)
    fail("batch size %d exceeds dataset size %d", batch_size, dataset_size);
  require(steps >= 0, "step count must be nonnegative");
  require(weight_decay >= 0.0, "weight decay must be nonnegative");
}

namespace {

void check_theta(const ParamVector& theta, const ModelSpec& spec) {
  if (theta.size() != spec.param_count())
    fail("parameter vector has length %zu but the model spec needs %zu", theta.size(),
         spec.param_count());
}

struct ForwardScratch {
  // Post-activation values per layer, activations[0] aliases the input batch.
  std::vector<std::vector<double>> activations;
};

// z = a W^T + b for one layer; W is out x in, row-major.
void dense_forward(const double* w, const double* b, const double* a, int rows, int in, int out,
                   double* z) {
  for (int r = 0; r < rows; ++r) {
    const double* ar = a + static_cast<std::size_t>(r) * in;
    double* zr = z + static_cast<std::size_t>(r) * out;
    for (int o = 0; o < out; ++o) {
      const double* wo = w + static_cast<std::size_t>(o) * in;
      double acc = b[o];
      for (int i = 0; i < in; ++i) acc += wo[i] * ar[i];
      zr[o] = acc;
    }
  }
}

void apply_activation(Activation act, std::vector<double>& z) {
  if (act == Activation::relu) {
    for (double& v : z) v = v > 0.0 ? v : 0.0;
  } else {
    for (double& v : z) v = std::tanh(v);
  }
}

// Runs the network over a batch, leaving per-layer activations in scratch.
// Returns a reference to the logits (last layer, no activation applied).
const std::vector<double>& run_forward(const ParamVector& theta, const ModelSpec& spec,
                                       std::span<const double> x, int rows,
                                       ForwardScratch& scratch) {
  check_theta(theta, spec);
  require(rows >= 1, "batch must be nonempty");
  if (x.size() != static_cast<std::size_t>(rows) * spec.input_dim())
    fail("batch has %zu values but %d rows x %d inputs expects %zu", x.size(), rows,
         spec.input_dim(), static_cast<std::size_t>(rows) * spec.input_dim());

  const int layers = spec.layer_count();
  scratch.activations.resize(layers + 1);
  scratch.activations[0].assign(x.begin(), x.end());
  const double* params = theta.data();
  for (int l = 0; l < layers; ++l) {
    const int in = spec.layer_widths[l];
    const int out = spec.layer_widths[l + 1];
    const double* w = params + spec.layer_offset(l);
    const double* b = w + static_cast<std::size_t>(in) * out;
    auto& z = scratch.activations[l + 1];
    z.resize(static_cast<std::size_t>(rows) * out);
    dense_forward(w, b, scratch.activations[l].data(), rows, in, out, z.data());
    if (l + 1 < layers) apply_activation(spec.activation, z);
  }
  return scratch.activations[layers];
}

}  // namespace

std::vector<double> forward(const ParamVector& theta, const ModelSpec& spec,
                            std::span<const double> x, int rows) {
  ForwardScratch scratch;
  return run_forward(theta, spec, x, rows, scratch);
}

int predict_one(std::span<const double> logits) {
  int best = 0;
  for (int k = 1; k < static_cast<int>(logits.size()); ++k)
    if (logits[k] > logits[best]) best = k;
  return best;
}

std::vector<int> predict(const ParamVector& theta, const ModelSpec& spec,
                         std::span<const double> x, int rows) {
  ForwardScratch scratch;
  const auto& logits = run_forward(theta, spec, x, rows, scratch);
  const int k = spec.class_count();
  std::vector<int> out(rows);
  for (int r = 0; r < rows; ++r)
    out[r] = predict_one({logits.data() + static_cast<std::size_t>(r) * k,
                          static_cast<std::size_t>(k)});
  return out;
}

double accuracy(const ParamVector& theta, const ModelSpec& spec, const data::LabeledDataset& d) {
  require(d.size() >= 1, "accuracy needs a nonempty dataset");
  if (d.input_dim != spec.input_dim())
    fail("dataset width %d does not match model input width %d", d.input_dim, spec.input_dim());
  ForwardScratch scratch;
  const auto& logits = run_forward(theta, spec, d.samples, d.size(), scratch);
  const int k = spec.class_count();
  long correct = 0;
  for (int r = 0; r < d.size(); ++r) {
    int pred = predict_one({logits.data() + static_cast<std::size_t>(r) * k,
                            static_cast<std::size_t>(k)});
    if (pred == d.labels[r]) ++correct;
  }
  return static_cast<double>(correct) / d.size();
}

LossGrad loss_and_grad(const ParamVector& theta, const ModelSpec& spec,
                       std::span<const double> x, std::span<const int> y,
                       bool want_input_grad) {
  ForwardScratch scratch;
  const int rows = static_cast<int>(y.size());
  const auto& logits = run_forward(theta, spec, x, rows, scratch);
  const int layers = spec.layer_count();
  const int k = spec.class_count();
  const double* params = theta.data();

  LossGrad out;
  out.wrt_params.assign(theta.size(), 0.0);

  // delta holds dLoss/dz for the current layer (mean loss, so 1/rows here).
  std::vector<double> delta(static_cast<std::size_t>(rows) * k);
  double loss = 0.0;
  const double inv_rows = 1.0 / rows;
  for (int r = 0; r < rows; ++r) {
    if (y[r] < 0 || y[r] >= k) fail("label %d outside [0,%d)", y[r], k);
    const double* zr = logits.data() + static_cast<std::size_t>(r) * k;
    double zmax = *std::max_element(zr, zr + k);
    double sum = 0.0;
    for (int c = 0; c < k; ++c) sum += std::exp(zr[c] - zmax);
    double lse = zmax + std::log(sum);
    loss += (lse - zr[y[r]]) * inv_rows;
    double* dr = delta.data() + static_cast<std::size_t>(r) * k;
    for (int c = 0; c < k; ++c) dr[c] = std::exp(zr[c] - lse) * inv_rows;
    dr[y[r]] -= inv_rows;
  }
  out.loss = loss;

  std::vector<double> next_delta;
  for (int l = layers - 1; l >= 0; --l) {
    const int in = spec.layer_widths[l];
    const int outw = spec.layer_widths[l + 1];
    const double* a = scratch.activations[l].data();
    const double* w = params + spec.layer_offset(l);
    double* gw = out.wrt_params.data() + spec.layer_offset(l);
    double* gb = gw + static_cast<std::size_t>(in) * outw;

    for (int r = 0; r < rows; ++r) {
      const double* dr = delta.data() + static_cast<std::size_t>(r) * outw;
      const double* ar = a + static_cast<std::size_t>(r) * in;
      for (int o = 0; o < outw; ++o) {
        const double d = dr[o];
        if (d == 0.0) continue;
        double* gwo = gw + static_cast<std::size_t>(o) * in;
        for (int i = 0; i < in; ++i) gwo[i] += d * ar[i];
        gb[o] += d;
      }
    }

    const bool need_da = l > 0 || want_input_grad;
    if (!need_da) break;
    next_delta.assign(static_cast<std::size_t>(rows) * in, 0.0);
    for (int r = 0; r < rows; ++r) {
      const double* dr = delta.data() + static_cast<std::size_t>(r) * outw;
      double* nr = next_delta.data() + static_cast<std::size_t>(r) * in;
      for (int o = 0; o < outw; ++o) {
        const double d = dr[o];
        if (d == 0.0) continue;
        const double* wo = w + static_cast<std::size_t>(o) * in;
        for (int i = 0; i < in; ++i) nr[i] += d * wo[i];
      }
      if (l > 0) {
        // Chain through the activation of layer l (post-activation stored).
        const double* al = scratch.activations[l].data() + static_cast<std::size_t>(r) * in;
        if (spec.activation == Activation::relu) {
          for (int i = 0; i < in; ++i) nr[i] = al[i] > 0.0 ? nr[i] : 0.0;
        } else {
          for (int i = 0; i < in; ++i) nr[i] *= 1.0 - al[i] * al[i];
        }
      }
    }
    delta.swap(next_delta);
  }
  if (want_input_grad) out.wrt_inputs = std::move(delta);
  return out;
}

std::pair<ParamVector, MomentumState> sgd_step(const ParamVector& theta,
                                               const std::vector<double>& grad,
                                               const TrainConfig& cfg,
                                               const MomentumState& state) {
  if (grad.size() != theta.size())
    fail("gradient length %zu does not match parameter length %zu", grad.size(), theta.size());
  require(state.velocity.size() == theta.size(), "momentum state length mismatch");
  for (double g : grad)
    if (!std::isfinite(g)) fail_numeric("non-finite gradient entry %.17g; aborting update", g);

  std::vector<double> v = state.velocity;
  std::vector<double> t = theta.values();
  for (std::size_t i = 0; i < t.size(); ++i) {
    v[i] = cfg.momentum * v[i] + grad[i] + cfg.weight_decay * t[i];
    t[i] -= cfg.learning_rate * v[i];
  }
  return {ParamVector(std::move(t)), MomentumState{std::move(v)}};
}

ParamVector init_params(const ModelSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::vector<double> v(spec.param_count(), 0.0);
  for (int l = 0; l < spec.layer_count(); ++l) {
    const int in = spec.layer_widths[l];
    const int out = spec.layer_widths[l + 1];
    const double lim = std::sqrt(6.0 / (in + out));
    RandomStream rs(seed, 0x494e4954ULL + l);  // per-layer substream
    double* w = v.data() + spec.layer_offset(l);
    for (std::size_t j = 0; j < static_cast<std::size_t>(in) * out; ++j)
      w[j] = lim * (2.0 * rs.uniform(j) - 1.0);
  }
  return ParamVector(std::move(v));
}

ParamVector train(const ModelSpec& spec, const data::LabeledDataset& d, const TrainConfig& cfg) {
  spec.validate();
  require(d.size() >= 1, "training dataset must be nonempty");
  cfg.validate(d.size());
  if (d.input_dim != spec.input_dim())
    fail("dataset width %d does not match model input width %d", d.input_dim, spec.input_dim());

  ParamVector theta = init_params(spec, cfg.seed);
  MomentumState state = MomentumState::zeros(theta.size());

  const int n = d.size();
  const int bsz = cfg.batch_size;
  const int batches_per_epoch = (n + bsz - 1) / bsz;
  std::vector<int> perm(n);
  std::vector<double> xbatch;
  std::vector<int> ybatch;

  int epoch = -1;
  for (int step = 0; step < cfg.steps; ++step) {
    const int e = step / batches_per_epoch;
    if (e != epoch) {
      epoch = e;
      for (int i = 0; i < n; ++i) perm[i] = i;
      RandomStream shuffle(cfg.seed, 0x53485546ULL + e);
      for (int i = n - 1; i > 0; --i)
        std::swap(perm[i], perm[shuffle.uniform_int(i, static_cast<std::uint64_t>(i) + 1)]);
    }
    const int b = step % batches_per_epoch;
    const int lo = b * bsz;
    const int hi = std::min(n, lo + bsz);
    const int rows = hi - lo;
    xbatch.resize(static_cast<std::size_t>(rows) * d.input_dim);
    ybatch.resize(rows);
    for (int r = 0; r < rows; ++r) {
      auto src = d.row(perm[lo + r]);
      std::copy(src.begin(), src.end(), xbatch.begin() + static_cast<std::size_t>(r) * d.input_dim);
      ybatch[r] = d.labels[perm[lo + r]];
    }
    LossGrad lg = loss_and_grad(theta, spec, xbatch, ybatch);
    if (!std::isfinite(lg.loss)) fail_numeric("training diverged at step %d (loss %.17g)", step, lg.loss);
    auto [next, next_state] = sgd_step(theta, lg.wrt_params, cfg, state);
    theta = std::move(next);
    state = std::move(next_state);
  }
  return theta;
}

void save_params(const ParamVector& theta, const ModelSpec& spec, const std::string& path) {
  check_theta(theta, spec);
  BinWriter w(path);
  w.magic("LCPV");
  w.u32(1);  // version
  w.u64(theta.size());
  w.u64(spec.hash());
  w.f64s(theta.values());
  w.close();
}

ParamVector load_params(const std::string& path, const ModelSpec& spec) {
  BinReader r(path);
  r.expect_magic("LCPV");
  std::uint32_t version = r.u32();
  if (version != 1) fail("'%s': unsupported parameter file version %u", path.c_str(), version);
  std::uint64_t d = r.u64();
  std::uint64_t stored_hash = r.u64();
  if (stored_hash != spec.hash())
    fail("'%s': model spec hash mismatch (file %s, expected %s)", path.c_str(),
         hex_digest(stored_hash).c_str(), hex_digest(spec.hash()).c_str());
  if (d != spec.param_count())
    fail("'%s': parameter count %llu does not match spec's %zu", path.c_str(),
         static_cast<unsigned long long>(d), spec.param_count());
  std::vector<double> v = r.f64s(d);
  r.expect_eof();
  return ParamVector(std::move(v));
}

void save_model_spec(const ModelSpec& spec, const std::string& path) {
  spec.validate();
  KvConfig kv;
  std::string widths;
  for (std::size_t i = 0; i < spec.layer_widths.size(); ++i)
    widths += (i ? "," : "") + std::to_string(spec.layer_widths[i]);
  kv.set("layer_widths", widths);
  kv.set("activation", activation_name(spec.activation));
  kv.write_file(path);
}

ModelSpec load_model_spec(const std::string& path) {
  KvConfig kv = KvConfig::parse_file(path);
  ModelSpec spec;
  spec.layer_widths = kv.get_int_list("layer_widths");
  spec.activation = activation_from_name(kv.get_str("activation", "relu"));
  spec.validate();
  return spec;
}

}  // namespace lcert::nn
