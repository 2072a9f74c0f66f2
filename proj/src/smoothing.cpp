#include "lcert/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>

#include "lcert/common.hpp"
#include "lcert/hash.hpp"
#include "lcert/kvconfig.hpp"
#include "lcert/parallel.hpp"
#include "lcert/rng.hpp"

namespace lcert::smooth {

namespace {
// Stream-id tag separating smoothing draws from other consumers of a seed.
constexpr std::uint64_t kDrawTag = 0x50455254555242ULL;
}  // namespace

void SmoothingConfig::validate() const {
  // sigma = 0 is the degenerate schedule where every draw returns the
  // surrogate itself; certification proper still demands sigma > 0.
  require(sigma >= 0.0, "smoothing sigma must be nonnegative");
  require(draws >= 1, "smoothing needs at least one draw");
}

void AccuracySamples::validate() const {
  require(!values.empty(), "accuracy samples must be nonempty");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] >= 0.0 && values[i] <= 1.0))
      fail("accuracy sample %.17g outside [0,1]", values[i]);
    if (i > 0 && values[i] < values[i - 1]) fail("accuracy samples are not sorted");
  }
  require(static_cast<int>(values.size()) == config.draws,
          "sample count does not match the configured draw count");
}

nn::ParamVector perturb_params(const nn::ParamVector& theta, double sigma,
                               std::uint64_t draw_index, std::uint64_t seed) {
  require(sigma >= 0.0, "sigma must be nonnegative");
  if (sigma == 0.0) return theta;
  RandomStream rs(seed, kDrawTag ^ draw_index);
  std::vector<double> v = theta.values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += sigma * rs.gaussian(i);
  return nn::ParamVector(std::move(v));
}

AccuracySamples sample_accuracies(const nn::ParamVector& theta, const nn::ModelSpec& spec,
                                  const data::LabeledDataset& d, const SmoothingConfig& cfg,
                                  unsigned threads) {
  cfg.validate();
  AccuracySamples out;
  out.config = cfg;
  out.surrogate_digest = nn::surrogate_digest(theta, spec);
  out.dataset_id = d.id();
  out.values.assign(cfg.draws, 0.0);
  parallel_for(
      static_cast<std::size_t>(cfg.draws),
      [&](std::size_t i) {
        nn::ParamVector drawn = perturb_params(theta, cfg.sigma, i, cfg.seed);
        out.values[i] = nn::accuracy(drawn, spec, d);
      },
      threads);
  std::sort(out.values.begin(), out.values.end());
  out.validate();
  return out;
}

double empirical_qps(const AccuracySamples& samples, double q) {
  samples.validate();
  if (!(q > 0.0 && q < 1.0)) fail("quantile level q=%.17g must lie in (0,1)", q);
  const int n = samples.n();
  int k = static_cast<int>(std::ceil(n * q));
  k = std::max(1, std::min(n, k));
  return samples.values[k - 1];
}

void save_samples(const AccuracySamples& samples, const std::string& path) {
  samples.validate();
  std::ofstream out(path);
  if (!out) fail("cannot open '%s' for writing", path.c_str());
  out << "sigma = " << strfmt("%.17g", samples.config.sigma) << "\n";
  out << "n = " << samples.config.draws << "\n";
  out << "seed = " << samples.config.seed << "\n";
  out << "surrogate_digest = " << hex_digest(samples.surrogate_digest) << "\n";
  out << "dataset_id = " << samples.dataset_id << "\n";
  out << "values:\n";
  for (double v : samples.values) out << strfmt("%.17g", v) << "\n";
  if (!out) fail("write to '%s' failed", path.c_str());
}

AccuracySamples load_samples(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open '%s' for reading", path.c_str());
  AccuracySamples s;
  std::string header;
  std::string line;
  while (std::getline(in, line)) {
    if (line == "values:") break;
    header += line + "\n";
  }
  auto kv = KvConfig::parse_text(header, path);
  s.config.sigma = kv.get_f64("sigma");
  s.config.draws = static_cast<int>(kv.get_int("n"));
  s.config.seed = kv.get_u64("seed", 0);
  std::string digest = kv.get_str("surrogate_digest");
  s.surrogate_digest = std::strtoull(digest.c_str(), nullptr, 16);
  s.dataset_id = kv.get_str("dataset_id");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    s.values.push_back(std::strtod(line.c_str(), nullptr));
  }
  s.validate();
  return s;
}

}  // namespace lcert::smooth
