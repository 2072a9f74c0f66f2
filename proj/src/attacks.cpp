#include "lcert/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "lcert/common.hpp"
#include "lcert/hash.hpp"
#include "lcert/parallel.hpp"
#include "lcert/rng.hpp"
#include "lcert/smoothing.hpp"

namespace lcert::attack {

void RecoveryConfig::validate() const {
  require(eta_budget >= 0.0, "eta budget must be nonnegative");
  require(lr > 0.0, "learning rate must be positive");
  require(steps >= 1, "step count must be positive");
  require(clean_fraction > 0.0 && clean_fraction <= 1.0, "clean fraction must lie in (0,1]");
}

const char* recovery_mode_name(RecoveryMode m) {
  return m == RecoveryMode::generalized ? "generalized" : "best_case";
}

nn::ParamVector project_l2(const nn::ParamVector& theta, const nn::ParamVector& center,
                           double eta) {
  if (theta.size() != center.size())
    fail("projection length mismatch: %zu vs %zu", theta.size(), center.size());
  require(eta >= 0.0, "projection radius must be nonnegative");
  double dist2 = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    double d = theta[i] - center[i];
    dist2 += d * d;
  }
  double dist = std::sqrt(dist2);
  // The slack keeps re-projection of an already projected point a no-op.
  if (dist <= eta * (1.0 + 1e-12)) return theta;
  const double scale = dist == 0.0 ? 0.0 : eta / dist;
  std::vector<double> out(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i)
    out[i] = center[i] + scale * (theta[i] - center[i]);
  return nn::ParamVector(std::move(out));
}

namespace {

// Deterministic attacker subset: a seeded shuffle of the pool, truncated to
// the clean fraction. Stratification is not required; the pool is shuffled
// globally the way an attacker scraping data would sample it.
data::LabeledDataset attacker_subset(const data::LabeledDataset& pool, double fraction,
                                     std::uint64_t seed) {
  const int n = pool.size();
  int take = std::max(1, static_cast<int>(std::lround(n * fraction)));
  take = std::min(take, n);
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  RandomStream rs(seed, 0x535542534554ULL);
  for (int i = n - 1; i > 0; --i)
    std::swap(perm[i], perm[rs.uniform_int(i, static_cast<std::uint64_t>(i) + 1)]);

  data::LabeledDataset out;
  out.input_dim = pool.input_dim;
  out.class_count = pool.class_count;
  out.seed = pool.seed;
  out.domain_id = pool.domain_id + "/attacker";
  for (int j = 0; j < take; ++j) {
    auto r = pool.row(perm[j]);
    out.samples.insert(out.samples.end(), r.begin(), r.end());
    out.labels.push_back(pool.labels[perm[j]]);
  }
  return out;
}

nn::ParamVector projected_sgd(const nn::ParamVector& start, const nn::ModelSpec& spec,
                              const data::LabeledDataset& train_on, const RecoveryConfig& cfg) {
  if (cfg.eta_budget == 0.0) return start;  // zero-radius ball

  nn::ParamVector theta = start;
  const int n = train_on.size();
  const int bsz = std::min(64, n);
  const int per_epoch = (n + bsz - 1) / bsz;
  std::vector<int> perm(n);
  std::vector<double> xbatch;
  std::vector<int> ybatch;

  int epoch = -1;
  for (int step = 0; step < cfg.steps; ++step) {
    const int e = step / per_epoch;
    if (e != epoch) {
      epoch = e;
      for (int i = 0; i < n; ++i) perm[i] = i;
      RandomStream rs(cfg.seed, 0x5245434f56ULL ^ static_cast<std::uint64_t>(e));
      for (int i = n - 1; i > 0; --i)
        std::swap(perm[i], perm[rs.uniform_int(i, static_cast<std::uint64_t>(i) + 1)]);
    }
    const int b = step % per_epoch;
    const int lo = b * bsz;
    const int hi = std::min(n, lo + bsz);
    const int rows = hi - lo;
    xbatch.resize(static_cast<std::size_t>(rows) * train_on.input_dim);
    ybatch.resize(rows);
    for (int r = 0; r < rows; ++r) {
      auto src = train_on.row(perm[lo + r]);
      std::copy(src.begin(), src.end(),
                xbatch.begin() + static_cast<std::size_t>(r) * train_on.input_dim);
      ybatch[r] = train_on.labels[perm[lo + r]];
    }
    nn::LossGrad lg = nn::loss_and_grad(theta, spec, xbatch, ybatch);
    if (!std::isfinite(lg.loss))
      fail_numeric("recovery attack diverged at step %d (loss %.17g)", step, lg.loss);
    std::vector<double> next = theta.values();
    for (std::size_t i = 0; i < next.size(); ++i) next[i] -= cfg.lr * lg.wrt_params[i];
    theta = project_l2(nn::ParamVector(std::move(next)), start, cfg.eta_budget);
  }
  return theta;
}

}  // namespace

RecoveryOutcome recovery_attack(const nn::ParamVector& surrogate, const nn::ModelSpec& spec,
                                const data::LabeledDataset& clean_pool,
                                const data::LabeledDataset& clean_test,
                                const RecoveryConfig& cfg) {
  cfg.validate();
  data::LabeledDataset subset = attacker_subset(clean_pool, cfg.clean_fraction, cfg.seed);
  nn::ParamVector recovered = projected_sgd(surrogate, spec, subset, cfg);
  return {recovered, nn::accuracy(recovered, spec, clean_test)};
}

double estimate_true_learnability(const nn::ParamVector& surrogate, const nn::ModelSpec& spec,
                                  const data::LabeledDataset& test, double eta,
                                  const RecoveryConfig& cfg) {
  RecoveryConfig best = cfg;
  best.eta_budget = eta;
  best.clean_fraction = 1.0;
  best.validate();
  nn::ParamVector recovered = projected_sgd(surrogate, spec, test, best);
  return nn::accuracy(recovered, spec, test);
}

std::vector<double> sphere_direction(std::size_t d, std::uint64_t seed, std::uint64_t trial) {
  require(d >= 1, "sphere direction needs d >= 1");
  RandomStream rs(seed, 0x535048455245ULL ^ trial);
  std::vector<double> u(d);
  double norm2 = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    u[i] = rs.gaussian(i);
    norm2 += u[i] * u[i];
  }
  // A zero-norm Gaussian draw has probability zero but would poison the
  // scale; regenerate from the continuation of the stream.
  std::uint64_t extra = d;
  while (norm2 == 0.0) {
    norm2 = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      u[i] = rs.gaussian(extra + i);
      norm2 += u[i] * u[i];
    }
    extra += d;
  }
  const double inv = 1.0 / std::sqrt(norm2);
  for (double& v : u) v *= inv;
  return u;
}

double validate_certificate(const nn::ParamVector& surrogate, const nn::ModelSpec& spec,
                            const data::LabeledDataset& test, const cert::Certificate& cert,
                            int m_trials, std::uint64_t seed, bool interior, unsigned threads) {
  if (cert.abstained()) fail("cannot validate an abstained certificate");
  require(m_trials >= 1, "validation needs at least one trial");
  const double bound = *cert.bound;
  const std::size_t d = surrogate.size();
  const std::uint64_t radius_seed = derive_seed(seed, "validate-radius");

  std::vector<int> violations(m_trials, 0);
  parallel_for(
      static_cast<std::size_t>(m_trials),
      [&](std::size_t trial) {
        std::vector<double> u = sphere_direction(d, seed, trial);
        double radius = cert.eta;
        if (interior && cert.eta > 0.0) {
          // |upsilon| <= eta with density uniform over the ball.
          RandomStream rs(radius_seed, trial);
          radius = cert.eta * std::pow(rs.uniform(0), 1.0 / static_cast<double>(d));
        }
        std::vector<double> weights = surrogate.values();
        for (std::size_t i = 0; i < d; ++i) weights[i] += radius * u[i];
        nn::ParamVector shifted(std::move(weights));
        nn::ParamVector drawn = smooth::perturb_params(
            shifted, cert.sigma, trial, derive_seed(seed, "validate-smoothing"));
        double acc = nn::accuracy(drawn, spec, test);
        violations[trial] = acc > bound ? 1 : 0;
      },
      threads);
  long total = 0;
  for (int v : violations) total += v;
  return static_cast<double>(total) / m_trials;
}

void save_recovery_curve(const RecoveryCurve& curve, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail("cannot open '%s' for writing", path.c_str());
  out << "eta,accuracy,mode,seed\n";
  for (const auto& [eta, acc] : curve.points)
    out << strfmt("%g,%.17g,%s,%llu\n", eta, acc, recovery_mode_name(curve.mode),
                  static_cast<unsigned long long>(curve.seed));
  if (!out) fail("write to '%s' failed", path.c_str());
}

}  // namespace lcert::attack
