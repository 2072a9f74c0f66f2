#include "lcert/certify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "lcert/common.hpp"
#include "lcert/hash.hpp"
#include "lcert/normal.hpp"

namespace lcert::cert {

void CertRequest::validate() const {
  require(q > 0.0 && q < 1.0, "q must lie strictly in (0,1)");
  require(eta >= 0.0, "eta must be nonnegative");
  require(alpha > 0.0 && alpha < 1.0, "alpha must lie strictly in (0,1)");
}

double q_bar(double q, double eta, double sigma) {
  if (!(q > 0.0 && q < 1.0))
    fail("q_bar: q=%.17g must lie strictly in (0,1); the inverse CDF is unbounded at 0 and 1", q);
  require(sigma > 0.0, "q_bar: sigma must be positive");
  require(eta >= 0.0, "q_bar: eta must be nonnegative");
  if (eta == 0.0) return q;  // exact identity, no CDF round trip
  return normal_cdf(normal_quantile(q) + eta / sigma);
}

double binomial_cdf(int m, int n, double p) {
  require(n >= 1, "binomial_cdf: n must be positive");
  require(p > 0.0 && p < 1.0, "binomial_cdf: p must lie in (0,1)");
  if (m < 0) return 0.0;
  if (m >= n) return 1.0;
  // Streaming log-sum-exp over i = 0..m; terms are exact up to lgamma's
  // ~1e-15 relative error, which is far inside the comparison margins here.
  const double logp = std::log(p);
  const double log1mp = std::log1p(-p);
  const double lgn = std::lgamma(n + 1.0);
  long double acc = 0.0L;
  double maxlog = -std::numeric_limits<double>::infinity();
  std::vector<double> logs(static_cast<std::size_t>(m) + 1);
  for (int i = 0; i <= m; ++i) {
    double lt = lgn - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0) + i * logp +
                (n - i) * log1mp;
    logs[i] = lt;
    maxlog = std::max(maxlog, lt);
  }
  for (int i = 0; i <= m; ++i) acc += expl(static_cast<long double>(logs[i]) - maxlog);
  long double res = expl(static_cast<long double>(maxlog)) * acc;
  return static_cast<double>(std::min(1.0L, res));
}

std::optional<int> quantile_upper_bound(int n, double alpha, double sigma, double eta,
                                        double q) {
  require(n >= 1, "quantile_upper_bound: n must be positive");
  require(alpha > 0.0 && alpha < 1.0, "quantile_upper_bound: alpha must lie in (0,1)");
  const double qb = q_bar(q, eta, sigma);
  // Even the last order statistic fails when q_bar^n > alpha.
  if (qb >= 1.0 || static_cast<double>(n) * std::log(qb) > std::log(alpha)) return std::nullopt;

  const int lo = std::max(1, static_cast<int>(std::ceil(n * qb)));
  for (int k = lo; k <= n; ++k) {
    if (binomial_cdf(k - 1, n, qb) >= 1.0 - alpha) return k;
  }
  return std::nullopt;  // unreachable given the closed-form gate; kept for safety
}

Certificate certify_learnability(const smooth::AccuracySamples& samples,
                                 const CertRequest& req) {
  samples.validate();
  req.validate();
  Certificate cert;
  cert.q = req.q;
  cert.eta = req.eta;
  cert.sigma = samples.config.sigma;
  cert.n = samples.n();
  cert.alpha = req.alpha;
  cert.q_bar = q_bar(req.q, req.eta, samples.config.sigma);
  cert.seed = samples.config.seed;
  cert.surrogate_digest = samples.surrogate_digest;
  cert.dataset_id = samples.dataset_id;
  if (auto k = quantile_upper_bound(cert.n, req.alpha, cert.sigma, req.eta, req.q)) {
    cert.k = *k;
    cert.bound = samples.values[static_cast<std::size_t>(*k) - 1];
  }
  return cert;
}

double max_certifiable_eta(double q, double sigma, int n, double alpha) {
  require(q > 0.0 && q < 1.0, "max_certifiable_eta: q must lie in (0,1)");
  require(sigma > 0.0, "max_certifiable_eta: sigma must be positive");
  require(n >= 1, "max_certifiable_eta: n must be positive");
  require(alpha > 0.0 && alpha < 1.0, "max_certifiable_eta: alpha must lie in (0,1)");
  const double alpha_root = std::exp(std::log(alpha) / n);
  return sigma * (normal_quantile(alpha_root) - normal_quantile(q));
}

double hoeffding_addend(long long n_test, int n, double beta) {
  require(n_test >= 1, "hoeffding_addend: test set size must be positive");
  require(n >= 1, "hoeffding_addend: draw count must be positive");
  require(beta > 0.0 && beta < 1.0, "hoeffding_addend: beta must lie in (0,1)");
  return std::sqrt(std::log(2.0 * n / beta) / (2.0 * static_cast<double>(n_test)));
}

double hoeffding_addend_1n(long long n_test, int n, double beta) {
  require(n_test >= 1, "hoeffding_addend: test set size must be positive");
  require(n >= 1, "hoeffding_addend: draw count must be positive");
  require(beta > 0.0 && beta < 1.0, "hoeffding_addend: beta must lie in (0,1)");
  return std::sqrt(std::log(2.0 * n / beta) / static_cast<double>(n_test));
}

double hoeffding_generalization(double t, long long n_test, int n, double beta) {
  return t + hoeffding_addend(n_test, n, beta);
}

double pac_bayes_lower_bound(double mean_acc, double theta_norm, double sigma,
                             long long n_test, double alpha) {
  if (n_test < 2) fail("pac_bayes_lower_bound: needs N >= 2, got %lld", n_test);
  require(sigma > 0.0, "pac_bayes_lower_bound: sigma must be positive");
  require(alpha > 0.0 && alpha < 1.0, "pac_bayes_lower_bound: alpha must lie in (0,1)");
  require(theta_norm >= 0.0, "pac_bayes_lower_bound: weight norm must be nonnegative");
  const double kl = theta_norm * theta_norm / (sigma * sigma);
  const double penalty =
      std::sqrt((kl + std::log(static_cast<double>(n_test) / alpha)) / (2.0 * (n_test - 1)));
  return mean_acc - penalty;
}

TightnessGap tightness_gap(double true_learnability_estimate, const Certificate& cert) {
  if (cert.abstained()) fail("tightness gap is undefined for an abstained certificate");
  TightnessGap g;
  g.value = true_learnability_estimate - *cert.bound;
  g.underestimate = g.value < 0.0;
  return g;
}

std::string certificate_to_json(const Certificate& cert) {
  nlohmann::json j;
  j["q"] = cert.q;
  j["eta"] = cert.eta;
  j["sigma"] = cert.sigma;
  j["n"] = cert.n;
  j["alpha"] = cert.alpha;
  j["q_bar"] = cert.q_bar;
  if (cert.abstained()) {
    j["abstain"] = true;
  } else {
    j["k"] = *cert.k;
    j["bound"] = *cert.bound;
  }
  if (cert.generalization_addend) j["generalization_addend"] = *cert.generalization_addend;
  j["seed"] = cert.seed;
  j["surrogate_digest"] = hex_digest(cert.surrogate_digest);
  j["dataset_id"] = cert.dataset_id;
  if (cert.offset) j["offset"] = *cert.offset;
  return j.dump(2) + "\n";
}

Certificate certificate_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  Certificate c;
  c.q = j.at("q").get<double>();
  c.eta = j.at("eta").get<double>();
  c.sigma = j.at("sigma").get<double>();
  c.n = j.at("n").get<int>();
  c.alpha = j.at("alpha").get<double>();
  c.q_bar = j.at("q_bar").get<double>();
  if (!j.value("abstain", false)) {
    c.k = j.at("k").get<int>();
    c.bound = j.at("bound").get<double>();
  }
  if (j.contains("generalization_addend"))
    c.generalization_addend = j["generalization_addend"].get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.surrogate_digest = std::strtoull(j.at("surrogate_digest").get<std::string>().c_str(),
                                     nullptr, 16);
  c.dataset_id = j.at("dataset_id").get<std::string>();
  if (j.contains("offset")) c.offset = j["offset"].get<double>();
  return c;
}

void save_certificate(const Certificate& cert, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail("cannot open '%s' for writing", path.c_str());
  out << certificate_to_json(cert);
  if (!out) fail("write to '%s' failed", path.c_str());
}

Certificate load_certificate(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open '%s' for reading", path.c_str());
  std::stringstream ss;
  ss << in.rdbuf();
  return certificate_from_json(ss.str());
}

}  // namespace lcert::cert
