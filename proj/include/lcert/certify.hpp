#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "lcert/smoothing.hpp"

namespace lcert::cert {

struct CertRequest {
  double q = 0.9;      // guarantee probability
  double eta = 0.0;    // certified parametric radius (l2 on the mean shift)
  double alpha = 0.01; // 1 - confidence

  void validate() const;
};

/// Full certification record. Absent k/bound means the certification
/// abstained: no order-statistic index reaches the required confidence.
struct Certificate {
  double q = 0.0;
  double eta = 0.0;
  double sigma = 0.0;
  int n = 0;
  double alpha = 0.0;
  double q_bar = 0.0;
  std::optional<int> k;          // 1-based order-statistic index
  std::optional<double> bound;   // t = a_k
  std::optional<double> generalization_addend;
  std::uint64_t seed = 0;
  std::uint64_t surrogate_digest = 0;
  std::string dataset_id;
  std::optional<double> offset;  // reporting-only correction, never mutates bound

  bool abstained() const { return !k.has_value(); }
};

/// Phi(Phi^{-1}(q) + eta/sigma): the guarantee level that must hold at the
/// shifted mean for the q-quantile bound to transfer across the eta-ball.
double q_bar(double q, double eta, double sigma);

/// Exact Binomial(n, p) CDF evaluated at m, log-space summation.
double binomial_cdf(int m, int n, double p);

/// Smallest 1-based k in [ceil(n*q_bar), n] with
/// Pr[Binomial(n, q_bar) <= k-1] >= 1-alpha; nullopt when even k=n fails
/// (equivalently q_bar^n > alpha).
std::optional<int> quantile_upper_bound(int n, double alpha, double sigma, double eta, double q);

Certificate certify_learnability(const smooth::AccuracySamples& samples, const CertRequest& req);

/// Closed form of the abstention boundary: the largest certifiable eta at
/// the given q, sigma, n, alpha. Negative means even eta=0 abstains.
double max_certifiable_eta(double q, double sigma, int n, double alpha);

/// Hoeffding addend sqrt(log(2n/beta) / (2*n_test)) with the union bound
/// over the n draws.
double hoeffding_addend(long long n_test, int n, double beta);
/// Variant with 1/n_test inside the sqrt; kept alongside the primary form
/// because published summaries quote this one.
double hoeffding_addend_1n(long long n_test, int n, double beta);
/// t plus the primary addend: the generalization learnability bound.
double hoeffding_generalization(double t, long long n_test, int n, double beta);

/// PAC-Bayes lower bound on expected clean-domain accuracy under the
/// smoothing noise: mean_acc - sqrt((|theta|^2/sigma^2 + ln(N/alpha)) / (2(N-1))).
double pac_bayes_lower_bound(double mean_acc, double theta_norm, double sigma,
                             long long n_test, double alpha);

struct TightnessGap {
  double value = 0.0;        // estimate - certified bound
  bool underestimate = false;  // set when the empirical estimate fell below the bound
};

TightnessGap tightness_gap(double true_learnability_estimate, const Certificate& cert);

std::string certificate_to_json(const Certificate& cert);
Certificate certificate_from_json(const std::string& text);
void save_certificate(const Certificate& cert, const std::string& path);
Certificate load_certificate(const std::string& path);

}  // namespace lcert::cert
