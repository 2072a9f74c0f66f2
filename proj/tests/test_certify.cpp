#include <doctest.h>

#include <cmath>

#include "lcert/certify.hpp"
#include "lcert/rng.hpp"
#include "oracles.hpp"

using namespace lcert;
using namespace lcert::cert;

namespace {

smooth::AccuracySamples make_samples(std::vector<double> values, double sigma = 0.25,
                                     std::uint64_t seed = 7) {
  smooth::AccuracySamples s;
  s.config.sigma = sigma;
  s.config.draws = static_cast<int>(values.size());
  s.config.seed = seed;
  s.values = std::move(values);
  s.surrogate_digest = 0x1234;
  s.dataset_id = "test#00";
  return s;
}

std::vector<double> uniform_grid(int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = static_cast<double>(i + 1) / n;
  return v;
}

}  // namespace

TEST_CASE("q_bar identities and reference values") {
  CHECK(q_bar(0.9, 0.0, 0.25) == 0.9);  // eta=0 is exact
  CHECK(q_bar(0.31, 0.0, 2.0) == 0.31);
  // 40-digit reference computations.
  CHECK(q_bar(0.9, 0.25, 0.25) == doctest::Approx(0.98874208548739523462).epsilon(1e-12));
  CHECK(q_bar(0.9, 1.0, 0.8) == doctest::Approx(0.99432204406719018392).epsilon(1e-12));
  CHECK(q_bar(0.9, 0.35, 0.25) == doctest::Approx(0.99633591902654959724).epsilon(1e-12));
}

TEST_CASE("q_bar rejects degenerate q") {
  CHECK_THROWS_AS(q_bar(0.0, 0.1, 0.25), Error);
  CHECK_THROWS_AS(q_bar(1.0, 0.1, 0.25), Error);
  CHECK_THROWS_AS(q_bar(0.9, 0.1, 0.0), Error);
  CHECK_THROWS_AS(q_bar(0.9, -0.1, 0.25), Error);
}

TEST_CASE("q_bar is monotone in eta and q") {
  double prev = 0.0;
  for (double eta = 0.0; eta <= 1.0; eta += 0.05) {
    double v = q_bar(0.9, eta, 0.25);
    CHECK(v >= prev);
    prev = v;
  }
  prev = 0.0;
  for (double q = 0.05; q < 1.0; q += 0.05) {
    double v = q_bar(q, 0.3, 0.5);
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("binomial cdf matches the recurrence oracle") {
  struct Case {
    int m, n;
    double p;
  };
  const Case cases[] = {{5, 10, 0.5},    {0, 10, 0.5},     {9, 10, 0.5},
                        {921, 1000, 0.9}, {950, 1000, 0.9}, {997, 1000, 0.996},
                        {14, 20, 0.5},    {19, 20, 0.8},    {42, 100, 0.37}};
  for (const auto& c : cases) {
    long double ref = oracle::binomial_cdf_ld(c.m, c.n, c.p);
    CHECK(binomial_cdf(c.m, c.n, c.p) ==
          doctest::Approx(static_cast<double>(ref)).epsilon(1e-12));
  }
  CHECK(binomial_cdf(-1, 10, 0.5) == 0.0);
  CHECK(binomial_cdf(10, 10, 0.5) == 1.0);
}

TEST_CASE("quantile upper bound: frozen oracle indices") {
  // smallest k in [ceil(n*q_bar), n] with BinCDF(k-1; n, q_bar) >= 1-alpha,
  // values fixed ahead of the implementation with an exact binomial CDF.
  auto k = quantile_upper_bound(1000, 0.01, 0.25, 0.0, 0.9);
  REQUIRE(k.has_value());
  CHECK(*k == 922);

  // q_bar ~ 0.99634 so q_bar^1000 ~ 0.0255 > alpha: abstain.
  CHECK(!quantile_upper_bound(1000, 0.01, 0.25, 0.35, 0.9).has_value());

  // Single draw, q_bar = 0.3: coverage 1 - 0.3 = 0.7 >= 0.5.
  auto k1 = quantile_upper_bound(1, 0.5, 0.25, 0.0, 0.3);
  REQUIRE(k1.has_value());
  CHECK(*k1 == 1);

  // n=20 frozen values.
  auto k20 = quantile_upper_bound(20, 0.05, 1.0, 0.0, 0.5);
  REQUIRE(k20.has_value());
  CHECK(*k20 == 15);
  auto k20b = quantile_upper_bound(20, 0.05, 1.0, 0.0, 0.8);
  REQUIRE(k20b.has_value());
  CHECK(*k20b == 20);
  CHECK(!quantile_upper_bound(20, 0.05, 1.0, 0.0, 0.9).has_value());
}

TEST_CASE("abstention happens exactly when q_bar^n > alpha") {
  RandomStream rs(99, 0);
  std::uint64_t idx = 0;
  for (int trial = 0; trial < 200; ++trial) {
    int n = 1 + static_cast<int>(rs.uniform_int(idx++, 2000));
    double alpha = 0.001 + 0.3 * rs.uniform(idx++);
    double q = 0.05 + 0.9 * rs.uniform(idx++);
    double sigma = 0.1 + rs.uniform(idx++);
    double eta = rs.uniform(idx++) * 0.5;
    double qb = q_bar(q, eta, sigma);
    bool abstains = !quantile_upper_bound(n, alpha, sigma, eta, q).has_value();
    bool should_abstain = n * std::log(qb) > std::log(alpha);
    CHECK(abstains == should_abstain);
  }
}

TEST_CASE("returned index stays within [ceil(n q_bar), n] and covers") {
  RandomStream rs(100, 0);
  std::uint64_t idx = 0;
  for (int trial = 0; trial < 100; ++trial) {
    int n = 5 + static_cast<int>(rs.uniform_int(idx++, 500));
    double alpha = 0.01 + 0.2 * rs.uniform(idx++);
    double q = 0.1 + 0.8 * rs.uniform(idx++);
    auto k = quantile_upper_bound(n, alpha, 0.5, 0.0, q);
    if (!k.has_value()) continue;
    CHECK(*k >= static_cast<int>(std::ceil(n * q)));
    CHECK(*k <= n);
    CHECK(binomial_cdf(*k - 1, n, q) >= 1.0 - alpha);
    if (*k > static_cast<int>(std::ceil(n * q)))
      CHECK(binomial_cdf(*k - 2, n, q) < 1.0 - alpha);
  }
}

TEST_CASE("certify_learnability composes the pieces") {
  CertRequest req{0.9, 0.0, 0.01};

  SUBCASE("constant samples give the constant") {
    auto s = make_samples(std::vector<double>(1000, 0.10));
    Certificate c = certify_learnability(s, req);
    REQUIRE(!c.abstained());
    CHECK(*c.bound == 0.10);
    CHECK(c.q_bar == 0.9);
    CHECK(c.n == 1000);
    CHECK(c.sigma == 0.25);
    CHECK(c.surrogate_digest == 0x1234);
  }

  SUBCASE("uniform grid picks the oracle order statistic") {
    auto s = make_samples(uniform_grid(1000));
    Certificate c = certify_learnability(s, req);
    REQUIRE(!c.abstained());
    CHECK(*c.k == 922);
    CHECK(*c.bound == doctest::Approx(0.922).epsilon(1e-15));
  }

  SUBCASE("bound grows with eta until abstention") {
    auto s = make_samples(uniform_grid(1000));
    double prev = 0.0;
    bool abstained = false;
    for (double eta : {0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4}) {
      Certificate c = certify_learnability(s, CertRequest{0.9, eta, 0.01});
      if (c.abstained()) {
        abstained = true;
        continue;
      }
      CHECK(!abstained);  // no certificate after the first abstention
      CHECK(*c.bound >= prev);
      prev = *c.bound;
    }
    CHECK(abstained);
  }

  SUBCASE("abstention propagates into the certificate") {
    auto s = make_samples(uniform_grid(1000));
    Certificate c = certify_learnability(s, CertRequest{0.9, 0.35, 0.01});
    CHECK(c.abstained());
    CHECK(!c.bound.has_value());
  }
}

TEST_CASE("max certifiable eta: values, boundary consistency, linearity") {
  double e1 = max_certifiable_eta(0.9, 0.25, 1000, 0.01);
  CHECK(e1 == doctest::Approx(0.33084589406674145).epsilon(1e-10));
  double e2 = max_certifiable_eta(0.9, 0.8, 1000, 0.01);
  CHECK(e2 == doctest::Approx(1.0587068610135727).epsilon(1e-10));
  // sigma doubled doubles eta_max exactly (same quantile difference).
  CHECK(max_certifiable_eta(0.9, 0.5, 1000, 0.01) == doctest::Approx(2 * e1).epsilon(1e-13));

  // Just inside certifies, just outside abstains.
  CHECK(quantile_upper_bound(1000, 0.01, 0.25, e1 - 1e-9, 0.9).has_value());
  CHECK(!quantile_upper_bound(1000, 0.01, 0.25, e1 + 1e-9, 0.9).has_value());
}

TEST_CASE("hoeffding addends") {
  CHECK(hoeffding_addend(5000, 1000, 0.01) ==
        doctest::Approx(0.0349371902784557).epsilon(1e-12));
  CHECK(hoeffding_addend_1n(5000, 1000, 0.01) ==
        doctest::Approx(0.0494086483230015).epsilon(1e-12));
  CHECK(hoeffding_generalization(0.13, 5000, 1000, 0.01) ==
        doctest::Approx(0.13 + 0.0349371902784557).epsilon(1e-12));
  // Huge test sets shrink the addend away.
  CHECK(hoeffding_addend(1000000000000LL, 1000, 0.01) < 1e-5);
  // Halving beta strictly increases the addend.
  CHECK(hoeffding_addend(5000, 1000, 0.005) > hoeffding_addend(5000, 1000, 0.01));
}

TEST_CASE("pac-bayes lower bound") {
  CHECK(pac_bayes_lower_bound(0.5, 0.0, 0.25, 5000, 0.01) ==
        doctest::Approx(0.46377157417844470).epsilon(1e-12));
  // Penalty rises with the weight norm, falls with sigma and N.
  double base = 0.5 - pac_bayes_lower_bound(0.5, 3.0, 0.25, 5000, 0.01);
  CHECK(0.5 - pac_bayes_lower_bound(0.5, 6.0, 0.25, 5000, 0.01) > base);
  CHECK(0.5 - pac_bayes_lower_bound(0.5, 3.0, 0.5, 5000, 0.01) < base);
  CHECK(0.5 - pac_bayes_lower_bound(0.5, 3.0, 0.25, 20000, 0.01) < base);
  // sigma -> infinity leaves only the ln(N/alpha) term.
  double limit = std::sqrt(std::log(5000.0 / 0.01) / (2.0 * 4999.0));
  CHECK(0.5 - pac_bayes_lower_bound(0.5, 3.0, 1e9, 5000, 0.01) ==
        doctest::Approx(limit).epsilon(1e-9));
  CHECK_THROWS_AS(pac_bayes_lower_bound(0.5, 1.0, 0.25, 1, 0.01), Error);
}

TEST_CASE("tightness gap") {
  auto s = make_samples(std::vector<double>(100, 0.1298));
  Certificate c = certify_learnability(s, CertRequest{0.9, 0.0, 0.01});
  REQUIRE(!c.abstained());

  auto zero = tightness_gap(*c.bound, c);
  CHECK(zero.value == 0.0);
  CHECK(!zero.underestimate);

  auto gap = tightness_gap(0.1531, c);
  CHECK(gap.value == doctest::Approx(0.0233).epsilon(1e-12));
  CHECK(!gap.underestimate);

  auto under = tightness_gap(0.10, c);
  CHECK(under.value < 0.0);
  CHECK(under.underestimate);

  Certificate abstained = certify_learnability(s, CertRequest{0.9, 10.0, 0.01});
  REQUIRE(abstained.abstained());
  CHECK_THROWS_AS(tightness_gap(0.5, abstained), Error);
}

TEST_CASE("certificate json round trip") {
  auto s = make_samples(uniform_grid(1000));
  Certificate c = certify_learnability(s, CertRequest{0.9, 0.1, 0.01});
  c.generalization_addend = 0.0349371902784557;
  c.offset = -0.0068;
  std::string js = certificate_to_json(c);
  Certificate back = certificate_from_json(js);
  CHECK(back.q == c.q);
  CHECK(back.eta == c.eta);
  CHECK(back.sigma == c.sigma);
  CHECK(back.n == c.n);
  CHECK(back.alpha == c.alpha);
  CHECK(back.q_bar == c.q_bar);
  CHECK(back.k == c.k);
  CHECK(back.bound == c.bound);
  CHECK(back.generalization_addend == c.generalization_addend);
  CHECK(back.seed == c.seed);
  CHECK(back.surrogate_digest == c.surrogate_digest);
  CHECK(back.dataset_id == c.dataset_id);
  CHECK(back.offset == c.offset);

  Certificate ab = certify_learnability(s, CertRequest{0.9, 0.35, 0.01});
  std::string abjs = certificate_to_json(ab);
  CHECK(abjs.find("\"abstain\"") != std::string::npos);
  CHECK(abjs.find("\"bound\"") == std::string::npos);
  Certificate abback = certificate_from_json(abjs);
  CHECK(abback.abstained());
}
