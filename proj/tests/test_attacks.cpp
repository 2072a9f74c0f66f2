#include <doctest.h>

#include <cmath>
#include <fstream>
#include <tuple>

#include "lcert/attacks.hpp"
#include "lcert/rng.hpp"
#include "lcert/smoothing.hpp"

using namespace lcert;
using namespace lcert::attack;

namespace {

struct Toy {
  nn::ModelSpec spec = nn::ModelSpec::mlp(8, {16}, 3);
  data::LabeledDataset train, test;
  nn::ParamVector trained;

  Toy() : trained(nn::ParamVector::zeros(1)) {
    data::BlobSpec bs;
    bs.class_count = 3;
    bs.input_dim = 8;
    bs.samples_per_class = 80;
    bs.seed = 19;
    std::tie(train, test) = data::make_blobs(bs);
    nn::TrainConfig tc;
    tc.steps = 400;
    tc.batch_size = 32;
    tc.seed = 6;
    trained = nn::train(spec, train, tc);
  }
};

}  // namespace

TEST_CASE("l2 projection") {
  nn::ParamVector center = nn::ParamVector::zeros(2);

  SUBCASE("points inside the ball pass through") {
    nn::ParamVector inside({0.3, 0.4});
    CHECK(project_l2(inside, center, 1.0).values() == inside.values());
  }

  SUBCASE("the (3,4) vector lands on (0.6, 0.8)") {
    nn::ParamVector p({3.0, 4.0});
    nn::ParamVector proj = project_l2(p, center, 1.0);
    CHECK(proj[0] == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(proj[1] == doctest::Approx(0.8).epsilon(1e-15));
  }

  SUBCASE("projection lands exactly on the sphere and is idempotent") {
    RandomStream rs(3, 0);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> c(10), p(10);
      for (int i = 0; i < 10; ++i) {
        c[i] = rs.gaussian(trial * 20 + i);
        p[i] = c[i] + 3.0 * rs.gaussian(trial * 20 + 10 + i);
      }
      nn::ParamVector centre{c};
      nn::ParamVector point{p};
      const double eta = 0.5;
      nn::ParamVector proj = project_l2(point, centre, eta);
      double dist = 0.0;
      for (int i = 0; i < 10; ++i)
        dist += (proj[i] - centre[i]) * (proj[i] - centre[i]);
      dist = std::sqrt(dist);
      if (dist < eta - 1e-9) continue;  // point was already inside
      CHECK(dist == doctest::Approx(eta).epsilon(1e-12));
      nn::ParamVector twice = project_l2(proj, centre, eta);
      CHECK(twice.values() == proj.values());
    }
  }

  SUBCASE("length mismatch is an error") {
    nn::ParamVector a = nn::ParamVector::zeros(3);
    CHECK_THROWS_AS(project_l2(a, center, 1.0), Error);
  }
}

TEST_CASE("recovery attack basics") {
  Toy toy;

  SUBCASE("zero budget returns the surrogate untouched") {
    RecoveryConfig cfg;
    cfg.eta_budget = 0.0;
    cfg.steps = 50;
    cfg.seed = 1;
    RecoveryOutcome out = recovery_attack(toy.trained, toy.spec, toy.train, toy.test, cfg);
    CHECK(out.weights.values() == toy.trained.values());
    CHECK(out.clean_test_accuracy == nn::accuracy(toy.trained, toy.spec, toy.test));
  }

  SUBCASE("weights respect the budget and large budgets help a crippled start") {
    // A random-init surrogate is a stand-in for a poisoned one.
    nn::ParamVector bad = nn::init_params(toy.spec, 999);
    double base = nn::accuracy(bad, toy.spec, toy.test);
    RecoveryConfig cfg;
    cfg.eta_budget = 50.0;
    cfg.steps = 600;
    cfg.clean_fraction = 0.5;
    cfg.seed = 2;
    RecoveryOutcome out = recovery_attack(bad, toy.spec, toy.train, toy.test, cfg);
    double moved = 0.0;
    for (std::size_t i = 0; i < bad.size(); ++i)
      moved += (out.weights[i] - bad[i]) * (out.weights[i] - bad[i]);
    CHECK(std::sqrt(moved) <= cfg.eta_budget + 1e-9);
    CHECK(out.clean_test_accuracy > base + 0.2);
  }
}

TEST_CASE("true learnability estimate") {
  Toy toy;
  RecoveryConfig cfg;
  cfg.steps = 300;
  cfg.seed = 3;

  SUBCASE("eta 0 is the surrogate accuracy") {
    CHECK(estimate_true_learnability(toy.trained, toy.spec, toy.test, 0.0, cfg) ==
          nn::accuracy(toy.trained, toy.spec, toy.test));
  }

  SUBCASE("best case dominates the generalized attacker at matched eta") {
    nn::ParamVector bad = nn::init_params(toy.spec, 1001);
    for (double eta : {0.5, 2.0}) {
      RecoveryConfig gen = cfg;
      gen.eta_budget = eta;
      gen.clean_fraction = 0.2;
      double generalized =
          recovery_attack(bad, toy.spec, toy.train, toy.test, gen).clean_test_accuracy;
      double best = estimate_true_learnability(bad, toy.spec, toy.test, eta, cfg);
      CHECK(best >= generalized - 0.01);
    }
  }

  SUBCASE("huge budget approaches unconstrained training accuracy") {
    nn::ParamVector bad = nn::init_params(toy.spec, 1002);
    RecoveryConfig big = cfg;
    big.steps = 4000;
    big.lr = 0.05;
    double est = estimate_true_learnability(bad, toy.spec, toy.test, 1000.0, big);
    double clean = nn::accuracy(toy.trained, toy.spec, toy.test);
    CHECK(est >= clean - 0.05);
  }
}

TEST_CASE("sphere sampler concentration") {
  const std::size_t d = 50;
  const int m = 10000;
  std::vector<double> mean(d, 0.0);
  for (int t = 0; t < m; ++t) {
    auto u = sphere_direction(d, 77, static_cast<std::uint64_t>(t));
    double norm = 0.0;
    for (double v : u) norm += v * v;
    CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t i = 0; i < d; ++i) mean[i] += u[i] / m;
  }
  double norm = 0.0;
  for (double v : mean) norm += v * v;
  CHECK(std::sqrt(norm) <= 4.0 / std::sqrt(static_cast<double>(m)));
}

TEST_CASE("certificate validation") {
  Toy toy;

  SUBCASE("degenerate certificate never violates") {
    cert::Certificate c;
    c.q = 0.9;
    c.eta = 0.0;
    c.sigma = 0.0;
    c.n = 1;
    c.alpha = 0.01;
    c.q_bar = 0.9;
    c.k = 1;
    c.bound = nn::accuracy(toy.trained, toy.spec, toy.test);
    CHECK(validate_certificate(toy.trained, toy.spec, toy.test, c, 50, 5) == 0.0);
  }

  SUBCASE("a bound below every achievable accuracy is always violated") {
    cert::Certificate c;
    c.q = 0.9;
    c.eta = 0.01;
    c.sigma = 0.05;
    c.n = 1;
    c.alpha = 0.01;
    c.q_bar = 0.9;
    c.k = 1;
    c.bound = -1.0;  // artificial stress value
    CHECK(validate_certificate(toy.trained, toy.spec, toy.test, c, 50, 5) == 1.0);
  }

  SUBCASE("abstained certificates are rejected") {
    cert::Certificate c;
    CHECK_THROWS_AS(validate_certificate(toy.trained, toy.spec, toy.test, c, 10, 1), Error);
  }

  SUBCASE("pipeline certificate holds at the boundary within 3 standard errors") {
    smooth::SmoothingConfig scfg{0.25, 300, 11};
    auto samples = smooth::sample_accuracies(toy.trained, toy.spec, toy.test, scfg);
    cert::Certificate c = cert::certify_learnability(samples, {0.9, 0.05, 0.01});
    REQUIRE(!c.abstained());
    double rate = validate_certificate(toy.trained, toy.spec, toy.test, c, 500, 23);
    CHECK(rate <= 0.10 + 0.04);
  }

  SUBCASE("interior sampling is no worse than the boundary") {
    smooth::SmoothingConfig scfg{0.25, 200, 12};
    auto samples = smooth::sample_accuracies(toy.trained, toy.spec, toy.test, scfg);
    cert::Certificate c = cert::certify_learnability(samples, {0.9, 0.05, 0.01});
    REQUIRE(!c.abstained());
    double boundary = validate_certificate(toy.trained, toy.spec, toy.test, c, 200, 29);
    double interior = validate_certificate(toy.trained, toy.spec, toy.test, c, 200, 29, true);
    CHECK(interior <= boundary + 0.05);
  }

  SUBCASE("parallel and serial validation agree exactly") {
    smooth::SmoothingConfig scfg{0.25, 100, 13};
    auto samples = smooth::sample_accuracies(toy.trained, toy.spec, toy.test, scfg);
    cert::Certificate c = cert::certify_learnability(samples, {0.9, 0.02, 0.01});
    REQUIRE(!c.abstained());
    double serial = validate_certificate(toy.trained, toy.spec, toy.test, c, 100, 31, false, 1);
    double parallel = validate_certificate(toy.trained, toy.spec, toy.test, c, 100, 31, false, 4);
    CHECK(serial == parallel);
  }
}

TEST_CASE("recovery curve csv") {
  RecoveryCurve curve;
  curve.mode = RecoveryMode::best_case;
  curve.seed = 3;
  curve.points = {{0.1, 0.25}, {0.5, 0.375}};
  const std::string path = "/tmp/lcert_test_curve.csv";
  save_recovery_curve(curve, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "eta,accuracy,mode,seed");
  std::getline(in, line);
  CHECK(line == "0.1,0.25,best_case,3");
}
