#include <doctest.h>

#include <cmath>
#include <cstring>

#include "lcert/pue.hpp"
#include "lcert/rng.hpp"

using namespace lcert;
using namespace lcert::pue;

namespace {

data::LabeledDataset small_blobs(std::uint64_t seed, int per_class = 60) {
  data::BlobSpec bs;
  bs.class_count = 4;
  bs.input_dim = 16;
  bs.samples_per_class = per_class;
  bs.seed = seed;
  return data::make_blobs(bs).first;
}

CraftConfig quick_cfg(CraftMode mode, std::uint64_t seed) {
  CraftConfig cfg;
  cfg.mode = mode;
  cfg.seed = seed;
  cfg.u_train = 2;
  cfg.u_perturb = 2;
  cfg.surrogate_steps = 6;
  cfg.stop_error = 0.2;
  cfg.max_rounds = 120;
  return cfg;
}

nn::TrainConfig quick_train() {
  nn::TrainConfig tc;
  tc.batch_size = 32;
  tc.learning_rate = 0.05;
  return tc;
}

}  // namespace

TEST_CASE("mode labels") {
  CHECK(std::string(mode_name(CraftMode::emn)) == "EMN");
  CHECK(std::string(mode_name(CraftMode::pue_b)) == "PUE-B");
  CraftConfig cfg;
  cfg.mode = CraftMode::pue;
  cfg.u_perturb = 10;
  CHECK(cfg.label() == "PUE-10");
  cfg.u_perturb = 1;
  CHECK(cfg.label() == "PUE-1");
  cfg.mode = CraftMode::emn;
  CHECK(cfg.label() == "EMN");
  CHECK(mode_from_name("pue-b") == CraftMode::pue_b);
  CHECK(mode_from_name("EMN") == CraftMode::emn);
  CHECK_THROWS_AS(mode_from_name("ops"), Error);
}

TEST_CASE("opt_step hand cases") {
  const double xi = 8.0 / 255.0;
  const double rp = xi / 10.0;
  const int dim = 6;
  nn::ModelSpec spec = nn::ModelSpec::mlp(dim, {}, 2);
  std::vector<double> x(dim, 0.5);
  std::vector<int> y0 = {0};

  SUBCASE("zero weights give zero input gradient: delta unchanged") {
    auto delta = data::ClasswisePerturbation::zeros(2, dim, xi);
    nn::ParamVector zero = nn::ParamVector::zeros(spec.param_count());
    opt_step(delta, x, y0, zero, spec, {0.0}, 3, rp, 1, 0);
    for (double v : delta.rows) CHECK(v == 0.0);
  }

  // Weights making dL/dx strictly positive for class-0 samples and strictly
  // negative for class-1 samples: W[0] = -1, W[1] = +1 per input.
  std::vector<double> w(spec.param_count(), 0.0);
  for (int j = 0; j < dim; ++j) {
    w[j] = -1.0;
    w[dim + j] = 1.0;
  }
  nn::ParamVector theta{w};

  SUBCASE("all-positive gradient forces delta[class] = -r_p") {
    auto delta = data::ClasswisePerturbation::zeros(2, dim, xi);
    std::uint64_t used = opt_step(delta, x, y0, theta, spec, {0.0}, 4, rp, 1, 0);
    CHECK(used == 4);
    for (int j = 0; j < dim; ++j) {
      CHECK(delta.row(0)[j] == -rp);
      CHECK(delta.row(1)[j] == 0.0);  // class absent from the batch
    }
  }

  SUBCASE("entries pinned at +xi stay there under negative gradient") {
    auto delta = data::ClasswisePerturbation::zeros(2, dim, xi);
    for (int j = 0; j < dim; ++j) delta.rows[dim + j] = xi;  // class 1 at +xi
    std::vector<int> y1 = {1};
    opt_step(delta, x, y1, theta, spec, {0.0}, 2, rp, 1, 0);
    for (int j = 0; j < dim; ++j) CHECK(delta.row(1)[j] == xi);
  }

  SUBCASE("steps never leave the xi ball") {
    auto delta = data::ClasswisePerturbation::zeros(2, dim, xi);
    std::uint64_t base = 0;
    for (int it = 0; it < 30; ++it) {
      base += opt_step(delta, x, y0, theta, spec, {0.0, 0.1}, 2, rp, 1, base);
      for (double v : delta.rows) CHECK(std::abs(v) <= xi + 1e-15);
    }
  }
}

TEST_CASE("craft mode semantics show up in the sigma traces") {
  data::LabeledDataset d = small_blobs(31);
  nn::ModelSpec spec = nn::ModelSpec::mlp(16, {32}, 4);

  SUBCASE("EMN never schedules weight noise") {
    CraftResult r = craft(d, spec, quick_cfg(CraftMode::emn, 5), quick_train());
    for (const auto& round : r.history) {
      for (double s : round.train_sigmas) CHECK(s == 0.0);
      for (double s : round.perturb_sigmas) CHECK(s == 0.0);
    }
    CHECK(r.history.back().perturbed_error <= 0.2);
  }

  SUBCASE("PUE-B ramps only the surrogate phase") {
    CraftResult r = craft(d, spec, quick_cfg(CraftMode::pue_b, 5), quick_train());
    bool saw_train_noise = false;
    for (const auto& round : r.history) {
      for (double s : round.perturb_sigmas) CHECK(s == 0.0);
      for (double s : round.train_sigmas) saw_train_noise |= s > 0.0;
    }
    CHECK(saw_train_noise);
  }

  SUBCASE("PUE ramps both phases after warmup") {
    CraftResult r = craft(d, spec, quick_cfg(CraftMode::pue, 5), quick_train());
    bool saw_train = false, saw_perturb = false;
    for (const auto& round : r.history) {
      for (double s : round.train_sigmas) saw_train |= s > 0.0;
      for (double s : round.perturb_sigmas) saw_perturb |= s > 0.0;
    }
    CHECK(saw_train);
    CHECK(saw_perturb);
  }
}

TEST_CASE("degenerate noise cap: pue and emn coincide, step size is inert") {
  data::LabeledDataset d = small_blobs(77);
  nn::ModelSpec spec = nn::ModelSpec::mlp(16, {32}, 4);

  CraftConfig a = quick_cfg(CraftMode::pue, 9);
  a.noise_cap = 0.0;
  CraftConfig b = quick_cfg(CraftMode::emn, 9);
  b.noise_cap = 0.0;
  CraftResult ra = craft(d, spec, a, quick_train());
  CraftResult rb = craft(d, spec, b, quick_train());
  CHECK(ra.delta.rows == rb.delta.rows);
  CHECK(ra.surrogate.values() == rb.surrogate.values());

  // EMN ignores the ramp parameters entirely.
  CraftConfig c = quick_cfg(CraftMode::emn, 9);
  c.noise_cap = 0.25;
  c.noise_step = 0.01;
  CraftResult rc = craft(d, spec, c, quick_train());
  CHECK(rc.delta.rows == rb.delta.rows);
  CHECK(rc.surrogate.values() == rb.surrogate.values());
}

TEST_CASE("craft is deterministic and keeps delta inside the ball") {
  data::LabeledDataset d = small_blobs(13);
  nn::ModelSpec spec = nn::ModelSpec::mlp(16, {32}, 4);
  CraftConfig cfg = quick_cfg(CraftMode::pue, 21);
  CraftResult a = craft(d, spec, cfg, quick_train());
  CraftResult b = craft(d, spec, cfg, quick_train());
  CHECK(a.delta.rows == b.delta.rows);
  CHECK(a.surrogate.values() == b.surrogate.values());
  CHECK(a.history.size() == b.history.size());
  a.delta.validate();
  for (double v : a.delta.rows) CHECK(std::abs(v) <= cfg.budget + 1e-15);
  // Source data untouched by crafting.
  CHECK(d.digest() == small_blobs(13).digest());
}

TEST_CASE("non-convergence carries the history") {
  data::LabeledDataset d = small_blobs(3);
  nn::ModelSpec spec = nn::ModelSpec::mlp(16, {32}, 4);
  CraftConfig cfg = quick_cfg(CraftMode::pue, 4);
  cfg.stop_error = 0.001;
  cfg.max_rounds = 1;
  try {
    craft(d, spec, cfg, quick_train());
    FAIL("expected CraftNonConvergence");
  } catch (const CraftNonConvergence& e) {
    CHECK(e.partial.history.size() == 1);
    CHECK(e.partial.history.back().perturbed_error > 0.001);
  }
}

TEST_CASE("offline surrogate honors the stop rule") {
  data::LabeledDataset d = small_blobs(51);
  nn::ModelSpec spec = nn::ModelSpec::mlp(16, {32}, 4);
  CraftConfig cfg = quick_cfg(CraftMode::pue, 15);
  CraftResult crafted = craft(d, spec, cfg, quick_train());
  data::LabeledDataset poisoned = data::apply_perturbation(d, crafted.delta);

  nn::ParamVector offline = train_offline_surrogate(poisoned, spec, cfg, quick_train());
  CHECK(nn::accuracy(offline, spec, poisoned) >= 1.0 - cfg.stop_error);

  SUBCASE("zero cap reduces to plain training (ramp parameters inert)") {
    CraftConfig plain = cfg;
    plain.noise_cap = 0.0;
    plain.noise_step = 0.05;
    nn::ParamVector p1 = train_offline_surrogate(poisoned, spec, plain, quick_train());
    plain.noise_step = 0.011;  // only read by the ramp
    nn::ParamVector p2 = train_offline_surrogate(poisoned, spec, plain, quick_train());
    CHECK(p1.values() == p2.values());
  }
}

TEST_CASE("config validation") {
  CraftConfig cfg;
  cfg.noise_step = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = CraftConfig{};
  cfg.noise_step = 0.3;
  cfg.noise_cap = 0.25;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = CraftConfig{};
  cfg.stop_error = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = CraftConfig{};
  cfg.delta_lr = -1.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}
