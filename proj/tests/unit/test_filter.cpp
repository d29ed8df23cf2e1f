#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "drsgk/filter.hpp"
#include "drsgk/stats.hpp"

using namespace drsgk;

namespace {

// 1-D integrator: the nominal policy drifts toward the unsafe set x < 0, the
// backup drifts away from it.
struct Integrator final : SystemModel {
  std::size_t state_dim() const override { return 1; }
  std::size_t control_dim() const override { return 1; }
  std::size_t noise_dim() const override { return 1; }
  double dt() const override { return 0.1; }
  StateVector step(const StateVector& x, const ControlVector& u,
                   const NoiseVector& w) const override {
    return StateVector{x[0] + 0.1 * (u[0] + w[0])};
  }
};

struct Constant final : Policy {
  explicit Constant(double v) : value(v) {}
  ControlVector act(const StateVector&) const override { return ControlVector{value}; }
  double value;
};

struct StateMargin final : SafetySpec {
  explicit StateMargin(double alpha = 0.0) : SafetySpec(alpha) {}
  double stage_margin(const StateVector& x, const ThetaHypothesis&) const override { return x[0]; }
  double terminal_margin(const StateVector& x) const override { return x[0]; }
};

struct Normal final : NoiseSampler {
  explicit Normal(double sd) : sd(sd) {}
  std::size_t dim() const override { return 1; }
  NoiseVector sample(const StateVector&, const ControlVector&, RngStream& s) const override {
    return NoiseVector{sd * s.normal()};
  }
  double sd;
};

struct Fixture {
  Integrator model;
  Constant nominal{-1.0};
  Constant backup{1.0};
  StateMargin safety;
  Normal noise{1.0};
  CertificationProblem problem() const {
    return {&model, &nominal, &backup, &safety, &noise, nullptr};
  }
};

GatekeeperConfig small_config() {
  GatekeeperConfig c;
  c.candidates = 5;
  c.horizon = 10;
  c.samples = 400;
  c.delta = 0.01;
  c.epsilon = 0.1;
  c.beta = 0.01;
  c.gradient_samples = 20;
  return c;
}

}  // namespace

TEST_CASE("config validation") {
  GatekeeperConfig c = small_config();
  CHECK_NOTHROW(c.validate());
  auto bad = [&](auto mutate) {
    GatekeeperConfig b = small_config();
    mutate(b);
    CHECK_THROWS_AS(b.validate(), ConfigError);
  };
  bad([](GatekeeperConfig& b) { b.candidates = 0; });
  bad([](GatekeeperConfig& b) { b.horizon = 0; });
  bad([](GatekeeperConfig& b) { b.horizon = 3; });  // T < M - 1
  bad([](GatekeeperConfig& b) { b.samples = 0; });
  bad([](GatekeeperConfig& b) { b.delta = 1.0; });
  bad([](GatekeeperConfig& b) { b.epsilon = 0.0; });
  bad([](GatekeeperConfig& b) { b.beta = -0.1; });
  bad([](GatekeeperConfig& b) { b.alpha = b.epsilon; });
  bad([](GatekeeperConfig& b) { b.fixed_lipschitz = -1.0; });
  bad([](GatekeeperConfig& b) { b.fd_step = 0.0; });
  bad([](GatekeeperConfig& b) { b.gradient_samples = b.samples + 1; });
  bad([](GatekeeperConfig& b) { b.recertify_period = 0; });
  c.horizon = 4;  // T = M - 1 is allowed
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("feasible set and switch selection") {
  CHECK(feasible_candidates({0.01, 0.2, 0.05, 0.05}, 0.05) == std::vector<std::size_t>{0, 2, 3});
  CHECK(feasible_candidates({0.3, 0.2}, 0.1).empty());
  CHECK(select_switch(10, {0, 2, 3}, 4) == 13);
  CHECK(select_switch(10, {}, 4) == 4);
}

TEST_CASE("all samples safe: latest candidate is selected") {
  Fixture f;
  GatekeeperConfig c = small_config();
  c.fixed_lipschitz = 1.0;
  const auto out = certify(7, StateVector{1000.0}, 2, f.problem(), c, 1);
  const double rho = stats::per_candidate_error(c.delta, 5);
  for (std::size_t m = 0; m < 5; ++m) {
    CHECK(out.counts[m] == 0);
    CHECK(out.bounds[m] == stats::upper_confidence_bound(0, 400, rho));
  }
  CHECK(std::abs(out.bounds[0] - (1.0 - std::pow(rho, 1.0 / 400))) < 1e-9);
  CHECK(out.selected_switch == 7 + 4);
  CHECK_FALSE(out.fell_back);
  CHECK(out.rho == rho);
}

TEST_CASE("all samples unsafe: fall back to the previous switch") {
  Fixture f;
  GatekeeperConfig c = small_config();
  c.fixed_lipschitz = 1.0;
  const auto out = certify(7, StateVector{-1000.0}, 3, f.problem(), c, 1);
  for (std::size_t m = 0; m < 5; ++m) {
    CHECK(out.counts[m] == 400);
    CHECK(out.bounds[m] == 1.0);
  }
  CHECK(out.feasible.empty());
  CHECK(out.fell_back);
  CHECK(out.selected_switch == 3);
}

TEST_CASE("single candidate uses rho = delta") {
  Fixture f;
  GatekeeperConfig c = small_config();
  c.candidates = 1;
  c.fixed_lipschitz = 0.0;
  const auto out = certify(0, StateVector{50.0}, 0, f.problem(), c, 1);
  CHECK(out.rho == c.delta);
  REQUIRE(out.counts.size() == 1);
  CHECK(out.selected_switch == 0);
}

TEST_CASE("unattainable threshold short-circuits") {
  Fixture f;
  GatekeeperConfig c = small_config();
  c.samples = 1000;
  c.epsilon = 0.001;
  c.gradient_samples.reset();
  const auto out = certify(5, StateVector{1000.0}, 5, f.problem(), c, 1);
  CHECK(out.unattainable);
  CHECK(out.fell_back);
  CHECK(out.counts.empty());
  CHECK(out.selected_switch == 5);

  c.skip_unattainable = false;
  c.fixed_lipschitz = 1.0;
  const auto full = certify(5, StateVector{1000.0}, 5, f.problem(), c, 1);
  CHECK_FALSE(full.unattainable);
  CHECK(full.counts.size() == 5);
  CHECK(full.fell_back);
  CHECK(full.selected_switch == 5);
}

TEST_CASE("outcomes are self-certifying and maximal (property)") {
  Fixture f;
  RngStream gen(StreamKey{21, 0, 0, 0, Channel::kTest});
  for (int trial = 0; trial < 12; ++trial) {
    GatekeeperConfig c = small_config();
    c.epsilon = 0.02 + 0.3 * gen.uniform();
    c.beta = 0.2 * gen.uniform();
    const double x0 = 0.2 + 1.5 * gen.uniform();
    const long t = static_cast<long>(gen.uniform_below(100));
    const long prev = t - static_cast<long>(gen.uniform_below(3));
    std::vector<RolloutBatch> batches;
    const auto out =
        certify(t, StateVector{x0}, prev, f.problem(), c, gen.next_u64(), &batches);
    REQUIRE(out.counts.size() == c.candidates);
    CHECK(out.lipschitz_estimated);
    CHECK(out.lipschitz_subsampled);
    std::vector<std::size_t> feasible;
    for (std::size_t m = 0; m < c.candidates; ++m) {
      CHECK(out.lipschitz[m] == estimate_lipschitz(batches[m]));
      CHECK(out.counts[m] == count_violations(batches[m].margins, out.lipschitz[m], c.beta));
      CHECK(out.bounds[m] == stats::upper_confidence_bound(
                                 static_cast<std::int64_t>(out.counts[m]), 400, out.rho));
      if (out.bounds[m] <= out.threshold) feasible.push_back(m);
    }
    CHECK(feasible == out.feasible);
    if (feasible.empty()) {
      CHECK(out.selected_switch == prev);
      CHECK(out.fell_back);
    } else {
      CHECK(out.selected_switch == t + static_cast<long>(feasible.back()));
      CHECK_FALSE(out.fell_back);
    }
  }
}

TEST_CASE("larger beta never enlarges the feasible set (shared draws)") {
  Fixture f;
  GatekeeperConfig c = small_config();
  c.fixed_lipschitz = 1.0;
  c.epsilon = 0.2;
  std::vector<std::size_t> prev_counts;
  std::vector<std::size_t> prev_feasible{0, 1, 2, 3, 4};
  for (double beta : {0.0, 0.05, 0.1, 0.3, 1.0}) {
    c.beta = beta;
    const auto out = certify(4, StateVector{0.8}, 4, f.problem(), c, 77);
    if (!prev_counts.empty()) {
      for (std::size_t m = 0; m < 5; ++m) CHECK(out.counts[m] >= prev_counts[m]);
    }
    CHECK(std::includes(prev_feasible.begin(), prev_feasible.end(), out.feasible.begin(),
                        out.feasible.end()));
    prev_counts = out.counts;
    prev_feasible = out.feasible;
  }
}

TEST_CASE("certify rejects inconsistent inputs") {
  Fixture f;
  GatekeeperConfig c = small_config();
  CHECK_THROWS_AS(certify(-1, StateVector{1.0}, 0, f.problem(), c, 1), DomainError);
  CHECK_THROWS_AS(certify(0, StateVector{NAN}, 0, f.problem(), c, 1), DomainError);
  const StateMargin risky(0.05);
  CertificationProblem p = f.problem();
  p.safety = &risky;
  c.alpha = 0.01;
  CHECK_THROWS_AS(certify(0, StateVector{1.0}, 0, p, c, 1), ConfigError);
  c.alpha = 0.05;
  CHECK_NOTHROW(certify(0, StateVector{1.0}, 0, p, c, 1));
}

TEST_CASE("gatekeeper cadence and commitment") {
  Fixture f;
  GatekeeperConfig c = small_config();
  c.fixed_lipschitz = 1.0;

  SUBCASE("period 1 certifies every step") {
    Gatekeeper g(f.problem(), c, 3);
    CHECK(g.committed_switch() == 0);
    for (long t = 0; t < 5; ++t) {
      const FilterStep s = g.step(t, StateVector{1000.0});
      CHECK(s.outcome.has_value());
      CHECK(s.committed_switch == t + 4);
      CHECK_FALSE(s.backup_active);
      CHECK(s.control[0] == -1.0);
    }
  }
  SUBCASE("period 10 certifies every tenth step") {
    c.recertify_period = 10;
    Gatekeeper g(f.problem(), c, 3, 2);
    for (long t = 2; t < 35; ++t) {
      const FilterStep s = g.step(t, StateVector{1000.0});
      CHECK(s.outcome.has_value() == ((t - 2) % 10 == 0));
    }
  }
  SUBCASE("perpetual fallback keeps the initial backup commitment") {
    Gatekeeper g(f.problem(), c, 3, 5);
    CHECK(g.committed_switch() == 5);
    for (long t = 5; t < 30; ++t) {
      const FilterStep s = g.step(t, StateVector{-1000.0});
      CHECK(s.outcome->fell_back);
      CHECK(s.committed_switch == 5);
      CHECK(s.backup_active);
      CHECK(s.control[0] == 1.0);
    }
  }
  SUBCASE("certification resumes nominal after backup") {
    Gatekeeper g(f.problem(), c, 3);
    CHECK(g.step(0, StateVector{-1000.0}).backup_active);
    const FilterStep s = g.step(1, StateVector{1000.0});
    CHECK(s.committed_switch == 5);
    CHECK_FALSE(s.backup_active);
  }
}

TEST_CASE("certify is deterministic per seed") {
  Fixture f;
  const GatekeeperConfig c = small_config();
  const auto a = certify(2, StateVector{0.7}, 2, f.problem(), c, 5);
  const auto b = certify(2, StateVector{0.7}, 2, f.problem(), c, 5);
  CHECK(a.counts == b.counts);
  CHECK(a.lipschitz == b.lipschitz);
  CHECK(a.bounds == b.bounds);
  std::vector<RolloutBatch> batches;
  const auto c2 = certify(2, StateVector{0.7}, 2, f.problem(), c, 5, &batches);
  REQUIRE(batches.size() == 5);
  CHECK(c2.counts == a.counts);
  for (std::size_t m = 0; m < 5; ++m) {
    CHECK(count_violations(batches[m].margins, a.lipschitz[m], c.beta) == a.counts[m]);
  }
}
