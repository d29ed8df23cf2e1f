#include <doctest.h>

#include "drsgk/core.hpp"
#include "drsgk/rng.hpp"

using namespace drsgk;

namespace {

struct ConstantPolicy final : Policy {
  explicit ConstantPolicy(double v) : value(v) {}
  ControlVector act(const StateVector&) const override { return ControlVector{value}; }
  double value;
};

}  // namespace

TEST_CASE("switched_act follows the switch step") {
  const ConstantPolicy nominal(1.0), backup(-1.0);
  const StateVector x{0.0};
  const SwitchedPolicy at5(nominal, backup, 5);
  CHECK(switched_act(at5, x, 4)[0] == 1.0);
  CHECK(switched_act(at5, x, 5)[0] == -1.0);
  const SwitchedPolicy at0(nominal, backup, 0);
  for (long t = 0; t < 20; ++t) CHECK(switched_act(at0, x, t)[0] == -1.0);
  CHECK_THROWS_AS(switched_act(at5, x, -1), DomainError);
}

TEST_CASE("switched policy dichotomy over a grid") {
  const ConstantPolicy nominal(3.0), backup(7.0);
  const StateVector x{0.5, -2.0};
  for (long s = 0; s < 12; ++s) {
    const SwitchedPolicy p(nominal, backup, s);
    for (long t = 0; t < 12; ++t) {
      const double u = switched_act(p, x, t)[0];
      CHECK(u == (t < s ? 3.0 : 7.0));
      CHECK(p.uses_backup(t) == (t >= s));
    }
  }
}

TEST_CASE("fixed vectors") {
  StateVector a{1.0, 2.0, 3.0};
  CHECK(a.size() == 3);
  CHECK(a.all_finite());
  a[1] = std::numeric_limits<double>::infinity();
  CHECK_FALSE(a.all_finite());
  CHECK(StateVector(2, 4.0) == StateVector{4.0, 4.0});
  CHECK_FALSE(StateVector{1.0} == StateVector{1.0, 0.0});
  CHECK_THROWS_AS(StateVector(kMaxDim + 1), DomainError);
}

TEST_CASE("control bounds clamp component-wise") {
  const ControlBounds b{ControlVector{-1.0, -2.0}, ControlVector{1.0, 2.0}};
  const ControlVector u = b.clamp(ControlVector{5.0, -5.0});
  CHECK(u[0] == 1.0);
  CHECK(u[1] == -2.0);
  CHECK(b.contains(u));
  CHECK_FALSE(b.contains(ControlVector{0.0, 2.5}));
}

TEST_CASE("exact theta sampler is a point mass") {
  const ExactTheta theta;
  RngStream s(StreamKey{});
  CHECK(theta.dim() == 0);
  CHECK_FALSE(theta.sample(StateVector{0.0}, s).has_value());
}
