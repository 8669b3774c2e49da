#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "spp/dynamics.hpp"
#include "spp/errors.hpp"
#include "spp/numerics.hpp"

using namespace spp;

namespace {

ScalarField sampled_1d(const Grid& g, double (*fn)(double)) {
  return sample_field(g, [fn](std::span<const double> x) { return fn(x[0]); });
}

const double kTwoPi = 2 * std::numbers::pi;

}  // namespace

TEST_CASE("one-sided derivatives of a linear field") {
  const Grid g = make_grid({{-1, 1, 21, false}});
  const ScalarField f = sampled_1d(g, [](double x) { return x; });
  for (int order : {1, 2}) {
    const DerivativePair d = one_sided_derivatives(f, 0, order);
    for (std::size_t i = 0; i < g.num_nodes(); ++i) {
      CHECK(d.left[i] == doctest::Approx(1.0));
      CHECK(d.right[i] == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("one-sided derivatives at a kink") {
  const Grid g = make_grid({{-1, 1, 21, false}});
  const ScalarField f = sampled_1d(g, [](double x) { return std::abs(x); });
  const DerivativePair d = one_sided_derivatives(f, 0, 1);
  CHECK(d.left[10] == doctest::Approx(-1.0));
  CHECK(d.right[10] == doctest::Approx(1.0));
}

TEST_CASE("one-sided difference quotients of x^2") {
  // left = 2x - dx, right = 2x + dx for the quadratic.
  const Grid coarse = make_grid({{0, 1, 11, false}});  // dx = 0.1, node 5 at x = 0.5
  const DerivativePair a = one_sided_derivatives(sampled_1d(coarse, [](double x) { return x * x; }), 0, 1);
  CHECK(a.left[5] == doctest::Approx(0.9));
  CHECK(a.right[5] == doctest::Approx(1.1));

  const Grid fine = make_grid({{0, 1, 21, false}});  // dx = 0.05, node 10 at x = 0.5
  const DerivativePair b = one_sided_derivatives(sampled_1d(fine, [](double x) { return x * x; }), 0, 1);
  CHECK(b.left[10] == doctest::Approx(0.95));
  CHECK(b.right[10] == doctest::Approx(1.05));
}

TEST_CASE("second-order ENO is exact for quadratics in the interior") {
  const Grid g = make_grid({{0, 1, 21, false}});
  const DerivativePair d = one_sided_derivatives(sampled_1d(g, [](double x) { return x * x; }), 0, 2);
  for (std::size_t i = 2; i + 2 < g.num_nodes(); ++i) {
    const double x = g.axis(0).node(i);
    CHECK(d.left[i] == doctest::Approx(2 * x));
    CHECK(d.right[i] == doctest::Approx(2 * x));
  }
}

TEST_CASE("periodic stencils wrap") {
  const Grid g = make_grid({{0, kTwoPi, 64, true}});
  const ScalarField f = sampled_1d(g, [](double x) { return std::sin(x); });
  const DerivativePair d1 = one_sided_derivatives(f, 0, 1);
  const DerivativePair d2 = one_sided_derivatives(f, 0, 2);
  const double h = g.spacing(0);
  // Node 0 uses node 63 on the left.
  CHECK(d1.left[0] == doctest::Approx((std::sin(0.0) - std::sin(-h)) / h));
  CHECK(std::abs(d2.left[0] - 1.0) < std::abs(d1.left[0] - 1.0));
}

TEST_CASE("derivative preconditions") {
  const Grid g = make_grid({{0, 1, 4, false}});
  const ScalarField f(g, 0.0);
  CHECK_THROWS_AS(one_sided_derivatives(f, 0, 2), std::invalid_argument);
  CHECK_THROWS_AS(one_sided_derivatives(f, 1, 1), std::invalid_argument);
  CHECK_NOTHROW(one_sided_derivatives(f, 0, 1));
}

namespace {

// Derivative pairs with constant left/right values per dimension.
std::vector<DerivativePair> constant_pairs(const Grid& g, const std::vector<double>& left,
                                           const std::vector<double>& right) {
  std::vector<DerivativePair> out;
  for (std::size_t d = 0; d < g.dims(); ++d) {
    out.push_back({ScalarField(g, left[d]), ScalarField(g, right[d]), d});
  }
  return out;
}

Grid small_dubins_grid() {
  // Node 0 sits at theta = 0.
  return make_grid({{-1, 1, 3, false}, {-1, 1, 3, false}, {0, kTwoPi, 4, true}});
}

HamiltonianFn dubins_h(const DubinsCar& car) {
  return [&car](std::span<const double> x, std::span<const double> p) {
    return car.optimized_hamiltonian(x, p);
  };
}

}  // namespace

TEST_CASE("Lax-Friedrichs Hamiltonian examples") {
  const DubinsCar car(1.0, 1.0);
  const Grid g = small_dubins_grid();
  const std::vector<double> alphas = {1, 1, 1};
  std::array<std::size_t, 3> origin{0, 0, 0};
  const std::size_t at_theta0 = g.flat_index(origin);

  auto h1 = lax_friedrichs_hamiltonian(dubins_h(car), constant_pairs(g, {1, 0, 0}, {1, 0, 0}), alphas, g);
  CHECK(h1[at_theta0] == doctest::Approx(1.0));

  auto h2 = lax_friedrichs_hamiltonian(dubins_h(car), constant_pairs(g, {0, 0, 2}, {0, 0, 2}), alphas, g);
  for (std::size_t i = 0; i < g.num_nodes(); ++i) CHECK(h2[i] == doctest::Approx(-2.0));

  auto h3 = lax_friedrichs_hamiltonian(dubins_h(car), constant_pairs(g, {0, 0, 0}, {2, 0, 0}), alphas, g);
  CHECK(h3[at_theta0] == doctest::Approx(0.0));

  std::vector<DerivativePair> missing = constant_pairs(g, {0, 0, 0}, {0, 0, 0});
  missing.pop_back();
  CHECK_THROWS_AS(lax_friedrichs_hamiltonian(dubins_h(car), missing, alphas, g), std::invalid_argument);
}

TEST_CASE("Lax-Friedrichs flux is non-increasing in each right derivative") {
  const DubinsCar car(1.0, 1.0);
  const Grid g = small_dubins_grid();
  const std::vector<double> alphas = car.dissipation_bounds(g);
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> left = {u(rng), u(rng), u(rng)};
    std::vector<double> right = {u(rng), u(rng), u(rng)};
    const ScalarField base = lax_friedrichs_hamiltonian(dubins_h(car), constant_pairs(g, left, right), alphas, g);
    for (std::size_t d = 0; d < 3; ++d) {
      std::vector<double> bumped = right;
      bumped[d] += 0.05;
      const ScalarField moved = lax_friedrichs_hamiltonian(dubins_h(car), constant_pairs(g, left, bumped), alphas, g);
      for (std::size_t i = 0; i < g.num_nodes(); ++i) CHECK(moved[i] <= base[i] + 1e-12);
    }
  }
}

TEST_CASE("CFL time step") {
  const Grid g = make_grid({{-1, 1, 81, false}, {-1, 1, 81, false}, {0, kTwoPi, 50, true}});
  const std::vector<double> a = {1, 1, 1};
  CHECK(cfl_timestep(a, g, 0.5) == doctest::Approx(0.5 / (40 + 40 + 50 / kTwoPi)));
  CHECK(cfl_timestep(a, g, 0.5) == doctest::Approx(0.005684).epsilon(1e-3));

  const Grid line = make_grid({{0, 1, 11, false}, {0, 1, 11, false}, {0, 1, 11, false}});
  const std::vector<double> b = {1, 0, 0};
  CHECK(cfl_timestep(b, line, 1.0) == doctest::Approx(0.1));

  const Grid wide = make_grid({{0, 2, 11, false}, {0, 2, 11, false}, {0, 2, 11, false}});
  CHECK(cfl_timestep(a, wide, 0.7) == doctest::Approx(2 * cfl_timestep(a, line, 0.7)));

  const std::vector<double> zero = {0, 0, 0};
  CHECK_THROWS_AS(cfl_timestep(zero, g, 0.5), std::invalid_argument);
}

TEST_CASE("variational-inequality step clamps") {
  const Grid g = make_grid({{0, 1, 3, false}});
  const NumericalHamiltonian zero_h = [](const ScalarField& f) { return ScalarField(f.grid(), 0.0); };
  const double dt = 0.1;
  {
    const ScalarField v(g, -0.2);
    const ScalarField l(g, 1.0);
    const ScalarField gg(g, 0.5);
    const ScalarField next = vi_backward_step(v, l, gg, zero_h, dt);
    CHECK(next[0] == doctest::Approx(0.5));
  }
  {
    const ScalarField v(g, 0.3);
    const ScalarField l(g, -0.1);
    const ScalarField gg(g, -1.0);
    const ScalarField next = vi_backward_step(v, l, gg, zero_h, dt);
    CHECK(next[0] == doctest::Approx(-0.1));
  }
  {
    const ScalarField v(g, std::vector<double>{0.4, -0.3, 0.1});
    const ScalarField gg(g, -1e6);
    const ScalarField next = vi_backward_step(v, v, gg, zero_h, dt);
    for (std::size_t i = 0; i < 3; ++i) CHECK(next[i] == v[i]);
  }
}

TEST_CASE("variational-inequality step with a pushing Hamiltonian") {
  // Constant Hhat = -3 raises V by 0.3 per stage before clamping.
  const Grid g = make_grid({{0, 1, 3, false}});
  const NumericalHamiltonian rise = [](const ScalarField& f) { return ScalarField(f.grid(), -3.0); };
  const ScalarField v(g, 0.0);
  const ScalarField next = vi_backward_step(v, ScalarField(g, 10.0), ScalarField(g, -10.0), rise, 0.1);
  // Heun on a constant rate is exact.
  CHECK(next[1] == doctest::Approx(0.3));
  const ScalarField capped = vi_backward_step(v, ScalarField(g, 0.1), ScalarField(g, -10.0), rise, 0.1);
  // Both stages clamp to 0.1; the Heun average then lands halfway.
  CHECK(capped[1] == doctest::Approx(0.05));
}

TEST_CASE("variational-inequality step reports blow-up") {
  const Grid g = make_grid({{0, 1, 3, false}});
  const ScalarField v(g, 0.0);
  const auto explode = [](const ScalarField& f) {
    ScalarField h(f.grid(), 0.0);
    h.values()[1] = 1e308;
    return h;
  };
  CHECK_THROWS_AS(vi_backward_step(v, ScalarField(g, 1.0), ScalarField(g, -1.0), explode, 1e10),
                  NumericalError);
}

TEST_CASE("clamp invariant holds after random steps") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  const Grid g = make_grid({{-1, 1, 41, false}});
  const SingleIntegrator1D model(1.0);
  const std::vector<double> alphas = model.dissipation_bounds(g);
  const HamiltonianFn h = [&](std::span<const double> x, std::span<const double> p) {
    return -model.optimized_hamiltonian(x, p);
  };
  const NumericalHamiltonian hh = [&](const ScalarField& v) {
    const DerivativePair d = one_sided_derivatives(v, 0, 1);
    return lax_friedrichs_hamiltonian(h, std::span<const DerivativePair>(&d, 1), alphas, g);
  };
  const double dt = cfl_timestep(alphas, g, 0.5);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> lv(g.num_nodes()), gv(g.num_nodes());
    for (std::size_t i = 0; i < lv.size(); ++i) {
      lv[i] = u(rng);
      gv[i] = u(rng) - 0.5;
    }
    const ScalarField l(g, lv);
    const ScalarField gg(g, gv);
    ScalarField v = field_intersect(l, gg);
    for (int s = 0; s < 10; ++s) {
      v = vi_backward_step(v, l, gg, hh, dt);
      for (std::size_t i = 0; i < v.size(); ++i) {
        REQUIRE(v[i] >= gg[i]);
        REQUIRE(v[i] <= std::max(l[i], gg[i]));
      }
    }
  }
}

TEST_CASE("numerics config validation") {
  NumericsConfig c;
  CHECK_NOTHROW(c.validate());
  c.cfl_factor = 1.5;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.scheme_order = 3;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.horizon_cap = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

namespace {

double lf_error(const Grid& g, const DubinsCar& car) {
  const ScalarField v = sample_field(g, [](std::span<const double> x) {
    return std::sin(x[0]) * std::cos(x[1]) + 0.1 * std::sin(x[2]);
  });
  std::vector<DerivativePair> d;
  for (std::size_t k = 0; k < 3; ++k) d.push_back(one_sided_derivatives(v, k, 1));
  const ScalarField hhat = lax_friedrichs_hamiltonian(dubins_h(car), d, car.dissipation_bounds(g), g);
  double err = 0.0;
  std::array<double, 3> x{};
  for (std::size_t i = 0; i < g.num_nodes(); ++i) {
    g.node_state(i, x);
    const std::array<double, 3> p = {std::cos(x[0]) * std::cos(x[1]), -std::sin(x[0]) * std::sin(x[1]),
                                      0.1 * std::cos(x[2])};
    err = std::max(err, std::abs(hhat[i] - car.optimized_hamiltonian(x, p)));
  }
  return err;
}

}  // namespace

TEST_CASE("Lax-Friedrichs Hamiltonian converges at first order") {
  const DubinsCar car(1.0, 1.0);
  Grid g = make_grid({{-1, 1, 21, false}, {-1, 1, 21, false}, {0, kTwoPi, 24, true}});
  const double e1 = lf_error(g, car);
  g = refine(g);
  const double e2 = lf_error(g, car);
  g = refine(g);
  const double e3 = lf_error(g, car);
  MESSAGE("errors " << e1 << " " << e2 << " " << e3);
  CHECK(e1 / e2 == doctest::Approx(2.0).epsilon(0.3));
  CHECK(e2 / e3 == doctest::Approx(2.0).epsilon(0.3));
}
