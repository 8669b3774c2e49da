#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "spp/io.hpp"
#include "spp/planner.hpp"

using namespace spp;

namespace {

const double kPi = std::numbers::pi;

Trajectory parked(std::vector<double> state, double t = 0.0) {
  Trajectory tr;
  tr.samples.push_back({t, std::move(state), {0.0}});
  return tr;
}

Grid small_grid() {
  return make_grid({{-1, 1, 41, false}, {-1, 1, 41, false}, {0, 2 * kPi, 8, true}});
}

std::size_t node_near(const Grid& g, double x, double y) {
  const std::size_t i = static_cast<std::size_t>(std::lround((x + 1) / g.spacing(0)));
  const std::size_t j = static_cast<std::size_t>(std::lround((y + 1) / g.spacing(1)));
  const std::array<std::size_t, 3> m = {i, j, 3};
  return g.flat_index(m);
}

VehicleSpec car(int priority, std::vector<double> x0, double sta, std::vector<double> goal) {
  VehicleSpec v;
  v.params = {{"v", 1.0}, {"omega_max", 1.0}};
  v.x0 = std::move(x0);
  v.earliest_start = -3.0;
  v.scheduled_arrival = sta;
  v.target = Circle{std::move(goal), 0.1};
  v.priority = priority;
  return v;
}

Scenario coarse_scenario() {
  Scenario sc(make_grid({{-1, 1, 41, false}, {-1, 1, 41, false}, {0, 2 * kPi, 24, true}}));
  sc.obstacles.push_back(AxisRectangle{{-0.1, -0.5}, {0.1, 0.0}});
  sc.vehicles.push_back(car(1, {-0.6, 0.2, 0.0}, 0.0, {0.6, 0.2}));
  sc.vehicles.push_back(car(2, {0.6, 0.3, kPi}, 0.0, {-0.6, 0.3}));
  sc.numerics.scheme_order = 2;
  sc.numerics.horizon_cap = 3.0;
  sc.validate();
  return sc;
}

std::size_t hash_trajectory(const Trajectory& tr) {
  std::size_t h = 0;
  const auto mix = [&h](double x) { h = h * 1000003u ^ std::hash<double>{}(x); };
  for (const TrajectorySample& s : tr.samples) {
    mix(s.t);
    for (double x : s.state) mix(x);
    for (double u : s.control) mix(u);
  }
  return h;
}

}  // namespace

TEST_CASE("induced obstacle field examples") {
  const Grid g = small_grid();
  const std::vector<Trajectory> one = {parked({0, 0, 0})};
  const ScalarField f = induced_obstacle_field(one, 0.1, 0.0, g);
  CHECK(f[node_near(g, 0.05, 0)] == doctest::Approx(-0.05));

  const ScalarField empty = induced_obstacle_field({}, 0.1, 0.0, g);
  for (std::size_t i = 0; i < g.num_nodes(); ++i) REQUIRE(empty[i] == kFarField);

  const std::vector<Trajectory> two = {parked({0, 0, 0}), parked({1, 0, 0})};
  const ScalarField h = induced_obstacle_field(two, 0.1, 0.0, g);
  CHECK(h[node_near(g, 0.5, 0)] == doctest::Approx(0.4));
}

TEST_CASE("induced obstacles follow parking semantics") {
  const Grid g = small_grid();
  Trajectory moving;
  moving.samples.push_back({0.0, {-0.5, 0, 0}, {0}});
  moving.samples.push_back({1.0, {0.5, 0, 0}, {0}});
  moving.arrival_time = 1.0;
  const std::vector<Trajectory> c = {moving};
  CHECK(induced_obstacle_field(c, 0.1, -2.0, g)[node_near(g, -0.5, 0)] == doctest::Approx(-0.1));
  CHECK(induced_obstacle_field(c, 0.1, 0.5, g)[node_near(g, 0, 0)] == doctest::Approx(-0.1));
  CHECK(induced_obstacle_field(c, 0.1, 3.0, g)[node_near(g, 0.5, 0)] == doctest::Approx(-0.1));
  CHECK(induced_obstacle_field(c, 0.1, 3.0, g, 2, false)[node_near(g, 0.5, 0)] == kFarField);
}

TEST_CASE("constraint examples") {
  Scenario sc(small_grid());
  sc.vehicles.push_back(car(1, {-0.8, -0.8, 0}, 0.0, {0.8, 0.8}));
  {
    const TimeVaryingField g = build_constraint(sc, {});
    const ScalarField f = g.at(0.0);
    for (std::size_t i = 0; i < f.size(); ++i) REQUIRE(f[i] == -kFarField);
  }
  sc.obstacles.push_back(AxisRectangle{{-0.1, -0.5}, {0.1, 0.0}});
  {
    const TimeVaryingField g = build_constraint(sc, {});
    for (double t : {-2.0, 0.0}) CHECK(g.at(t)[node_near(g.grid(), 0.0, -0.25)] > 0.0);
  }
  sc.obstacles.clear();
  const std::vector<Trajectory> c = {parked({0, 0, 0})};
  const TimeVaryingField g = build_constraint(sc, c);
  CHECK(g.at(0.0)[node_near(g.grid(), 0.15, 0)] == doctest::Approx(-0.05));
  const std::vector<double> point = {0.15, 0.0, 1.0};
  CHECK(g.value_at(0.0, point) == doctest::Approx(-0.05));
}

TEST_CASE("verify_plan examples") {
  Scenario sc(small_grid());
  sc.vehicles.push_back(car(1, {0, 0, 0}, 0.0, {0.8, 0.8}));
  sc.vehicles.push_back(car(2, {0.05, 0, 0}, 0.0, {-0.8, 0.8}));
  PlanResult r;
  for (int p : {1, 2}) {
    VehiclePlan v;
    v.priority = p;
    v.feasible = true;
    v.trajectory = parked(sc.vehicles[p - 1].x0, -1.0);
    v.trajectory.samples.push_back({0.0, sc.vehicles[p - 1].x0, {0}});
    v.trajectory.arrival_time = 0.0;
    r.vehicles.push_back(v);
  }
  const SafetyReport bad = verify_plan(r, sc, 0.1);
  CHECK_FALSE(bad.safe());
  CHECK(bad.min_pairwise_distance == doctest::Approx(0.05));

  r.vehicles.pop_back();
  sc.vehicles.pop_back();
  const SafetyReport alone = verify_plan(r, sc, 0.1);
  CHECK(alone.safe());
  CHECK(alone.min_pairwise_distance == kFarField);
  REQUIRE(alone.deadline_slack[0]);
  CHECK(*alone.deadline_slack[0] == doctest::Approx(0.0));

  r.vehicles[0].trajectory.arrival_time = 0.2;
  CHECK_FALSE(verify_plan(r, sc, 0.1).safe());
}

TEST_CASE("scenario validation") {
  Scenario sc = coarse_scenario();
  sc.vehicles[1].priority = 3;
  CHECK_THROWS_AS(sc.validate(), std::invalid_argument);
  sc = coarse_scenario();
  sc.danger_radius = 0;
  CHECK_THROWS_AS(sc.validate(), std::invalid_argument);
  sc = coarse_scenario();
  sc.vehicles[0].x0 = {0.0, -0.2, 0.0};
  CHECK_THROWS_AS(sc.validate(), std::invalid_argument);
  sc = coarse_scenario();
  sc.vehicles[0].earliest_start = 1.0;
  CHECK_THROWS_AS(sc.validate(), std::invalid_argument);
  sc = coarse_scenario();
  std::swap(sc.vehicles[0].priority, sc.vehicles[1].priority);
  sc.validate();
  CHECK(sc.vehicles[0].x0[0] == doctest::Approx(0.6));
}

TEST_CASE("a single vehicle plan is one solve plus synthesis") {
  Scenario sc = coarse_scenario();
  sc.vehicles.pop_back();
  const PlanResult r = plan_all(sc);
  REQUIRE(r.vehicles.size() == 1);
  REQUIRE(r.vehicles[0].feasible);

  const VehicleSpec& v = sc.vehicles[0];
  const ReachAvoidSolution sol =
      solve(make_model(v.model, v.params), sc.grid,
            TimeVaryingField::constant(signed_distance(Shape{v.target}, sc.grid)),
            build_constraint(sc, {}), v.scheduled_arrival, sc.numerics,
            StopRule::query_entry(v.x0, v.scheduled_arrival - v.earliest_start, sc.options.extra_steps));
  const auto lst = latest_start_time(sol, v.x0);
  REQUIRE(lst);
  CHECK(*r.vehicles[0].latest_start == *lst);
  const Trajectory t = synthesize_trajectory(sol, v.x0, *lst, sol.time_step);
  CHECK(t.samples.size() == r.vehicles[0].trajectory.samples.size());
  CHECK(t.arrival_time == r.vehicles[0].trajectory.arrival_time);
}

TEST_CASE("two-vehicle plan properties") {
  const Scenario sc = coarse_scenario();
  std::vector<std::size_t> seen_hashes;
  std::vector<double> constraint_floor_gap;
  const PlanResult r = plan_all(sc, [&](const VehicleSolveInfo& info) {
    for (const Trajectory& t : info.committed) seen_hashes.push_back(hash_trajectory(t));
    for (const Slice& s : info.solution.slices) {
      const ScalarField g = info.solution.constraint->at(s.time);
      double gap = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) gap = std::min(gap, s.value[i] - g[i]);
      constraint_floor_gap.push_back(gap);
    }
  });
  REQUIRE(r.all_feasible());
  CHECK(r.report.safe());
  for (double gap : constraint_floor_gap) REQUIRE(gap >= 0.0);

  // Vehicle 2 saw vehicle 1's trajectory exactly as it was returned.
  REQUIRE(seen_hashes.size() == 1);
  CHECK(seen_hashes[0] == hash_trajectory(r.vehicles[0].trajectory));

  for (const VehiclePlan& v : r.vehicles) {
    REQUIRE(v.trajectory.arrival_time);
    CHECK(*v.trajectory.arrival_time <= sc.vehicles[v.priority - 1].scheduled_arrival + 1e-12);
  }

  // Dropping obstacles and higher-priority vehicles never makes the start earlier.
  Scenario alone = sc;
  alone.obstacles.clear();
  alone.vehicles = {sc.vehicles[1]};
  alone.vehicles[0].priority = 1;
  alone.validate();
  const PlanResult free = plan_all(alone);
  REQUIRE(free.vehicles[0].latest_start);
  CHECK(*free.vehicles[0].latest_start >= *r.vehicles[1].latest_start - 1e-12);

  // CSV round trip verifies identically.
  PlanResult reread = r;
  for (VehiclePlan& v : reread.vehicles) {
    std::stringstream csv;
    write_trajectory_csv(csv, v.trajectory, sc.grid);
    v.trajectory = read_trajectory_csv(csv, 3);
  }
  const SafetyReport a = verify_plan(r, sc, r.report.check_dt);
  const SafetyReport b = verify_plan(reread, sc, r.report.check_dt);
  CHECK(a.violations == b.violations);
  CHECK(b.min_pairwise_distance == doctest::Approx(a.min_pairwise_distance).epsilon(1e-12));
  for (std::size_t k = 0; k < a.min_obstacle_distance.size(); ++k) {
    CHECK(b.min_obstacle_distance[k] == doctest::Approx(a.min_obstacle_distance[k]).epsilon(1e-12));
  }
}
