#include "spp/planner.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <set>
#include <sstream>
#include <stdexcept>

#include "spp/errors.hpp"

namespace spp {

namespace {

double distance(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) sum += (a[d] - b[d]) * (a[d] - b[d]);
  return std::sqrt(sum);
}

bool occupies(const Trajectory& traj, double t, bool post_arrival_obstacle) {
  return post_arrival_obstacle || !traj.arrival_time || t <= *traj.arrival_time;
}

}  // namespace

std::size_t Scenario::position_dims() const { return std::min<std::size_t>(2, grid.dims()); }

void Scenario::validate() {
  numerics.validate();
  if (!(danger_radius > 0.0)) throw std::invalid_argument("scenario: danger_radius must be > 0");
  if (vehicles.empty()) throw std::invalid_argument("scenario: no vehicles");
  std::sort(vehicles.begin(), vehicles.end(),
            [](const VehicleSpec& a, const VehicleSpec& b) { return a.priority < b.priority; });
  for (std::size_t i = 0; i < vehicles.size(); ++i) {
    if (vehicles[i].priority != static_cast<int>(i + 1)) {
      throw std::invalid_argument("scenario: priorities must be 1..N without gaps or repeats");
    }
  }
  for (const Shape& s : obstacles) {
    validate_shape(s);
    if (spp::position_dims(s) != position_dims()) {
      throw std::invalid_argument("scenario: obstacle dimension does not match the grid");
    }
  }
  if (options.sim_dt && !(*options.sim_dt > 0.0)) {
    throw std::invalid_argument("scenario: sim_dt must be positive");
  }
  for (const VehicleSpec& v : vehicles) {
    const std::string who = "vehicle " + std::to_string(v.priority) + ": ";
    const auto model = make_model(v.model, v.params);
    if (model->state_dims() != grid.dims()) {
      throw std::invalid_argument(who + "model state dimension does not match the grid");
    }
    if (v.x0.size() != grid.dims()) throw std::invalid_argument(who + "x0 dimension mismatch");
    for (std::size_t d = 0; d < grid.dims(); ++d) {
      const Axis& a = grid.axis(d);
      if (!a.periodic && (v.x0[d] < a.lower || v.x0[d] > a.upper)) {
        throw std::invalid_argument(who + "x0 outside the grid");
      }
    }
    if (!(v.earliest_start <= v.scheduled_arrival)) {
      throw std::invalid_argument(who + "earliest start must not exceed scheduled arrival");
    }
    validate_shape(v.target);
    if (v.target.center.size() != position_dims()) {
      throw std::invalid_argument(who + "target dimension does not match the grid");
    }
    for (const Shape& s : obstacles) {
      if (signed_distance(s, std::span<const double>(v.x0.data(), position_dims())) <= 0.0) {
        throw std::invalid_argument(who + "x0 lies inside a static obstacle");
      }
    }
  }
}

bool PlanResult::all_feasible() const {
  return std::all_of(vehicles.begin(), vehicles.end(),
                     [](const VehiclePlan& v) { return v.feasible; });
}

ScalarField induced_obstacle_field(std::span<const Trajectory> committed, double danger_radius,
                                   double t, const Grid& grid, std::size_t position_dims,
                                   bool post_arrival_obstacle) {
  std::vector<std::vector<double>> centers;
  for (const Trajectory& traj : committed) {
    if (occupies(traj, t, post_arrival_obstacle)) {
      centers.push_back(traj.position_at(t, position_dims));
    }
  }
  if (centers.empty()) return ScalarField(grid, kFarField, t);
  ScalarField f = extrude_positions(grid, position_dims, [&](std::span<const double> p) {
    double best = kFarField;
    for (const auto& c : centers) best = std::min(best, distance(p, c) - danger_radius);
    return best;
  });
  f.set_time(t);
  return f;
}

TimeVaryingField build_constraint(const Scenario& scenario, std::span<const Trajectory> committed) {
  const Grid& grid = scenario.grid;
  const std::size_t npos = scenario.position_dims();
  auto static_sd = std::make_shared<const ScalarField>(
      union_signed_distance(scenario.obstacles, grid, kFarField));
  if (committed.empty()) return TimeVaryingField::constant(field_complement(*static_sd));

  auto trajectories = std::make_shared<const std::vector<Trajectory>>(committed.begin(),
                                                                      committed.end());
  auto obstacles = std::make_shared<const std::vector<Shape>>(scenario.obstacles);
  const double radius = scenario.danger_radius;
  const bool post_arrival = scenario.options.post_arrival_obstacle;

  auto field_fn = [=](double t) {
    ScalarField induced =
        induced_obstacle_field(*trajectories, radius, t, grid, npos, post_arrival);
    return field_complement(field_union(*static_sd, induced));
  };
  auto point_fn = [=](double t, std::span<const double> x) {
    const std::span<const double> p = x.first(npos);
    double sd = kFarField;
    for (const Shape& s : *obstacles) sd = std::min(sd, signed_distance(s, p));
    for (const Trajectory& traj : *trajectories) {
      if (occupies(traj, t, post_arrival)) {
        sd = std::min(sd, distance(p, traj.position_at(t, npos)) - radius);
      }
    }
    return -sd;
  };
  return TimeVaryingField::from_function(grid, field_fn, point_fn);
}

PlanResult plan_all(const Scenario& scenario, const PlanObserver& observer) {
  PlanResult result;
  std::vector<Trajectory> committed;
  const Grid& grid = scenario.grid;
  double finest_sim_dt = kFarField;

  for (std::size_t i = 0; i < scenario.vehicles.size(); ++i) {
    const VehicleSpec& spec = scenario.vehicles[i];
    VehiclePlan plan;
    plan.priority = spec.priority;

    const auto model = make_model(spec.model, spec.params);
    const TimeVaryingField target =
        TimeVaryingField::constant(signed_distance(Shape{spec.target}, grid));
    const TimeVaryingField constraint = build_constraint(scenario, committed);
    const double horizon = spec.scheduled_arrival - spec.earliest_start;
    const StopRule stop = StopRule::query_entry(spec.x0, horizon > 0.0 ? horizon : 1e-12,
                                                scenario.options.extra_steps);

    const ReachAvoidSolution solution =
        solve(model, grid, target, constraint, spec.scheduled_arrival, scenario.numerics, stop);
    plan.solver_steps = solution.steps;
    plan.latest_start = latest_start_time(solution, spec.x0);

    if (!plan.latest_start) {
      plan.status = "infeasible: x0 never enters the reach-avoid set within the horizon";
    } else if (*plan.latest_start < spec.earliest_start) {
      plan.status = "infeasible: latest start precedes earliest start";
    } else {
      const double sim_dt = scenario.options.sim_dt.value_or(solution.time_step);
      finest_sim_dt = std::min(finest_sim_dt, sim_dt);
      try {
        plan.trajectory = synthesize_trajectory(solution, spec.x0, *plan.latest_start, sim_dt);
        plan.feasible = true;
        plan.status = "feasible";
      } catch (const SynthesisError& e) {
        plan.status = std::string("infeasible: ") + e.what();
      }
    }

    if (observer) observer({i, spec, solution, committed});
    if (plan.feasible) committed.push_back(plan.trajectory);
    result.vehicles.push_back(std::move(plan));
  }

  const double check_dt = finest_sim_dt < kFarField ? 0.5 * finest_sim_dt : 0.01;
  result.report = verify_plan(result, scenario, check_dt);
  return result;
}

SafetyReport verify_plan(const PlanResult& result, const Scenario& scenario, double check_dt) {
  if (!(check_dt > 0.0)) throw std::invalid_argument("verify_plan: check_dt must be positive");
  SafetyReport report;
  report.check_dt = check_dt;
  report.danger_radius = scenario.danger_radius;
  const std::size_t n = result.vehicles.size();
  const std::size_t npos = scenario.position_dims();
  const bool post_arrival = scenario.options.post_arrival_obstacle;
  report.min_obstacle_distance.assign(n, kFarField);
  report.min_vehicle_distance.assign(n, kFarField);
  report.deadline_slack.assign(n, std::nullopt);

  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < n; ++i) {
    if (result.vehicles[i].feasible && !result.vehicles[i].trajectory.samples.empty()) {
      active.push_back(i);
    }
  }
  if (active.empty()) return report;

  double t0 = kFarField;
  double t1 = -kFarField;
  std::set<double> times;
  for (std::size_t i : active) {
    const Trajectory& traj = result.vehicles[i].trajectory;
    t0 = std::min(t0, traj.departure_time());
    t1 = std::max(t1, traj.end_time());
    for (const TrajectorySample& s : traj.samples) times.insert(s.t);
  }
  const auto lattice_steps = static_cast<std::size_t>(std::floor((t1 - t0) / check_dt));
  for (std::size_t k = 0; k <= lattice_steps; ++k) times.insert(t0 + static_cast<double>(k) * check_dt);

  std::vector<std::vector<double>> pos(n);
  std::vector<std::vector<double>> pair_min(n, std::vector<double>(n, kFarField));
  std::vector<std::vector<double>> pair_time(n, std::vector<double>(n, 0.0));
  for (double t : times) {
    for (std::size_t i : active) pos[i] = result.vehicles[i].trajectory.position_at(t, npos);
    for (std::size_t a = 0; a < active.size(); ++a) {
      const std::size_t i = active[a];
      const Trajectory& ti = result.vehicles[i].trajectory;
      if (!occupies(ti, t, post_arrival)) continue;
      for (const Shape& s : scenario.obstacles) {
        report.min_obstacle_distance[i] =
            std::min(report.min_obstacle_distance[i], signed_distance(s, pos[i]));
      }
      for (std::size_t b = a + 1; b < active.size(); ++b) {
        const std::size_t j = active[b];
        if (!occupies(result.vehicles[j].trajectory, t, post_arrival)) continue;
        const double d = distance(pos[i], pos[j]);
        report.min_vehicle_distance[i] = std::min(report.min_vehicle_distance[i], d);
        report.min_vehicle_distance[j] = std::min(report.min_vehicle_distance[j], d);
        if (d < pair_min[i][j]) {
          pair_min[i][j] = d;
          pair_time[i][j] = t;
        }
        if (d < report.min_pairwise_distance) {
          report.min_pairwise_distance = d;
          report.min_pairwise_time = t;
          report.closest_pair = {result.vehicles[i].priority, result.vehicles[j].priority};
        }
      }
    }
  }

  std::ostringstream msg;
  msg.precision(6);
  for (std::size_t i : active) {
    const VehiclePlan& v = result.vehicles[i];
    const VehicleSpec& spec = scenario.vehicles[i];
    if (v.trajectory.arrival_time) {
      report.deadline_slack[i] = spec.scheduled_arrival - *v.trajectory.arrival_time;
    }
    if (!report.deadline_slack[i] || *report.deadline_slack[i] < 0.0) {
      report.violations.push_back("vehicle " + std::to_string(v.priority) + " misses its deadline");
    }
    if (report.min_obstacle_distance[i] < 0.0) {
      msg.str("");
      msg << "vehicle " << v.priority << " enters a static obstacle (depth "
          << -report.min_obstacle_distance[i] << ")";
      report.violations.push_back(msg.str());
    }
  }
  for (std::size_t a = 0; a < active.size(); ++a) {
    for (std::size_t b = a + 1; b < active.size(); ++b) {
      const std::size_t i = active[a];
      const std::size_t j = active[b];
      if (pair_min[i][j] < scenario.danger_radius) {
        msg.str("");
        msg << "vehicles " << result.vehicles[i].priority << " and " << result.vehicles[j].priority
            << " come within " << pair_min[i][j] << " < " << scenario.danger_radius
            << " at t = " << pair_time[i][j];
        report.violations.push_back(msg.str());
      }
    }
  }
  return report;
}

}  // namespace spp
