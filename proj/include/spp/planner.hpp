#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spp/reach_avoid.hpp"
#include "spp/shape.hpp"

namespace spp {

/// Magnitude used for "no obstacle anywhere" implicit surfaces.
inline constexpr double kFarField = 1.0e6;

struct VehicleSpec {
  std::string model = "dubins";
  ModelParams params;         // dubins: v, omega_max; integrator1d: max_speed
  State x0;
  double earliest_start = 0.0;     // EST
  double scheduled_arrival = 0.0;  // STA
  Circle target;
  int priority = 1;  // 1 = highest
};

struct PlanOptions {
  /// Keep a vehicle's danger zone at its final state after arrival.
  bool post_arrival_obstacle = true;
  /// Forward-simulation step; defaults to the solver's CFL step.
  std::optional<double> sim_dt;
  /// Steps kept after x0 enters the reach-avoid set.
  std::size_t extra_steps = 2;
};

class Scenario {
 public:
  explicit Scenario(Grid grid) : grid(std::move(grid)) {}

  Grid grid;
  std::vector<Shape> obstacles;
  std::vector<VehicleSpec> vehicles;  // sorted by priority after validate()
  double danger_radius = 0.1;
  NumericsConfig numerics;
  PlanOptions options;
  /// Values in the scenario that are reconstructions rather than measured data;
  /// echoed in every report.
  std::vector<std::string> reconstructed;

  /// Sorts vehicles by priority and checks invariants: priorities 1..N without
  /// gaps, danger radius > 0, EST <= STA, x0 on the grid and outside static
  /// obstacles, shapes well formed. Throws std::invalid_argument.
  void validate();
  /// Number of leading grid coordinates that are positions.
  std::size_t position_dims() const;
};

struct SafetyReport {
  double check_dt = 0.0;
  double danger_radius = 0.0;
  double min_pairwise_distance = kFarField;
  double min_pairwise_time = 0.0;
  std::optional<std::pair<int, int>> closest_pair;  // priorities
  std::vector<double> min_obstacle_distance;         // per vehicle, kFarField if none
  std::vector<double> min_vehicle_distance;          // per vehicle, kFarField if alone
  std::vector<std::optional<double>> deadline_slack;  // STA - arrival, per vehicle
  std::vector<std::string> violations;

  bool safe() const { return violations.empty(); }
};

struct VehiclePlan {
  int priority = 0;
  bool feasible = false;
  std::string status;
  std::optional<double> latest_start;
  Trajectory trajectory;
  std::size_t solver_steps = 0;
};

struct PlanResult {
  std::vector<VehiclePlan> vehicles;  // priority order
  SafetyReport report;

  bool all_feasible() const;
};

/// Danger-zone union of committed vehicles at time t: min_j |p - p_j(t)| - R_c
/// over the leading `position_dims` coordinates, extruded along the rest;
/// +kFarField when nothing is committed.
ScalarField induced_obstacle_field(std::span<const Trajectory> committed, double danger_radius,
                                   double t, const Grid& grid, std::size_t position_dims = 2,
                                   bool post_arrival_obstacle = true);

/// g(x, t) = -(signed distance to static obstacles union induced obstacles), so
/// g <= 0 exactly outside the avoid set.
TimeVaryingField build_constraint(const Scenario& scenario, std::span<const Trajectory> committed);

/// Per-vehicle view handed to a PlanObserver right after that vehicle's solve
/// and synthesis, before its trajectory is committed.
struct VehicleSolveInfo {
  std::size_t index;
  const VehicleSpec& spec;
  const ReachAvoidSolution& solution;
  std::span<const Trajectory> committed;
};
using PlanObserver = std::function<void(const VehicleSolveInfo&)>;

/// Plans every vehicle in priority order, each against static obstacles and the
/// danger zones of the feasible higher-priority vehicles, then verifies the
/// joint plan at half the simulation step.
PlanResult plan_all(const Scenario& scenario, const PlanObserver& observer = {});

/// Independent check of a joint plan on a common time lattice (step
/// `check_dt`, merged with every trajectory sample time).
SafetyReport verify_plan(const PlanResult& result, const Scenario& scenario, double check_dt);

}  // namespace spp
