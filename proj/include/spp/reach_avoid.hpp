#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "spp/dynamics.hpp"
#include "spp/field.hpp"
#include "spp/numerics.hpp"

namespace spp {

/// Implicit surface function that may change with time: t -> field on the
/// solver grid. An optional pointwise evaluator avoids building whole fields
/// when only a few states are queried.
class TimeVaryingField {
 public:
  using FieldFn = std::function<ScalarField(double)>;
  using PointFn = std::function<double(double, std::span<const double>)>;

  static TimeVaryingField constant(ScalarField field);
  static TimeVaryingField from_function(Grid grid, FieldFn field_fn, PointFn point_fn = {});
  /// Piecewise-linear in time between tabulated fields; clamped outside the table.
  static TimeVaryingField from_table(std::vector<ScalarField> fields);

  const Grid& grid() const { return grid_; }
  bool time_invariant() const { return constant_ != nullptr; }
  ScalarField at(double t) const;
  double value_at(double t, std::span<const double> point) const;

 private:
  explicit TimeVaryingField(Grid grid) : grid_(std::move(grid)) {}

  Grid grid_;
  std::shared_ptr<const ScalarField> constant_;
  FieldFn field_fn_;
  PointFn point_fn_;
};

/// When a backward solve halts. The horizon is always capped by
/// NumericsConfig::horizon_cap; `horizon <= 0` means "use the cap".
struct StopRule {
  enum class Kind { FixedHorizon, QueryEntry, Converged };

  Kind kind = Kind::FixedHorizon;
  double horizon = 0.0;
  State query;                  // QueryEntry only
  std::size_t extra_steps = 2;  // steps kept after the query enters the set
  double tolerance = 1e-6;      // Converged only: max pointwise change per step

  static StopRule fixed_horizon(double horizon);
  static StopRule query_entry(State query, double horizon = 0.0, std::size_t extra_steps = 2);
  static StopRule converged(double tolerance = 1e-6, double horizon = 0.0);
};

enum class SolveStatus { HorizonReached, QueryReached, Converged, InfeasibleWithinHorizon };

const char* to_string(SolveStatus status);

struct Slice {
  double time;
  ScalarField value;
};

/// Value function V(x, t) stored backward from the terminal time; the
/// reach-avoid set at t is {x : V(x, t) <= 0}.
struct ReachAvoidSolution {
  std::vector<Slice> slices;  // strictly decreasing time; front() is the terminal slice
  std::shared_ptr<const DynamicsModel> model;
  double terminal_time = 0.0;
  double time_step = 0.0;
  std::size_t steps = 0;
  SolveStatus status = SolveStatus::HorizonReached;
  std::shared_ptr<const TimeVaryingField> target;      // l
  std::shared_ptr<const TimeVaryingField> constraint;  // g

  const Grid& grid() const { return slices.front().value.grid(); }
  double earliest_time() const { return slices.back().time; }
  /// Stored slice whose time is closest to `t`.
  const Slice& nearest(double t) const;
};

/// Numerical Hamiltonian for the backward solve: Lax-Friedrichs applied to
/// -H(x, p), so that V - dt * Hhat grows reach-avoid sets backward in time.
NumericalHamiltonian backward_hamiltonian(std::shared_ptr<const DynamicsModel> model,
                                          const Grid& grid, int scheme_order);

/// Solves the double-obstacle variational inequality backward from
/// `terminal_time`, starting at V = max(l, g). Throws NumericalError (with the
/// offending time) on blow-up. A query that never enters the set is reported
/// through SolveStatus::InfeasibleWithinHorizon.
ReachAvoidSolution solve(std::shared_ptr<const DynamicsModel> model, const Grid& grid,
                         const TimeVaryingField& target, const TimeVaryingField& constraint,
                         double terminal_time, const NumericsConfig& config,
                         const StopRule& stop);

/// Latest stored time t with V(x0, t) <= 0, refined linearly in V against the
/// next later slice. std::nullopt when no slice contains x0.
std::optional<double> latest_start_time(const ReachAvoidSolution& solution,
                                        std::span<const double> x0);

struct TrajectorySample {
  double t = 0.0;
  State state;
  Control control;  // held over [t, t_next)
};

struct Trajectory {
  std::vector<TrajectorySample> samples;  // strictly increasing t
  std::optional<double> arrival_time;

  double departure_time() const { return samples.front().t; }
  double end_time() const { return samples.back().t; }
  /// Leading `n` state coordinates at time t: parked at the first state before
  /// departure, at the last state afterwards, linear between samples.
  std::vector<double> position_at(double t, std::size_t n) const;
};

/// Integrates the optimal feedback from x0 starting at `depart` with RK4 at
/// step `sim_dt`, controls held over each step. The costate is the central
/// difference gradient of the time-nearest stored slice. Stops at the first
/// sample inside the target. Throws SynthesisError when the target is not
/// reached by the terminal time, and std::invalid_argument when x0 is not in
/// the reach-avoid set at `depart` (within one cell).
Trajectory synthesize_trajectory(const ReachAvoidSolution& solution, std::span<const double> x0,
                                 double depart, double sim_dt);

}  // namespace spp
