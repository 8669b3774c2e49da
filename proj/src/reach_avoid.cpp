#include "spp/reach_avoid.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "spp/errors.hpp"

namespace spp {

// ---------------------------------------------------------------------------
// TimeVaryingField

TimeVaryingField TimeVaryingField::constant(ScalarField field) {
  TimeVaryingField out(field.grid());
  out.constant_ = std::make_shared<const ScalarField>(std::move(field));
  return out;
}

TimeVaryingField TimeVaryingField::from_function(Grid grid, FieldFn field_fn, PointFn point_fn) {
  if (!field_fn) throw std::invalid_argument("time-varying field: empty callback");
  TimeVaryingField out(std::move(grid));
  out.field_fn_ = std::move(field_fn);
  out.point_fn_ = std::move(point_fn);
  return out;
}

TimeVaryingField TimeVaryingField::from_table(std::vector<ScalarField> fields) {
  if (fields.empty()) throw std::invalid_argument("time-varying field: empty table");
  for (const ScalarField& f : fields) {
    if (!f.time() || !(f.grid() == fields.front().grid())) {
      throw std::invalid_argument("time-varying field: table entries need times and one grid");
    }
  }
  std::sort(fields.begin(), fields.end(),
            [](const ScalarField& a, const ScalarField& b) { return *a.time() < *b.time(); });
  auto table = std::make_shared<const std::vector<ScalarField>>(std::move(fields));
  const Grid grid = table->front().grid();
  return from_function(grid, [table](double t) {
    const auto& tab = *table;
    if (t <= *tab.front().time()) return tab.front();
    if (t >= *tab.back().time()) return tab.back();
    const auto hi = std::upper_bound(tab.begin(), tab.end(), t, [](double x, const ScalarField& f) {
      return x < *f.time();
    });
    const ScalarField& b = *hi;
    const ScalarField& a = *(hi - 1);
    const double w = (t - *a.time()) / (*b.time() - *a.time());
    ScalarField out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (1.0 - w) * a[i] + w * b[i];
    out.set_time(t);
    return out;
  });
}

ScalarField TimeVaryingField::at(double t) const {
  if (constant_) {
    ScalarField f = *constant_;
    f.set_time(t);
    return f;
  }
  ScalarField f = field_fn_(t);
  if (!(f.grid() == grid_)) throw std::invalid_argument("time-varying field: callback grid mismatch");
  f.set_time(t);
  return f;
}

double TimeVaryingField::value_at(double t, std::span<const double> point) const {
  if (constant_) return interpolate(*constant_, point);
  if (point_fn_) return point_fn_(t, point);
  return interpolate(field_fn_(t), point);
}

// ---------------------------------------------------------------------------
// Stop rules

StopRule StopRule::fixed_horizon(double horizon) {
  StopRule r;
  r.kind = Kind::FixedHorizon;
  r.horizon = horizon;
  return r;
}

StopRule StopRule::query_entry(State query, double horizon, std::size_t extra_steps) {
  StopRule r;
  r.kind = Kind::QueryEntry;
  r.query = std::move(query);
  r.horizon = horizon;
  r.extra_steps = extra_steps;
  return r;
}

StopRule StopRule::converged(double tolerance, double horizon) {
  StopRule r;
  r.kind = Kind::Converged;
  r.tolerance = tolerance;
  r.horizon = horizon;
  return r;
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::HorizonReached: return "horizon_reached";
    case SolveStatus::QueryReached: return "query_reached";
    case SolveStatus::Converged: return "converged";
    case SolveStatus::InfeasibleWithinHorizon: return "infeasible_within_horizon";
  }
  return "unknown";
}

const Slice& ReachAvoidSolution::nearest(double t) const {
  // Slices are sorted by decreasing time.
  const auto it = std::lower_bound(slices.begin(), slices.end(), t,
                                   [](const Slice& s, double x) { return s.time > x; });
  if (it == slices.begin()) return slices.front();
  if (it == slices.end()) return slices.back();
  const Slice& later = *(it - 1);
  return (later.time - t) <= (t - it->time) ? later : *it;
}

// ---------------------------------------------------------------------------
// Backward solve

NumericalHamiltonian backward_hamiltonian(std::shared_ptr<const DynamicsModel> model,
                                          const Grid& grid, int scheme_order) {
  if (model->state_dims() != grid.dims()) {
    throw std::invalid_argument("solve: model state dimension does not match grid");
  }
  std::vector<double> alphas = model->dissipation_bounds(grid);
  HamiltonianFn negated = [model](std::span<const double> x, std::span<const double> p) {
    return -model->optimized_hamiltonian(x, p);
  };
  return [grid, alphas, negated, scheme_order](const ScalarField& v) {
    std::vector<DerivativePair> derivs;
    derivs.reserve(grid.dims());
    for (std::size_t d = 0; d < grid.dims(); ++d) {
      derivs.push_back(one_sided_derivatives(v, d, scheme_order));
    }
    return lax_friedrichs_hamiltonian(negated, derivs, alphas, grid);
  };
}

namespace {

double max_abs_change(const ScalarField& a, const ScalarField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

#ifndef NDEBUG
void assert_clamped(const ScalarField& v, const ScalarField& l, const ScalarField& g) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    assert(v[i] >= g[i] && v[i] <= std::max(l[i], g[i]));
  }
}
#endif

}  // namespace

ReachAvoidSolution solve(std::shared_ptr<const DynamicsModel> model, const Grid& grid,
                         const TimeVaryingField& target, const TimeVaryingField& constraint,
                         double terminal_time, const NumericsConfig& config,
                         const StopRule& stop) {
  config.validate();
  if (!model) throw std::invalid_argument("solve: no dynamics model");
  if (!(target.grid() == grid) || !(constraint.grid() == grid)) {
    throw std::invalid_argument("solve: target/constraint fields are not on the solver grid");
  }
  const bool static_fields = target.time_invariant() && constraint.time_invariant();
  if (stop.kind == StopRule::Kind::Converged && !static_fields) {
    throw std::invalid_argument("solve: convergence stop requires time-invariant l and g");
  }
  if (stop.kind == StopRule::Kind::QueryEntry && stop.query.size() != grid.dims()) {
    throw std::invalid_argument("solve: query state dimension does not match grid");
  }

  const double horizon =
      stop.horizon > 0.0 ? std::min(stop.horizon, config.horizon_cap) : config.horizon_cap;
  const double end_time = terminal_time - horizon;
  const NumericalHamiltonian hamiltonian = backward_hamiltonian(model, grid, config.scheme_order);
  const double dt = cfl_timestep(model->dissipation_bounds(grid), grid, config.cfl_factor);

  ReachAvoidSolution sol;
  sol.model = model;
  sol.terminal_time = terminal_time;
  sol.time_step = dt;
  sol.target = std::make_shared<const TimeVaryingField>(target);
  sol.constraint = std::make_shared<const TimeVaryingField>(constraint);

  ScalarField l = target.at(terminal_time);
  ScalarField g = constraint.at(terminal_time);
  ScalarField v = field_intersect(l, g);
  v.set_time(terminal_time);
  sol.slices.push_back({terminal_time, v});

  const bool want_query = stop.kind == StopRule::Kind::QueryEntry;
  std::optional<std::size_t> entered_at;
  if (want_query && interpolate(v, stop.query) <= 0.0) entered_at = 0;

  double t = terminal_time;
  std::size_t step = 0;
  bool last_stored = true;
  bool done = want_query && entered_at && stop.extra_steps == 0;
  sol.status = SolveStatus::HorizonReached;

  while (!done && t - end_time > 1e-12 * dt) {
    double h = std::min(dt, t - end_time);
    double t_next = t - h;
    if (t_next - end_time < 1e-9 * dt) {
      t_next = end_time;
      h = t - end_time;
    }
    if (!target.time_invariant()) l = target.at(t_next);
    if (!constraint.time_invariant()) g = constraint.at(t_next);

    ScalarField next = [&] {
      try {
        return vi_backward_step(v, l, g, hamiltonian, h);
      } catch (const NumericalError& e) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "solve aborted at t = " << t_next << ": " << e.what();
        throw NumericalError(msg.str());
      }
    }();
#ifndef NDEBUG
    assert_clamped(next, l, g);
#endif
    ++step;
    const double change = stop.kind == StopRule::Kind::Converged ? max_abs_change(next, v) : 0.0;
    v = std::move(next);
    v.set_time(t_next);
    t = t_next;

    bool force_store = false;
    if (want_query && !entered_at && interpolate(v, stop.query) <= 0.0) {
      entered_at = step;
      force_store = true;
    }
    if (want_query && entered_at && step - *entered_at >= stop.extra_steps) {
      sol.status = SolveStatus::QueryReached;
      done = true;
    }
    if (stop.kind == StopRule::Kind::Converged && change < stop.tolerance) {
      sol.status = SolveStatus::Converged;
      done = true;
    }
    last_stored = force_store || step % config.slice_stride == 0;
    if (last_stored) sol.slices.push_back({t, v});
  }
  if (!last_stored) sol.slices.push_back({t, v});
  sol.steps = step;

  if (want_query && !done) {
    sol.status = entered_at ? SolveStatus::QueryReached : SolveStatus::InfeasibleWithinHorizon;
  }
  if (want_query && entered_at && *entered_at == 0) sol.status = SolveStatus::QueryReached;
  return sol;
}

// ---------------------------------------------------------------------------
// Latest start time

std::optional<double> latest_start_time(const ReachAvoidSolution& solution,
                                        std::span<const double> x0) {
  if (solution.slices.empty()) throw std::invalid_argument("latest_start_time: empty solution");
  double later_value = 0.0;
  for (std::size_t k = 0; k < solution.slices.size(); ++k) {
    const Slice& s = solution.slices[k];
    const double value = interpolate(s.value, x0);  // throws std::out_of_range
    if (value <= 0.0) {
      if (k == 0) return s.time;
      const double later_time = solution.slices[k - 1].time;
      return s.time + (later_time - s.time) * (-value) / (later_value - value);
    }
    later_value = value;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Trajectories

std::vector<double> Trajectory::position_at(double t, std::size_t n) const {
  if (samples.empty()) throw std::logic_error("trajectory: no samples");
  const auto take = [n](const State& s) { return std::vector<double>(s.begin(), s.begin() + n); };
  if (t <= samples.front().t) return take(samples.front().state);
  if (t >= samples.back().t) return take(samples.back().state);
  const auto hi = std::upper_bound(samples.begin(), samples.end(), t,
                                   [](double x, const TrajectorySample& s) { return x < s.t; });
  const TrajectorySample& b = *hi;
  const TrajectorySample& a = *(hi - 1);
  const double w = (t - a.t) / (b.t - a.t);
  std::vector<double> p(n);
  for (std::size_t d = 0; d < n; ++d) p[d] = (1.0 - w) * a.state[d] + w * b.state[d];
  return p;
}

namespace {

State add_scaled(std::span<const double> x, const State& k, double h) {
  State out(x.begin(), x.end());
  for (std::size_t d = 0; d < out.size(); ++d) out[d] += h * k[d];
  return out;
}

State rk4_step(const DynamicsModel& model, const State& x, const Control& u, double t, double h) {
  const State k1 = model.flow(x, u, t);
  const State k2 = model.flow(add_scaled(x, k1, 0.5 * h), u, t + 0.5 * h);
  const State k3 = model.flow(add_scaled(x, k2, 0.5 * h), u, t + 0.5 * h);
  const State k4 = model.flow(add_scaled(x, k3, h), u, t + h);
  State out = x;
  for (std::size_t d = 0; d < out.size(); ++d) {
    out[d] += h / 6.0 * (k1[d] + 2.0 * k2[d] + 2.0 * k3[d] + k4[d]);
  }
  return out;
}

}  // namespace

Trajectory synthesize_trajectory(const ReachAvoidSolution& solution, std::span<const double> x0,
                                 double depart, double sim_dt) {
  if (solution.slices.empty()) throw std::invalid_argument("synthesize: empty solution");
  if (!(sim_dt > 0.0)) throw std::invalid_argument("synthesize: sim_dt must be positive");
  const Grid& grid = solution.grid();
  const DynamicsModel& model = *solution.model;
  if (x0.size() != grid.dims()) throw std::invalid_argument("synthesize: x0 dimension mismatch");
  const double tf = solution.terminal_time;
  if (depart > tf || depart < solution.earliest_time() - 1e-9) {
    throw std::invalid_argument("synthesize: departure outside the solved horizon");
  }

  const double tolerance = grid.cell_diagonal(model.position_dims());
  const double v0 = interpolate(solution.nearest(depart).value, x0);
  if (v0 > tolerance) {
    throw std::invalid_argument("synthesize: x0 is not in the reach-avoid set at departure (V = " +
                                std::to_string(v0) + ")");
  }

  Trajectory traj;
  State x(x0.begin(), x0.end());
  const Control zero(model.control_dims(), 0.0);
  if (solution.target->value_at(depart, x) <= 0.0) {
    traj.samples.push_back({depart, x, zero});
    traj.arrival_time = depart;
    return traj;
  }

  std::vector<std::pair<double, double>> value_trace;  // (t, V) for diagnostics
  double t = depart;
  try {
    while (true) {
      const Slice& slice = solution.nearest(t);
      const std::vector<double> p = gradient_at(slice.value, x);
      const Control u = model.optimal_control(x, p);
      value_trace.emplace_back(t, interpolate(slice.value, x));
      traj.samples.push_back({t, x, u});

      double h = std::min(sim_dt, tf - t);
      double t_next = t + h;
      if (tf - t_next < 1e-9 * sim_dt) {
        t_next = tf;
        h = tf - t;
      }
      x = rk4_step(model, x, u, t, h);
      for (std::size_t d = 0; d < grid.dims(); ++d) {
        if (grid.axis(d).periodic) x[d] = wrap_periodic(grid.axis(d), x[d]);
      }
      t = t_next;
      if (solution.target->value_at(t, x) <= 0.0) {
        traj.samples.push_back({t, x, zero});
        traj.arrival_time = t;
        return traj;
      }
      if (t >= tf) break;
    }
  } catch (const std::out_of_range& e) {
    throw SynthesisError(std::string("synthesize: state left the grid: ") + e.what());
  }

  std::ostringstream msg;
  msg.precision(6);
  msg << "synthesize: target not reached by t = " << tf << "; V along path:";
  const std::size_t every = std::max<std::size_t>(1, value_trace.size() / 20);
  for (std::size_t k = 0; k < value_trace.size(); k += every) {
    msg << " (" << value_trace[k].first << ", " << value_trace[k].second << ")";
  }
  throw SynthesisError(msg.str());
}

}  // namespace spp
