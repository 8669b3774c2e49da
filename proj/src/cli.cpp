#include "spp/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "spp/errors.hpp"
#include "spp/io.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace spp::cli {

namespace {

namespace fs = std::filesystem;

void apply_thread_cap() {
#ifdef _OPENMP
  if (const char* env = std::getenv("SPP_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) omp_set_num_threads(n);
  }
#endif
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot create '" + path.string() + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

std::string slice_name(std::size_t k) {
  std::ostringstream s;
  s << "slice_" << std::setw(5) << std::setfill('0') << k << ".bin";
  return s.str();
}

// Zero crossings of a 1-D field, as [lo, hi] intervals of the sub-zero set.
std::vector<std::pair<double, double>> sublevel_intervals(const ScalarField& f) {
  const Axis& a = f.grid().axis(0);
  std::vector<std::pair<double, double>> out;
  std::optional<double> start;
  for (std::size_t k = 0; k < a.count; ++k) {
    const bool inside = f[k] <= 0.0;
    if (inside && !start) {
      start = k == 0 ? a.node(0)
                     : a.node(k - 1) + a.spacing() * f[k - 1] / (f[k - 1] - f[k]);
    }
    if (!inside && start) {
      out.emplace_back(*start, a.node(k - 1) + a.spacing() * f[k - 1] / (f[k - 1] - f[k]));
      start.reset();
    }
  }
  if (start) out.emplace_back(*start, a.node(a.count - 1));
  return out;
}

struct SingleSetup {
  std::shared_ptr<const DynamicsModel> model;
  TimeVaryingField target;
  TimeVaryingField constraint;
  double terminal_time;
  double horizon;
};

SingleSetup single_setup(const Scenario& sc, const Grid& grid, const std::optional<std::string>& model) {
  const VehicleSpec& v = sc.vehicles.front();
  auto m = make_model(model.value_or(v.model), v.params);
  if (m->state_dims() != grid.dims()) {
    throw std::invalid_argument("model '" + m->name() + "' does not match the grid dimension");
  }
  return {m, TimeVaryingField::constant(signed_distance(Shape{v.target}, grid)),
          TimeVaryingField::constant(
              field_complement(union_signed_distance(sc.obstacles, grid, kFarField))),
          v.scheduled_arrival, v.scheduled_arrival - v.earliest_start};
}

// Closed-form value for the 1-D integrator reaching an interval with no obstacles.
double integrator_exact(double x, double center, double radius, double speed, double elapsed) {
  return std::max(std::abs(x - center) - speed * elapsed, 0.0) - radius;
}

}  // namespace

std::vector<double> parse_state(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    std::size_t used = 0;
    const double x = std::stod(cell, &used);
    if (used == 0) throw std::invalid_argument("bad state component '" + cell + "'");
    out.push_back(x);
  }
  if (out.empty()) throw std::invalid_argument("empty state");
  return out;
}

int run_plan(const PlanArgs& args, std::ostream& out, std::ostream& err) {
  try {
    const Scenario sc = load_scenario(args.scenario);
    if (args.out_dir) fs::create_directories(*args.out_dir);
    if (args.dump_vehicle && !args.out_dir) {
      throw std::invalid_argument("--dump-slices requires --out");
    }

    std::ostringstream log;
    log << "scenario " << args.scenario.string() << "\n";
    for (const std::string& r : sc.reconstructed) log << "reconstructed: " << r << "\n";
    auto clock_start = std::chrono::steady_clock::now();
    auto observer = [&](const VehicleSolveInfo& info) {
      const auto now = std::chrono::steady_clock::now();
      const double secs = std::chrono::duration<double>(now - clock_start).count();
      clock_start = now;
      log << "vehicle " << info.spec.priority << ": " << to_string(info.solution.status) << ", "
          << info.solution.steps << " steps, dt " << format_real(info.solution.time_step) << ", "
          << info.solution.slices.size() << " slices, " << std::fixed << std::setprecision(2)
          << secs << " s\n"
          << std::defaultfloat;
      if (args.dump_vehicle && *args.dump_vehicle == info.spec.priority) {
        const fs::path dir = *args.out_dir / ("slices_v" + std::to_string(info.spec.priority));
        fs::create_directories(dir);
        const auto& slices = info.solution.slices;
        for (std::size_t k = 0; k < slices.size(); k += args.dump_stride) {
          write_value_slice(dir / slice_name(k), slices[k].value, slices[k].time);
        }
      }
    };

    PlanResult result = plan_all(sc, observer);
    if (args.check_dt) result.report = verify_plan(result, sc, *args.check_dt);

    std::ostringstream summary;
    write_lst_summary(summary, result, sc);
    out << summary.str();
    for (const std::string& v : result.report.violations) err << "violation: " << v << "\n";
    for (const VehiclePlan& v : result.vehicles) {
      if (!v.feasible) err << "vehicle " << v.priority << ": " << v.status << "\n";
      log << "vehicle " << v.priority << ": " << v.status << "\n";
    }

    if (args.out_dir) {
      for (const VehiclePlan& v : result.vehicles) {
        if (!v.feasible) continue;
        std::ostringstream csv;
        write_trajectory_csv(csv, v.trajectory, sc.grid);
        write_text(*args.out_dir / ("trajectory_v" + std::to_string(v.priority) + ".csv"), csv.str());
      }
      write_text(*args.out_dir / "lst_summary.csv", summary.str());
      write_text(*args.out_dir / "report.json", report_json(result, sc));
      write_text(*args.out_dir / "plan.log", log.str());
    }

    if (!result.report.safe()) return kUnsafe;
    if (!result.all_feasible()) return kInfeasible;
    return kOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kError;
  }
}

int run_solve_single(const SolveArgs& args, std::ostream& out, std::ostream& err) {
  try {
    const Scenario sc = load_scenario(args.scenario);
    const VehicleSpec& v = sc.vehicles.front();
    const SingleSetup setup = single_setup(sc, sc.grid, args.model);
    const ReachAvoidSolution sol =
        solve(setup.model, sc.grid, setup.target, setup.constraint, setup.terminal_time,
              sc.numerics, StopRule::fixed_horizon(setup.horizon));

    out << std::setprecision(10);
    out << "model " << setup.model->name() << ", status " << to_string(sol.status) << ", steps "
        << sol.steps << ", dt " << sol.time_step << ", slices " << sol.slices.size() << "\n";
    const Slice& last = sol.slices.back();
    if (sc.grid.dims() == 1) {
      out << "RA(" << last.time << "):";
      for (const auto& [lo, hi] : sublevel_intervals(last.value)) out << " [" << lo << ", " << hi << "]";
      out << "\n";
    } else {
      std::size_t inside = 0;
      for (double x : last.value.values()) inside += x <= 0.0 ? 1 : 0;
      out << "RA(" << last.time << "): " << inside << " of " << last.value.size() << " nodes\n";
    }
    if (args.out_dir) {
      fs::create_directories(*args.out_dir);
      for (std::size_t k = 0; k < sol.slices.size(); ++k) {
        write_value_slice(*args.out_dir / slice_name(k), sol.slices[k].value, sol.slices[k].time);
      }
    }

    int code = kOk;
    if (args.query) {
      const auto lst = latest_start_time(sol, *args.query);
      if (lst) {
        out << "latest start " << *lst << "\n";
      } else {
        out << "latest start: infeasible within horizon\n";
        code = kInfeasible;
      }
    }

    if (args.convergence_levels >= 2) {
      const auto* integ = dynamic_cast<const SingleIntegrator1D*>(setup.model.get());
      const bool analytic = integ != nullptr && sc.obstacles.empty();
      std::vector<ReachAvoidSolution> levels;
      Grid grid = sc.grid;
      for (std::size_t k = 0; k < args.convergence_levels; ++k) {
        if (k > 0) grid = refine(grid);
        const SingleSetup s = single_setup(sc, grid, args.model);
        levels.push_back(solve(s.model, grid, s.target, s.constraint, s.terminal_time,
                               sc.numerics, StopRule::fixed_horizon(s.horizon)));
      }
      std::vector<double> errors;
      for (std::size_t k = 0; k < levels.size(); ++k) {
        const ScalarField& f = levels[k].slices.back().value;
        const double elapsed = levels[k].terminal_time - levels[k].slices.back().time;
        double e = 0.0;
        if (analytic) {
          for (std::size_t i = 0; i < f.size(); ++i) {
            const double x = f.grid().axis(0).node(i);
            e = std::max(e, std::abs(f[i] - integrator_exact(x, v.target.center[0], v.target.radius,
                                                             integ->max_speed(), elapsed)));
          }
        } else if (k + 1 < levels.size()) {
          const ScalarField& fine = levels[k + 1].slices.back().value;
          std::array<double, kMaxDims> x{};
          for (std::size_t i = 0; i < f.size(); ++i) {
            f.grid().node_state(i, x);
            e = std::max(e, std::abs(f[i] - interpolate(fine, std::span<const double>(x.data(), f.grid().dims()))));
          }
        } else {
          break;
        }
        errors.push_back(e);
        out << "level " << k << " spacing0 " << f.grid().spacing(0) << " error " << e
            << (analytic ? " (vs exact)" : " (vs next level)") << "\n";
      }
      for (std::size_t k = 0; k + 1 < errors.size(); ++k) {
        out << "error ratio " << k << "/" << k + 1 << " = " << errors[k] / errors[k + 1] << "\n";
      }
      if (errors.size() < 2) out << "error ratio: n/a (needs more levels)\n";
    }
    return code;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kError;
  }
}

int main(int argc, char** argv) {
  apply_thread_cap();
  CLI::App app{"Sequential multi-vehicle planning with reach-avoid sets"};
  app.require_subcommand(1);

  PlanArgs plan;
  std::string plan_out;
  std::string dump;
  double check_dt = 0.0;
  auto* plan_cmd = app.add_subcommand("plan", "Plan every vehicle of a scenario in priority order");
  plan_cmd->add_option("scenario", plan.scenario, "Scenario JSON")->required();
  plan_cmd->add_option("--out", plan_out, "Output directory");
  plan_cmd->add_option("--dump-slices", dump, "Write value slices of vehicle K (vK)");
  plan_cmd->add_option("--stride", plan.dump_stride, "Write every N-th slice")->check(CLI::PositiveNumber);
  plan_cmd->add_option("--check-dt", check_dt, "Verification time step")->check(CLI::PositiveNumber);

  SolveArgs solve_args;
  std::string solve_out;
  std::string model;
  std::string query;
  auto* solve_cmd = app.add_subcommand("solve", "Single reach-avoid solve for the first vehicle");
  solve_cmd->add_option("scenario", solve_args.scenario, "Scenario JSON")->required();
  solve_cmd->add_option("--model", model, "Dynamics model")
      ->check(CLI::IsMember(ModelRegistry::instance().names()));
  solve_cmd->add_option("--query-lst", query, "State whose latest start time is printed");
  solve_cmd->add_option("--convergence", solve_args.convergence_levels,
                        "Number of grid levels for a refinement study");
  solve_cmd->add_option("--out", solve_out, "Directory for value slices");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kError;
  }

  try {
    if (plan_cmd->parsed()) {
      if (!plan_out.empty()) plan.out_dir = plan_out;
      if (!dump.empty()) {
        if (dump.size() < 2 || dump[0] != 'v') throw std::invalid_argument("--dump-slices expects vK");
        plan.dump_vehicle = std::stoi(dump.substr(1));
      }
      if (check_dt > 0.0) plan.check_dt = check_dt;
      return run_plan(plan, std::cout, std::cerr);
    }
    if (!model.empty()) solve_args.model = model;
    if (!query.empty()) solve_args.query = parse_state(query);
    if (!solve_out.empty()) solve_args.out_dir = solve_out;
    return run_solve_single(solve_args, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kError;
  }
}

}  // namespace spp::cli
