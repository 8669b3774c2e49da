#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "spp/planner.hpp"

namespace spp {

/// Reads and validates a scenario document. Throws ScenarioError naming the
/// offending JSON pointer (schema) or line/column (syntax), and
/// std::runtime_error when the file cannot be read.
Scenario load_scenario(const std::filesystem::path& path);
Scenario parse_scenario(const std::string& text);

// Binary value slice: "HJVISLC1", u32 dims, per dim (f64 lower, f64 upper,
// u32 count, u8 periodic), f64 time, then row-major f64 values. Little endian.
void write_value_slice(std::ostream& out, const ScalarField& field, double time);
void write_value_slice(const std::filesystem::path& path, const ScalarField& field, double time);
/// Throws std::runtime_error on a bad magic, truncated payload or trailing bytes.
ScalarField read_value_slice(std::istream& in);
ScalarField read_value_slice(const std::filesystem::path& path);

/// "%.17g" formatting; round-trips every double.
std::string format_real(double x);

/// Columns t, state..., control... ("t,x,y,theta,omega" for 3-D states).
/// Periodic coordinates are written wrapped into their axis range.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj, const Grid& grid);
/// Inverse of write_trajectory_csv. The arrival time is the last sample time.
Trajectory read_trajectory_csv(std::istream& in, std::size_t state_dims);

std::string report_json(const PlanResult& result, const Scenario& scenario);
void write_lst_summary(std::ostream& out, const PlanResult& result, const Scenario& scenario);

}  // namespace spp
