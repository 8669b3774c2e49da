#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace spp::cli {

enum ExitCode : int {
  kOk = 0,
  kError = 1,
  kInfeasible = 2,
  kUnsafe = 3,
};

struct PlanArgs {
  std::filesystem::path scenario;
  std::optional<std::filesystem::path> out_dir;
  std::optional<int> dump_vehicle;  // priority whose slices are written
  std::size_t dump_stride = 1;
  std::optional<double> check_dt;
};

struct SolveArgs {
  std::filesystem::path scenario;
  std::optional<std::string> model;
  std::optional<std::vector<double>> query;
  std::size_t convergence_levels = 0;
  std::optional<std::filesystem::path> out_dir;
};

int run_plan(const PlanArgs& args, std::ostream& out, std::ostream& err);
int run_solve_single(const SolveArgs& args, std::ostream& out, std::ostream& err);

/// Entry point for the `spp` executable.
int main(int argc, char** argv);

/// Parses "0.35" or "-0.5,0,0" into a state vector.
std::vector<double> parse_state(const std::string& text);

}  // namespace spp::cli
