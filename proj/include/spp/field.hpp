#pragma once

#include <optional>
#include <span>
#include <vector>

#include "spp/grid.hpp"

namespace spp {

/// One value per grid node, in the grid's row-major node order.
class ScalarField {
 public:
  /// Constant field.
  ScalarField(Grid grid, double fill, std::optional<double> time = std::nullopt);
  /// Throws std::invalid_argument if the length disagrees with the grid or any
  /// entry is non-finite.
  ScalarField(Grid grid, std::vector<double> values, std::optional<double> time = std::nullopt);

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  std::optional<double> time() const { return time_; }
  void set_time(std::optional<double> t) { time_ = t; }

  bool all_finite() const;

 private:
  Grid grid_;
  std::vector<double> values_;
  std::optional<double> time_;
};

/// Samples `fn(state)` at every node.
template <typename Fn>
ScalarField sample_field(const Grid& grid, Fn&& fn) {
  std::vector<double> values(grid.num_nodes());
  std::array<double, kMaxDims> state{};
  for (std::size_t i = 0; i < values.size(); ++i) {
    grid.node_state(i, state);
    values[i] = fn(std::span<const double>(state.data(), grid.dims()));
  }
  return ScalarField(grid, std::move(values));
}

// Set algebra on sub-zero level sets. All throw std::invalid_argument on grid mismatch.
ScalarField field_union(const ScalarField& a, const ScalarField& b);
ScalarField field_intersect(const ScalarField& a, const ScalarField& b);
ScalarField field_complement(const ScalarField& a);

/// Multilinear interpolation over the 2^n enclosing nodes. Periodic dims are
/// wrapped; a point outside a non-periodic dim throws std::out_of_range.
double interpolate(const ScalarField& field, std::span<const double> point);

/// Central-difference gradient evaluated at the enclosing nodes (one-sided at
/// non-periodic boundaries), then multilinearly interpolated to `point`.
std::vector<double> gradient_at(const ScalarField& field, std::span<const double> point);

}  // namespace spp
