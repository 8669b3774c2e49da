#include "spp/grid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace spp {

Grid::Grid(std::vector<Axis> axes) : axes_(std::move(axes)) {
  if (axes_.empty() || axes_.size() > kMaxDims) {
    throw std::invalid_argument("grid: dimension count must be in [1, " +
                                std::to_string(kMaxDims) + "]");
  }
  for (std::size_t d = 0; d < axes_.size(); ++d) {
    const Axis& a = axes_[d];
    if (a.count < 3) {
      throw std::invalid_argument("grid: dim " + std::to_string(d) + " needs at least 3 nodes");
    }
    if (!(a.upper > a.lower) || !std::isfinite(a.lower) || !std::isfinite(a.upper)) {
      throw std::invalid_argument("grid: dim " + std::to_string(d) + " requires upper > lower");
    }
  }
  strides_.assign(axes_.size(), 1);
  for (std::size_t d = axes_.size() - 1; d > 0; --d) {
    strides_[d - 1] = strides_[d] * axes_[d].count;
  }
  num_nodes_ = strides_[0] * axes_[0].count;
}

std::size_t Grid::flat_index(std::span<const std::size_t> multi) const {
  std::size_t flat = 0;
  for (std::size_t d = 0; d < axes_.size(); ++d) flat += multi[d] * strides_[d];
  return flat;
}

void Grid::unravel(std::size_t flat, std::span<std::size_t> multi) const {
  for (std::size_t d = 0; d < axes_.size(); ++d) {
    multi[d] = flat / strides_[d];
    flat -= multi[d] * strides_[d];
  }
}

void Grid::node_state(std::size_t flat, std::span<double> out) const {
  for (std::size_t d = 0; d < axes_.size(); ++d) {
    const std::size_t k = flat / strides_[d];
    flat -= k * strides_[d];
    out[d] = axes_[d].node(k);
  }
}

double Grid::cell_diagonal(std::size_t n) const {
  double sum = 0.0;
  for (std::size_t d = 0; d < n && d < axes_.size(); ++d) sum += spacing(d) * spacing(d);
  return std::sqrt(sum);
}

Grid make_grid(std::vector<Axis> axes) { return Grid(std::move(axes)); }

Grid refine(const Grid& grid) {
  std::vector<Axis> axes = grid.axes();
  for (Axis& a : axes) a.count = a.periodic ? 2 * a.count : 2 * (a.count - 1) + 1;
  return Grid(std::move(axes));
}

double wrap_periodic(const Axis& axis, double value) {
  const double period = axis.period();
  double r = std::fmod(value - axis.lower, period);
  if (r < 0.0) r += period;
  if (r >= period) r -= period;
  return axis.lower + r;
}

}  // namespace spp
