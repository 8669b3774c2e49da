#pragma once

#include <stdexcept>

namespace spp {

template <typename Fn>
ScalarField extrude_positions(const Grid& grid, std::size_t position_dims, Fn&& fn) {
  if (position_dims == 0 || position_dims > grid.dims()) {
    throw std::invalid_argument("extrude_positions: position subspace does not fit the grid");
  }
  // Nodes sharing the leading coordinates form one contiguous block.
  const std::size_t block = grid.stride(position_dims - 1);
  const std::size_t planes = grid.num_nodes() / block;
  std::vector<double> values(grid.num_nodes());
  std::array<double, kMaxDims> state{};
  for (std::size_t p = 0; p < planes; ++p) {
    grid.node_state(p * block, state);
    const double v = fn(std::span<const double>(state.data(), position_dims));
    std::fill_n(values.begin() + static_cast<std::ptrdiff_t>(p * block), block, v);
  }
  return ScalarField(grid, std::move(values));
}

}  // namespace spp
