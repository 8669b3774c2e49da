#pragma once

#include <span>
#include <variant>
#include <vector>

#include "spp/field.hpp"

namespace spp {

/// Disk in the position subspace (an interval when the subspace is 1-D).
struct Circle {
  std::vector<double> center;
  double radius = 0.0;
};

/// Axis-aligned box in the position subspace.
struct AxisRectangle {
  std::vector<double> lower;
  std::vector<double> upper;
};

using Shape = std::variant<Circle, AxisRectangle>;

/// Throws std::invalid_argument unless the shape is well formed: 1 or 2 position
/// coordinates, positive radius, upper strictly above lower in every coordinate.
void validate_shape(const Shape& shape);

/// Number of position coordinates the shape lives in.
std::size_t position_dims(const Shape& shape);

/// Exact Euclidean signed distance from `position` to the shape boundary,
/// negative inside.
double signed_distance(const Shape& shape, std::span<const double> position);

/// Signed distance sampled on the grid. The shape constrains grid dims
/// [0, position_dims) and is extruded along the remaining dims.
ScalarField signed_distance(const Shape& shape, const Grid& grid);

/// Pointwise minimum of the signed distances to several shapes (union of the
/// shapes); `empty_value` everywhere when the list is empty.
ScalarField union_signed_distance(std::span<const Shape> shapes, const Grid& grid,
                                  double empty_value);

/// Fills a field whose value depends only on the leading `position_dims`
/// coordinates by evaluating `fn` once per position and copying along the rest.
template <typename Fn>
ScalarField extrude_positions(const Grid& grid, std::size_t position_dims, Fn&& fn);

}  // namespace spp

#include "spp/detail/extrude.hpp"
