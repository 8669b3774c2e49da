#include "spp/shape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spp {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double circle_distance(const Circle& c, std::span<const double> p) {
  double sum = 0.0;
  for (std::size_t d = 0; d < c.center.size(); ++d) {
    const double diff = p[d] - c.center[d];
    sum += diff * diff;
  }
  return std::sqrt(sum) - c.radius;
}

// Exact box distance: outside uses the Euclidean distance to the nearest
// face/edge/corner, inside the negated distance to the nearest face.
double box_distance(const AxisRectangle& r, std::span<const double> p) {
  double outside_sq = 0.0;
  double inside = -std::numeric_limits<double>::infinity();
  for (std::size_t d = 0; d < r.lower.size(); ++d) {
    const double half = 0.5 * (r.upper[d] - r.lower[d]);
    const double mid = 0.5 * (r.upper[d] + r.lower[d]);
    const double q = std::abs(p[d] - mid) - half;
    if (q > 0.0) outside_sq += q * q;
    inside = std::max(inside, q);
  }
  return outside_sq > 0.0 ? std::sqrt(outside_sq) : std::min(inside, 0.0);
}

}  // namespace

void validate_shape(const Shape& shape) {
  std::visit(Overloaded{
                 [](const Circle& c) {
                   if (c.center.empty() || c.center.size() > 2) {
                     throw std::invalid_argument("circle: center must have 1 or 2 coordinates");
                   }
                   if (!(c.radius > 0.0)) throw std::invalid_argument("circle: radius must be > 0");
                 },
                 [](const AxisRectangle& r) {
                   if (r.lower.empty() || r.lower.size() > 2 || r.lower.size() != r.upper.size()) {
                     throw std::invalid_argument(
                         "rectangle: corners must have matching 1 or 2 coordinates");
                   }
                   for (std::size_t d = 0; d < r.lower.size(); ++d) {
                     if (!(r.upper[d] > r.lower[d])) {
                       throw std::invalid_argument("rectangle: upper corner must dominate lower");
                     }
                   }
                 },
             },
             shape);
}

std::size_t position_dims(const Shape& shape) {
  return std::visit(Overloaded{
                        [](const Circle& c) { return c.center.size(); },
                        [](const AxisRectangle& r) { return r.lower.size(); },
                    },
                    shape);
}

double signed_distance(const Shape& shape, std::span<const double> position) {
  return std::visit(Overloaded{
                        [&](const Circle& c) { return circle_distance(c, position); },
                        [&](const AxisRectangle& r) { return box_distance(r, position); },
                    },
                    shape);
}

ScalarField signed_distance(const Shape& shape, const Grid& grid) {
  validate_shape(shape);
  return extrude_positions(grid, position_dims(shape), [&](std::span<const double> p) {
    return signed_distance(shape, p);
  });
}

ScalarField union_signed_distance(std::span<const Shape> shapes, const Grid& grid,
                                  double empty_value) {
  if (shapes.empty()) return ScalarField(grid, empty_value);
  ScalarField out = signed_distance(shapes.front(), grid);
  for (const Shape& s : shapes.subspan(1)) out = field_union(out, signed_distance(s, grid));
  return out;
}

}  // namespace spp
