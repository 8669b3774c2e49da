#include "spp/field.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace spp {

namespace {

void require_same_grid(const ScalarField& a, const ScalarField& b) {
  if (!(a.grid() == b.grid())) throw std::invalid_argument("field: grid mismatch");
}

// Lower enclosing node and fractional offset along one axis.
struct Bracket {
  std::size_t lo;
  std::size_t hi;
  double frac;
};

Bracket bracket(const Axis& axis, double x, std::size_t dim) {
  const double h = axis.spacing();
  if (axis.periodic) {
    const double w = wrap_periodic(axis, x);
    double s = (w - axis.lower) / h;
    auto k = static_cast<std::size_t>(std::floor(s));
    if (k >= axis.count) k = axis.count - 1;
    return {k, (k + 1) % axis.count, s - static_cast<double>(k)};
  }
  const double slack = 1e-9 * h;
  if (!(x >= axis.lower - slack && x <= axis.upper + slack)) {
    throw std::out_of_range("interpolate: coordinate " + std::to_string(x) + " outside dim " +
                            std::to_string(dim) + " bounds [" + std::to_string(axis.lower) +
                            ", " + std::to_string(axis.upper) + "]");
  }
  double s = (x - axis.lower) / h;
  s = std::clamp(s, 0.0, static_cast<double>(axis.count - 1));
  auto k = static_cast<std::size_t>(std::floor(s));
  if (k >= axis.count - 1) k = axis.count - 2;
  return {k, k + 1, s - static_cast<double>(k)};
}

// Central difference along `d` at a node, one-sided at open boundaries.
double node_derivative(const ScalarField& f, const Index& idx, std::size_t d) {
  const Grid& g = f.grid();
  const Axis& a = g.axis(d);
  const std::size_t base = g.flat_index(std::span<const std::size_t>(idx.data(), g.dims()));
  const std::size_t stride = g.stride(d);
  const std::size_t k = idx[d];
  const double h = a.spacing();
  if (a.periodic) {
    const std::size_t kp = (k + 1) % a.count;
    const std::size_t km = (k + a.count - 1) % a.count;
    return (f[base + (kp - k) * stride] - f[base - (k - km) * stride]) / (2.0 * h);
  }
  if (k == 0) return (f[base + stride] - f[base]) / h;
  if (k == a.count - 1) return (f[base] - f[base - stride]) / h;
  return (f[base + stride] - f[base - stride]) / (2.0 * h);
}

}  // namespace

ScalarField::ScalarField(Grid grid, double fill, std::optional<double> time)
    : grid_(std::move(grid)), values_(grid_.num_nodes(), fill), time_(time) {
  if (!std::isfinite(fill)) throw std::invalid_argument("field: non-finite fill value");
}

ScalarField::ScalarField(Grid grid, std::vector<double> values, std::optional<double> time)
    : grid_(std::move(grid)), values_(std::move(values)), time_(time) {
  if (values_.size() != grid_.num_nodes()) {
    throw std::invalid_argument("field: expected " + std::to_string(grid_.num_nodes()) +
                                " values, got " + std::to_string(values_.size()));
  }
  if (!all_finite()) throw std::invalid_argument("field: non-finite entry");
}

bool ScalarField::all_finite() const {
  for (double v : values_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

ScalarField field_union(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a, b);
  ScalarField out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::min(a[i], b[i]);
  return out;
}

ScalarField field_intersect(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a, b);
  ScalarField out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(a[i], b[i]);
  return out;
}

ScalarField field_complement(const ScalarField& a) {
  ScalarField out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = -a[i];
  return out;
}

double interpolate(const ScalarField& field, std::span<const double> point) {
  const Grid& g = field.grid();
  const std::size_t n = g.dims();
  if (point.size() < n) throw std::invalid_argument("interpolate: point has too few coordinates");
  std::array<Bracket, kMaxDims> br{};
  for (std::size_t d = 0; d < n; ++d) br[d] = bracket(g.axis(d), point[d], d);

  double result = 0.0;
  for (std::size_t corner = 0; corner < (std::size_t{1} << n); ++corner) {
    double w = 1.0;
    std::size_t flat = 0;
    for (std::size_t d = 0; d < n; ++d) {
      const bool upper = (corner >> d) & 1U;
      w *= upper ? br[d].frac : 1.0 - br[d].frac;
      flat += (upper ? br[d].hi : br[d].lo) * g.stride(d);
    }
    if (w != 0.0) result += w * field[flat];
  }
  return result;
}

std::vector<double> gradient_at(const ScalarField& field, std::span<const double> point) {
  const Grid& g = field.grid();
  const std::size_t n = g.dims();
  if (point.size() < n) throw std::invalid_argument("gradient_at: point has too few coordinates");
  std::array<Bracket, kMaxDims> br{};
  for (std::size_t d = 0; d < n; ++d) br[d] = bracket(g.axis(d), point[d], d);

  std::vector<double> grad(n, 0.0);
  Index idx{};
  for (std::size_t corner = 0; corner < (std::size_t{1} << n); ++corner) {
    double w = 1.0;
    for (std::size_t d = 0; d < n; ++d) {
      const bool upper = (corner >> d) & 1U;
      w *= upper ? br[d].frac : 1.0 - br[d].frac;
      idx[d] = upper ? br[d].hi : br[d].lo;
    }
    if (w == 0.0) continue;
    for (std::size_t d = 0; d < n; ++d) grad[d] += w * node_derivative(field, idx, d);
  }
  return grad;
}

}  // namespace spp
