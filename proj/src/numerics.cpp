#include "spp/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "spp/errors.hpp"

namespace spp {

void NumericsConfig::validate() const {
  if (!(cfl_factor > 0.0 && cfl_factor <= 1.0)) {
    throw std::invalid_argument("numerics: cfl_factor must lie in (0, 1]");
  }
  if (scheme_order != 1 && scheme_order != 2) {
    throw std::invalid_argument("numerics: scheme_order must be 1 or 2");
  }
  if (slice_stride == 0) throw std::invalid_argument("numerics: slice_stride must be positive");
  if (!(horizon_cap > 0.0)) throw std::invalid_argument("numerics: horizon_cap must be positive");
}

namespace {

constexpr std::size_t kGhost = 2;

// Copies one grid line into `buf` with two ghost nodes on each side.
void load_line(const ScalarField& f, const Axis& axis, std::size_t base, std::size_t stride,
               std::vector<double>& buf) {
  const std::size_t n = axis.count;
  for (std::size_t k = 0; k < n; ++k) buf[k + kGhost] = f[base + k * stride];
  for (std::size_t g = 1; g <= kGhost; ++g) {
    if (axis.periodic) {
      buf[kGhost - g] = buf[kGhost + n - g];
      buf[kGhost + n - 1 + g] = buf[kGhost + g - 1];
    } else {
      const double lo_slope = buf[kGhost + 1] - buf[kGhost];
      const double hi_slope = buf[kGhost + n - 1] - buf[kGhost + n - 2];
      buf[kGhost - g] = buf[kGhost] - static_cast<double>(g) * lo_slope;
      buf[kGhost + n - 1 + g] = buf[kGhost + n - 1] + static_cast<double>(g) * hi_slope;
    }
  }
}

double smaller_magnitude(double a, double b) { return std::abs(a) <= std::abs(b) ? a : b; }

}  // namespace

DerivativePair one_sided_derivatives(const ScalarField& field, std::size_t dim, int order) {
  const Grid& grid = field.grid();
  if (dim >= grid.dims()) throw std::invalid_argument("derivatives: dimension out of range");
  if (order != 1 && order != 2) throw std::invalid_argument("derivatives: order must be 1 or 2");
  const Axis& axis = grid.axis(dim);
  const std::size_t min_nodes = order == 1 ? 3 : 5;
  if (axis.count < min_nodes) {
    throw std::invalid_argument("derivatives: dim " + std::to_string(dim) + " needs at least " +
                                std::to_string(min_nodes) + " nodes for order " +
                                std::to_string(order));
  }

  const std::size_t n = axis.count;
  const std::size_t stride = grid.stride(dim);
  const std::size_t lines = grid.num_nodes() / n;
  const double h = axis.spacing();
  std::vector<double> left(grid.num_nodes());
  std::vector<double> right(grid.num_nodes());

#pragma omp parallel
  {
    std::vector<double> buf(n + 2 * kGhost);
#pragma omp for schedule(static)
    for (std::ptrdiff_t line = 0; line < static_cast<std::ptrdiff_t>(lines); ++line) {
      const auto l = static_cast<std::size_t>(line);
      const std::size_t base = (l / stride) * n * stride + l % stride;
      load_line(field, axis, base, stride, buf);
      for (std::size_t k = 0; k < n; ++k) {
        const std::size_t j = k + kGhost;
        double dl = (buf[j] - buf[j - 1]) / h;
        double dr = (buf[j + 1] - buf[j]) / h;
        if (order == 2) {
          const double d2m = (buf[j] - 2.0 * buf[j - 1] + buf[j - 2]) / (h * h);
          const double d2c = (buf[j + 1] - 2.0 * buf[j] + buf[j - 1]) / (h * h);
          const double d2p = (buf[j + 2] - 2.0 * buf[j + 1] + buf[j]) / (h * h);
          dl += 0.5 * h * smaller_magnitude(d2m, d2c);
          dr -= 0.5 * h * smaller_magnitude(d2c, d2p);
        }
        left[base + k * stride] = dl;
        right[base + k * stride] = dr;
      }
    }
  }
  return {ScalarField(grid, std::move(left)), ScalarField(grid, std::move(right)), dim};
}

ScalarField lax_friedrichs_hamiltonian(const HamiltonianFn& hamiltonian,
                                       std::span<const DerivativePair> derivs,
                                       std::span<const double> alphas, const Grid& grid) {
  const std::size_t nd = grid.dims();
  if (alphas.size() != nd) throw std::invalid_argument("lax_friedrichs: one alpha per dimension");
  std::array<const DerivativePair*, kMaxDims> by_dim{};
  for (const DerivativePair& p : derivs) {
    if (p.dim >= nd || !(p.left.grid() == grid) || !(p.right.grid() == grid)) {
      throw std::invalid_argument("lax_friedrichs: derivative pair does not match grid");
    }
    by_dim[p.dim] = &p;
  }
  for (std::size_t d = 0; d < nd; ++d) {
    if (by_dim[d] == nullptr) {
      throw std::invalid_argument("lax_friedrichs: missing derivative pair for dim " +
                                  std::to_string(d));
    }
  }

  std::vector<double> out(grid.num_nodes());
#pragma omp parallel
  {
    std::array<double, kMaxDims> state{};
    std::array<double, kMaxDims> costate{};
#pragma omp for schedule(static)
    for (std::ptrdiff_t node = 0; node < static_cast<std::ptrdiff_t>(out.size()); ++node) {
      const auto i = static_cast<std::size_t>(node);
      grid.node_state(i, state);
      double dissipation = 0.0;
      for (std::size_t d = 0; d < nd; ++d) {
        const double l = by_dim[d]->left[i];
        const double r = by_dim[d]->right[i];
        costate[d] = 0.5 * (l + r);
        dissipation += alphas[d] * 0.5 * (r - l);
      }
      out[i] = hamiltonian(std::span<const double>(state.data(), nd),
                           std::span<const double>(costate.data(), nd)) -
               dissipation;
    }
  }
  return ScalarField(grid, std::move(out));
}

double cfl_timestep(std::span<const double> alphas, const Grid& grid, double cfl_factor) {
  if (alphas.size() != grid.dims()) throw std::invalid_argument("cfl: one alpha per dimension");
  double rate = 0.0;
  for (std::size_t d = 0; d < alphas.size(); ++d) {
    if (alphas[d] < 0.0) throw std::invalid_argument("cfl: alphas must be nonnegative");
    rate += alphas[d] / grid.spacing(d);
  }
  if (rate == 0.0) throw std::invalid_argument("cfl: all alphas are zero");
  return cfl_factor / rate;
}

void clamp_to_obstacles(ScalarField& v, const ScalarField& l, const ScalarField& g) {
  if (!(v.grid() == l.grid()) || !(v.grid() == g.grid())) {
    throw std::invalid_argument("clamp: grid mismatch");
  }
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::max(g[i], std::min(l[i], v[i]));
}

namespace {

// Euler stage: v - dt * Hhat(v), left unclamped. Non-finite output throws.
std::vector<double> euler_stage(const ScalarField& v, const NumericalHamiltonian& hamiltonian,
                                double dt) {
  const ScalarField hhat = hamiltonian(v);
  if (!(hhat.grid() == v.grid())) throw std::invalid_argument("vi step: Hamiltonian grid mismatch");
  std::vector<double> out(v.size());
  bool finite = true;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = v[i] - dt * hhat[i];
    finite = finite && std::isfinite(out[i]);
  }
  if (!finite) throw NumericalError("non-finite value produced (CFL violation?)");
  return out;
}

}  // namespace

ScalarField vi_backward_step(const ScalarField& value, const ScalarField& l, const ScalarField& g,
                             const NumericalHamiltonian& hamiltonian, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("vi step: dt must be > 0");
  ScalarField stage1(value.grid(), euler_stage(value, hamiltonian, dt));
  clamp_to_obstacles(stage1, l, g);
  const std::vector<double> stage2 = euler_stage(stage1, hamiltonian, dt);
  ScalarField next = value;
  for (std::size_t i = 0; i < next.size(); ++i) {
    next[i] = std::max(g[i], std::min(l[i], stage2[i]));
    next[i] = 0.5 * value[i] + 0.5 * next[i];
  }
  clamp_to_obstacles(next, l, g);
  return next;
}

}  // namespace spp
