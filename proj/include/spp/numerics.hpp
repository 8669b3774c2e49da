#pragma once

#include <cstddef>
#include <functional>
#include <span>

#include "spp/field.hpp"

namespace spp {

struct NumericsConfig {
  double cfl_factor = 0.5;
  int scheme_order = 1;  // 1: first-order upwind, 2: second-order ENO
  std::size_t slice_stride = 1;
  double horizon_cap = 5.0;

  /// Throws std::invalid_argument on out-of-range settings.
  void validate() const;
};

/// Backward (left) and forward (right) one-sided derivative approximations
/// along one dimension.
struct DerivativePair {
  ScalarField left;
  ScalarField right;
  std::size_t dim = 0;
};

/// Order 1 uses adjacent differences. Order 2 adds an ENO correction chosen
/// from the smaller of two second divided differences. Periodic dims wrap;
/// open boundaries extrapolate the field linearly.
DerivativePair one_sided_derivatives(const ScalarField& field, std::size_t dim, int order);

using HamiltonianFn =
    std::function<double(std::span<const double> state, std::span<const double> costate)>;

/// Global Lax-Friedrichs flux:
///   H(x, (left + right) / 2) - sum_d alpha_d * (right_d - left_d) / 2.
ScalarField lax_friedrichs_hamiltonian(const HamiltonianFn& hamiltonian,
                                       std::span<const DerivativePair> derivs,
                                       std::span<const double> alphas, const Grid& grid);

/// cfl_factor / sum_d(alpha_d / dx_d). Throws if every alpha is zero.
double cfl_timestep(std::span<const double> alphas, const Grid& grid, double cfl_factor);

/// Maps a value field to its numerical Hamiltonian field.
using NumericalHamiltonian = std::function<ScalarField(const ScalarField&)>;

/// max(g, min(l, v)) pointwise, in place.
void clamp_to_obstacles(ScalarField& v, const ScalarField& l, const ScalarField& g);

/// One backward step of the double-obstacle variational inequality:
/// V <- max(g, min(l, V - dt * Hhat(V))) advanced with two-stage TVD
/// Runge-Kutta, clamping after every stage. `l` and `g` are the fields at the
/// step's target time. Throws NumericalError when non-finite values appear.
ScalarField vi_backward_step(const ScalarField& value, const ScalarField& l, const ScalarField& g,
                             const NumericalHamiltonian& hamiltonian, double dt);

}  // namespace spp
