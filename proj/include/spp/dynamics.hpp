#pragma once

#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "spp/grid.hpp"

namespace spp {

using State = std::vector<double>;
using Control = std::vector<double>;

/// Control-affine vehicle model with a closed-form optimized Hamiltonian
///   H(x, p) = min_u p . f(x, u).
class DynamicsModel {
 public:
  virtual ~DynamicsModel() = default;

  virtual std::string name() const = 0;
  virtual std::size_t state_dims() const = 0;
  virtual std::size_t control_dims() const = 0;
  /// Leading state coordinates that are positions.
  virtual std::size_t position_dims() const = 0;

  /// State derivative. Throws std::invalid_argument for inadmissible controls.
  virtual State flow(std::span<const double> state, std::span<const double> control,
                     double t) const = 0;
  virtual double optimized_hamiltonian(std::span<const double> state,
                                       std::span<const double> costate) const = 0;
  /// Minimizer of p . f(x, u); ties break to the zero control.
  virtual Control optimal_control(std::span<const double> state,
                                  std::span<const double> costate) const = 0;
  /// Per-dimension global bounds on |dH/dp_d| over the grid.
  virtual std::vector<double> dissipation_bounds(const Grid& grid) const = 0;
};

/// Planar kinematic car: (v cos th, v sin th, w), |w| <= max_turn_rate.
class DubinsCar final : public DynamicsModel {
 public:
  DubinsCar(double speed, double max_turn_rate);

  double speed() const { return speed_; }
  double max_turn_rate() const { return max_turn_rate_; }

  std::string name() const override { return "dubins"; }
  std::size_t state_dims() const override { return 3; }
  std::size_t control_dims() const override { return 1; }
  std::size_t position_dims() const override { return 2; }
  State flow(std::span<const double> state, std::span<const double> control,
             double t) const override;
  double optimized_hamiltonian(std::span<const double> state,
                               std::span<const double> costate) const override;
  Control optimal_control(std::span<const double> state,
                          std::span<const double> costate) const override;
  std::vector<double> dissipation_bounds(const Grid& grid) const override;

 private:
  double speed_;
  double max_turn_rate_;
};

/// x' = u, |u| <= max_speed.
class SingleIntegrator1D final : public DynamicsModel {
 public:
  explicit SingleIntegrator1D(double max_speed);

  double max_speed() const { return max_speed_; }

  std::string name() const override { return "integrator1d"; }
  std::size_t state_dims() const override { return 1; }
  std::size_t control_dims() const override { return 1; }
  std::size_t position_dims() const override { return 1; }
  State flow(std::span<const double> state, std::span<const double> control,
             double t) const override;
  double optimized_hamiltonian(std::span<const double> state,
                               std::span<const double> costate) const override;
  Control optimal_control(std::span<const double> state,
                          std::span<const double> costate) const override;
  std::vector<double> dissipation_bounds(const Grid& grid) const override;

 private:
  double max_speed_;
};

/// Named scalar parameters, e.g. {"v": 1, "omega_max": 1} or {"max_speed": 1}.
using ModelParams = std::map<std::string, double>;
using ModelFactory = std::function<std::shared_ptr<const DynamicsModel>(const ModelParams&)>;

/// Registry of model constructors keyed by name. "dubins" and "integrator1d"
/// are registered on first use.
class ModelRegistry {
 public:
  static ModelRegistry& instance();

  void add(const std::string& name, ModelFactory factory);
  bool contains(const std::string& name) const;
  std::vector<std::string> names() const;
  /// Throws std::invalid_argument for unknown names or missing parameters.
  std::shared_ptr<const DynamicsModel> create(const std::string& name,
                                              const ModelParams& params) const;

 private:
  ModelRegistry();
  std::map<std::string, ModelFactory> factories_;
};

std::shared_ptr<const DynamicsModel> make_model(const std::string& name, const ModelParams& params);

}  // namespace spp
