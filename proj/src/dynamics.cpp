#include "spp/dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace spp {

namespace {

double sign_or_zero(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

void require_size(std::span<const double> v, std::size_t n, const char* what) {
  if (v.size() != n) {
    throw std::invalid_argument(std::string(what) + ": expected " + std::to_string(n) +
                                " components, got " + std::to_string(v.size()));
  }
}

double param(const ModelParams& params, const std::string& key) {
  const auto it = params.find(key);
  if (it == params.end()) throw std::invalid_argument("model: missing parameter '" + key + "'");
  return it->second;
}

}  // namespace

DubinsCar::DubinsCar(double speed, double max_turn_rate)
    : speed_(speed), max_turn_rate_(max_turn_rate) {
  if (!(speed > 0.0)) throw std::invalid_argument("dubins: speed must be positive");
  if (!(max_turn_rate > 0.0)) throw std::invalid_argument("dubins: max turn rate must be positive");
}

State DubinsCar::flow(std::span<const double> state, std::span<const double> control,
                      double /*t*/) const {
  require_size(state, 3, "dubins state");
  require_size(control, 1, "dubins control");
  if (std::abs(control[0]) > max_turn_rate_ * (1.0 + 1e-12)) {
    throw std::invalid_argument("dubins: turn rate outside [-omega_max, omega_max]");
  }
  return {speed_ * std::cos(state[2]), speed_ * std::sin(state[2]), control[0]};
}

double DubinsCar::optimized_hamiltonian(std::span<const double> state,
                                        std::span<const double> costate) const {
  return speed_ * (costate[0] * std::cos(state[2]) + costate[1] * std::sin(state[2])) -
         max_turn_rate_ * std::abs(costate[2]);
}

Control DubinsCar::optimal_control(std::span<const double> /*state*/,
                                   std::span<const double> costate) const {
  return {-max_turn_rate_ * sign_or_zero(costate[2])};
}

std::vector<double> DubinsCar::dissipation_bounds(const Grid& grid) const {
  if (grid.dims() != 3) throw std::invalid_argument("dubins: grid must be 3-dimensional");
  return {speed_, speed_, max_turn_rate_};
}

SingleIntegrator1D::SingleIntegrator1D(double max_speed) : max_speed_(max_speed) {
  if (!(max_speed > 0.0)) throw std::invalid_argument("integrator: max_speed must be positive");
}

State SingleIntegrator1D::flow(std::span<const double> state, std::span<const double> control,
                               double /*t*/) const {
  require_size(state, 1, "integrator state");
  require_size(control, 1, "integrator control");
  if (std::abs(control[0]) > max_speed_ * (1.0 + 1e-12)) {
    throw std::invalid_argument("integrator: control outside [-max_speed, max_speed]");
  }
  return {control[0]};
}

double SingleIntegrator1D::optimized_hamiltonian(std::span<const double> /*state*/,
                                                 std::span<const double> costate) const {
  return -max_speed_ * std::abs(costate[0]);
}

Control SingleIntegrator1D::optimal_control(std::span<const double> /*state*/,
                                            std::span<const double> costate) const {
  return {-max_speed_ * sign_or_zero(costate[0])};
}

std::vector<double> SingleIntegrator1D::dissipation_bounds(const Grid& grid) const {
  if (grid.dims() != 1) throw std::invalid_argument("integrator: grid must be 1-dimensional");
  return {max_speed_};
}

ModelRegistry::ModelRegistry() {
  add("dubins", [](const ModelParams& p) {
    return std::make_shared<const DubinsCar>(param(p, "v"), param(p, "omega_max"));
  });
  add("integrator1d", [](const ModelParams& p) {
    return std::make_shared<const SingleIntegrator1D>(param(p, "max_speed"));
  });
}

ModelRegistry& ModelRegistry::instance() {
  static ModelRegistry registry;
  return registry;
}

void ModelRegistry::add(const std::string& name, ModelFactory factory) {
  factories_[name] = std::move(factory);
}

bool ModelRegistry::contains(const std::string& name) const { return factories_.count(name) > 0; }

std::vector<std::string> ModelRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : factories_) out.push_back(name);
  return out;
}

std::shared_ptr<const DynamicsModel> ModelRegistry::create(const std::string& name,
                                                           const ModelParams& params) const {
  const auto it = factories_.find(name);
  if (it == factories_.end()) throw std::invalid_argument("unknown dynamics model '" + name + "'");
  return it->second(params);
}

std::shared_ptr<const DynamicsModel> make_model(const std::string& name,
                                                const ModelParams& params) {
  return ModelRegistry::instance().create(name, params);
}

}  // namespace spp
