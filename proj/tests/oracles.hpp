#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

// Independent reference computations used only by the tests.
namespace oracle {

// Exact 1-D reach value for an integrator with speed s, target [c-r, c+r] and
// no obstacle, after backward time tau.
inline double integrator_value(double x, double c, double r, double s, double tau) {
  return std::max(std::abs(x - c) - s * tau, 0.0) - r;
}

// Discrete-time dynamic program on a uniform 1-D lattice: a node is in the
// reach-avoid set after k steps if some sequence of sampled controls reaches
// the target within k steps while never entering the obstacle. Positions off
// the lattice are resolved by linear interpolation of the previous value.
struct IntegratorDp {
  double lower, upper;
  std::size_t nodes;
  double max_speed;
  std::size_t controls;
  double dt;

  template <class L, class G>
  std::vector<double> run(L target, G obstacle, std::size_t steps) const {
    const double h = (upper - lower) / static_cast<double>(nodes - 1);
    std::vector<double> l(nodes), g(nodes), v(nodes);
    for (std::size_t i = 0; i < nodes; ++i) {
      const double x = lower + h * static_cast<double>(i);
      l[i] = target(x);
      g[i] = obstacle(x);
      v[i] = std::max(l[i], g[i]);
    }
    const auto sample = [&](const std::vector<double>& f, double x) {
      x = std::clamp(x, lower, upper);
      const double s = (x - lower) / h;
      const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(s), nodes - 2);
      const double w = s - static_cast<double>(k);
      return (1 - w) * f[k] + w * f[k + 1];
    };
    for (std::size_t step = 0; step < steps; ++step) {
      std::vector<double> next(nodes);
      for (std::size_t i = 0; i < nodes; ++i) {
        const double x = lower + h * static_cast<double>(i);
        double best = 1e300;
        for (std::size_t j = 0; j < controls; ++j) {
          const double u = max_speed * (-1.0 + 2.0 * static_cast<double>(j) /
                                                   static_cast<double>(controls - 1));
          best = std::min(best, sample(v, x + u * dt));
        }
        next[i] = std::max(g[i], std::min(l[i], best));
      }
      v = std::move(next);
    }
    return v;
  }
};

}  // namespace oracle
