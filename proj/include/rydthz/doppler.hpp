#ifndef RYDTHZ_DOPPLER_HPP
#define RYDTHZ_DOPPLER_HPP

#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include "rydthz/errors.hpp"
#include "rydthz/types.hpp"

namespace rydthz {

/// Thermal vapor parameters. The most probable speed is always derived from
/// (T, m), never stored, so it cannot drift out of sync.
struct VaporSpec {
  double temperature = 0.0;  // K
  double mass = 0.0;         // kg
  double density = 0.0;      // m^-3

  double most_probable_speed() const {
    return std::sqrt(2.0 * constants::kBoltzmann * temperature / mass);
  }
  void validate() const;
};

enum class VelocityRule {
  kGaussHermite,  // nodes/weights of the Maxwell-Boltzmann axial marginal
  kUniform,       // equispaced in v with normalized Gaussian weights
  kComposite,     // dense uniform core plus coarse uniform wings
};

struct VelocityNode {
  double velocity;  // m/s
  double weight;    // weights over a grid sum to 1
};

/// Gauss-Hermite quadrature rule for the axial Maxwell-Boltzmann
/// distribution; nodes are symmetric about zero and weights sum to 1.
std::vector<VelocityNode> velocity_grid(const VaporSpec& spec, int n_nodes);

/// Rule-selectable variant. The uniform rule spans [-v_max_in_u, v_max_in_u]
/// in units of the most probable speed and resolves narrow velocity-space
/// structure that the Gauss-Hermite nodes step over. The composite rule
/// concentrates most nodes in |v| <= v_inner, where driven resonances put
/// sub-m/s structure, and covers the thermal wings coarsely; weights are
/// Gaussian-weighted trapezoid panels, normalized to 1.
std::vector<VelocityNode> velocity_grid(const VaporSpec& spec, int n_nodes,
                                        VelocityRule rule,
                                        double v_max_in_u = 6.0,
                                        double v_inner = 80.0);

/// Effective Doppler linewidth |k| u of the given wavevector magnitude.
double effective_linewidth(const VaporSpec& spec, double wavevector);

namespace detail {
inline bool value_finite(double v) { return std::isfinite(v); }
inline bool value_finite(const Complex& v) {
  return std::isfinite(v.real()) && std::isfinite(v.imag());
}
template <typename Derived>
bool value_finite(const Eigen::MatrixBase<Derived>& m) {
  return m.allFinite();
}
}  // namespace detail

/// Weighted average of f over the velocity grid, reduced in grid order so
/// the result is bit-stable no matter how callers schedule the evaluations.
template <typename F>
auto doppler_average(F&& f, std::span<const VelocityNode> grid)
    -> decltype(f(0.0)) {
  using Value = decltype(f(0.0));
  Value sum = Value{};
  for (size_t i = 0; i < grid.size(); ++i) {
    Value v = f(grid[i].velocity);
    if (!detail::value_finite(v)) {
      throw PhysicsError("doppler_average: non-finite value at node " +
                         std::to_string(i) + " (v = " +
                         std::to_string(grid[i].velocity) + " m/s)");
    }
    sum += grid[i].weight * v;
  }
  return sum;
}

template <typename F>
auto doppler_average(F&& f, const VaporSpec& spec, int n_nodes)
    -> decltype(f(0.0)) {
  const auto grid = velocity_grid(spec, n_nodes);
  return doppler_average(std::forward<F>(f),
                         std::span<const VelocityNode>(grid));
}

}  // namespace rydthz

#endif  // RYDTHZ_DOPPLER_HPP
