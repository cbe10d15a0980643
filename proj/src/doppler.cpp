#include "rydthz/doppler.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>

namespace rydthz {
namespace {

struct HermiteValue {
  double ratio;       // p_n / p_n' at x, for the Newton update
  double log_abs_pp;  // log |p_n'(x)|, for the weight
};

// Orthonormal Hermite recurrence (weight e^{-x^2}) with periodic rescaling,
// so it stays finite for n in the tens of thousands.
HermiteValue hermite_newton_terms(int n, double x) {
  double p1 = 0.7511255444649425;  // pi^(-1/4)
  double p2 = 0.0;
  double log_scale = 0.0;
  for (int j = 1; j <= n; ++j) {
    const double p3 = p2;
    p2 = p1;
    p1 = x * std::sqrt(2.0 / j) * p2 - std::sqrt((j - 1.0) / j) * p3;
    const double mag = std::abs(p1);
    if (mag > 1e100) {
      p1 *= 1e-100;
      p2 *= 1e-100;
      log_scale += std::log(1e100);
    } else if (mag > 0.0 && mag < 1e-100) {
      p1 *= 1e100;
      p2 *= 1e100;
      log_scale -= std::log(1e100);
    }
  }
  const double pp = std::sqrt(2.0 * n) * p2;
  return {p1 / pp, std::log(std::abs(pp)) + log_scale};
}

// Number of eigenvalues of the Hermite Jacobi matrix below x (Sturm count
// via the shifted LDL^T recurrence; diagonal zero, b_k^2 = k/2).
int sturm_count_below(int n, double x) {
  int count = 0;
  double d = -x;
  if (d < 0.0) ++count;
  for (int k = 1; k < n; ++k) {
    const double b2 = 0.5 * k;
    if (d == 0.0) d = 1e-300;
    d = -x - b2 / d;
    if (d < 0.0) ++count;
  }
  return count;
}

// Physicists' Gauss-Hermite nodes (x > 0 half, plus the center root for odd
// n) with normalized weights. Roots are isolated by bisection on the Sturm
// count and then polished by Newton; this stays reliable for very large n.
void gauss_hermite_half(int n, std::vector<double>& nodes,
                        std::vector<double>& weights) {
  const int half = (n + 1) / 2;
  nodes.assign(half, 0.0);
  weights.assign(half, 0.0);
  const double upper = std::sqrt(2.0 * n + 2.0);
  for (int i = 0; i < half; ++i) {
    // Ascending positive roots; for odd n the first is the center root 0.
    const int target = n - half + i;  // eigenvalue index in ascending order
    double lo = 0.0, hi = upper;
    while (hi - lo > 1e-6) {
      const double mid = 0.5 * (lo + hi);
      if (sturm_count_below(n, mid) <= target) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    double x = 0.5 * (lo + hi);
    HermiteValue hv{};
    for (int iter = 0; iter < 50; ++iter) {
      hv = hermite_newton_terms(n, x);
      x -= hv.ratio;
      if (std::abs(hv.ratio) <= 1e-15 * (1.0 + std::abs(x))) break;
    }
    hv = hermite_newton_terms(n, x);
    nodes[i] = x;
    // Raw weight 2 / p'^2; normalized by the zeroth moment sqrt(pi).
    const double log_w =
        std::log(2.0) - 2.0 * hv.log_abs_pp - 0.5 * std::log(constants::kPi);
    weights[i] = log_w < -745.0 ? 0.0 : std::exp(log_w);
  }
}

struct ScaledRule {
  std::vector<double> x;  // nodes in units of the most probable speed
  std::vector<double> w;  // normalized weights
};

const ScaledRule& cached_gauss_hermite(int n) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<ScaledRule>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return *it->second;

  auto rule = std::make_unique<ScaledRule>();
  if (n == 1) {
    rule->x = {0.0};
    rule->w = {1.0};
  } else {
    std::vector<double> half_x, half_w;
    gauss_hermite_half(n, half_x, half_w);
    const int half = static_cast<int>(half_x.size());
    const bool odd = (n % 2) != 0;
    rule->x.resize(n);
    rule->w.resize(n);
    if (odd) {
      // half_x[0] is the center root; pin it to exactly zero.
      rule->x[half - 1] = 0.0;
      rule->w[half - 1] = half_w[0];
      for (int i = 1; i < half; ++i) {
        rule->x[half - 1 + i] = half_x[i];
        rule->w[half - 1 + i] = half_w[i];
        rule->x[half - 1 - i] = -half_x[i];
        rule->w[half - 1 - i] = half_w[i];
      }
    } else {
      for (int i = 0; i < half; ++i) {
        rule->x[half + i] = half_x[i];
        rule->w[half + i] = half_w[i];
        rule->x[half - 1 - i] = -half_x[i];
        rule->w[half - 1 - i] = half_w[i];
      }
    }
    double total = 0.0;
    for (double w : rule->w) total += w;
    for (double& w : rule->w) w /= total;
  }
  const ScaledRule& ref = *rule;
  cache.emplace(n, std::move(rule));
  return ref;
}

}  // namespace

void VaporSpec::validate() const {
  if (!(temperature > 0.0)) {
    throw ConfigError("vapor temperature must be > 0 K");
  }
  if (!(mass > 0.0)) throw ConfigError("vapor atomic mass must be > 0 kg");
  if (!(density > 0.0)) throw ConfigError("vapor density must be > 0 m^-3");
}

std::vector<VelocityNode> velocity_grid(const VaporSpec& spec, int n_nodes) {
  return velocity_grid(spec, n_nodes, VelocityRule::kGaussHermite);
}

namespace {

// Gaussian-weighted trapezoid weights on an arbitrary symmetric node set.
std::vector<VelocityNode> weighted_panels(const std::vector<double>& nodes,
                                          double u) {
  const int n = static_cast<int>(nodes.size());
  std::vector<VelocityNode> grid(n);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const double left = i == 0 ? 0.0 : 0.5 * (nodes[i] - nodes[i - 1]);
    const double right =
        i == n - 1 ? 0.0 : 0.5 * (nodes[i + 1] - nodes[i]);
    const double v = nodes[i];
    const double w = std::exp(-(v / u) * (v / u)) * (left + right);
    grid[i] = {v, w};
    total += w;
  }
  for (auto& node : grid) node.weight /= total;
  return grid;
}

}  // namespace

std::vector<VelocityNode> velocity_grid(const VaporSpec& spec, int n_nodes,
                                        VelocityRule rule, double v_max_in_u,
                                        double v_inner) {
  spec.validate();
  if (n_nodes < 1) throw ConfigError("velocity_grid: n_nodes must be >= 1");
  const double u = spec.most_probable_speed();
  std::vector<VelocityNode> grid;
  grid.reserve(n_nodes);

  if (rule == VelocityRule::kGaussHermite) {
    const ScaledRule& r = cached_gauss_hermite(n_nodes);
    for (int i = 0; i < n_nodes; ++i) {
      grid.push_back({u * r.x[i], r.w[i]});
    }
    return grid;
  }

  if (!(v_max_in_u > 0.0)) {
    throw ConfigError("velocity_grid: v_max_in_u must be > 0");
  }
  if (n_nodes == 1) {
    grid.push_back({0.0, 1.0});
    return grid;
  }
  const double v_max = v_max_in_u * u;

  if (rule == VelocityRule::kUniform) {
    // Odd count keeps a node exactly at v = 0 and the set symmetric.
    const int n = (n_nodes % 2 == 0) ? n_nodes + 1 : n_nodes;
    std::vector<double> nodes(n);
    const double h = 2.0 * v_max / (n - 1);
    for (int i = 0; i < n; ++i) nodes[i] = -v_max + i * h;
    nodes[(n - 1) / 2] = 0.0;
    return weighted_panels(nodes, u);
  }

  // Composite: ~70% of nodes resolve the driven core, the rest cover the
  // Maxwell-Boltzmann wings.
  if (!(v_inner > 0.0)) {
    throw ConfigError("velocity_grid: v_inner must be > 0");
  }
  const double core = std::min(v_inner, 0.5 * v_max);
  int n_core = (7 * n_nodes) / 10;
  if (n_core % 2 == 0) ++n_core;
  n_core = std::max(n_core, 3);
  int n_wing = std::max((n_nodes - n_core) / 2, 2);  // per side

  std::vector<double> nodes;
  nodes.reserve(n_core + 2 * n_wing);
  const double wing_step = (v_max - core) / n_wing;
  for (int i = 0; i < n_wing; ++i) {
    nodes.push_back(-v_max + i * wing_step);
  }
  const double core_step = 2.0 * core / (n_core - 1);
  for (int i = 0; i < n_core; ++i) nodes.push_back(-core + i * core_step);
  nodes[n_wing + (n_core - 1) / 2] = 0.0;
  for (int i = 0; i < n_wing; ++i) {
    nodes.push_back(core + (i + 1) * wing_step);
  }
  return weighted_panels(nodes, u);
}

double effective_linewidth(const VaporSpec& spec, double wavevector) {
  spec.validate();
  if (wavevector < 0.0) {
    throw ConfigError("effective_linewidth: wavevector must be >= 0");
  }
  return wavevector * spec.most_probable_speed();
}

}  // namespace rydthz
