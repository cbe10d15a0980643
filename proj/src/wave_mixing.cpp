#include "rydthz/wave_mixing.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <optional>

#include "rydthz/ode.hpp"
#include "rydthz/parallel.hpp"

namespace rydthz {

namespace {

using constants::kEpsilon0;
using constants::kHbar;
using constants::kSpeedOfLight;

const DriveField& field_by_label(const std::vector<DriveField>& fields,
                                 FieldLabel label) {
  const DriveField* found = nullptr;
  for (const auto& f : fields) {
    if (f.label == label) {
      if (found != nullptr) {
        throw ConfigError(std::string("duplicate drive field ") +
                          field_name(label));
      }
      found = &f;
    }
  }
  if (found == nullptr) {
    throw ConfigError(std::string("missing drive field ") + field_name(label));
  }
  return *found;
}

std::vector<DriveField> with_probes_off(std::vector<DriveField> fields) {
  for (auto& f : fields) {
    if (f.label == FieldLabel::kS || f.label == FieldLabel::kT) {
      f.rabi = Complex(0.0, 0.0);
    }
  }
  return fields;
}

double coupling_g_squared(const LoopTransition& leg, double density) {
  return leg.frequency * leg.dipole * leg.dipole * density /
         (2.0 * kEpsilon0 * kHbar);
}

// Sector of density-matrix elements (x, m) with x in {4, 5}, m in {0..3}.
// With both probes off the Lindblad generator maps this sector to itself
// and the first-order response to the probes lives entirely inside it.
constexpr int kSectorDim = 8;

int sector_index(int x, int m) { return (x - 4) * 4 + m; }

Eigen::Matrix<Complex, kSectorDim, kSectorDim> sector_block(const MatXc& gen) {
  Eigen::Matrix<Complex, kSectorDim, kSectorDim> block;
  int rows[kSectorDim];
  for (int x = 4; x <= 5; ++x) {
    for (int m = 0; m < 4; ++m) rows[sector_index(x, m)] = vec_index(x, m);
  }
  for (int r = 0; r < kSectorDim; ++r) {
    for (int c = 0; c < kSectorDim; ++c) {
      block(r, c) = gen(rows[r], rows[c]);
    }
  }
  return block;
}

// Single-velocity response matrix, optionally reusing a cached probe-free
// steady state (valid whenever the swept parameter leaves levels 0..3
// untouched).
Mat2c response_at_velocity(const LevelScheme& scheme,
                           const std::vector<DriveField>& probe_free,
                           double velocity,
                           std::optional<Mat6c>& rho0_cache) {
  const Mat6c h0 = build_hamiltonian(scheme, probe_free, velocity);
  const MatXc gen = build_liouvillian(h0, scheme);
  if (!rho0_cache.has_value()) {
    rho0_cache = steady_state(gen, velocity).rho;
  }
  const Mat6c& rho0 = *rho0_cache;

  const auto block = sector_block(gen);
  const auto lu = block.partialPivLu();

  const Complex half_i(0.0, 0.5);
  Eigen::Matrix<Complex, kSectorDim, 1> src_s;
  Eigen::Matrix<Complex, kSectorDim, 1> src_t;
  src_s.setZero();
  src_t.setZero();
  // dL/dOmega_P rho0 restricted to the sector: -(i/2) |u><l| rho0.
  for (int m = 0; m < 4; ++m) {
    src_s(sector_index(5, m)) = -half_i * rho0(0, m);  // S drives 5<-0
    src_t(sector_index(4, m)) = -half_i * rho0(3, m);  // T drives 4<-3
  }
  const Eigen::Matrix<Complex, kSectorDim, 1> d_s =
      lu.solve((-src_s).eval());
  const Eigen::Matrix<Complex, kSectorDim, 1> d_t =
      lu.solve((-src_t).eval());

  Mat2c beta;
  beta(0, 0) = d_s(sector_index(5, 0));
  beta(1, 0) = d_s(sector_index(4, 3));
  beta(0, 1) = d_t(sector_index(5, 0));
  beta(1, 1) = d_t(sector_index(4, 3));
  return beta;
}

Mat2c averaged_response(const LevelScheme& scheme,
                        const std::vector<DriveField>& probe_free,
                        std::span<const VelocityNode> grid,
                        std::vector<std::optional<Mat6c>>& rho0_cache,
                        int threads) {
  const int n = static_cast<int>(grid.size());
  std::vector<Mat2c> per_node(n);
  parallel_for(n, threads, [&](int i) {
    per_node[i] =
        response_at_velocity(scheme, probe_free, grid[i].velocity,
                             rho0_cache[i]);
  });
  Mat2c sum = Mat2c::Zero();
  for (int i = 0; i < n; ++i) {
    if (!per_node[i].allFinite()) {
      throw PhysicsError("linear response non-finite at velocity node " +
                         std::to_string(i));
    }
    sum += grid[i].weight * per_node[i];
  }
  return sum;
}

// Propagation matrix in photon-flux units, with the phase mismatch folded
// into the THz mode as a rotating diagonal term. The coupling carries -i:
// in the rotating-frame sign convention used by build_hamiltonian the
// resonantly driven coherence is -i Omega / Gamma, and -i maps that onto
// attenuation of the driving mode.
Mat2c gauged_propagation_matrix(const Mat2c& beta, const MixingConfig& cfg) {
  const Complex i2c = Complex(0.0, -2.0 / kSpeedOfLight);
  Mat2c m;
  m(0, 0) = i2c * cfg.g_s * cfg.g_s * beta(0, 0) - cfg.loss_s;
  m(0, 1) = i2c * cfg.g_s * cfg.g_t * beta(0, 1);
  m(1, 0) = i2c * cfg.g_s * cfg.g_t * beta(1, 0);
  m(1, 1) = i2c * cfg.g_t * cfg.g_t * beta(1, 1) - cfg.loss_t +
            Complex(0.0, cfg.delta_k);
  return m;
}

Vec2c expm_apply(const Mat2c& m, double z, const Vec2c& v) {
  // Closed-form 2x2 exponential in eigenvalue form: the exponents stay
  // non-positive for attenuating media, so nothing overflows even at huge
  // optical depth.
  const Complex half_tr = 0.5 * (m(0, 0) + m(1, 1));
  const Mat2c a = m - half_tr * Mat2c::Identity();
  const Complex mu = std::sqrt(a(0, 0) * a(0, 0) + a(0, 1) * a(1, 0));
  const Complex lp = half_tr + mu;  // eigenvalues of m
  const Complex lm = half_tr - mu;
  if (std::abs(mu) * std::abs(z) < 1e-6 * (1.0 + std::abs(half_tr * z))) {
    // Near-degenerate pair: exp(l z) (I + a z) to second order.
    return std::exp(half_tr * z) *
           ((Mat2c::Identity() + z * a +
             0.5 * z * z * (a * a)) *
            v);
  }
  const Complex ep = std::exp(lp * z);
  const Complex em = std::exp(lm * z);
  // e^{Mz} = [e^{l+ z} (M - l- I) - e^{l- z} (M - l+ I)] / (l+ - l-)
  const Mat2c term =
      (ep * (m - lm * Mat2c::Identity()) - em * (m - lp * Mat2c::Identity())) /
      (lp - lm);
  return term * v;
}

void check_flux_bound(const ConversionResult& result, double a_t_in) {
  const double total = std::norm(result.a_s_out) + std::norm(result.a_t_out);
  if (total > a_t_in * a_t_in * (1.0 + 1e-6)) {
    throw PhysicsError("coupled_mode_propagate: photon flux grew by " +
                       std::to_string(total / (a_t_in * a_t_in) - 1.0) +
                       " (non-passive medium)");
  }
}

double intensity_from_rabi(double rabi, double dipole) {
  const double field = kHbar * rabi / dipole;
  return 0.5 * kEpsilon0 * kSpeedOfLight * field * field;
}

}  // namespace

void MixingConfig::validate() const {
  if (length < 0.0) throw ConfigError("mixing config: length must be >= 0");
  if (!(gamma_th > 0.0)) {
    throw ConfigError("mixing config: Gamma_th must be > 0");
  }
  if (big_g_s < 0.0 || big_g_t < 0.0) {
    throw ConfigError("mixing config: effective couplings must be >= 0");
  }
  if (g_s < 0.0 || g_t < 0.0) {
    throw ConfigError("mixing config: coupling constants must be >= 0");
  }
  if (loss_s < 0.0 || loss_t < 0.0) {
    throw ConfigError("mixing config: mode losses must be >= 0");
  }
  if (!fields.empty()) {
    const double o1 = std::abs(field_by_label(fields, FieldLabel::kA1).rabi);
    const double o2 = std::abs(field_by_label(fields, FieldLabel::kA2).rabi);
    const double o3 = std::abs(field_by_label(fields, FieldLabel::kA3).rabi);
    const double o4 = std::abs(field_by_label(fields, FieldLabel::kA4).rabi);
    const double expected_s = g_s * o2 * o3;
    const double expected_t = g_t * o1 * o4;
    if (std::abs(big_g_s - expected_s) >
        1e-12 * std::max(1.0, expected_s)) {
      throw ConfigError("mixing config: G_S inconsistent with g_S Omega_2 "
                        "Omega_3");
    }
    if (std::abs(big_g_t - expected_t) >
        1e-12 * std::max(1.0, expected_t)) {
      throw ConfigError("mixing config: G_T inconsistent with g_T Omega_1 "
                        "Omega_4");
    }
  }
}

void SpectrumTrace::validate() const {
  if (x.size() != y.size()) {
    throw ConfigError("spectrum trace: mismatched x/y lengths");
  }
  for (size_t i = 0; i + 1 < x.size(); ++i) {
    if (!(x[i] < x[i + 1])) {
      throw ConfigError("spectrum trace: abscissa must be strictly "
                        "increasing");
    }
  }
  for (double v : y) {
    if (!std::isfinite(v)) {
      throw PhysicsError("spectrum trace: non-finite ordinate");
    }
    if (ordinate_nonnegative && v < 0.0) {
      throw PhysicsError("spectrum trace: negative ordinate on an "
                         "intensity-like trace");
    }
  }
}

double signal_frequency(double nu_t, double nu_1, double nu_2, double nu_3,
                        double nu_4) {
  const double nu_s = nu_t + nu_1 + nu_2 + nu_3 - nu_4;
  if (!(nu_s > 0.0)) {
    throw ConfigError("signal_frequency: loop configuration yields a "
                      "non-positive signal frequency");
  }
  return nu_s;
}

PhaseMismatch phase_mismatch(const std::vector<DriveField>& fields) {
  // Evaluated as (2 pi / c) (nu_T d_T + nu_1 d_1 + nu_2 d_2 + nu_3 d_3
  // - nu_4 d_4 - nu_S d_S) so that a collinear set whose frequencies close
  // the loop cancels exactly instead of to six products' roundoff.
  const auto nd = [&](FieldLabel label) -> Vec3d {
    const DriveField& f = field_by_label(fields, label);
    return f.frequency * f.direction;
  };
  PhaseMismatch result;
  Vec3d sum = nd(FieldLabel::kT);
  sum += nd(FieldLabel::kA1);
  sum += nd(FieldLabel::kA2);
  sum += nd(FieldLabel::kA3);
  sum -= nd(FieldLabel::kA4);
  sum -= nd(FieldLabel::kS);
  result.delta_k = constants::kTwoPi / constants::kSpeedOfLight * sum;
  result.magnitude = result.delta_k.norm();
  return result;
}

CouplingConstants coupling_constants(const LevelScheme& scheme,
                                     const VaporSpec& vapor) {
  CouplingConstants g;
  g.g_s = std::sqrt(coupling_g_squared(scheme.loop[field_index(FieldLabel::kS)],
                                       vapor.density));
  g.g_t = std::sqrt(coupling_g_squared(scheme.loop[field_index(FieldLabel::kT)],
                                       vapor.density));
  return g;
}

double alpha_bar(double g_s, double big_g_s, double big_g_t, double gamma_th) {
  if (!(big_g_s > 0.0)) {
    throw ConfigError("alpha_bar: G_S must be > 0 (the build-up rate "
                      "diverges without the signal-side coupling)");
  }
  if (!(gamma_th > 0.0)) throw ConfigError("alpha_bar: Gamma_th must be > 0");
  return 2.0 * g_s * g_s * (big_g_s * big_g_s + big_g_t * big_g_t) /
         (kSpeedOfLight * gamma_th * big_g_s * big_g_s);
}

double eta_qe_analytic(const MixingConfig& cfg) {
  cfg.validate();
  const double gs2 = cfg.big_g_s * cfg.big_g_s;
  const double gt2 = cfg.big_g_t * cfg.big_g_t;
  if (gs2 == 0.0 || gt2 == 0.0) return 0.0;
  const double alpha = alpha_bar(cfg.g_s, cfg.big_g_s, cfg.big_g_t,
                                 cfg.gamma_th);
  const double depletion = -std::expm1(-alpha * cfg.length);
  const double ratio = gs2 * gt2 / ((gs2 + gt2) * (gs2 + gt2));
  return ratio * depletion * depletion;
}

Mat2c eq1_equivalent_beta(const MixingConfig& cfg) {
  cfg.validate();
  if (!(cfg.g_s > 0.0) || !(cfg.g_t > 0.0)) {
    throw ConfigError("eq1_equivalent_beta: coupling constants must be > 0");
  }
  const double alpha = alpha_bar(cfg.g_s, cfg.big_g_s, cfg.big_g_t,
                                 cfg.gamma_th);
  const double s2 =
      alpha / (cfg.big_g_s * cfg.big_g_s + cfg.big_g_t * cfg.big_g_t);
  const Complex ic(0.0, -kSpeedOfLight);
  Mat2c beta;
  beta(0, 0) = ic * s2 * cfg.big_g_s * cfg.big_g_s /
               (2.0 * cfg.g_s * cfg.g_s);
  beta(0, 1) = -ic * s2 * cfg.big_g_s * cfg.big_g_t /
               (2.0 * cfg.g_s * cfg.g_t);
  beta(1, 0) = beta(0, 1);
  beta(1, 1) = ic * s2 * cfg.big_g_t * cfg.big_g_t /
               (2.0 * cfg.g_t * cfg.g_t);
  return beta;
}

Mat2c linear_response_coefficients(const LevelScheme& scheme,
                                   const std::vector<DriveField>& fields,
                                   const VaporSpec& vapor,
                                   const AveragingOptions& averaging) {
  const auto probe_free = with_probes_off(fields);
  const auto grid = velocity_grid(vapor, averaging.n_nodes, averaging.rule,
                                  averaging.v_max_in_u, averaging.v_inner);
  std::vector<std::optional<Mat6c>> cache(grid.size());
  return averaged_response(scheme, probe_free, grid, cache, 1);
}

ConversionResult coupled_mode_propagate(const Mat2c& beta,
                                        const MixingConfig& cfg,
                                        double a_t_in,
                                        const PropagateOptions& options) {
  cfg.validate();
  if (!(a_t_in > 0.0)) {
    throw ConfigError("coupled_mode_propagate: input amplitude must be > 0");
  }
  if (!beta.allFinite()) {
    throw ConfigError("coupled_mode_propagate: response matrix not finite");
  }

  const Mat2c m = gauged_propagation_matrix(beta, cfg);
  const Vec2c start(Complex(0.0, 0.0), Complex(a_t_in, 0.0));

  // at(z) returns the gauged pair (a_S, a_T e^{i delta_k z}).
  const auto at = [&](double z) -> Vec2c {
    if (!options.force_ode) return expm_apply(m, z, start);
    const Mat2c m0 = m - Complex(0.0, cfg.delta_k) *
                             (Mat2c() << 0, 0, 0, 1).finished();
    auto rhs = [&](double zz, const Vec2c& y) -> Vec2c {
      const Complex phase =
          std::exp(Complex(0.0, cfg.delta_k * zz));
      Vec2c dy;
      dy(0) = m0(0, 0) * y(0) + m0(0, 1) * phase * y(1);
      dy(1) = m0(1, 0) * std::conj(phase) * y(0) + m0(1, 1) * y(1);
      return dy;
    };
    OdeOptions oo;
    oo.rtol = options.rtol;
    oo.atol = options.atol * std::max(1.0, a_t_in);
    Vec2c env = integrate_ode(rhs, start, 0.0, z, oo);
    env(1) *= std::exp(Complex(0.0, cfg.delta_k * z));
    return env;
  };

  ConversionResult result;
  const Vec2c end = at(cfg.length);
  result.a_s_out = end(0);
  // Undo the mismatch gauge on the THz mode (phase only, flux unchanged).
  result.a_t_out =
      end(1) * std::exp(Complex(0.0, -cfg.delta_k * cfg.length));
  result.eta_qe = std::norm(result.a_s_out) / (a_t_in * a_t_in);
  check_flux_bound(result, a_t_in);

  if (options.profile_points > 1) {
    const int n = options.profile_points;
    result.z.resize(n);
    result.a_s.resize(n);
    result.a_t.resize(n);
    for (int i = 0; i < n; ++i) {
      const double z = cfg.length * i / (n - 1);
      const Vec2c v = at(z);
      result.z[i] = z;
      result.a_s[i] = v(0);
      result.a_t[i] = v(1) * std::exp(Complex(0.0, -cfg.delta_k * z));
    }
  }
  return result;
}

SpectrumTrace signal_spectrum(const LevelScheme& scheme,
                              const MixingConfig& cfg,
                              const DetuningSweep& sweep,
                              const SweepOptions& options) {
  cfg.validate();
  if (sweep.detunings.empty()) {
    throw ConfigError("signal_spectrum: empty detuning grid");
  }
  for (size_t i = 0; i + 1 < sweep.detunings.size(); ++i) {
    if (!(sweep.detunings[i] < sweep.detunings[i + 1])) {
      throw ConfigError("signal_spectrum: detuning grid must be strictly "
                        "increasing");
    }
  }

  const auto probe_free = with_probes_off(cfg.fields);
  const auto grid = velocity_grid(cfg.vapor, options.averaging.n_nodes,
                                  options.averaging.rule,
                                  options.averaging.v_max_in_u,
                                  options.averaging.v_inner);

  // Sweeping the THz, A4 or signal leg leaves the probe-free steady state
  // (supported on levels 0..3) untouched, so it is shared across points.
  const bool rho0_shared = sweep.variable == FieldLabel::kT ||
                           sweep.variable == FieldLabel::kA4 ||
                           sweep.variable == FieldLabel::kS;
  std::vector<std::optional<Mat6c>> shared_cache(grid.size());
  if (rho0_shared) {
    parallel_for(static_cast<int>(grid.size()), options.threads, [&](int i) {
      const Mat6c h0 =
          build_hamiltonian(scheme, probe_free, grid[i].velocity);
      shared_cache[i] =
          steady_state(build_liouvillian(h0, scheme), grid[i].velocity).rho;
    });
  }

  const int n_points = static_cast<int>(sweep.detunings.size());
  std::vector<double> eta(n_points);
  parallel_for(n_points, options.threads, [&](int p) {
    auto fields = probe_free;
    for (auto& f : fields) {
      if (f.label == sweep.variable) f.detuning = sweep.detunings[p];
    }
    auto cache = shared_cache;  // per-point copy; shared entries stay valid
    Mat2c beta = averaged_response(scheme, fields, grid, cache, 1);
    const auto conv = coupled_mode_propagate(beta, cfg, 1.0,
                                             options.propagate);
    eta[p] = conv.eta_qe;
  });

  SpectrumTrace trace;
  trace.abscissa = SpectrumTrace::Abscissa::kDetuning;
  trace.x = sweep.detunings;
  trace.y = std::move(eta);
  trace.params["length_m"] = cfg.length;
  trace.params["sweep_field"] = field_index(sweep.variable);
  trace.validate();
  return trace;
}

SpectrumTrace transmission_spectrum(const LevelScheme& scheme,
                                    const MixingConfig& cfg,
                                    const std::vector<double>& delta_1_grid,
                                    const SweepOptions& options) {
  cfg.validate();
  if (delta_1_grid.empty()) {
    throw ConfigError("transmission_spectrum: empty detuning grid");
  }
  const DriveField& a1 = field_by_label(cfg.fields, FieldLabel::kA1);
  const double omega1_mag = std::abs(a1.rabi);
  if (!(omega1_mag > 0.0)) {
    throw ConfigError("transmission_spectrum: probe field A1 is off");
  }
  const double g1_sq =
      coupling_g_squared(scheme.loop[field_index(FieldLabel::kA1)],
                         cfg.vapor.density);
  const auto grid = velocity_grid(cfg.vapor, options.averaging.n_nodes,
                                  options.averaging.rule,
                                  options.averaging.v_max_in_u,
                                  options.averaging.v_inner);

  const int n_points = static_cast<int>(delta_1_grid.size());
  std::vector<double> transmission(n_points);
  parallel_for(n_points, options.threads, [&](int p) {
    auto fields = cfg.fields;
    for (auto& f : fields) {
      if (f.label == FieldLabel::kA1) f.detuning = delta_1_grid[p];
    }
    const Complex probe_coherence = doppler_average(
        [&](double v) {
          const Mat6c h = build_hamiltonian(scheme, fields, v);
          const auto state = steady_state(build_liouvillian(h, scheme), v);
          return state.rho(1, 0);
        },
        std::span<const VelocityNode>(grid));
    // d|Omega|^2/dz = 2 Im(Omega^* rho_ul) (2 g^2/c) in this sign
    // convention; absorption is minus that rate.
    const double absorption =
        -4.0 * g1_sq / kSpeedOfLight *
        std::imag(std::conj(a1.rabi) * probe_coherence) /
        (omega1_mag * omega1_mag);
    transmission[p] = std::min(std::exp(-absorption * cfg.length), 1.0);
  });

  SpectrumTrace trace;
  trace.abscissa = SpectrumTrace::Abscissa::kDetuning;
  trace.x = delta_1_grid;
  trace.y = std::move(transmission);
  trace.params["length_m"] = cfg.length;
  trace.validate();
  return trace;
}

SpectrumTrace nonlinear_response_curve(const LevelScheme& scheme,
                                       const MixingConfig& cfg,
                                       const std::vector<double>& rabi_t_grid,
                                       const SweepOptions& options) {
  cfg.validate();
  if (rabi_t_grid.empty()) {
    throw ConfigError("nonlinear_response_curve: empty Rabi grid");
  }
  for (size_t i = 0; i + 1 < rabi_t_grid.size(); ++i) {
    if (!(rabi_t_grid[i] < rabi_t_grid[i + 1])) {
      throw ConfigError("nonlinear_response_curve: Rabi grid must be "
                        "strictly increasing");
    }
  }
  if (!(cfg.s_eff > 0.0)) {
    throw ConfigError("nonlinear_response_curve: effective area must be > 0");
  }
  const double d_t = scheme.loop[field_index(FieldLabel::kT)].dipole;

  const auto grid = velocity_grid(cfg.vapor, options.averaging.n_nodes,
                                  options.averaging.rule,
                                  options.averaging.v_max_in_u,
                                  options.averaging.v_inner);
  // Signal flux per |Omega_S|^2 (photon-flux normalization of the mode).
  const double flux_per_rabi_sq = cfg.vapor.density * kSpeedOfLight *
                                  cfg.s_eff / (4.0 * cfg.g_s * cfg.g_s);

  const int n_points = static_cast<int>(rabi_t_grid.size());
  std::vector<double> rate(n_points);
  std::vector<double> intensity(n_points);
  parallel_for(n_points, options.threads, [&](int p) {
    const double rabi_in = rabi_t_grid[p];
    intensity[p] = intensity_from_rabi(rabi_in, d_t);
    if (rabi_in == 0.0) {
      rate[p] = 0.0;
      return;
    }
    auto rhs = [&](double z, const Vec2c& y) -> Vec2c {
      const Complex phase = std::exp(Complex(0.0, cfg.delta_k * z));
      const Complex omega_t_local = y(1) * phase;
      auto fields = cfg.fields;
      for (auto& f : fields) {
        if (f.label == FieldLabel::kS) f.rabi = y(0);
        if (f.label == FieldLabel::kT) f.rabi = omega_t_local;
      }
      const Vec2c coh = doppler_average(
          [&](double v) -> Vec2c {
            const Mat6c h = build_hamiltonian(scheme, fields, v);
            const auto state =
                steady_state(build_liouvillian(h, scheme), v);
            return Vec2c(state.rho(5, 0), state.rho(4, 3));
          },
          std::span<const VelocityNode>(grid));
      const Complex i2c(0.0, -2.0 / kSpeedOfLight);
      Vec2c dy;
      dy(0) = i2c * cfg.g_s * cfg.g_s * coh(0) - cfg.loss_s * y(0);
      dy(1) = (i2c * cfg.g_t * cfg.g_t * coh(1) -
               cfg.loss_t * omega_t_local) *
              std::conj(phase);
      return dy;
    };
    OdeOptions oo;
    oo.rtol = options.propagate.rtol;
    oo.atol = options.propagate.atol * rabi_in;
    const Vec2c out = integrate_ode(rhs, Vec2c(Complex(0, 0), rabi_in), 0.0,
                                    cfg.length, oo);
    rate[p] = flux_per_rabi_sq * std::norm(out(0));
  });

  SpectrumTrace trace;
  trace.abscissa = SpectrumTrace::Abscissa::kIntensity;
  trace.x = std::move(intensity);
  trace.y = std::move(rate);
  trace.params["length_m"] = cfg.length;
  trace.params["s_eff_m2"] = cfg.s_eff;
  trace.validate();
  return trace;
}

const char* shape_name(SpectrumShape shape) {
  switch (shape) {
    case SpectrumShape::kSingle: return "single";
    case SpectrumShape::kSplit: return "split";
    case SpectrumShape::kSplitBeyondHalf: return "split-beyond-half";
  }
  return "?";
}

BandwidthResult extract_bandwidth(const SpectrumTrace& trace) {
  trace.validate();
  const auto& x = trace.x;
  const auto& y = trace.y;
  const int n = static_cast<int>(x.size());
  if (n < 5) {
    throw ConfigError("extract_bandwidth: trace needs at least 5 points");
  }
  int peak = 0;
  for (int i = 1; i < n; ++i) {
    if (y[i] > y[peak]) peak = i;
  }
  if (!(y[peak] > 0.0)) {
    throw PhysicsError("extract_bandwidth: trace has no peak");
  }
  if (peak == 0 || peak == n - 1) {
    throw PhysicsError("extract_bandwidth: maximum lies on the grid "
                       "boundary");
  }
  const double half = 0.5 * y[peak];

  const auto cross = [&](int a, int b) {
    // y crosses the half level between samples a and b.
    const double t = (half - y[a]) / (y[b] - y[a]);
    return x[a] + t * (x[b] - x[a]);
  };
  if (y[0] >= half || y[n - 1] >= half) {
    throw PhysicsError("extract_bandwidth: half-maximum crossing lies "
                       "outside the sampled range");
  }
  int left = 0;
  while (y[left + 1] < half) ++left;
  int right = n - 1;
  while (y[right - 1] < half) --right;

  BandwidthResult result;
  result.fwhm = cross(right, right - 1) - cross(left, left + 1);
  result.peak_x = x[peak];
  result.peak_y = y[peak];

  // Plateau-aware local maxima above the half level.
  std::vector<int> maxima;
  int i = 1;
  while (i < n - 1) {
    int j = i;
    while (j + 1 < n && y[j + 1] == y[j]) ++j;
    const bool rising = y[i] > y[i - 1];
    const bool falling = j + 1 < n && y[j + 1] < y[j];
    if (rising && falling && y[i] >= half) {
      maxima.push_back((i + j) / 2);
    }
    i = j + 1;
  }

  result.shape = SpectrumShape::kSingle;
  if (maxima.size() >= 2) {
    // The two tallest above-half maxima bracket the central dip.
    std::vector<int> sorted = maxima;
    std::sort(sorted.begin(), sorted.end(),
              [&](int a, int b) { return y[a] > y[b]; });
    int a = sorted[0];
    int b = sorted[1];
    if (a > b) std::swap(a, b);
    double dip = y[a];
    for (int k = a; k <= b; ++k) dip = std::min(dip, y[k]);
    result.shape = dip >= half ? SpectrumShape::kSplit
                               : SpectrumShape::kSplitBeyondHalf;
  }
  return result;
}

MixingConfig make_mixing_config(const LevelScheme& scheme,
                                const std::vector<DriveField>& fields,
                                const VaporSpec& vapor, double length,
                                double s_eff, double loss_s, double loss_t) {
  MixingConfig cfg;
  const auto g = coupling_constants(scheme, vapor);
  cfg.g_s = g.g_s;
  cfg.g_t = g.g_t;
  cfg.big_g_s = g.g_s * std::abs(field_by_label(fields, FieldLabel::kA2).rabi) *
                std::abs(field_by_label(fields, FieldLabel::kA3).rabi);
  cfg.big_g_t = g.g_t * std::abs(field_by_label(fields, FieldLabel::kA1).rabi) *
                std::abs(field_by_label(fields, FieldLabel::kA4).rabi);
  cfg.length = length;
  cfg.s_eff = s_eff;
  cfg.loss_s = loss_s;
  cfg.loss_t = loss_t;
  cfg.gamma_th = effective_linewidth(
      vapor, field_by_label(fields, FieldLabel::kA1).wavevector);
  cfg.delta_k = phase_mismatch(fields).delta_k.z();
  cfg.fields = fields;
  cfg.vapor = vapor;
  cfg.validate();
  return cfg;
}

}  // namespace rydthz
