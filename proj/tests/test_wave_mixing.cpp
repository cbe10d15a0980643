#include <doctest.h>

#include <cmath>

#include "rydthz/wave_mixing.hpp"
#include "test_support.hpp"

using namespace rydthz;
using namespace rydthz::testing;
using doctest::Approx;
using constants::kSpeedOfLight;
using constants::kTwoPi;

namespace {
const double kMHz = kTwoPi * 1e6;

MixingConfig reference_mixing() {
  return default_config().build_mixing();
}

MixingConfig analytic_mixing(double big_g_s, double big_g_t,
                             double alpha_l_target) {
  // Minimal config for the closed-form pipeline: couplings of order the
  // reference ones, with the length chosen to hit the requested alpha L.
  MixingConfig cfg;
  cfg.g_s = 2.8e10;
  cfg.g_t = 2.8e11;
  cfg.big_g_s = big_g_s;
  cfg.big_g_t = big_g_t;
  cfg.gamma_th = 2.2e9;
  cfg.s_eff = 1e-6;
  const double alpha = alpha_bar(cfg.g_s, big_g_s, big_g_t, cfg.gamma_th);
  cfg.length = alpha_l_target / alpha;
  return cfg;
}
}  // namespace

TEST_CASE("signal frequency obeys the loop sum and rejects degenerate loops") {
  CHECK_THROWS_AS(signal_frequency(5.0e9, 0.0, 0.0, 0.0, 5.0e9), ConfigError);
  const double nu_t = 0.107e12, nu_1 = 377.1074e12, nu_2 = 628.9298539e12,
               nu_3 = 62.3e9, nu_4 = 621.9760539e12;
  const double nu_s = signal_frequency(nu_t, nu_1, nu_2, nu_3, nu_4);
  CHECK(nu_s + nu_4 - nu_1 - nu_2 - nu_3 - nu_t == 0.0);
  // Optical signal near 384.5 THz for the configured transition table.
  CHECK(std::abs(nu_s - 384.5e12) < 0.5e12);
}

TEST_CASE("phase mismatch closes exactly for collinear vacuum fields") {
  const auto fields = reference_fields();
  const auto pm = phase_mismatch(fields);
  CHECK(pm.magnitude < 1e-9);
}

TEST_CASE("phase mismatch grows linearly with a THz tilt") {
  auto cfg = default_config();
  cfg.geometry.thz_tilt_rad = 1e-3;
  const auto pm = phase_mismatch(cfg.build_fields());
  const double k_t = kTwoPi * cfg.scheme.nu_t_hz / kSpeedOfLight;
  CHECK(pm.magnitude == Approx(k_t * 1e-3).epsilon(0.01));
}

TEST_CASE("phase mismatch shifts by 2 k4 when the A4 direction flips") {
  auto fields = reference_fields();
  const auto before = phase_mismatch(fields);
  double k4 = 0.0;
  for (auto& f : fields) {
    if (f.label == FieldLabel::kA4) {
      f.direction = -f.direction;
      k4 = f.wavevector;
    }
  }
  const auto after = phase_mismatch(fields);
  CHECK((after.delta_k - before.delta_k).norm() ==
        Approx(2.0 * k4).epsilon(1e-12));
}

TEST_CASE("coupling constants scale as sqrt(density)") {
  const auto scheme = reference_scheme();
  VaporSpec vapor = reference_vapor();
  const auto g1 = coupling_constants(scheme, vapor);
  vapor.density *= 2.0;
  const auto g2 = coupling_constants(scheme, vapor);
  CHECK(g2.g_s * g2.g_s == Approx(2.0 * g1.g_s * g1.g_s).epsilon(1e-14));
  CHECK(g2.g_t * g2.g_t == Approx(2.0 * g1.g_t * g1.g_t).epsilon(1e-14));
  vapor.density = 1e-30;  // effectively empty cell
  const auto g0 = coupling_constants(scheme, vapor);
  CHECK(g0.g_s < 1e-10 * g1.g_s);
}

TEST_CASE("resonant absorption from g matches the two-level cross-section") {
  // d and lambda fix the natural linewidth; with the coherence decay
  // Gamma/2 the resonant attenuation must equal sigma0 N = 3 lambda^2 N /
  // (2 pi).
  const double lambda = 780e-9;
  const double omega = kTwoPi * kSpeedOfLight / lambda;
  const double dipole = 2.5e-29;
  const double density = 1e18;
  const double gamma_pop =
      omega * omega * omega * dipole * dipole /
      (3.0 * constants::kPi * constants::kEpsilon0 * constants::kHbar *
       kSpeedOfLight * kSpeedOfLight * kSpeedOfLight);
  auto cfg = default_config();
  cfg.scheme.dipoles_cm[field_index(FieldLabel::kS)] = dipole;
  // Move the signal leg to exactly 780 nm by adjusting the A2 frequency.
  const double nu_target = kSpeedOfLight / lambda;
  cfg.scheme.nu_a2_hz += nu_target -
                         signal_frequency(cfg.scheme.nu_t_hz,
                                          cfg.scheme.nu_a1_hz,
                                          cfg.scheme.nu_a2_hz,
                                          cfg.scheme.nu_a3_hz,
                                          cfg.scheme.nu_a4_hz);
  VaporSpec vapor = reference_vapor();
  vapor.density = density;
  const auto g = coupling_constants(cfg.build_scheme(), vapor);
  const double alpha = 2.0 * g.g_s * g.g_s /
                       (kSpeedOfLight * 0.5 * gamma_pop);
  const double sigma0_n = 3.0 * lambda * lambda * density / (2.0 * constants::kPi);
  CHECK(alpha == Approx(sigma0_n).epsilon(0.05));
}

TEST_CASE("build-up rate limits and scaling") {
  const double g_s = 3.0e10;
  const double gamma_th = 2.2e9;
  CHECK(alpha_bar(g_s, 1.0, 0.0, gamma_th) ==
        Approx(2.0 * g_s * g_s / (kSpeedOfLight * gamma_th)).epsilon(1e-14));
  CHECK(alpha_bar(g_s, 2.0, 3.0, 2.0 * gamma_th) ==
        Approx(0.5 * alpha_bar(g_s, 2.0, 3.0, gamma_th)).epsilon(1e-14));
  CHECK_THROWS_AS(alpha_bar(g_s, 0.0, 1.0, gamma_th), ConfigError);
  // Reference-scale couplings saturate the depletion factor.
  const auto cfg = reference_mixing();
  const double alpha = alpha_bar(cfg.g_s, cfg.big_g_s, cfg.big_g_t,
                                 cfg.gamma_th);
  CHECK(-std::expm1(-alpha * cfg.length) == Approx(1.0).epsilon(1e-3));
}

TEST_CASE("closed-form efficiency: limits, ceiling and monotonicity") {
  auto cfg = analytic_mixing(1.0e26, 1.0e26, 50.0);
  cfg.length = 0.0;
  CHECK(eta_qe_analytic(cfg) == 0.0);

  cfg = analytic_mixing(1.0e26, 1.0e26, 50.0);
  CHECK(eta_qe_analytic(cfg) == Approx(0.25).epsilon(1e-3));

  cfg.big_g_s = 0.0;
  cfg.big_g_t = 0.0;
  CHECK(eta_qe_analytic(cfg) == 0.0);

  // Ceiling over a wide coupling-ratio scan, at fixed alpha L.
  double best = 0.0;
  for (double log_ratio = -3.0; log_ratio <= 3.0; log_ratio += 0.05) {
    const auto point =
        analytic_mixing(1.0e26 * std::pow(10.0, log_ratio), 1.0e26, 50.0);
    const double eta = eta_qe_analytic(point);
    CHECK(eta <= 0.25 + 1e-12);
    best = std::max(best, eta);
  }
  CHECK(best == Approx(0.25).epsilon(1e-3));

  // Monotone in the cell length for fixed couplings.
  auto grown = analytic_mixing(2.0e26, 1.0e26, 1.0);
  double previous = -1.0;
  for (double scale = 0.2; scale <= 3.0; scale += 0.2) {
    auto point = grown;
    point.length = grown.length * scale;
    const double eta = eta_qe_analytic(point);
    CHECK(eta >= previous);
    previous = eta;
  }
}

TEST_CASE("coupled-mode propagation matches the closed form on the grid") {
  for (double ratio : {0.25, 0.5, 1.0, 2.0, 4.0}) {
    for (double alpha_l : {0.1, 0.5, 1.0, 2.0, 5.0, 10.0}) {
      const auto cfg = analytic_mixing(ratio * 1.0e26, 1.0e26, alpha_l);
      const auto beta = eq1_equivalent_beta(cfg);
      const auto conv = coupled_mode_propagate(beta, cfg, 1.0);
      const double expected = eta_qe_analytic(cfg);
      CHECK(conv.eta_qe == Approx(expected).epsilon(0.01));
    }
  }
}

TEST_CASE("matrix-exponential and explicit integrator paths agree") {
  auto cfg = analytic_mixing(2.0e26, 1.0e26, 3.0);
  cfg.delta_k = 2.0e3;  // nonzero mismatch exercises the gauge handling
  const auto beta = eq1_equivalent_beta(cfg);
  const auto fast = coupled_mode_propagate(beta, cfg, 2.0);
  PropagateOptions opts;
  opts.force_ode = true;
  const auto slow = coupled_mode_propagate(beta, cfg, 2.0, opts);
  CHECK(std::abs(fast.a_s_out - slow.a_s_out) < 1e-8 * 2.0);
  CHECK(std::abs(fast.a_t_out - slow.a_t_out) < 1e-8 * 2.0);
  CHECK(fast.eta_qe == Approx(slow.eta_qe).epsilon(1e-8));
}

TEST_CASE("zero cross coupling converts nothing") {
  auto cfg = analytic_mixing(1.0e26, 1.0e26, 2.0);
  Mat2c beta = eq1_equivalent_beta(cfg);
  beta(0, 1) = beta(1, 0) = Complex(0.0, 0.0);
  const auto conv = coupled_mode_propagate(beta, cfg, 1.0);
  CHECK(conv.eta_qe == 0.0);
  CHECK(std::abs(conv.a_s_out) == 0.0);
}

TEST_CASE("large phase mismatch suppresses conversion") {
  const auto cfg = analytic_mixing(1.0e26, 1.0e26, 2.0);
  const auto beta = eq1_equivalent_beta(cfg);
  const double matched = coupled_mode_propagate(beta, cfg, 1.0).eta_qe;
  auto detuned = cfg;
  detuned.delta_k = 1.0e3 / cfg.length;  // delta_k L = 1000
  const double suppressed =
      coupled_mode_propagate(beta, detuned, 1.0).eta_qe;
  CHECK(suppressed < 1e-3 * matched);
}

TEST_CASE("a gain-implying response matrix is rejected") {
  auto cfg = analytic_mixing(1.0e26, 1.0e26, 2.0);
  Mat2c beta = eq1_equivalent_beta(cfg);
  beta(1, 1) = -beta(1, 1);  // absorption flipped into amplification
  CHECK_THROWS_AS(coupled_mode_propagate(beta, cfg, 1.0), PhysicsError);
}

TEST_CASE("flux bound holds along microscopic response propagation") {
  const auto scheme = reference_scheme();
  const auto cfg = reference_mixing();
  AveragingOptions avg;
  avg.rule = VelocityRule::kUniform;
  avg.n_nodes = 801;
  avg.v_max_in_u = 4.0;
  const Mat2c beta =
      linear_response_coefficients(scheme, cfg.fields, cfg.vapor, avg);
  PropagateOptions opts;
  opts.profile_points = 41;
  const auto conv = coupled_mode_propagate(beta, cfg, 1.0, opts);
  for (size_t i = 0; i < conv.z.size(); ++i) {
    CHECK(std::norm(conv.a_s[i]) + std::norm(conv.a_t[i]) <= 1.0 + 1e-9);
  }
  CHECK(conv.eta_qe >= 0.0);
  CHECK(conv.eta_qe <= 1.0);
}

TEST_CASE("linear response with auxiliaries off is two-level physics") {
  const auto scheme = reference_scheme();
  auto fields = reference_fields();
  for (auto& f : fields) f.rabi = Complex(0.0, 0.0);
  for (auto& f : fields) f.detuning = 0.0;
  // Frozen vapor isolates the bare susceptibilities.
  const VaporSpec cold{1e-12, reference_vapor().mass,
                       reference_vapor().density};
  AveragingOptions avg;
  avg.n_nodes = 1;
  const Mat2c beta = linear_response_coefficients(scheme, fields, cold, avg);
  // Signal leg: ground population responds as -i/(2 gamma_coh) with
  // gamma_coh = Gamma_6/2. THz leg: its lower level is empty, so no
  // response; cross terms vanish with the loop open.
  const double gamma6 = kTwoPi * 6e6;
  CHECK(std::abs(beta(0, 0) - Complex(0.0, -1.0 / gamma6)) <
        1e-12 / gamma6);
  CHECK(std::abs(beta(1, 1)) < 1e-12 / gamma6);
  CHECK(std::abs(beta(0, 1)) < 1e-12 / gamma6);
  CHECK(std::abs(beta(1, 0)) < 1e-12 / gamma6);
}

TEST_CASE("linear response matches finite differences of the full solve") {
  const auto scheme = reference_scheme();
  auto fields = reference_fields();
  const VaporSpec vapor = reference_vapor();
  AveragingOptions avg;
  avg.rule = VelocityRule::kUniform;
  avg.n_nodes = 41;  // modest grid: the comparison is per-node exact
  avg.v_max_in_u = 2.0;
  const Mat2c beta = linear_response_coefficients(scheme, fields, vapor, avg);

  const auto grid =
      velocity_grid(vapor, avg.n_nodes, avg.rule, avg.v_max_in_u);
  const double eps = 1e-4 * kTwoPi * 6e6;
  Mat2c fd = Mat2c::Zero();
  for (int probe = 0; probe < 2; ++probe) {
    const FieldLabel label = probe == 0 ? FieldLabel::kS : FieldLabel::kT;
    Vec2c plus = Vec2c::Zero(), minus = Vec2c::Zero();
    for (const auto& node : grid) {
      auto up = fields;
      set_rabi(up, FieldLabel::kS, 0.0);
      set_rabi(up, FieldLabel::kT, 0.0);
      set_rabi(up, label, Complex(eps, 0.0));
      auto down = up;
      set_rabi(down, label, Complex(-eps, 0.0));
      const auto rho_up = steady_state(
          build_liouvillian(build_hamiltonian(scheme, up, node.velocity),
                            scheme),
          node.velocity);
      const auto rho_down = steady_state(
          build_liouvillian(build_hamiltonian(scheme, down, node.velocity),
                            scheme),
          node.velocity);
      plus += node.weight * Vec2c(rho_up.rho(5, 0), rho_up.rho(4, 3));
      minus += node.weight * Vec2c(rho_down.rho(5, 0), rho_down.rho(4, 3));
    }
    fd.col(probe) = (plus - minus) / (2.0 * eps);
  }
  CHECK((fd - beta).norm() < 1e-6 * beta.norm());
}

TEST_CASE("linear response cross terms carry the loop phase") {
  const auto scheme = reference_scheme();
  auto fields = reference_fields();
  const VaporSpec vapor = reference_vapor();
  AveragingOptions avg;
  avg.rule = VelocityRule::kUniform;
  avg.n_nodes = 101;
  avg.v_max_in_u = 2.0;
  const Mat2c base = linear_response_coefficients(scheme, fields, vapor, avg);
  const double phi = 0.7;
  auto rotated = fields;
  for (auto& f : rotated) {
    if (f.label == FieldLabel::kA2) f.rabi *= std::exp(Complex(0.0, phi));
  }
  const Mat2c turned =
      linear_response_coefficients(scheme, rotated, vapor, avg);
  // Diagonals are invariant; the S<-T conversion coefficient rotates with
  // the auxiliary chain phase and T<-S counter-rotates.
  CHECK(std::abs(turned(0, 0) - base(0, 0)) < 1e-9 * std::abs(base(0, 0)));
  CHECK(std::abs(turned(1, 1) - base(1, 1)) < 1e-9 * std::abs(base(1, 1)));
  CHECK(std::abs(turned(0, 1) - base(0, 1) * std::exp(Complex(0.0, phi))) <
        1e-9 * std::abs(base(0, 1)));
  CHECK(std::abs(turned(1, 0) - base(1, 0) * std::exp(Complex(0.0, -phi))) <
        1e-9 * std::abs(base(1, 0)));
}

TEST_CASE("mixing config invariants") {
  auto cfg = reference_mixing();
  CHECK_NOTHROW(cfg.validate());
  auto broken = cfg;
  broken.big_g_s *= 1.001;
  CHECK_THROWS_AS(broken.validate(), ConfigError);
  broken = cfg;
  broken.length = -1.0;
  CHECK_THROWS_AS(broken.validate(), ConfigError);
  broken = cfg;
  broken.gamma_th = 0.0;
  CHECK_THROWS_AS(broken.validate(), ConfigError);
}
