// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Tolerances are pinned in code next to each check.

#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "rydthz/detector.hpp"
#include "rydthz/experiments.hpp"
#include "rydthz/photon_stats.hpp"
#include "test_support.hpp"

using namespace rydthz;
using namespace rydthz::testing;
using constants::kTwoPi;

namespace {

int g_failures = 0;

void report(int index, const std::string& name, bool pass,
            const std::string& detail) {
  std::printf("%s - criterion %2d: %s (%s)\n", pass ? "PASS" : "FAIL", index,
              name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string fmt(const char* pattern, ...) {
  char buf[512];
  va_list args;
  va_start(args, pattern);
  std::vsnprintf(buf, sizeof(buf), pattern, args);
  va_end(args);
  return buf;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

MixingConfig analytic_mixing(double big_g_s, double big_g_t,
                             double alpha_l) {
  MixingConfig cfg;
  cfg.g_s = 2.8e10;
  cfg.g_t = 2.8e11;
  cfg.big_g_s = big_g_s;
  cfg.big_g_t = big_g_t;
  cfg.gamma_th = 2.2e9;
  cfg.s_eff = 1e-6;
  cfg.length = alpha_l / alpha_bar(cfg.g_s, big_g_s, big_g_t, cfg.gamma_th);
  return cfg;
}

// 1. NEP reproduction.
void criterion_nep() {
  DetectorSpec det;
  det.eta_qe = 0.043;
  det.eta_loss = 0.11;
  det.dark_rate = 2000.0;
  det.dead_time = 32e-9;
  det.s_eff = 1e-6;
  det.nu_thz = 0.107e12;
  const double eta = total_efficiency(det.eta_qe, det.eta_loss);
  const double value = nep(det, eta);
  const bool pass = std::abs(value / 9.5e-19 - 1.0) < 0.02;
  report(1, "NEP reproduction", pass,
         fmt("nep = %.4e W/sqrt(Hz), reference 9.5e-19, tol 2%%", value));
}

// 2. Closed-form efficiency ceiling at alpha L = 50.
void criterion_eq1_ceiling() {
  double best = 0.0;
  double best_ratio = 0.0;
  bool within_bound = true;
  for (double lg = -3.0; lg <= 3.0001; lg += 0.01) {
    const double ratio = std::pow(10.0, lg);
    const auto cfg = analytic_mixing(ratio * 1e26, 1e26, 50.0);
    const double eta = eta_qe_analytic(cfg);
    if (eta > 0.25 + 1e-12) within_bound = false;
    if (eta > best) {
      best = eta;
      best_ratio = ratio;
    }
  }
  const bool pass = within_bound && std::abs(best - 0.25) < 1e-3 &&
                    std::abs(best_ratio - 1.0) < 0.02;
  report(2, "closed-form ceiling 0.25 at G_S = G_T", pass,
         fmt("max eta = %.6f at G_S/G_T = %.3f, tol 1e-3", best, best_ratio));
}

// 3. Linearized propagation vs the closed form over the coupling grid.
void criterion_eq1_oracle() {
  double worst = 0.0;
  for (double ratio : {0.25, 0.5, 1.0, 2.0, 4.0}) {
    for (double alpha_l : {0.1, 0.5, 1.0, 2.0, 5.0, 10.0}) {
      const auto cfg = analytic_mixing(ratio * 1e26, 1e26, alpha_l);
      const auto conv =
          coupled_mode_propagate(eq1_equivalent_beta(cfg), cfg, 1.0);
      const double expected = eta_qe_analytic(cfg);
      worst = std::max(worst,
                       std::abs(conv.eta_qe / expected - 1.0));
    }
  }
  report(3, "propagation matches closed form on the grid", worst < 0.01,
         fmt("worst relative deviation %.3e, tol 1e-2", worst));
}

// 4. Steady state vs long-time Lindblad integration, plus invariants.
void criterion_steady_state_oracle() {
  double worst_elem = 0.0;
  double worst_herm = 0.0, worst_trace = 0.0, worst_eig = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto sys = random_system(seed);
    CounterRng rng(seed, stream_id("acceptance-velocity"));
    const double v = (rng.uniform() - 0.5) * 400.0;
    const MatXc gen = build_liouvillian(
        build_hamiltonian(sys.scheme, sys.fields, v), sys.scheme);
    const auto state = steady_state(gen, v);
    Mat6c ground = Mat6c::Zero();
    ground(0, 0) = 1.0;
    const Mat6c evolved = evolve(gen, ground, 50.0 / slowest_rate(gen));
    worst_elem = std::max(worst_elem,
                          (state.rho - evolved).cwiseAbs().maxCoeff());
    const auto diag = state.diagnostics();
    worst_herm = std::max(worst_herm, diag.hermiticity_residual);
    worst_trace = std::max(worst_trace, diag.trace_error);
    worst_eig = std::min(worst_eig, diag.min_eigenvalue);
  }
  const bool pass = worst_elem < 1e-8 && worst_herm < 1e-10 &&
                    worst_trace < 1e-10 && worst_eig > -1e-8;
  report(4, "steady state matches long-time integration", pass,
         fmt("max elementwise dev %.2e (tol 1e-8), herm %.1e, trace %.1e, "
             "min eig %.1e",
             worst_elem, worst_herm, worst_trace, worst_eig));
}

// 5. Doppler averaging: frozen-vapor limit and quadrature parity.
void criterion_doppler() {
  const auto scheme = reference_scheme();
  auto fields = reference_fields();
  const VaporSpec warm = reference_vapor();

  auto averaged_coherence = [&](const VaporSpec& vapor, int nodes) {
    return doppler_average(
        [&](double v) {
          const Mat6c h = build_hamiltonian(scheme, fields, v);
          return steady_state(build_liouvillian(h, scheme), v).rho(1, 0);
        },
        vapor, nodes);
  };

  // T -> 0: the averaged coherence collapses onto the v = 0 value. The
  // deviation is the physical O((k u / gamma)^2) Doppler curvature, so the
  // limit temperature sits deep enough for 1e-10 relative agreement.
  const VaporSpec frozen{1e-14, warm.mass, warm.density};
  const Complex cold_avg = averaged_coherence(frozen, 64);
  const Mat6c h0 = build_hamiltonian(scheme, fields, 0.0);
  const Complex at_rest = steady_state(build_liouvillian(h0, scheme)).rho(1, 0);
  const double frozen_dev = std::abs(cold_avg - at_rest) / std::abs(at_rest);

  // 64-node Gauss-Hermite vs a 20001-point trapezoid on a wing-probed
  // coherence (the averaged response is thermal-scale smooth there).
  set_detuning(fields, FieldLabel::kA1, -kTwoPi * 6.0e9);
  auto f = [&](double v) {
    const Mat6c h = build_hamiltonian(scheme, fields, v);
    return steady_state(build_liouvillian(h, scheme), v).rho(1, 0);
  };
  const Complex gh64 = averaged_coherence(warm, 64);
  const double u = warm.most_probable_speed();
  Complex trap = 0.0;
  const int n_ref = 20001;
  const double lo = -8.0 * u, hi = 8.0 * u;
  const double step = (hi - lo) / (n_ref - 1);
  double weight_sum = 0.0;
  for (int i = 0; i < n_ref; ++i) {
    const double v = lo + i * step;
    const double w = std::exp(-v * v / (u * u)) *
                     (i == 0 || i == n_ref - 1 ? 0.5 : 1.0);
    trap += w * f(v);
    weight_sum += w;
  }
  trap /= weight_sum;
  const double parity = std::abs(gh64 - trap) / std::abs(trap);

  const bool pass = frozen_dev < 1e-10 && parity < 1e-6;
  report(5, "Doppler averaging correctness", pass,
         fmt("frozen-vapor dev %.2e (tol 1e-10), GH64 vs trapezoid %.2e "
             "(tol 1e-6)",
             frozen_dev, parity));
}

// 6. Photon statistics calibration.
void criterion_photon_statistics() {
  const auto coherent = gen_coherent(1.0e6, 1.0, 1001);
  const auto [ca, cb] = hbt_split(coherent, 1002);
  const auto chist = g2_cross(ca, cb, 1e-6, 1e-5);
  const double coherent_g2 = chist.g2_zero();

  const double tau_c = 1e-6;
  const auto thermal = gen_thermal(1.0e6, tau_c, 1.0, 1003);
  const auto [ta, tb] = hbt_split(thermal, 1004);
  const auto thist = g2_cross(ta, tb, tau_c / 20.0, 5.0 * tau_c);
  const double thermal_g2 = thist.g2_zero();
  double worst_residual = 0.0;
  for (size_t i = 0; i < thist.g2.size(); ++i) {
    const double center = 0.5 * (thist.edges[i] + thist.edges[i + 1]);
    const double expected = 1.0 + std::exp(-2.0 * std::abs(center) / tau_c);
    worst_residual =
        std::max(worst_residual, std::abs(thist.g2[i] - expected));
  }

  const bool pass = std::abs(coherent_g2 - 1.0) < 0.02 &&
                    std::abs(thermal_g2 - 2.0) < 0.1 &&
                    worst_residual <= 0.05;
  report(6, "photon-statistics calibration", pass,
         fmt("coherent g2(0) = %.4f (1 +- 0.02), thermal g2(0) = %.3f "
             "(2 +- 0.1), worst curve residual %.3f (tol 0.05)",
             coherent_g2, thermal_g2, worst_residual));
}

// 7. Dead-time antibunching and recovery.
void criterion_dead_time() {
  const double dead = 32e-9;
  const auto input = gen_coherent(1.0e6, 4.0, 2001);
  const auto detected = detect(input, 1.0, 0.0, dead, 2002);
  const auto gated = g2_single_autocorr(detected, 16e-9, dead);

  bool recovery = true;
  double worst = 0.0;
  for (double resolution : {64e-9, 128e-9, 256e-9}) {
    const auto est = g2_single_autocorr(detected, resolution, dead);
    const double dev = std::abs(est.g2_dead_time_corrected - 1.0);
    worst = std::max(worst, dev);
    recovery = recovery && dev < 0.05;
  }
  const bool pass = gated.g2_raw == 0.0 && recovery;
  report(7, "dead-time antibunching and recovery", pass,
         fmt("g2(16 ns) = %.1f (exact 0), corrected recovery dev %.3f "
             "(tol 0.05)",
             gated.g2_raw, worst));
}

// 8. Response-curve shape and synthetic dynamic range.
void criterion_response() {
  auto cfg = default_config();
  cfg.quadrature.rule = VelocityRule::kComposite;
  cfg.quadrature.n_nodes = 601;
  cfg.quadrature.v_max_in_u = 5.0;
  cfg.quadrature.v_inner_m_s = 60.0;
  const auto scheme = cfg.build_scheme();
  const auto mixing = cfg.build_mixing();
  SweepOptions opts;
  opts.averaging = cfg.averaging_options();
  opts.propagate.rtol = 1e-7;
  opts.propagate.atol = 1e-12;
  opts.threads = 2;

  std::vector<double> rabi;
  for (int i = 0; i < 13; ++i) {
    rabi.push_back(kTwoPi * 2.0e3 * std::pow(10.0, i * 0.25));
  }
  const auto curve = nonlinear_response_curve(scheme, mixing, rabi, opts);

  // Small-signal linearity: rabi[i+4]/rabi[i] doubles the intensity.
  const double ratio_x = curve.x[4] / curve.x[0];
  const double ratio_y = curve.y[4] / curve.y[0];
  const bool linear = std::abs(ratio_y / ratio_x - 1.0) < 0.01;

  bool slope_ok = true;
  double prev_slope = 1e300;
  for (size_t i = 1; i < curve.x.size(); ++i) {
    const double slope = (std::log(curve.y[i]) - std::log(curve.y[i - 1])) /
                         (std::log(curve.x[i]) - std::log(curve.x[i - 1]));
    if (slope > prev_slope + 1e-3) slope_ok = false;
    prev_slope = slope;
  }

  // Consistency of the nonlinear model with the linearized pipeline.
  const Mat2c beta = linear_response_coefficients(scheme, mixing.fields,
                                                  cfg.vapor, opts.averaging);
  const auto lin = coupled_mode_propagate(beta, mixing, 1.0);
  const auto det = cfg.build_detector();
  const double eta_nonlinear =
      curve.y[0] / thz_count_rate(curve.x[0], det);
  const double consistency = std::abs(eta_nonlinear / lin.eta_qe - 1.0);

  // Synthetic saturable curve against the closed-form dynamic range.
  const double eta0 = total_efficiency(det.eta_qe, det.eta_loss);
  const double i_sat = 2.1e-9;
  SpectrumTrace synth;
  synth.abscissa = SpectrumTrace::Abscissa::kIntensity;
  for (int i = 0; i < 1601; ++i) {
    const double intensity =
        std::pow(10.0, std::log10(i_sat) - 5.0 + 8.0 * i / 1600.0);
    synth.x.push_back(intensity);
    synth.y.push_back(eta0 * thz_count_rate(intensity, det) /
                      (1.0 + intensity / i_sat));
  }
  const auto dr = dynamic_range(synth, det, 1.0);
  const double r_star = (1.0 + std::sqrt(1.0 + 8.0 * det.dark_rate)) / 2.0;
  const double c = eta0 * det.s_eff / (constants::kPlanck * det.nu_thz);
  const double i_min = r_star / (c - r_star / i_sat);
  const double expected_db = 10.0 * std::log10(i_sat / i_min);
  const bool dr_ok = std::abs(dr.db - expected_db) < 0.1;

  const bool pass = linear && slope_ok && consistency < 0.02 && dr_ok;
  report(8, "response curve and dynamic range", pass,
         fmt("linearity dev %.4f (tol 0.01), slopes nonincreasing %s, "
             "lin/nonlin consistency %.4f (tol 0.02), DR %.2f dB vs %.2f "
             "(tol 0.1)",
             std::abs(ratio_y / ratio_x - 1.0), slope_ok ? "yes" : "no",
             consistency, dr.db, expected_db));
}

// 9. Bandwidth extraction and the drive-power progression.
void criterion_bandwidth() {
  // Estimator accuracy on analytic shapes.
  SpectrumTrace lorentz;
  const double hwhm = 3.0e6;
  for (int i = 0; i < 401; ++i) {
    const double x = -1e8 + 2e8 * i / 400.0;
    lorentz.x.push_back(x);
    lorentz.y.push_back(hwhm * hwhm / (x * x + hwhm * hwhm));
  }
  const double step = lorentz.x[1] - lorentz.x[0];
  const auto lb = extract_bandwidth(lorentz);
  const bool lorentz_ok = std::abs(lb.fwhm - 2.0 * hwhm) <= step;

  auto doublet = [&](int points) {
    SpectrumTrace trace;
    const double sep = 3.0 * hwhm;
    for (int i = 0; i < points; ++i) {
      const double x = -6e7 + 12e7 * double(i) / (points - 1);
      trace.x.push_back(x);
      trace.y.push_back(
          hwhm * hwhm / ((x - sep) * (x - sep) + hwhm * hwhm) +
          hwhm * hwhm / ((x + sep) * (x + sep) + hwhm * hwhm));
    }
    return trace;
  };
  const auto coarse = extract_bandwidth(doublet(2001));
  const auto dense = extract_bandwidth(doublet(1000001));
  const bool doublet_ok =
      std::abs(coarse.fwhm - dense.fwhm) < 0.005 * dense.fwhm &&
      coarse.shape == SpectrumShape::kSplitBeyondHalf;

  // Model sweep: FWHM nondecreasing in the A1 drive with the
  // single -> split -> split-beyond-half progression (the shipped
  // bandwidth-sweep configuration).
  const auto cfg = parse_config(slurp(std::filesystem::path(
      RYDTHZ_SOURCE_DIR) / "configs" / "bandwidth_sweep.json"));
  const auto scheme = cfg.build_scheme();
  DetuningSweep sweep;
  sweep.variable = FieldLabel::kT;
  for (int i = 0; i < cfg.sweep.points; ++i) {
    sweep.detunings.push_back(
        kTwoPi * (cfg.sweep.start + (cfg.sweep.stop - cfg.sweep.start) * i /
                                        (cfg.sweep.points - 1.0)));
  }
  SweepOptions opts;
  opts.averaging = cfg.averaging_options();
  opts.threads = 2;

  std::vector<double> fwhm;
  std::vector<SpectrumShape> shapes;
  std::vector<double> separations;  // split-regime peak separations
  for (double a1 : cfg.sweep.outer_values) {
    auto point = cfg;
    point.fields[field_index(FieldLabel::kA1)].rabi_over_2pi_hz = a1;
    const auto trace =
        signal_spectrum(scheme, point.build_mixing(), sweep, opts);
    const auto bw = extract_bandwidth(trace);
    fwhm.push_back(bw.fwhm);
    shapes.push_back(bw.shape);
    if (bw.shape != SpectrumShape::kSingle) {
      // Separation of the two tallest above-half local maxima.
      const double half = 0.5 * bw.peak_y;
      std::vector<std::pair<double, double>> maxima;  // (height, x)
      for (size_t i = 1; i + 1 < trace.y.size(); ++i) {
        if (trace.y[i] > trace.y[i - 1] && trace.y[i] > trace.y[i + 1] &&
            trace.y[i] >= half) {
          maxima.push_back({trace.y[i], trace.x[i]});
        }
      }
      std::sort(maxima.rbegin(), maxima.rend());
      if (maxima.size() >= 2) {
        separations.push_back(std::abs(maxima[0].second - maxima[1].second));
      }
    }
  }
  bool monotone = true;
  for (size_t i = 1; i < fwhm.size(); ++i) {
    if (fwhm[i] < fwhm[i - 1] * (1.0 - 1e-9)) monotone = false;
  }
  bool separation_monotone = true;
  for (size_t i = 1; i < separations.size(); ++i) {
    if (separations[i] < separations[i - 1] * (1.0 - 1e-9)) {
      separation_monotone = false;
    }
  }
  const bool starts_single = shapes.front() == SpectrumShape::kSingle;
  const bool ends_beyond = shapes.back() == SpectrumShape::kSplitBeyondHalf;
  bool saw_split = false;
  bool ordered = true;
  int stage = 0;
  for (auto s : shapes) {
    const int value = static_cast<int>(s);
    if (value < stage) ordered = false;
    stage = std::max(stage, value);
    if (s == SpectrumShape::kSplit) saw_split = true;
  }

  const bool pass = lorentz_ok && doublet_ok && monotone &&
                    separation_monotone && starts_single && ends_beyond &&
                    saw_split && ordered;
  std::string shape_list;
  for (auto s : shapes) {
    shape_list += s == SpectrumShape::kSingle
                      ? '1'
                      : (s == SpectrumShape::kSplit ? 'S' : 'B');
  }
  report(9, "bandwidth extraction and drive progression", pass,
         fmt("lorentzian ok %s, doublet ok %s, FWHM monotone %s, split "
             "separation monotone %s, shapes %s",
             lorentz_ok ? "yes" : "no", doublet_ok ? "yes" : "no",
             monotone ? "yes" : "no", separation_monotone ? "yes" : "no",
             shape_list.c_str()));
}

// 10. Experimental headline numbers are out of desk-scale reach; the
// substitutes are the model checks above plus a documented configuration
// with eta_QE >= 4% and a synthetic dynamic range in the 30-50 dB decade.
void criterion_substitutes() {
  std::printf(
      "NOTE - criterion 10: the measured 4.3%% efficiency, 40.6 dB dynamic\n"
      "       range, 2 pi x 172 MHz bandwidth and the 91.3%% simulated\n"
      "       efficiency depend on unpublished experimental parameters and\n"
      "       are not reproduced here; criteria 2-3 and 8-9 stand in for\n"
      "       them, together with the checks below.\n");

  const std::filesystem::path preset =
      std::filesystem::path(RYDTHZ_SOURCE_DIR) / "configs" /
      "high_efficiency.json";
  const auto cfg = parse_config(slurp(preset));
  const auto scheme = cfg.build_scheme();
  const auto mixing = cfg.build_mixing();
  const Mat2c beta = linear_response_coefficients(
      scheme, mixing.fields, cfg.vapor, cfg.averaging_options());
  const auto conv = coupled_mode_propagate(beta, mixing, 1.0);
  const bool efficiency_ok = conv.eta_qe >= 0.04;

  DetectorSpec det;
  det.eta_qe = 0.043;
  det.eta_loss = 0.11;
  det.dark_rate = 2000.0;
  det.dead_time = 32e-9;
  det.s_eff = 1e-6;
  det.nu_thz = 0.107e12;
  const double eta0 = total_efficiency(det.eta_qe, det.eta_loss);
  SpectrumTrace synth;
  synth.abscissa = SpectrumTrace::Abscissa::kIntensity;
  const double i_sat = 2.1e-9;
  for (int i = 0; i < 1201; ++i) {
    const double intensity =
        std::pow(10.0, std::log10(i_sat) - 5.0 + 8.0 * i / 1200.0);
    synth.x.push_back(intensity);
    synth.y.push_back(eta0 * thz_count_rate(intensity, det) /
                      (1.0 + intensity / i_sat));
  }
  const auto dr = dynamic_range(synth, det, 1.0);
  const bool dr_ok = dr.db > 30.0 && dr.db < 50.0;

  report(10, "documented substitutes for unpublished figures",
         efficiency_ok && dr_ok,
         fmt("high-efficiency config eta_QE = %.4f (>= 0.04), synthetic "
             "dynamic range %.1f dB (30-50)",
             conv.eta_qe, dr.db));
}

}  // namespace

int main() {
  std::printf("acceptance suite\n");
  criterion_nep();
  criterion_eq1_ceiling();
  criterion_eq1_oracle();
  criterion_steady_state_oracle();
  criterion_doppler();
  criterion_photon_statistics();
  criterion_dead_time();
  criterion_response();
  criterion_bandwidth();
  criterion_substitutes();
  std::printf("%d criterion(s) failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
