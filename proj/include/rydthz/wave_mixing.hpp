#ifndef RYDTHZ_WAVE_MIXING_HPP
#define RYDTHZ_WAVE_MIXING_HPP

#include <map>
#include <string>
#include <vector>

#include "rydthz/doppler.hpp"
#include "rydthz/level_system.hpp"
#include "rydthz/types.hpp"

namespace rydthz {

/// Inputs of the two-mode conversion model. g are per-transition coupling
/// constants, G the drive-dressed effective couplings G_S = g_S |Omega_2
/// Omega_3| and G_T = g_T |Omega_1 Omega_4|.
struct MixingConfig {
  double g_s = 0.0;      // s^-1
  double g_t = 0.0;      // s^-1
  double big_g_s = 0.0;  // rad^3/s^3
  double big_g_t = 0.0;  // rad^3/s^3
  double length = 0.0;   // m
  double gamma_th = 0.0;  // rad/s
  double delta_k = 0.0;   // axial residual phase mismatch, rad/m
  double s_eff = 0.0;     // effective conversion area, m^2
  double loss_s = 0.0;    // extra amplitude decay of the signal mode, 1/m
  double loss_t = 0.0;    // extra amplitude decay of the THz mode, 1/m
  std::vector<DriveField> fields;
  VaporSpec vapor;

  void validate() const;
};

struct SpectrumTrace {
  enum class Abscissa { kDetuning, kIntensity };
  Abscissa abscissa = Abscissa::kDetuning;
  std::vector<double> x;
  std::vector<double> y;
  bool ordinate_nonnegative = true;
  std::map<std::string, double> params;

  void validate() const;
};

struct ConversionResult {
  double eta_qe = 0.0;
  Complex a_s_out{0.0, 0.0};  // sqrt(photons/s)
  Complex a_t_out{0.0, 0.0};
  std::vector<double> z;       // filled when a profile is requested
  std::vector<Complex> a_s;
  std::vector<Complex> a_t;
};

/// nu_S = nu_T + nu_1 + nu_2 + nu_3 - nu_4; throws on a non-positive result.
double signal_frequency(double nu_t, double nu_1, double nu_2, double nu_3,
                        double nu_4);

struct PhaseMismatch {
  Vec3d delta_k = Vec3d::Zero();  // k_T + k_1 + k_2 + k_3 - k_4 - k_S
  double magnitude = 0.0;
};
PhaseMismatch phase_mismatch(const std::vector<DriveField>& fields);

struct CouplingConstants {
  double g_s = 0.0;
  double g_t = 0.0;
};
/// g_X^2 = omega_X d_X^2 N / (2 eps0 hbar) for the signal and THz legs.
CouplingConstants coupling_constants(const LevelScheme& scheme,
                                     const VaporSpec& vapor);

/// Build-up rate 2 g_S^2 (G_S^2 + G_T^2) / (c Gamma_th G_S^2), rad/m.
double alpha_bar(double g_s, double big_g_s, double big_g_t, double gamma_th);

/// Closed-form conversion efficiency
/// G_S^2 G_T^2 (-1 + exp(-alpha L))^2 / (G_S^2 + G_T^2)^2.
double eta_qe_analytic(const MixingConfig& cfg);

/// The 2x2 response matrix whose induced propagation matrix is the rank-one
/// damping form equivalent to the closed-form efficiency.
Mat2c eq1_equivalent_beta(const MixingConfig& cfg);

struct AveragingOptions {
  VelocityRule rule = VelocityRule::kGaussHermite;
  int n_nodes = 64;
  double v_max_in_u = 6.0;
  double v_inner = 80.0;  // composite-rule core half-width, m/s
};

/// Doppler-averaged first-order response (rho_61, rho_54) = beta (Omega_S,
/// Omega_T), from a direct linear solve about the probe-free steady state.
Mat2c linear_response_coefficients(const LevelScheme& scheme,
                                   const std::vector<DriveField>& fields,
                                   const VaporSpec& vapor,
                                   const AveragingOptions& averaging = {});

struct PropagateOptions {
  double rtol = 1e-9;
  double atol = 1e-12;
  int profile_points = 0;  // > 0 records a_S(z), a_T(z) on a uniform grid
  bool force_ode = false;  // bypass the matrix-exponential shortcut
};

/// Integrates the linear two-mode equations with photon-flux-normalized
/// amplitudes, a_S(0) = 0 and a_T(0) = a_t_in; eta = |a_S(L)|^2 / a_t_in^2.
ConversionResult coupled_mode_propagate(const Mat2c& beta,
                                        const MixingConfig& cfg,
                                        double a_t_in,
                                        const PropagateOptions& options = {});

struct SweepOptions {
  AveragingOptions averaging;
  PropagateOptions propagate;
  int threads = 1;
};

struct DetuningSweep {
  FieldLabel variable = FieldLabel::kT;
  std::vector<double> detunings;  // rad/s, strictly increasing
};

/// Conversion efficiency versus the swept detuning (linearized pipeline).
SpectrumTrace signal_spectrum(const LevelScheme& scheme,
                              const MixingConfig& cfg,
                              const DetuningSweep& sweep,
                              const SweepOptions& options = {});

/// Doppler-averaged probe transmission exp(-alpha(Delta_1) L).
SpectrumTrace transmission_spectrum(const LevelScheme& scheme,
                                    const MixingConfig& cfg,
                                    const std::vector<double>& delta_1_grid,
                                    const SweepOptions& options = {});

/// Signal count rate versus input THz intensity from the full nonlinear
/// steady state propagated along the cell.
SpectrumTrace nonlinear_response_curve(const LevelScheme& scheme,
                                       const MixingConfig& cfg,
                                       const std::vector<double>& rabi_t_grid,
                                       const SweepOptions& options = {});

enum class SpectrumShape { kSingle, kSplit, kSplitBeyondHalf };
const char* shape_name(SpectrumShape shape);

struct BandwidthResult {
  double fwhm = 0.0;  // rad/s
  SpectrumShape shape = SpectrumShape::kSingle;
  double peak_x = 0.0;
  double peak_y = 0.0;
};

/// FWHM from the outermost half-maximum crossings (linear interpolation),
/// with the split / split-beyond-half classification of the central dip.
BandwidthResult extract_bandwidth(const SpectrumTrace& trace);

/// Convenience assembly of a MixingConfig from the microscopic inputs:
/// couplings from the scheme and vapor, G from the drive Rabi magnitudes,
/// Gamma_th from the A1 wavevector, delta_k from the field geometry.
MixingConfig make_mixing_config(const LevelScheme& scheme,
                                const std::vector<DriveField>& fields,
                                const VaporSpec& vapor, double length,
                                double s_eff, double loss_s = 0.0,
                                double loss_t = 0.0);

}  // namespace rydthz

#endif  // RYDTHZ_WAVE_MIXING_HPP
