#ifndef RYDTHZ_CONFIG_HPP
#define RYDTHZ_CONFIG_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "rydthz/detector.hpp"
#include "rydthz/doppler.hpp"
#include "rydthz/level_system.hpp"
#include "rydthz/wave_mixing.hpp"

namespace rydthz {

/// All frequencies in config files are plain Hz; angular quantities use the
/// value divided by 2 pi and carry an _over_2pi_hz suffix in the schema.
struct SchemeConfig {
  double nu_a1_hz = 0.0;
  double nu_a2_hz = 0.0;
  double nu_a3_hz = 0.0;
  double nu_t_hz = 0.0;
  double nu_a4_hz = 0.0;
  std::array<double, kNumLevels> dipoles_cm{};  // loop order a1,a2,a3,t,a4,s

  struct Decay {
    int from = 0;
    int to = 0;
    double rate_over_2pi_hz = 0.0;
  };
  std::vector<Decay> decays;
  double rydberg_dephasing_over_2pi_hz = 0.0;  // pairs touching a Rydberg level

  struct Dephasing {
    int i = 0;
    int j = 0;
    double rate_over_2pi_hz = 0.0;
  };
  std::vector<Dephasing> extra_dephasing;
};

struct FieldConfig {
  double rabi_over_2pi_hz = 0.0;
  double phase_rad = 0.0;
  double detuning_over_2pi_hz = 0.0;
};

struct GeometryConfig {
  double length_m = 0.0;
  double s_eff_m2 = 0.0;
  double thz_tilt_rad = 0.0;  // tilt of the THz beam in the x-z plane
};

struct DetectorConfig {
  double eta_qe = 0.0;  // reference operating value for the metrics command
  double eta_loss = 0.0;
  double dark_rate_hz = 0.0;
  double dead_time_s = 0.0;
};

struct QuadratureConfig {
  VelocityRule rule = VelocityRule::kGaussHermite;
  int n_nodes = 64;
  double v_max_in_u = 6.0;
  double v_inner_m_s = 80.0;  // composite-rule core half-width
};

struct SweepConfig {
  std::string variable = "delta_t";  // delta_t | delta_1
  double start = 0.0;  // interpreted per command (Hz-over-2pi or W/m^2)
  double stop = 0.0;
  int points = 0;
  std::string scale = "linear";  // linear | log
  std::vector<double> outer_values;  // bandwidth-sweep: A1 Rabi/2pi list, Hz
};

struct ResponseSweepConfig {
  double rabi_t_start_over_2pi_hz = 2.0e3;
  double rabi_t_stop_over_2pi_hz = 2.0e6;
  int points = 13;
  // The nonlinear propagation re-solves the vapor at every integrator
  // step, so it runs on its own (coarser) composite velocity grid.
  int n_nodes = 601;
  double v_inner_m_s = 60.0;
};

struct MonteCarloConfig {
  std::string source = "coherent";  // coherent | thermal
  double rate_hz = 0.0;
  double coherence_time_s = 0.0;
  double duration_s = 0.0;
  double bin_width_s = 0.0;
  double tau_max_s = 0.0;
  double resolution_s = 0.0;
  bool apply_detector = true;
  double efficiency = 1.0;  // thinning efficiency of the detect stage
};

struct PropagationConfig {
  double ode_rtol = 1e-9;
  double ode_atol = 1e-12;
  double loss_s_per_m = 0.0;
  double loss_t_per_m = 0.0;
  double input_flux_per_s = 1e6;  // |a_T(0)|^2 for profile output
};

struct ExperimentConfig {
  SchemeConfig scheme;
  VaporSpec vapor;
  std::array<FieldConfig, kNumLevels> fields{};  // loop order a1,a2,a3,t,a4,s
  GeometryConfig geometry;
  DetectorConfig detector;
  QuadratureConfig quadrature;
  SweepConfig sweep;
  ResponseSweepConfig response_sweep;
  MonteCarloConfig monte_carlo;
  PropagationConfig propagation;
  std::uint64_t seed = 0;

  LevelScheme build_scheme() const;
  std::vector<DriveField> build_fields() const;
  DetectorSpec build_detector() const;
  MixingConfig build_mixing() const;
  AveragingOptions averaging_options() const;
};

/// Defaults tuned to the reference operating point; an empty config document
/// parses to exactly this.
ExperimentConfig default_config();

/// Parses and fully validates a JSON config document. Unknown keys are
/// rejected with their path; a run manifest (object with a "config" member)
/// is accepted and unwrapped, with its recorded seed applied.
ExperimentConfig parse_config(const std::string& json_text);

/// Canonical serialization: every field explicit, keys sorted, doubles
/// round-trip exact. parse_config(canonical_json(c)) reproduces c.
std::string canonical_json(const ExperimentConfig& config);

}  // namespace rydthz

#endif  // RYDTHZ_CONFIG_HPP
