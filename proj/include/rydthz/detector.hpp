#ifndef RYDTHZ_DETECTOR_HPP
#define RYDTHZ_DETECTOR_HPP

#include "rydthz/errors.hpp"
#include "rydthz/wave_mixing.hpp"

namespace rydthz {

struct DetectorSpec {
  double eta_qe = 0.0;     // converter quantum efficiency
  double eta_loss = 0.0;   // coupling + counting-module efficiency
  double dark_rate = 0.0;  // counts/s
  double dead_time = 0.0;  // s
  double s_eff = 0.0;      // effective conversion area, m^2
  double nu_thz = 0.0;     // Hz

  void validate() const;
};

/// R_T = I_T S_eff / (h nu_T), counts/s.
double thz_count_rate(double intensity, const DetectorSpec& spec);

double total_efficiency(double eta_qe, double eta_loss);

/// NEP = h nu_T sqrt(2 D) / eta, W/sqrt(Hz).
double nep(const DetectorSpec& spec, double eta);

/// Shot-noise SNR over integration time tau with the dark rate counted in
/// both the signal and reference gates: R tau / sqrt((R + 2 D) tau).
double snr(double signal_rate, double dark_rate, double integration_time);

struct DynamicRangeResult {
  double db = 0.0;
  double i_min = 0.0;           // SNR = 1 crossing, W/m^2
  double i_max = 0.0;           // -3 dB efficiency point, W/m^2
  double plateau_efficiency = 0.0;
  bool compression_found = true;  // false: range reported up to the last point
};

/// Input-intensity span between the SNR = 1 floor and the point where the
/// instantaneous efficiency drops to half its small-signal plateau.
DynamicRangeResult dynamic_range(const SpectrumTrace& curve,
                                 const DetectorSpec& spec,
                                 double integration_time);

}  // namespace rydthz

#endif  // RYDTHZ_DETECTOR_HPP
