#include "rydthz/detector.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace rydthz {

void DetectorSpec::validate() const {
  if (eta_qe < 0.0 || eta_qe > 1.0) {
    throw ConfigError("detector: eta_qe must be within [0, 1]");
  }
  if (eta_loss < 0.0 || eta_loss > 1.0) {
    throw ConfigError("detector: eta_loss must be within [0, 1]");
  }
  if (dark_rate < 0.0) throw ConfigError("detector: dark rate must be >= 0");
  if (dead_time < 0.0) throw ConfigError("detector: dead time must be >= 0");
  if (!(s_eff > 0.0)) throw ConfigError("detector: S_eff must be > 0");
  if (!(nu_thz > 0.0)) throw ConfigError("detector: nu_T must be > 0");
}

double thz_count_rate(double intensity, const DetectorSpec& spec) {
  spec.validate();
  if (intensity < 0.0) {
    throw ConfigError("thz_count_rate: intensity must be >= 0");
  }
  return intensity * spec.s_eff / (constants::kPlanck * spec.nu_thz);
}

double total_efficiency(double eta_qe, double eta_loss) {
  if (eta_qe < 0.0 || eta_qe > 1.0 || eta_loss < 0.0 || eta_loss > 1.0) {
    throw ConfigError("total_efficiency: efficiencies must be within [0, 1]");
  }
  return eta_qe * eta_loss;
}

double nep(const DetectorSpec& spec, double eta) {
  spec.validate();
  if (!(eta > 0.0)) {
    throw ConfigError("nep: undefined for zero total efficiency");
  }
  return constants::kPlanck * spec.nu_thz * std::sqrt(2.0 * spec.dark_rate) /
         eta;
}

double snr(double signal_rate, double dark_rate, double integration_time) {
  if (!(integration_time > 0.0)) {
    throw ConfigError("snr: integration time must be > 0");
  }
  if (signal_rate < 0.0 || dark_rate < 0.0) {
    throw ConfigError("snr: rates must be >= 0");
  }
  if (signal_rate == 0.0) return 0.0;
  const double variance = (signal_rate + 2.0 * dark_rate) * integration_time;
  return signal_rate * integration_time / std::sqrt(variance);
}

DynamicRangeResult dynamic_range(const SpectrumTrace& curve,
                                 const DetectorSpec& spec,
                                 double integration_time) {
  curve.validate();
  spec.validate();
  if (curve.abscissa != SpectrumTrace::Abscissa::kIntensity) {
    throw ConfigError("dynamic_range: curve must be count rate vs intensity");
  }
  const int n = static_cast<int>(curve.x.size());
  if (n < 4) throw ConfigError("dynamic_range: curve has too few points");
  if (!(curve.x.front() > 0.0)) {
    throw ConfigError("dynamic_range: intensities must be > 0");
  }

  std::vector<double> efficiency(n);
  for (int i = 0; i < n; ++i) {
    efficiency[i] = curve.y[i] / thz_count_rate(curve.x[i], spec);
  }

  // Small-signal plateau: median efficiency over the lowest decade.
  std::vector<double> low;
  for (int i = 0; i < n; ++i) {
    if (curve.x[i] <= 10.0 * curve.x.front()) low.push_back(efficiency[i]);
  }
  std::sort(low.begin(), low.end());
  const double plateau = low.size() % 2 == 1
                             ? low[low.size() / 2]
                             : 0.5 * (low[low.size() / 2 - 1] +
                                      low[low.size() / 2]);

  // Crossings are interpolated linearly in log10(I).
  const auto interp_log = [&](int a, int b, double ya, double yb,
                              double target) {
    const double t = (target - ya) / (yb - ya);
    return std::pow(10.0, std::log10(curve.x[a]) +
                              t * (std::log10(curve.x[b]) -
                                   std::log10(curve.x[a])));
  };

  DynamicRangeResult result;
  result.plateau_efficiency = plateau;

  double i_min = -1.0;
  double prev_snr = snr(curve.y[0], spec.dark_rate, integration_time);
  if (prev_snr >= 1.0) {
    i_min = curve.x[0];
  } else {
    for (int i = 1; i < n; ++i) {
      const double s = snr(curve.y[i], spec.dark_rate, integration_time);
      if (s >= 1.0) {
        i_min = interp_log(i - 1, i, prev_snr, s, 1.0);
        break;
      }
      prev_snr = s;
    }
  }
  if (i_min < 0.0) {
    throw InsufficientDataError("dynamic_range: curve never reaches "
                                "SNR = 1 (below the noise floor)");
  }
  result.i_min = i_min;

  result.i_max = curve.x[n - 1];
  result.compression_found = false;
  for (int i = 1; i < n; ++i) {
    if (efficiency[i] <= 0.5 * plateau) {
      result.i_max = interp_log(i - 1, i, efficiency[i - 1], efficiency[i],
                                0.5 * plateau);
      result.compression_found = true;
      break;
    }
  }

  result.db = 10.0 * std::log10(result.i_max / result.i_min);
  return result;
}

}  // namespace rydthz
