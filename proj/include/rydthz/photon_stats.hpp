#ifndef RYDTHZ_PHOTON_STATS_HPP
#define RYDTHZ_PHOTON_STATS_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "rydthz/errors.hpp"

namespace rydthz {

struct PhotonStream {
  enum class Source { kCoherent, kThermal, kDetected };

  std::vector<double> times;  // strictly increasing arrival times, s
  double duration = 0.0;      // s
  Source source = Source::kCoherent;
  std::uint64_t seed = 0;

  double rate() const {
    return duration > 0.0 ? static_cast<double>(times.size()) / duration
                          : 0.0;
  }
  void validate() const;
};

struct CoincidenceHistogram {
  std::vector<double> edges;        // bin edges, strictly increasing, s
  std::vector<std::uint64_t> counts;  // raw pair counts per bin
  std::vector<double> g2;           // normalized values per bin
  std::uint64_t counts_a = 0;
  std::uint64_t counts_b = 0;

  /// g2 of the bin containing tau = 0.
  double g2_zero() const;
  void validate() const;
};

/// Homogeneous Poisson arrivals over [0, duration).
PhotonStream gen_coherent(double rate, double duration, std::uint64_t seed);

/// Pseudo-thermal (Cox) stream: intensity follows the squared magnitude of a
/// complex Ornstein-Uhlenbeck field with correlation time tau_c, giving
/// g2(tau) = 1 + exp(-2 |tau| / tau_c).
PhotonStream gen_thermal(double rate, double tau_c, double duration,
                         std::uint64_t seed);

/// Bernoulli thinning with efficiency eta, superposed dark counts at rate
/// dark_rate, then a non-paralyzable dead time tau_d.
PhotonStream detect(const PhotonStream& stream, double eta, double dark_rate,
                    double dead_time, std::uint64_t seed);

/// 50/50 splitter; each photon routed independently.
std::pair<PhotonStream, PhotonStream> hbt_split(const PhotonStream& stream,
                                                std::uint64_t seed);

/// Full pair-count cross-correlation histogram over |tau| <= tau_max,
/// normalized by the uncorrelated-pair expectation per bin.
CoincidenceHistogram g2_cross(const PhotonStream& a, const PhotonStream& b,
                              double bin_width, double tau_max);

struct AutocorrResult {
  double g2_raw = 0.0;
  double g2_dead_time_corrected = 0.0;
  std::uint64_t occupied_bins = 0;
};

/// Single-detector zero-delay estimate <n(n-1)> / <n>^2 over bins of the
/// given resolution. The corrected value divides out the pair acceptance
/// ((r - tau_d)/r)^2 lost to the detector dead time.
AutocorrResult g2_single_autocorr(const PhotonStream& stream,
                                  double resolution, double dead_time = 0.0);

}  // namespace rydthz

#endif  // RYDTHZ_PHOTON_STATS_HPP
