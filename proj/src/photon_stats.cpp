#include "rydthz/photon_stats.hpp"

#include <algorithm>
#include <cmath>

#include "rydthz/rng.hpp"

namespace rydthz {

void PhotonStream::validate() const {
  if (duration < 0.0) {
    throw ConfigError("photon stream: duration must be >= 0");
  }
  double prev = -1.0;
  for (double t : times) {
    if (!(t > prev)) {
      throw PhysicsError("photon stream: times must be strictly increasing");
    }
    if (t < 0.0 || t > duration) {
      throw PhysicsError("photon stream: time outside [0, duration]");
    }
    prev = t;
  }
}

double CoincidenceHistogram::g2_zero() const {
  for (size_t i = 0; i + 1 < edges.size(); ++i) {
    if (edges[i] <= 0.0 && 0.0 < edges[i + 1]) return g2[i];
  }
  throw InsufficientDataError("coincidence histogram: no bin covers tau = 0");
}

void CoincidenceHistogram::validate() const {
  if (edges.size() != counts.size() + 1 || counts.size() != g2.size()) {
    throw ConfigError("coincidence histogram: inconsistent sizes");
  }
  for (size_t i = 0; i + 1 < edges.size(); ++i) {
    if (!(edges[i] < edges[i + 1])) {
      throw ConfigError("coincidence histogram: edges must increase");
    }
  }
  for (double v : g2) {
    if (v < 0.0) throw PhysicsError("coincidence histogram: negative g2");
  }
}

PhotonStream gen_coherent(double rate, double duration, std::uint64_t seed) {
  if (rate < 0.0) throw ConfigError("gen_coherent: rate must be >= 0");
  if (duration < 0.0) throw ConfigError("gen_coherent: duration must be >= 0");
  PhotonStream stream;
  stream.duration = duration;
  stream.source = PhotonStream::Source::kCoherent;
  stream.seed = seed;
  if (rate == 0.0 || duration == 0.0) return stream;
  stream.times.reserve(static_cast<size_t>(rate * duration * 1.1) + 16);
  CounterRng rng(seed, stream_id("gen_coherent"));
  double t = rng.exponential(rate);
  while (t < duration) {
    stream.times.push_back(t);
    t += rng.exponential(rate);
  }
  return stream;
}

PhotonStream gen_thermal(double rate, double tau_c, double duration,
                         std::uint64_t seed) {
  if (rate < 0.0) throw ConfigError("gen_thermal: rate must be >= 0");
  if (!(tau_c > 0.0)) throw ConfigError("gen_thermal: tau_c must be > 0");
  if (duration < 0.0) throw ConfigError("gen_thermal: duration must be >= 0");
  PhotonStream stream;
  stream.duration = duration;
  stream.source = PhotonStream::Source::kThermal;
  stream.seed = seed;
  if (rate == 0.0 || duration == 0.0) return stream;
  stream.times.reserve(static_cast<size_t>(rate * duration * 1.2) + 16);

  CounterRng field_rng(seed, stream_id("gen_thermal/field"));
  CounterRng arrival_rng(seed, stream_id("gen_thermal/arrivals"));

  // Exact OU update per step; the intensity is held constant within a step,
  // which biases g2 only at lags below dt = tau_c / 128.
  const double dt = tau_c / 128.0;
  const double decay = std::exp(-dt / tau_c);
  const double kick = std::sqrt(0.5 * (1.0 - decay * decay));
  double ex, ey;
  field_rng.normal_pair(ex, ey);
  ex *= std::sqrt(0.5);
  ey *= std::sqrt(0.5);  // stationary variance 1/2 per quadrature

  double step_start = 0.0;
  while (step_start < duration) {
    const double step_end = std::min(step_start + dt, duration);
    const double lambda = rate * (ex * ex + ey * ey);  // <|E|^2> = 1
    if (lambda > 0.0) {
      double t = step_start;
      for (;;) {
        t += arrival_rng.exponential(lambda);
        if (t >= step_end) break;
        stream.times.push_back(t);
      }
    }
    double g1, g2v;
    field_rng.normal_pair(g1, g2v);
    ex = decay * ex + kick * g1;
    ey = decay * ey + kick * g2v;
    step_start = step_end;
  }
  return stream;
}

PhotonStream detect(const PhotonStream& stream, double eta, double dark_rate,
                    double dead_time, std::uint64_t seed) {
  if (eta < 0.0 || eta > 1.0) {
    throw ConfigError("detect: efficiency must be within [0, 1]");
  }
  if (dark_rate < 0.0) throw ConfigError("detect: dark rate must be >= 0");
  if (dead_time < 0.0) throw ConfigError("detect: dead time must be >= 0");
  stream.validate();

  std::vector<double> kept;
  kept.reserve(stream.times.size());
  CounterRng thin_rng(seed, stream_id("detect/thin"));
  for (double t : stream.times) {
    if (thin_rng.bernoulli(eta)) kept.push_back(t);
  }

  std::vector<double> dark;
  if (dark_rate > 0.0 && stream.duration > 0.0) {
    CounterRng dark_rng(seed, stream_id("detect/dark"));
    double t = dark_rng.exponential(dark_rate);
    while (t < stream.duration) {
      dark.push_back(t);
      t += dark_rng.exponential(dark_rate);
    }
  }

  std::vector<double> merged(kept.size() + dark.size());
  std::merge(kept.begin(), kept.end(), dark.begin(), dark.end(),
             merged.begin());

  PhotonStream out;
  out.duration = stream.duration;
  out.source = PhotonStream::Source::kDetected;
  out.seed = seed;
  out.times.reserve(merged.size());
  double last = -2.0 * dead_time - 1.0;
  for (double t : merged) {
    if (t - last < dead_time) continue;
    if (!out.times.empty() && t <= out.times.back()) continue;  // exact ties
    out.times.push_back(t);
    last = t;
  }
  return out;
}

std::pair<PhotonStream, PhotonStream> hbt_split(const PhotonStream& stream,
                                                std::uint64_t seed) {
  stream.validate();
  PhotonStream a, b;
  a.duration = b.duration = stream.duration;
  a.source = b.source = stream.source;
  a.seed = b.seed = seed;
  CounterRng rng(seed, stream_id("hbt_split"));
  for (double t : stream.times) {
    (rng.bernoulli(0.5) ? a : b).times.push_back(t);
  }
  return {std::move(a), std::move(b)};
}

CoincidenceHistogram g2_cross(const PhotonStream& a, const PhotonStream& b,
                              double bin_width, double tau_max) {
  if (!(bin_width > 0.0)) throw ConfigError("g2_cross: bin width must be > 0");
  if (tau_max < bin_width) {
    throw ConfigError("g2_cross: tau_max must be >= bin width");
  }
  a.validate();
  b.validate();
  if (a.times.empty() || b.times.empty()) {
    throw InsufficientDataError("g2_cross: empty photon stream");
  }
  if (!(a.duration > 0.0) || a.duration != b.duration) {
    throw ConfigError("g2_cross: streams must share a positive duration");
  }

  // Zero-centered bins: centers at k * bin_width, |k| <= half_bins.
  const int half_bins = std::max(
      1, static_cast<int>(std::round(tau_max / bin_width)));
  const int n_bins = 2 * half_bins + 1;
  const double lo = -(half_bins + 0.5) * bin_width;

  CoincidenceHistogram hist;
  hist.edges.resize(n_bins + 1);
  for (int i = 0; i <= n_bins; ++i) hist.edges[i] = lo + i * bin_width;
  hist.counts.assign(n_bins, 0);
  hist.counts_a = a.times.size();
  hist.counts_b = b.times.size();

  const bool same_stream = &a == &b;
  const double window = (half_bins + 0.5) * bin_width;
  size_t j_lo = 0;
  for (size_t i = 0; i < a.times.size(); ++i) {
    const double t = a.times[i];
    while (j_lo < b.times.size() && b.times[j_lo] < t - window) ++j_lo;
    for (size_t j = j_lo; j < b.times.size() && b.times[j] < t + window;
         ++j) {
      if (same_stream && i == j) continue;
      const int bin =
          static_cast<int>(std::floor((b.times[j] - t - lo) / bin_width));
      if (bin >= 0 && bin < n_bins) {
        ++hist.counts[static_cast<size_t>(bin)];
      }
    }
  }

  const double rate_a = static_cast<double>(hist.counts_a) / a.duration;
  const double rate_b = static_cast<double>(hist.counts_b) / b.duration;
  hist.g2.resize(n_bins);
  for (int i = 0; i < n_bins; ++i) {
    const double center = 0.5 * (hist.edges[i] + hist.edges[i + 1]);
    // Finite-duration edge correction of the uncorrelated expectation.
    const double overlap = std::max(a.duration - std::abs(center), 0.0);
    const double expected = rate_a * rate_b * bin_width * overlap;
    hist.g2[i] = expected > 0.0
                     ? static_cast<double>(hist.counts[i]) / expected
                     : 0.0;
  }
  return hist;
}

AutocorrResult g2_single_autocorr(const PhotonStream& stream,
                                  double resolution, double dead_time) {
  if (!(resolution > 0.0)) {
    throw ConfigError("g2_single_autocorr: resolution must be > 0");
  }
  if (dead_time < 0.0) {
    throw ConfigError("g2_single_autocorr: dead time must be >= 0");
  }
  stream.validate();
  const std::uint64_t n_bins =
      static_cast<std::uint64_t>(std::floor(stream.duration / resolution));
  if (n_bins == 0) {
    throw InsufficientDataError("g2_single_autocorr: duration shorter than "
                                "one bin");
  }

  std::vector<std::uint32_t> occupancy;
  // Sparse pass: the stream is sorted, so equal-bin runs are contiguous.
  std::uint64_t occupied = 0;
  double sum_n = 0.0;
  double sum_nn1 = 0.0;
  size_t i = 0;
  while (i < stream.times.size()) {
    const std::uint64_t bin =
        static_cast<std::uint64_t>(stream.times[i] / resolution);
    if (bin >= n_bins) break;  // partial tail bin is dropped
    size_t j = i;
    while (j < stream.times.size() &&
           static_cast<std::uint64_t>(stream.times[j] / resolution) == bin) {
      ++j;
    }
    const double n = static_cast<double>(j - i);
    sum_n += n;
    sum_nn1 += n * (n - 1.0);
    ++occupied;
    i = j;
  }
  if (occupied < 100) {
    throw InsufficientDataError("g2_single_autocorr: fewer than 100 occupied "
                                "bins");
  }

  const double total_bins = static_cast<double>(n_bins);
  const double mean_n = sum_n / total_bins;
  const double mean_nn1 = sum_nn1 / total_bins;

  AutocorrResult result;
  result.occupied_bins = occupied;
  result.g2_raw = mean_nn1 / (mean_n * mean_n);
  const double acceptance =
      std::max(resolution - dead_time, 0.0) / resolution;
  result.g2_dead_time_corrected =
      acceptance > 0.0 ? result.g2_raw / (acceptance * acceptance)
                       : result.g2_raw;
  return result;
}

}  // namespace rydthz
