#include "osa/rpeaks.hpp"

#include <algorithm>
#include <cmath>

#include "osa/errors.hpp"

namespace osa {
namespace {

// Five-point derivative centered to cancel the group delay.
std::vector<double> derivative(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<double> d(n, 0.0);
  for (std::size_t i = 2; i + 2 < n; ++i)
    d[i] = (2.0 * x[i + 2] + x[i + 1] - x[i - 1] - 2.0 * x[i - 2]) / 8.0;
  return d;
}

// Centered moving average of the squared derivative.
std::vector<double> integrate(const std::vector<double>& e, std::size_t half) {
  const std::size_t n = e.size();
  std::vector<double> m(n, 0.0);
  double acc = 0.0;
  std::size_t lo = 0, hi = 0;  // current window [lo, hi)
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t want_lo = i > half ? i - half : 0;
    std::size_t want_hi = std::min(n, i + half + 1);
    while (hi < want_hi) acc += e[hi++];
    while (lo < want_lo) acc -= e[lo++];
    m[i] = acc / static_cast<double>(hi - lo);
  }
  return m;
}

}  // namespace

RPeakSeries detect_r_peaks(std::span<const double> samples, double sampling_rate) {
  const std::size_t n = samples.size();
  if (n < 8 || sampling_rate <= 0.0) raise(ErrorCode::TooFewPeaks, "window too short for detection");
  const std::size_t refractory = static_cast<std::size_t>(std::llround(kRefractorySeconds * sampling_rate));
  const std::size_t half_integ = static_cast<std::size_t>(std::llround(kIntegrationSeconds * sampling_rate / 2.0));
  const std::size_t refine = static_cast<std::size_t>(std::llround(kRefineSeconds * sampling_rate));

  std::vector<double> d = derivative(samples);
  for (double& v : d) v *= v;
  std::vector<double> m = integrate(d, half_integ);

  // Initial signal/noise estimates from the first two seconds.
  std::size_t warm = std::min(n, static_cast<std::size_t>(std::llround(2.0 * sampling_rate)));
  double spk = 0.0, npk = 0.0;
  for (std::size_t i = 0; i < warm; ++i) {
    spk = std::max(spk, m[i]);
    npk += m[i];
  }
  npk /= static_cast<double>(std::max<std::size_t>(warm, 1));
  if (spk <= 0.0) raise(ErrorCode::TooFewPeaks, "no signal energy in window");

  // Filter ringing puts smaller integrator maxima on both flanks of each
  // QRS; a taller maximum inside the refractory window replaces the
  // previous detection instead of being dropped.
  std::vector<std::size_t> accepted;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(m[i] >= m[i - 1] && m[i] > m[i + 1])) continue;  // local maximum of the integrator
    double threshold = npk + 0.25 * (spk - npk);
    if (m[i] > threshold) {
      if (accepted.empty() || i - accepted.back() >= refractory) {
        accepted.push_back(i);
        spk = 0.125 * m[i] + 0.875 * spk;
      } else if (m[i] > m[accepted.back()]) {
        accepted.back() = i;
        spk = 0.125 * m[i] + 0.875 * spk;
      }
    } else {
      npk = 0.125 * m[i] + 0.875 * npk;
    }
  }

  // Refine each accepted integrator peak to the local signal maximum.
  std::vector<std::size_t> refined;
  for (std::size_t i : accepted) {
    std::size_t lo = i > refine ? i - refine : 0;
    std::size_t hi = std::min(n - 1, i + refine);
    std::size_t best = lo;
    for (std::size_t k = lo + 1; k <= hi; ++k)
      if (samples[k] > samples[best]) best = k;
    refined.push_back(best);
  }
  std::sort(refined.begin(), refined.end());
  refined.erase(std::unique(refined.begin(), refined.end()), refined.end());

  // Enforce the refractory gap on refined positions, keeping the taller peak.
  std::vector<std::size_t> kept;
  for (std::size_t idx : refined) {
    if (!kept.empty() && idx - kept.back() < refractory) {
      if (samples[idx] > samples[kept.back()]) kept.back() = idx;
    } else {
      kept.push_back(idx);
    }
  }

  if (kept.size() < static_cast<std::size_t>(kMinPeaksPerWindow))
    raise(ErrorCode::TooFewPeaks,
          "found " + std::to_string(kept.size()) + " peaks, need " + std::to_string(kMinPeaksPerWindow));

  RPeakSeries peaks;
  for (std::size_t idx : kept) {
    peaks.times.push_back(static_cast<double>(idx) / sampling_rate);
    peaks.amplitudes.push_back(samples[idx]);
  }
  return peaks;
}

RPeakSeries detect_r_peaks(const EventWindow& window) {
  return detect_r_peaks(std::span<const double>(window.samples), window.sampling_rate);
}

}  // namespace osa
