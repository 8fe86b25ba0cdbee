#ifndef OSA_RPEAKS_HPP
#define OSA_RPEAKS_HPP

#include <vector>

#include "osa/windows.hpp"

namespace osa {

struct RPeakSeries {
  std::vector<double> times;       // seconds from window start, strictly increasing
  std::vector<double> amplitudes;  // signal value at each peak
};

inline constexpr double kRefractorySeconds = 0.2;
inline constexpr double kIntegrationSeconds = 0.15;
inline constexpr double kRefineSeconds = 0.05;
inline constexpr int kMinPeaksPerWindow = 5;

// Pan-Tompkins style detector: five-point derivative, squaring, 150 ms
// moving integration, adaptive threshold with a 200 ms refractory period,
// peak time refined to the local signal maximum within +-50 ms. Thresholds
// adapt from the data, so detection is invariant to positive rescaling.
// Errors: TooFewPeaks (< 5 peaks found).
RPeakSeries detect_r_peaks(const EventWindow& window);

// Same pipeline on a bare sample array (used on full filtered records).
RPeakSeries detect_r_peaks(std::span<const double> samples, double sampling_rate);

}  // namespace osa

#endif  // OSA_RPEAKS_HPP
