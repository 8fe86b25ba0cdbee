#ifndef OSA_LOMB_HPP
#define OSA_LOMB_HPP

#include <span>
#include <vector>

namespace osa {

// Standard normalized Lomb-Scargle periodogram for unevenly sampled series,
// evaluated at each grid frequency. The estimator mean-centers the values,
// so power is invariant to constant offsets.
// Errors: DegenerateSeries (< 4 points or zero variance), InvalidFrequency.
std::vector<double> lomb_scargle_power(std::span<const double> times, std::span<const double> values,
                                       std::span<const double> freqs_hz);

struct BandPowers {
  double vlf = 0.0, lf = 0.0, hf = 0.0;
  double norm_vlf = 0.0, norm_lf = 0.0, norm_hf = 0.0;
  double lf_hf_ratio = 0.0;  // +infinity when hf is zero
};

// Spectral bands: VLF 0.003-0.04 Hz, LF 0.04-0.15 Hz, HF 0.15-0.4 Hz.
inline constexpr double kVlfLowHz = 0.003;
inline constexpr double kVlfHighHz = 0.04;
inline constexpr double kLfHighHz = 0.15;
inline constexpr double kHfHighHz = 0.4;
inline constexpr double kBandGridStepHz = 0.001;

// Trapezoid band integrals of the periodogram on the fixed grid
// 0.003..0.4 Hz, step 0.001 Hz; normalized so the three fractions sum to 1.
// Errors: DegenerateSeries, ZeroTotalPower.
BandPowers band_powers(std::span<const double> times, std::span<const double> values);

}  // namespace osa

#endif  // OSA_LOMB_HPP
