#ifndef OSA_IIR_HPP
#define OSA_IIR_HPP

#include <cmath>
#include <span>
#include <string>
#include <vector>

namespace osa {

// One second-order section, a0 normalized to 1.
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;

  // Jury criterion for a quadratic: poles strictly inside the unit circle.
  bool stable() const { return std::abs(a2) < 1.0 && std::abs(a1) < 1.0 + a2; }
};

struct IirFilter {
  std::vector<Biquad> sections;
  std::string description;

  bool stable() const {
    for (const auto& s : sections)
      if (!s.stable()) return false;
    return true;
  }
};

// Second-order mains notch: zero pair on the unit circle at +-2*pi*f0/fs,
// pole radius set by the bandwidth f0/q. |H(f0)| = 0, |H(0)| = |H(Nyquist)| = 1.
// Errors: InvalidFrequency.
IirFilter design_notch(double f0_hz, double sampling_rate, double q);

// Butterworth bandpass from the order-2 analog prototype (two biquads) via
// the bilinear transform with tan prewarping. |H| at both cutoffs is the
// half-power point, -3.01 dB.
// Errors: InvalidFrequency.
IirFilter design_butter_bandpass(double f_low_hz, double f_high_hz, double sampling_rate);

// Applies all sections. zero_phase runs forward then backward, cancelling
// phase distortion; output length equals input length either way.
// Errors: EmptyInput.
std::vector<double> apply_filter(const IirFilter& filter, std::span<const double> x,
                                 bool zero_phase = true);

// |H(e^{j 2 pi f / fs})| for the cascade.
double magnitude_response(const IirFilter& filter, double f_hz, double sampling_rate);

inline double to_db(double magnitude) { return 20.0 * std::log10(magnitude); }

}  // namespace osa

#endif  // OSA_IIR_HPP
