#include "osa/iir.hpp"

#include <cmath>
#include <complex>

#include "osa/errors.hpp"

namespace osa {
namespace {

constexpr double kPi = 3.14159265358979323846;
using cplx = std::complex<double>;

void require_band(double f, double fs, const char* what) {
  if (fs <= 0.0) raise(ErrorCode::InvalidFrequency, "sampling rate must be positive");
  if (f <= 0.0 || f >= fs / 2.0)
    raise(ErrorCode::InvalidFrequency,
          std::string(what) + " = " + std::to_string(f) + " Hz must lie in (0, fs/2)");
}

}  // namespace

IirFilter design_notch(double f0_hz, double sampling_rate, double q) {
  require_band(f0_hz, sampling_rate, "notch frequency");
  if (q <= 0.0) raise(ErrorCode::InvalidFrequency, "q must be positive");

  // RBJ cookbook notch.
  double w0 = 2.0 * kPi * f0_hz / sampling_rate;
  double alpha = std::sin(w0) / (2.0 * q);
  double c = std::cos(w0);
  double a0 = 1.0 + alpha;

  Biquad s;
  s.b0 = 1.0 / a0;
  s.b1 = -2.0 * c / a0;
  s.b2 = 1.0 / a0;
  s.a1 = -2.0 * c / a0;
  s.a2 = (1.0 - alpha) / a0;

  IirFilter f;
  f.sections.push_back(s);
  f.description = "notch " + std::to_string(f0_hz) + " Hz, q " + std::to_string(q);
  return f;
}

IirFilter design_butter_bandpass(double f_low_hz, double f_high_hz, double sampling_rate) {
  require_band(f_low_hz, sampling_rate, "lower cutoff");
  require_band(f_high_hz, sampling_rate, "upper cutoff");
  if (f_low_hz >= f_high_hz) raise(ErrorCode::InvalidFrequency, "cutoffs must satisfy f_low < f_high");

  // Prewarped analog band edges; bilinear transform with c = 1.
  double w1 = std::tan(kPi * f_low_hz / sampling_rate);
  double w2 = std::tan(kPi * f_high_hz / sampling_rate);
  double bw = w2 - w1;
  double w0sq = w1 * w2;

  // Order-2 Butterworth prototype: pole pair at exp(+-j 3pi/4). The lowpass
  // to bandpass substitution s -> (s^2 + w0^2)/(bw s) splits each prototype
  // pole p into the roots of s^2 - p bw s + w0^2 = 0. Taking the upper
  // prototype pole gives one root of each conjugate pair.
  cplx proto(-std::sqrt(0.5), std::sqrt(0.5));
  cplx disc = std::sqrt(proto * proto * bw * bw - 4.0 * w0sq);
  cplx s_pole[2] = {(proto * bw + disc) / 2.0, (proto * bw - disc) / 2.0};

  // Bilinear map z = (1 + s)/(1 - s). The four analog zeros (two at 0, two
  // at infinity) land at z = +1, +1, -1, -1, i.e. numerator (z^2 - 1) per
  // section. Gain: k_bp = bw^2 over prod(1 - p_i) across all four poles.
  double gain = bw * bw;
  Biquad sec[2];
  for (int i = 0; i < 2; ++i) {
    cplx zp = (1.0 + s_pole[i]) / (1.0 - s_pole[i]);
    sec[i].b0 = 1.0;
    sec[i].b1 = 0.0;
    sec[i].b2 = -1.0;
    sec[i].a1 = -2.0 * zp.real();
    sec[i].a2 = std::norm(zp);
    gain /= std::norm(1.0 - s_pole[i]);  // (1 - p)(1 - conj p)
  }
  sec[0].b0 *= gain;
  sec[0].b2 *= gain;

  IirFilter f;
  f.sections.assign(sec, sec + 2);
  f.description = "butterworth bandpass " + std::to_string(f_low_hz) + "-" +
                  std::to_string(f_high_hz) + " Hz";
  return f;
}

namespace {

// Direct form II transposed, one pass.
void run_sections(const IirFilter& filter, std::vector<double>& x) {
  for (const auto& s : filter.sections) {
    double z1 = 0.0, z2 = 0.0;
    for (double& v : x) {
      double in = v;
      double out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      v = out;
    }
  }
}

}  // namespace

std::vector<double> apply_filter(const IirFilter& filter, std::span<const double> x, bool zero_phase) {
  if (x.empty()) raise(ErrorCode::EmptyInput, "cannot filter an empty signal");
  std::vector<double> y(x.begin(), x.end());
  run_sections(filter, y);
  if (zero_phase) {
    std::reverse(y.begin(), y.end());
    run_sections(filter, y);
    std::reverse(y.begin(), y.end());
  }
  return y;
}

double magnitude_response(const IirFilter& filter, double f_hz, double sampling_rate) {
  double w = 2.0 * kPi * f_hz / sampling_rate;
  cplx z1 = std::polar(1.0, -w);
  cplx z2 = z1 * z1;
  cplx h(1.0, 0.0);
  for (const auto& s : filter.sections)
    h *= (s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2);
  return std::abs(h);
}

}  // namespace osa
