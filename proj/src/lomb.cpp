#include "osa/lomb.hpp"

#include <cmath>
#include <limits>

#include "osa/errors.hpp"

namespace osa {
namespace {

constexpr double kPi = 3.14159265358979323846;

}  // namespace

std::vector<double> lomb_scargle_power(std::span<const double> times, std::span<const double> values,
                                       std::span<const double> freqs_hz) {
  const std::size_t n = times.size();
  if (n != values.size()) raise(ErrorCode::LengthMismatch, "times/values length mismatch");
  if (n < 4) raise(ErrorCode::DegenerateSeries, "need at least 4 points");

  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) {
    d[i] = values[i] - mean;
    var += d[i] * d[i];
  }
  var /= static_cast<double>(n - 1);
  if (var == 0.0) raise(ErrorCode::DegenerateSeries, "zero variance");

  std::vector<double> power;
  power.reserve(freqs_hz.size());
  for (double f : freqs_hz) {
    if (f <= 0.0) raise(ErrorCode::InvalidFrequency, "grid frequencies must be positive");
    const double w = 2.0 * kPi * f;

    double s2 = 0.0, c2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      s2 += std::sin(2.0 * w * times[i]);
      c2 += std::cos(2.0 * w * times[i]);
    }
    const double tau = std::atan2(s2, c2) / (2.0 * w);

    double cs = 0.0, sn = 0.0, cc = 0.0, ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double arg = w * (times[i] - tau);
      double c = std::cos(arg), s = std::sin(arg);
      cs += d[i] * c;
      sn += d[i] * s;
      cc += c * c;
      ss += s * s;
    }
    double p = 0.0;
    if (cc > 0.0) p += cs * cs / cc;
    if (ss > 0.0) p += sn * sn / ss;
    power.push_back(p / (2.0 * var));
  }
  return power;
}

BandPowers band_powers(std::span<const double> times, std::span<const double> values) {
  // Fixed grid covering all three bands; band edges fall on grid points.
  std::vector<double> freqs;
  const int steps = static_cast<int>(std::llround((kHfHighHz - kVlfLowHz) / kBandGridStepHz));
  freqs.reserve(steps + 1);
  for (int i = 0; i <= steps; ++i) freqs.push_back(kVlfLowHz + i * kBandGridStepHz);

  std::vector<double> power = lomb_scargle_power(times, values, freqs);

  auto grid_index = [&](double f) {
    return static_cast<std::size_t>(std::llround((f - kVlfLowHz) / kBandGridStepHz));
  };
  auto trapezoid = [&](std::size_t lo, std::size_t hi) {
    double area = 0.0;
    for (std::size_t i = lo; i < hi; ++i)
      area += 0.5 * (power[i] + power[i + 1]) * kBandGridStepHz;
    return area;
  };

  BandPowers bp;
  bp.vlf = trapezoid(0, grid_index(kVlfHighHz));
  bp.lf = trapezoid(grid_index(kVlfHighHz), grid_index(kLfHighHz));
  bp.hf = trapezoid(grid_index(kLfHighHz), grid_index(kHfHighHz));

  double total = bp.vlf + bp.lf + bp.hf;
  if (total <= 0.0) raise(ErrorCode::ZeroTotalPower, "no spectral power in the analysis bands");
  bp.norm_vlf = bp.vlf / total;
  bp.norm_lf = bp.lf / total;
  bp.norm_hf = bp.hf / total;
  bp.lf_hf_ratio = bp.hf > 0.0 ? bp.lf / bp.hf : std::numeric_limits<double>::infinity();
  return bp;
}

}  // namespace osa
