#ifndef OSA_HRV_HPP
#define OSA_HRV_HPP

#include <array>
#include <string>
#include <vector>

#include "osa/lomb.hpp"
#include "osa/rpeaks.hpp"
#include "osa/windows.hpp"

namespace osa {

struct RrSeries {
  std::vector<double> intervals_ms;     // successive R-R gaps in milliseconds
  std::vector<double> midpoint_times;   // seconds, midpoint of each pair
};

struct EdrSeries {
  std::vector<double> values;  // mean-removed R amplitudes
  std::vector<double> times;   // peak times, seconds
};

// intervals_i = (t_{i+1} - t_i) * 1000. Errors: TooFewPeaks (< 2 peaks).
RrSeries compute_rr(const RPeakSeries& peaks);

// R-amplitude EDR: amplitudes minus their mean, at peak times.
// Errors: TooFewPeaks (< 2 peaks).
EdrSeries compute_edr(const RPeakSeries& peaks);

// Errors: EmptySeries.
double mean_rr(const RrSeries& rr);

// Autocorrelation estimate at the given lag:
//   r_k = sum_{i=1..n-k} (x_i - xbar)(x_{i+k} - xbar) / sum (x_i - xbar)^2.
// Errors: TooShort (len < lag + 2), DegenerateSeries (zero variance).
double serial_correlation(const RrSeries& rr, int lag);

// Count of adjacent pairs with x_{i+1} - x_i > 50 ms. One-sided by default;
// `absolute` switches to the |difference| variant.
// Errors: TooShort (len < 2).
int pnn50(const RrSeries& rr, bool absolute = false);

// Sample standard deviation (n-1) of successive differences.
// Errors: TooShort (len < 3).
double sdsd(const RrSeries& rr);

// The nine scalar features fed to the SVM baseline.
struct FeatureVector {
  double mean_rr = 0.0;         // ms
  double r2 = 0.0, r3 = 0.0;    // serial correlations of RR
  double pnn50 = 0.0;           // raw count
  double sdsd = 0.0;            // ms
  double norm_vlf_rr = 0.0;
  double norm_vlf_edr = 0.0;
  double norm_lf_edr = 0.0;
  double lf_hf_ratio_edr = 0.0;

  static constexpr int kSize = 9;
  std::array<double, kSize> to_array() const {
    return {mean_rr, r2, r3, pnn50, sdsd, norm_vlf_rr, norm_vlf_edr, norm_lf_edr, lf_hf_ratio_edr};
  }
  static const std::array<std::string, kSize>& names();
};

// Full per-window extraction: peak detection, RR and EDR series, then the
// nine features. Propagates TooFewPeaks / TooShort / DegenerateSeries /
// ZeroTotalPower; callers exclude and log such windows.
FeatureVector extract_feature_vector(const EventWindow& window, bool pnn50_absolute = false);

// Feature table CSV: subject_id, window_id, label, then the nine features.
void write_feature_csv(const std::string& path, const std::vector<EventWindow>& windows,
                       const std::vector<FeatureVector>& features, const std::vector<bool>& valid);

}  // namespace osa

#endif  // OSA_HRV_HPP
