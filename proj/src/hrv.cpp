#include "osa/hrv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "osa/errors.hpp"

namespace osa {

RrSeries compute_rr(const RPeakSeries& peaks) {
  if (peaks.times.size() < 2) raise(ErrorCode::TooFewPeaks, "need at least 2 peaks for RR intervals");
  RrSeries rr;
  rr.intervals_ms.reserve(peaks.times.size() - 1);
  rr.midpoint_times.reserve(peaks.times.size() - 1);
  for (std::size_t i = 0; i + 1 < peaks.times.size(); ++i) {
    rr.intervals_ms.push_back((peaks.times[i + 1] - peaks.times[i]) * 1000.0);
    rr.midpoint_times.push_back((peaks.times[i] + peaks.times[i + 1]) / 2.0);
  }
  return rr;
}

EdrSeries compute_edr(const RPeakSeries& peaks) {
  if (peaks.times.size() < 2) raise(ErrorCode::TooFewPeaks, "need at least 2 peaks for EDR");
  double mean = 0.0;
  for (double a : peaks.amplitudes) mean += a;
  mean /= static_cast<double>(peaks.amplitudes.size());
  EdrSeries edr;
  edr.times = peaks.times;
  edr.values.reserve(peaks.amplitudes.size());
  for (double a : peaks.amplitudes) edr.values.push_back(a - mean);
  return edr;
}

double mean_rr(const RrSeries& rr) {
  if (rr.intervals_ms.empty()) raise(ErrorCode::EmptySeries, "empty RR series");
  double sum = 0.0;
  for (double v : rr.intervals_ms) sum += v;
  return sum / static_cast<double>(rr.intervals_ms.size());
}

double serial_correlation(const RrSeries& rr, int lag) {
  const auto& x = rr.intervals_ms;
  const std::size_t n = x.size();
  if (lag < 1) raise(ErrorCode::BadArguments, "lag must be >= 1");
  if (n < static_cast<std::size_t>(lag) + 2) raise(ErrorCode::TooShort, "series too short for lag");

  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);

  double denom = 0.0;
  for (double v : x) denom += (v - mean) * (v - mean);
  if (denom == 0.0) raise(ErrorCode::DegenerateSeries, "zero variance RR series");

  double num = 0.0;
  for (std::size_t i = 0; i + lag < n; ++i) num += (x[i] - mean) * (x[i + lag] - mean);
  return num / denom;
}

int pnn50(const RrSeries& rr, bool absolute) {
  const auto& x = rr.intervals_ms;
  if (x.size() < 2) raise(ErrorCode::TooShort, "need at least 2 intervals");
  int count = 0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    double diff = x[i + 1] - x[i];
    if (absolute ? std::abs(diff) > 50.0 : diff > 50.0) ++count;
  }
  return count;
}

double sdsd(const RrSeries& rr) {
  const auto& x = rr.intervals_ms;
  if (x.size() < 3) raise(ErrorCode::TooShort, "need at least 3 intervals");
  std::vector<double> d(x.size() - 1);
  double mean = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    d[i] = x[i + 1] - x[i];
    mean += d[i];
  }
  mean /= static_cast<double>(d.size());
  double var = 0.0;
  for (double v : d) var += (v - mean) * (v - mean);
  var /= static_cast<double>(d.size() - 1);
  return std::sqrt(var);
}

const std::array<std::string, FeatureVector::kSize>& FeatureVector::names() {
  static const std::array<std::string, kSize> kNames = {
      "mean_rr_ms", "serial_corr_2", "serial_corr_3", "pnn50",         "sdsd_ms",
      "norm_vlf_rr", "norm_vlf_edr",  "norm_lf_edr",   "lf_hf_ratio_edr"};
  return kNames;
}

FeatureVector extract_feature_vector(const EventWindow& window, bool pnn50_absolute) {
  RPeakSeries peaks = detect_r_peaks(window);
  RrSeries rr = compute_rr(peaks);
  EdrSeries edr = compute_edr(peaks);

  FeatureVector fv;
  fv.mean_rr = mean_rr(rr);
  fv.r2 = serial_correlation(rr, 2);
  fv.r3 = serial_correlation(rr, 3);
  fv.pnn50 = pnn50(rr, pnn50_absolute);
  fv.sdsd = sdsd(rr);
  fv.norm_vlf_rr = band_powers(rr.midpoint_times, rr.intervals_ms).norm_vlf;

  BandPowers edr_bands = band_powers(edr.times, edr.values);
  fv.norm_vlf_edr = edr_bands.norm_vlf;
  fv.norm_lf_edr = edr_bands.norm_lf;
  fv.lf_hf_ratio_edr = edr_bands.lf_hf_ratio;
  return fv;
}

void write_feature_csv(const std::string& path, const std::vector<EventWindow>& windows,
                       const std::vector<FeatureVector>& features, const std::vector<bool>& valid) {
  if (windows.size() != features.size() || windows.size() != valid.size())
    raise(ErrorCode::LengthMismatch, "windows/features/valid size mismatch");
  std::ofstream out(path, std::ios::trunc);
  if (!out) raise(ErrorCode::MissingFile, "cannot write " + path);

  out << "subject_id,window_id,label";
  for (const auto& name : FeatureVector::names()) out << ',' << name;
  out << '\n';

  char buf[32];
  for (std::size_t i = 0; i < windows.size(); ++i) {
    if (!valid[i]) continue;
    out << windows[i].subject_id << ',' << windows[i].id << ',' << label_name(windows[i].label);
    for (double v : features[i].to_array()) {
      std::snprintf(buf, sizeof(buf), "%.12g", v);
      out << ',' << buf;
    }
    out << '\n';
  }
}

}  // namespace osa
