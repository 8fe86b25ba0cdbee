#ifndef OSA_SYNTH_HPP
#define OSA_SYNTH_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "osa/subject.hpp"

namespace osa {

// Synthetic single-channel ECG: a PQRST template train (five Gaussian bumps
// per beat) with sinusoidal RR modulation, respiratory R-amplitude
// modulation, 60 Hz mains and white noise. A stand-in for the restricted
// clinical recordings; no physiological fidelity is claimed.
struct SynthConfig {
  std::uint64_t seed = 0;
  double duration = 60.0;     // seconds
  double sampling_rate = 512.0;
  double heart_rate = 60.0;   // bpm, in [30, 200]
  double hrv_lf_amplitude = 0.0;  // RR modulation depth at 0.1 Hz
  double hrv_hf_amplitude = 0.0;  // RR modulation depth at resp_rate
  double rr_jitter = 0.0;         // white beat-to-beat RR noise, fraction of the base RR
  double resp_rate = 0.25;        // Hz
  double mains_amplitude = 0.0;   // mV at 60 Hz
  double noise_sd = 0.0;          // mV
  std::vector<EventAnnotation> event_plan;

  // PQRST morphology (positions/widths are fractions of the local RR).
  double qrs_sigma_frac = 0.012;
  double t_amplitude = 0.30;   // mV
  double s_amplitude = -0.15;  // mV
  double r_amplitude = 1.0;    // mV before respiratory modulation

  std::string subject_id = "synth";
  double ahi = 3.0;  // assigned label value, not derived from event_plan
};

// Deterministic given the config (seed included). Ground-truth R-peak times
// and amplitudes are stored in the returned record.
// Errors: InvalidConfig.
SubjectRecord generate_synthetic_ecg(const SynthConfig& cfg);

// Per-class parameter distributions for cohort generation. Morphology and
// AHI ranges are disjoint between the classes; the HRV ranges overlap, so
// the hand-crafted features separate the classes only statistically while
// the waveform shape separates them cleanly.
struct CohortParams {
  double duration = 2100.0;  // ~52 qualifying events per subject
  double event_spacing = 40.0;
  // [lo, hi) ranges per class: index 0 = Normal, 1 = Severe
  double heart_rate_lo[2] = {55.0, 62.0};
  double heart_rate_hi[2] = {75.0, 82.0};
  double lf_lo[2] = {0.025, 0.012};
  double lf_hi[2] = {0.060, 0.045};
  double hf_lo[2] = {0.030, 0.012};
  double hf_hi[2] = {0.075, 0.050};
  double jitter_lo[2] = {0.020, 0.015};
  double jitter_hi[2] = {0.050, 0.045};
  double resp_lo[2] = {0.21, 0.15};
  double resp_hi[2] = {0.29, 0.23};
  double t_amp[2] = {0.28, 0.58};
  double qrs_sigma_frac[2] = {0.011, 0.021};
  double s_amp[2] = {-0.12, -0.32};
  double ahi_lo[2] = {2.0, 36.0};
  double ahi_hi[2] = {5.0, 80.0};
  double mains_amplitude = 0.05;
  double noise_sd = 0.03;
  double sampling_rate = 512.0;
};

// builds n_normal + n_severe records; each subject derives its own sub-seed,
// so generation is a pure function of (counts, seed, params).
// Errors: InvalidConfig.
std::vector<SubjectRecord> generate_synthetic_cohort(int n_normal, int n_severe, std::uint64_t seed,
                                                     const CohortParams& params = CohortParams{});

// The SynthConfig a cohort subject uses; exposed for tests.
SynthConfig cohort_subject_config(Label label, int index, std::uint64_t master_seed,
                                  const CohortParams& params);

}  // namespace osa

#endif  // OSA_SYNTH_HPP
