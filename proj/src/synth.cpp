#include "osa/synth.hpp"

#include <cmath>

#include "osa/errors.hpp"
#include "osa/rng.hpp"

namespace osa {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kMinRrSeconds = 0.3;

struct Bump {
  double offset_frac;  // position relative to the R peak, fraction of RR
  double sigma_frac;   // width, fraction of RR
  double amplitude;    // mV
};

void add_bump(std::vector<double>& x, double fs, double center, double sigma, double amp) {
  if (sigma <= 0.0) return;
  double lo = center - 4.0 * sigma;
  double hi = center + 4.0 * sigma;
  long i0 = std::max(0L, static_cast<long>(std::ceil(lo * fs)));
  long i1 = std::min(static_cast<long>(x.size()) - 1, static_cast<long>(std::floor(hi * fs)));
  for (long i = i0; i <= i1; ++i) {
    double t = i / fs;
    double u = (t - center) / sigma;
    x[static_cast<std::size_t>(i)] += amp * std::exp(-0.5 * u * u);
  }
}

void validate(const SynthConfig& cfg) {
  if (cfg.duration <= 0.0) raise(ErrorCode::InvalidConfig, "duration must be positive");
  if (cfg.sampling_rate <= 0.0) raise(ErrorCode::InvalidConfig, "sampling_rate must be positive");
  if (cfg.heart_rate < 30.0 || cfg.heart_rate > 200.0)
    raise(ErrorCode::InvalidConfig, "heart_rate outside [30, 200] bpm");
  if (cfg.noise_sd < 0.0) raise(ErrorCode::InvalidConfig, "noise_sd must be nonnegative");
  if (cfg.mains_amplitude < 0.0) raise(ErrorCode::InvalidConfig, "mains_amplitude must be nonnegative");
  if (cfg.resp_rate < 0.0) raise(ErrorCode::InvalidConfig, "resp_rate must be nonnegative");
  if (cfg.qrs_sigma_frac <= 0.0) raise(ErrorCode::InvalidConfig, "qrs_sigma_frac must be positive");
  for (const auto& ev : cfg.event_plan) {
    if (ev.start < 0.0 || ev.duration <= 0.0)
      raise(ErrorCode::InvalidConfig, "event plan entries need start >= 0 and duration > 0");
  }
}

}  // namespace

SubjectRecord generate_synthetic_ecg(const SynthConfig& cfg) {
  validate(cfg);
  const double fs = cfg.sampling_rate;
  const std::size_t n = static_cast<std::size_t>(std::llround(cfg.duration * fs));

  SubjectRecord rec;
  rec.subject_id = cfg.subject_id;
  rec.ahi = cfg.ahi;
  rec.label = label_subject(cfg.ahi);
  rec.events = cfg.event_plan;
  rec.ecg.label = "ECG";
  rec.ecg.sampling_rate = fs;
  rec.ecg.samples.assign(n, 0.0);

  // Beat train: the next R time follows from the modulated RR at the
  // current beat, plus optional white beat-to-beat jitter. RR is floored at
  // 0.3 s so peaks never collide.
  const double rr_base = 60.0 / cfg.heart_rate;
  Rng beat_rng(derive_seed(cfg.seed, 0xbea7));
  std::vector<double> beat_times;
  for (double t = 0.5 * rr_base; t < cfg.duration;) {
    beat_times.push_back(t);
    double rr = rr_base * (1.0 + cfg.hrv_lf_amplitude * std::sin(2.0 * kPi * 0.1 * t) +
                           cfg.hrv_hf_amplitude * std::sin(2.0 * kPi * cfg.resp_rate * t));
    if (cfg.rr_jitter > 0.0) rr += rr_base * cfg.rr_jitter * beat_rng.normal();
    t += std::max(rr, kMinRrSeconds);
  }

  const Bump p_wave{-0.20, 0.025, 0.12};
  const Bump q_wave{-0.035, 0.010, -0.10};
  const Bump s_wave{0.035, 0.010, cfg.s_amplitude};
  const Bump t_wave{0.28, 0.055, cfg.t_amplitude};

  for (std::size_t i = 0; i < beat_times.size(); ++i) {
    double tr = beat_times[i];
    double rr_local = i + 1 < beat_times.size() ? beat_times[i + 1] - tr
                      : i > 0                   ? tr - beat_times[i - 1]
                                                : rr_base;
    double r_amp = cfg.r_amplitude * (1.0 + 0.15 * std::sin(2.0 * kPi * cfg.resp_rate * tr));
    for (const Bump& b : {p_wave, q_wave, s_wave, t_wave})
      add_bump(rec.ecg.samples, fs, tr + b.offset_frac * rr_local, b.sigma_frac * rr_local, b.amplitude);
    add_bump(rec.ecg.samples, fs, tr, cfg.qrs_sigma_frac * rr_local, r_amp);

    rec.truth_r_times.push_back(tr);
    rec.truth_r_amplitudes.push_back(r_amp);
  }

  if (cfg.mains_amplitude > 0.0) {
    for (std::size_t i = 0; i < n; ++i)
      rec.ecg.samples[i] += cfg.mains_amplitude * std::sin(2.0 * kPi * 60.0 * (i / fs));
  }
  if (cfg.noise_sd > 0.0) {
    Rng rng(cfg.seed);
    for (std::size_t i = 0; i < n; ++i) rec.ecg.samples[i] += rng.normal(0.0, cfg.noise_sd);
  }
  return rec;
}

SynthConfig cohort_subject_config(Label label, int index, std::uint64_t master_seed,
                                  const CohortParams& p) {
  if (label == Label::Excluded) raise(ErrorCode::InvalidConfig, "cohort classes are Normal and Severe");
  const int c = label == Label::Normal ? 0 : 1;
  // Severe subjects occupy the upper sub-seed half so the two classes never share streams.
  std::uint64_t sub = derive_seed(master_seed, static_cast<std::uint64_t>(index) * 2 + c);
  Rng rng(sub);

  SynthConfig cfg;
  cfg.seed = derive_seed(sub, 1);
  cfg.duration = p.duration;
  cfg.sampling_rate = p.sampling_rate;
  cfg.heart_rate = rng.uniform(p.heart_rate_lo[c], p.heart_rate_hi[c]);
  cfg.hrv_lf_amplitude = rng.uniform(p.lf_lo[c], p.lf_hi[c]);
  cfg.hrv_hf_amplitude = rng.uniform(p.hf_lo[c], p.hf_hi[c]);
  cfg.rr_jitter = rng.uniform(p.jitter_lo[c], p.jitter_hi[c]);
  cfg.resp_rate = rng.uniform(p.resp_lo[c], p.resp_hi[c]);
  cfg.mains_amplitude = p.mains_amplitude;
  cfg.noise_sd = p.noise_sd;
  cfg.t_amplitude = p.t_amp[c];
  cfg.qrs_sigma_frac = p.qrs_sigma_frac[c];
  cfg.s_amplitude = p.s_amp[c];
  cfg.ahi = rng.uniform(p.ahi_lo[c], p.ahi_hi[c]);

  char id[32];
  std::snprintf(id, sizeof(id), "%c%03d", c == 0 ? 'N' : 'S', index + 1);
  cfg.subject_id = id;

  // One apnea/hypopnea event every ~event_spacing seconds; every event
  // leaves at least 30 s of signal after its start.
  double t = 10.0;
  int k = 0;
  while (t + 30.0 <= cfg.duration) {
    EventAnnotation ev;
    ev.start = t + rng.uniform(0.0, 4.0);
    ev.duration = rng.uniform(28.0, 32.0);
    ev.name = (k % 2 == 0) ? "Obstructive Apnea" : "Hypopnea";
    if (ev.start + 30.0 > cfg.duration) break;
    cfg.event_plan.push_back(ev);
    t += p.event_spacing;
    ++k;
  }
  return cfg;
}

std::vector<SubjectRecord> generate_synthetic_cohort(int n_normal, int n_severe, std::uint64_t seed,
                                                     const CohortParams& params) {
  if (n_normal <= 0 || n_severe <= 0) raise(ErrorCode::InvalidConfig, "subject counts must be positive");
  std::vector<SubjectRecord> records;
  records.reserve(static_cast<std::size_t>(n_normal + n_severe));
  for (int i = 0; i < n_normal; ++i)
    records.push_back(generate_synthetic_ecg(cohort_subject_config(Label::Normal, i, seed, params)));
  for (int i = 0; i < n_severe; ++i)
    records.push_back(generate_synthetic_ecg(cohort_subject_config(Label::Severe, i, seed, params)));
  return records;
}

}  // namespace osa
