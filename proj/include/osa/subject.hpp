#ifndef OSA_SUBJECT_HPP
#define OSA_SUBJECT_HPP

#include <string>
#include <vector>

#include "osa/errors.hpp"

namespace osa {

enum class Label { Normal, Severe, Excluded };

inline const char* label_name(Label l) {
  switch (l) {
    case Label::Normal: return "Normal";
    case Label::Severe: return "Severe";
    case Label::Excluded: return "Excluded";
  }
  return "?";
}

inline Label label_from_name(const std::string& s) {
  if (s == "Normal") return Label::Normal;
  if (s == "Severe") return Label::Severe;
  if (s == "Excluded") return Label::Excluded;
  raise(ErrorCode::InvalidConfig, "unknown label '" + s + "'");
}

struct SignalTrace {
  std::vector<double> samples;  // physical units (mV for ECG)
  double sampling_rate = 0.0;   // Hz
  std::string label;

  double duration_s() const {
    return sampling_rate > 0 ? static_cast<double>(samples.size()) / sampling_rate : 0.0;
  }
};

struct EventAnnotation {
  std::string name;
  double start = 0.0;     // seconds from recording start
  double duration = 0.0;  // seconds
};

struct SubjectRecord {
  std::string subject_id;
  SignalTrace ecg;
  std::vector<EventAnnotation> events;
  double ahi = 0.0;  // events/hour, as provided by the dataset
  Label label = Label::Excluded;

  // Synthetic records carry generator ground truth; empty for real data.
  std::vector<double> truth_r_times;       // seconds
  std::vector<double> truth_r_amplitudes;  // mV
};

// Severity labeling per the study design: normal subjects have AHI in
// [2, 5], severe subjects have AHI > 35, everything else is excluded.
inline Label label_subject(double ahi) {
  if (ahi < 0.0) raise(ErrorCode::NegativeAhi, "ahi must be nonnegative");
  if (ahi >= 2.0 && ahi <= 5.0) return Label::Normal;
  if (ahi > 35.0) return Label::Severe;
  return Label::Excluded;
}

}  // namespace osa

#endif  // OSA_SUBJECT_HPP
