#ifndef OSA_WINDOWS_HPP
#define OSA_WINDOWS_HPP

#include <span>
#include <string>
#include <vector>

#include "osa/subject.hpp"

namespace osa {

// (x - mean) / sigma with population sigma.
// Errors: TooShort (length < 2), DegenerateWindow (sigma = 0).
std::vector<double> zscore(std::span<const double> x);

// One preprocessed event window: a 30 s segment starting at the event onset
// was z-scored, then only the first 15 s kept.
struct EventWindow {
  std::string id;          // subject_id + running index, unique within a store
  std::string subject_id;
  Label label = Label::Excluded;
  EventAnnotation source_event;
  double sampling_rate = 0.0;
  std::vector<double> samples;  // exactly 15 * sampling_rate
};

enum class SkipReason {
  DurationOutOfRange,  // event not in [28, 32] s
  InsufficientSignal,  // fewer than 30 s of signal after event start
  DegenerateSegment,   // zero variance, cannot z-score
  ExcludedSubject,     // subject label is Excluded
};

const char* skip_reason_name(SkipReason reason);

struct SkippedEvent {
  EventAnnotation event;
  SkipReason reason = SkipReason::DurationOutOfRange;
};

struct ExtractionResult {
  std::vector<EventWindow> windows;
  std::vector<SkippedEvent> skipped;
};

inline constexpr double kEventMinSeconds = 28.0;
inline constexpr double kEventMaxSeconds = 32.0;
inline constexpr double kSegmentSeconds = 30.0;
inline constexpr double kWindowSeconds = 15.0;

// Walks the record's events; each qualifying event yields one window. The
// record's ECG is expected to be filtered already.
ExtractionResult extract_event_windows(const SubjectRecord& record);

// Window store: <dir>/windows.bin holds count * samples_per_window 32-bit
// little-endian floats, window-major; <dir>/index.json carries the format
// version, sampling rate and per-window metadata in file order.
inline constexpr int kWindowStoreVersion = 1;

void write_window_store(const std::string& dir, const std::vector<EventWindow>& windows);
std::vector<EventWindow> read_window_store(const std::string& dir);

}  // namespace osa

#endif  // OSA_WINDOWS_HPP
