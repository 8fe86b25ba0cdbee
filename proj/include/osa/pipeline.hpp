#ifndef OSA_PIPELINE_HPP
#define OSA_PIPELINE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "osa/iir.hpp"
#include "osa/subject.hpp"
#include "osa/windows.hpp"

namespace osa {

// Filtering front end: mains notch followed by the Butterworth bandpass,
// zero-phase by default so R-wave timing is preserved.
struct FilterConfig {
  double notch_hz = 60.0;
  double notch_q = 30.0;
  double bandpass_low_hz = 5.0;
  double bandpass_high_hz = 35.0;
  bool zero_phase = true;
};

// The ECG channel label and which annotation names mark events.
struct IngestConfig {
  std::string channel_label = "ECG";
  std::vector<std::string> annotation_patterns = {"apnea", "hypopnea"};
};

// Applies notch + bandpass to the record's ECG in place.
SubjectRecord filter_record(SubjectRecord record, const FilterConfig& cfg);

// One line per subject in <dir>/manifest.jsonl.
struct ManifestEntry {
  std::string subject_id;
  Label label = Label::Excluded;
  double ahi = 0.0;
  std::string edf_path;  // relative to the manifest directory
  std::string xml_path;
  std::uint64_t seed = 0;
};

// Writes one EDF + one annotation XML per record plus the manifest; returns
// the manifest path. EDF calibration: physical [-8, 8] mV over the full
// 16-bit digital range, 1 s records.
std::string write_cohort(const std::string& dir, const std::vector<SubjectRecord>& records,
                         std::uint64_t seed);

std::vector<ManifestEntry> read_cohort_manifest(const std::string& manifest_path);

// Loads one subject from its EDF + XML files.
// Errors: MissingFile, MissingField (channel label absent), plus EDF/XML errors.
SubjectRecord load_subject(const std::string& manifest_dir, const ManifestEntry& entry,
                           const IngestConfig& cfg);

struct PreprocessStats {
  std::size_t subjects = 0;
  std::size_t windows = 0;
  std::vector<std::pair<std::string, SkippedEvent>> skipped;  // subject_id, event
};

// Full preprocessing: load each manifest subject, filter, extract windows,
// write the window store to out_dir. Subjects stream one at a time.
PreprocessStats preprocess_cohort(const std::string& manifest_path, const std::string& out_dir,
                                  const FilterConfig& filter_cfg, const IngestConfig& ingest_cfg);

}  // namespace osa

#endif  // OSA_PIPELINE_HPP
