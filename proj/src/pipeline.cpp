#include "osa/pipeline.hpp"

#include <filesystem>
#include <fstream>

#include "osa/annotations.hpp"
#include "osa/edf.hpp"
#include "osa/errors.hpp"

#include <json.hpp>

namespace osa {

SubjectRecord filter_record(SubjectRecord record, const FilterConfig& cfg) {
  IirFilter notch = design_notch(cfg.notch_hz, record.ecg.sampling_rate, cfg.notch_q);
  IirFilter bandpass =
      design_butter_bandpass(cfg.bandpass_low_hz, cfg.bandpass_high_hz, record.ecg.sampling_rate);
  record.ecg.samples = apply_filter(notch, record.ecg.samples, cfg.zero_phase);
  record.ecg.samples = apply_filter(bandpass, record.ecg.samples, cfg.zero_phase);
  return record;
}

std::string write_cohort(const std::string& dir, const std::vector<SubjectRecord>& records,
                         std::uint64_t seed) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  std::ofstream manifest(dir + "/manifest.jsonl", std::ios::trunc);
  if (!manifest) raise(ErrorCode::MissingFile, "cannot write " + dir + "/manifest.jsonl");

  for (const auto& rec : records) {
    const double fs_hz = rec.ecg.sampling_rate;
    const int spr = static_cast<int>(std::llround(fs_hz));
    const int num_records = static_cast<int>(rec.ecg.samples.size()) / spr;
    if (static_cast<std::size_t>(num_records) * spr != rec.ecg.samples.size())
      raise(ErrorCode::InvalidConfig, "cohort records need an integral number of seconds");

    EdfHeader h;
    h.patient_id = rec.subject_id;
    h.recording_id = "synthetic cohort";
    h.num_records = num_records;
    h.record_duration = 1.0;
    SignalSpec spec;
    spec.label = rec.ecg.label.empty() ? "ECG" : rec.ecg.label;
    spec.transducer = "synthetic";
    spec.physical_dimension = "mV";
    spec.physical_min = -8.0;
    spec.physical_max = 8.0;
    spec.digital_min = -32768;
    spec.digital_max = 32767;
    spec.samples_per_record = spr;
    h.signals.push_back(spec);
    h.header_bytes = 256 * 2;

    std::string edf_name = rec.subject_id + ".edf";
    std::string xml_name = rec.subject_id + ".xml";
    write_file_bytes(dir + "/" + edf_name, write_edf(h, {rec.ecg}));

    std::ofstream xml(dir + "/" + xml_name, std::ios::trunc);
    if (!xml) raise(ErrorCode::MissingFile, "cannot write " + dir + "/" + xml_name);
    xml << render_annotations(rec.events);
    xml.close();

    nlohmann::json line;
    line["subject_id"] = rec.subject_id;
    line["label"] = label_name(rec.label);
    line["ahi"] = rec.ahi;
    line["edf_path"] = edf_name;
    line["xml_path"] = xml_name;
    line["seed"] = seed;
    manifest << line.dump() << "\n";
  }
  return dir + "/manifest.jsonl";
}

std::vector<ManifestEntry> read_cohort_manifest(const std::string& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) raise(ErrorCode::MissingFile, "cannot open " + manifest_path);

  std::vector<ManifestEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      raise(ErrorCode::MalformedHeader,
            "manifest line " + std::to_string(line_no) + ": " + e.what());
    }
    ManifestEntry entry;
    entry.subject_id = j.at("subject_id").get<std::string>();
    entry.label = label_from_name(j.at("label").get<std::string>());
    entry.ahi = j.at("ahi").get<double>();
    entry.edf_path = j.at("edf_path").get<std::string>();
    entry.xml_path = j.at("xml_path").get<std::string>();
    entry.seed = j.value("seed", 0ULL);
    entries.push_back(std::move(entry));
  }
  return entries;
}

SubjectRecord load_subject(const std::string& manifest_dir, const ManifestEntry& entry,
                           const IngestConfig& cfg) {
  auto [header, traces] = read_edf(read_file_bytes(manifest_dir + "/" + entry.edf_path));

  const SignalTrace* ecg = nullptr;
  for (const auto& t : traces) {
    if (t.label == cfg.channel_label) {
      ecg = &t;
      break;
    }
  }
  if (ecg == nullptr)
    raise(ErrorCode::MissingField,
          "channel '" + cfg.channel_label + "' not found in " + entry.edf_path);

  std::ifstream xml_in(manifest_dir + "/" + entry.xml_path);
  if (!xml_in) raise(ErrorCode::MissingFile, "cannot open " + entry.xml_path);
  std::string xml_text((std::istreambuf_iterator<char>(xml_in)), std::istreambuf_iterator<char>());

  SubjectRecord rec;
  rec.subject_id = entry.subject_id;
  rec.ecg = *ecg;
  rec.events = parse_annotations(xml_text, cfg.annotation_patterns);
  rec.ahi = entry.ahi;
  rec.label = label_subject(entry.ahi);
  return rec;
}

PreprocessStats preprocess_cohort(const std::string& manifest_path, const std::string& out_dir,
                                  const FilterConfig& filter_cfg, const IngestConfig& ingest_cfg) {
  std::string manifest_dir = std::filesystem::path(manifest_path).parent_path().string();
  if (manifest_dir.empty()) manifest_dir = ".";

  PreprocessStats stats;
  std::vector<EventWindow> all_windows;
  for (const auto& entry : read_cohort_manifest(manifest_path)) {
    SubjectRecord rec = filter_record(load_subject(manifest_dir, entry, ingest_cfg), filter_cfg);
    ExtractionResult extraction = extract_event_windows(rec);
    for (auto& w : extraction.windows) all_windows.push_back(std::move(w));
    for (auto& s : extraction.skipped) stats.skipped.emplace_back(entry.subject_id, std::move(s));
    ++stats.subjects;
  }
  stats.windows = all_windows.size();
  write_window_store(out_dir, all_windows);
  return stats;
}

}  // namespace osa
