#include "osa/windows.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "osa/errors.hpp"

#include <json.hpp>

namespace osa {

std::vector<double> zscore(std::span<const double> x) {
  if (x.size() < 2) raise(ErrorCode::TooShort, "z-score needs at least 2 samples");
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= static_cast<double>(x.size());
  if (var == 0.0) raise(ErrorCode::DegenerateWindow, "zero variance, z-score undefined");
  double inv_sd = 1.0 / std::sqrt(var);
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - mean) * inv_sd;
  return out;
}

const char* skip_reason_name(SkipReason reason) {
  switch (reason) {
    case SkipReason::DurationOutOfRange: return "DurationOutOfRange";
    case SkipReason::InsufficientSignal: return "InsufficientSignal";
    case SkipReason::DegenerateSegment: return "DegenerateSegment";
    case SkipReason::ExcludedSubject: return "ExcludedSubject";
  }
  return "?";
}

ExtractionResult extract_event_windows(const SubjectRecord& record) {
  ExtractionResult result;
  const double fs = record.ecg.sampling_rate;
  const std::size_t n = record.ecg.samples.size();
  const std::size_t segment_len = static_cast<std::size_t>(std::llround(kSegmentSeconds * fs));
  const std::size_t window_len = static_cast<std::size_t>(std::llround(kWindowSeconds * fs));

  int index = 0;
  for (const auto& ev : record.events) {
    if (record.label == Label::Excluded) {
      result.skipped.push_back({ev, SkipReason::ExcludedSubject});
      continue;
    }
    if (ev.duration < kEventMinSeconds || ev.duration > kEventMaxSeconds) {
      result.skipped.push_back({ev, SkipReason::DurationOutOfRange});
      continue;
    }
    std::size_t start = static_cast<std::size_t>(std::llround(ev.start * fs));
    if (ev.start < 0.0 || start + segment_len > n) {
      result.skipped.push_back({ev, SkipReason::InsufficientSignal});
      continue;
    }

    std::span<const double> segment(record.ecg.samples.data() + start, segment_len);
    std::vector<double> normalized;
    try {
      normalized = zscore(segment);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::DegenerateWindow) {
        result.skipped.push_back({ev, SkipReason::DegenerateSegment});
        continue;
      }
      throw;
    }
    normalized.resize(window_len);

    EventWindow w;
    w.id = record.subject_id + "_w" + std::to_string(index++);
    w.subject_id = record.subject_id;
    w.label = record.label;
    w.source_event = ev;
    w.sampling_rate = fs;
    w.samples = std::move(normalized);
    result.windows.push_back(std::move(w));
  }
  return result;
}

void write_window_store(const std::string& dir, const std::vector<EventWindow>& windows) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  nlohmann::json index;
  index["format"] = "osa-window-store";
  index["version"] = kWindowStoreVersion;
  index["count"] = windows.size();
  index["sampling_rate"] = windows.empty() ? 0.0 : windows.front().sampling_rate;
  index["samples_per_window"] = windows.empty() ? 0 : windows.front().samples.size();
  index["windows"] = nlohmann::json::array();

  std::ofstream bin(dir + "/windows.bin", std::ios::binary | std::ios::trunc);
  if (!bin) raise(ErrorCode::MissingFile, "cannot write " + dir + "/windows.bin");

  for (const auto& w : windows) {
    if (!windows.empty() && w.samples.size() != windows.front().samples.size())
      raise(ErrorCode::LengthMismatch, "window store requires uniform window length");
    nlohmann::json meta;
    meta["id"] = w.id;
    meta["subject_id"] = w.subject_id;
    meta["label"] = label_name(w.label);
    meta["event_name"] = w.source_event.name;
    meta["event_start"] = w.source_event.start;
    meta["event_duration"] = w.source_event.duration;
    index["windows"].push_back(std::move(meta));

    for (double v : w.samples) {
      float f = static_cast<float>(v);
      std::uint32_t u;
      std::memcpy(&u, &f, 4);
      unsigned char le[4] = {static_cast<unsigned char>(u & 0xff),
                             static_cast<unsigned char>((u >> 8) & 0xff),
                             static_cast<unsigned char>((u >> 16) & 0xff),
                             static_cast<unsigned char>((u >> 24) & 0xff)};
      bin.write(reinterpret_cast<const char*>(le), 4);
    }
  }
  bin.close();

  std::ofstream idx(dir + "/index.json", std::ios::trunc);
  if (!idx) raise(ErrorCode::MissingFile, "cannot write " + dir + "/index.json");
  idx << index.dump(1) << "\n";
}

std::vector<EventWindow> read_window_store(const std::string& dir) {
  std::ifstream idx(dir + "/index.json");
  if (!idx) raise(ErrorCode::MissingFile, "cannot open " + dir + "/index.json");
  nlohmann::json index;
  try {
    idx >> index;
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorCode::MalformedHeader, std::string("bad window index: ") + e.what());
  }
  if (index.value("format", "") != "osa-window-store" || index.value("version", -1) != kWindowStoreVersion)
    raise(ErrorCode::MalformedHeader, "unrecognized window store format/version");

  const std::size_t count = index.at("count").get<std::size_t>();
  const std::size_t len = index.at("samples_per_window").get<std::size_t>();
  const double fs = index.at("sampling_rate").get<double>();

  std::ifstream bin(dir + "/windows.bin", std::ios::binary);
  if (!bin) raise(ErrorCode::MissingFile, "cannot open " + dir + "/windows.bin");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(bin)), std::istreambuf_iterator<char>());
  if (bytes.size() != count * len * 4)
    raise(ErrorCode::TruncatedData, "windows.bin size does not match the index");

  std::vector<EventWindow> windows(count);
  std::size_t pos = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const auto& meta = index.at("windows").at(i);
    EventWindow& w = windows[i];
    w.id = meta.at("id").get<std::string>();
    w.subject_id = meta.at("subject_id").get<std::string>();
    w.label = label_from_name(meta.at("label").get<std::string>());
    w.source_event.name = meta.value("event_name", "");
    w.source_event.start = meta.value("event_start", 0.0);
    w.source_event.duration = meta.value("event_duration", 0.0);
    w.sampling_rate = fs;
    w.samples.resize(len);
    for (std::size_t k = 0; k < len; ++k) {
      std::uint32_t u = static_cast<std::uint32_t>(bytes[pos]) |
                        (static_cast<std::uint32_t>(bytes[pos + 1]) << 8) |
                        (static_cast<std::uint32_t>(bytes[pos + 2]) << 16) |
                        (static_cast<std::uint32_t>(bytes[pos + 3]) << 24);
      pos += 4;
      float f;
      std::memcpy(&f, &u, 4);
      w.samples[k] = static_cast<double>(f);
    }
  }
  return windows;
}

}  // namespace osa
