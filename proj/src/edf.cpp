#include "osa/edf.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace osa {
namespace {

bool ascii_printable(const std::uint8_t* p, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (p[i] < 32 || p[i] > 126) return false;
  }
  return true;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(' ');
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(' ');
  return s.substr(b, e - b + 1);
}

class FieldReader {
 public:
  FieldReader(const std::vector<std::uint8_t>& bytes, std::size_t offset)
      : bytes_(bytes), pos_(offset) {}

  std::string take(std::size_t width) {
    if (pos_ + width > bytes_.size()) raise(ErrorCode::TruncatedData, "header ends early");
    if (!ascii_printable(bytes_.data() + pos_, width))
      raise(ErrorCode::MalformedHeader, "non-ASCII bytes in header");
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), width);
    pos_ += width;
    return trim(s);
  }

  long take_int(std::size_t width, const char* what) {
    std::string s = take(width);
    if (s.empty()) raise(ErrorCode::MalformedHeader, std::string("empty numeric field: ") + what);
    char* end = nullptr;
    long v = std::strtol(s.c_str(), &end, 10);
    if (end != s.c_str() + s.size())
      raise(ErrorCode::MalformedHeader, std::string("bad integer field: ") + what + " = '" + s + "'");
    return v;
  }

  double take_real(std::size_t width, const char* what) {
    std::string s = take(width);
    if (s.empty()) raise(ErrorCode::MalformedHeader, std::string("empty numeric field: ") + what);
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size())
      raise(ErrorCode::MalformedHeader, std::string("bad real field: ") + what + " = '" + s + "'");
    return v;
  }

  std::size_t pos() const { return pos_; }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_;
};

void put_field(std::vector<std::uint8_t>& out, const std::string& value, std::size_t width,
               const char* what) {
  if (value.size() > width)
    raise(ErrorCode::MalformedHeader,
          std::string(what) + " does not fit in " + std::to_string(width) + " chars: '" + value + "'");
  if (!ascii_printable(reinterpret_cast<const std::uint8_t*>(value.data()), value.size()))
    raise(ErrorCode::MalformedHeader, std::string("non-ASCII characters in ") + what);
  for (char c : value) out.push_back(static_cast<std::uint8_t>(c));
  for (std::size_t i = value.size(); i < width; ++i) out.push_back(' ');
}

void put_int(std::vector<std::uint8_t>& out, long value, std::size_t width, const char* what) {
  put_field(out, std::to_string(value), width, what);
}

// Shortest %g form of `value` that fits the field and parses back exactly;
// falls back to the most precise form that fits.
std::string format_real(double value, std::size_t width) {
  char buf[64];
  std::string best;
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, value);
    std::string s(buf);
    if (s.size() > width) break;
    best = s;
    if (std::strtod(s.c_str(), nullptr) == value) return s;
  }
  if (best.empty()) {
    std::snprintf(buf, sizeof(buf), "%.*g", 2, value);
    best = buf;
  }
  return best;
}

void put_real(std::vector<std::uint8_t>& out, double value, std::size_t width, const char* what) {
  put_field(out, format_real(value, width), width, what);
}

}  // namespace

std::pair<EdfHeader, std::vector<SignalTrace>> read_edf(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 256) raise(ErrorCode::TruncatedData, "file shorter than the 256-byte header");

  FieldReader r(bytes, 0);
  EdfHeader h;
  h.version = r.take(8);
  h.patient_id = r.take(80);
  h.recording_id = r.take(80);
  h.start_date = r.take(8);
  h.start_time = r.take(8);
  h.header_bytes = static_cast<int>(r.take_int(8, "header_bytes"));
  h.reserved = r.take(44);
  h.num_records = static_cast<int>(r.take_int(8, "num_records"));
  h.record_duration = r.take_real(8, "record_duration");
  int ns = static_cast<int>(r.take_int(4, "num_signals"));

  if (ns < 0) raise(ErrorCode::MalformedHeader, "negative signal count");
  if (h.header_bytes != 256 * (ns + 1))
    raise(ErrorCode::MalformedHeader, "header_bytes does not match signal count");
  if (h.num_records < 0) raise(ErrorCode::MalformedHeader, "negative num_records");
  if (ns > 0 && h.record_duration <= 0.0)
    raise(ErrorCode::MalformedHeader, "record_duration must be positive");
  if (bytes.size() < static_cast<std::size_t>(h.header_bytes))
    raise(ErrorCode::TruncatedData, "file shorter than header_bytes");

  // Signal headers are stored field-by-field across all signals.
  h.signals.resize(ns);
  for (auto& s : h.signals) s.label = r.take(16);
  for (auto& s : h.signals) s.transducer = r.take(80);
  for (auto& s : h.signals) s.physical_dimension = r.take(8);
  for (auto& s : h.signals) s.physical_min = r.take_real(8, "physical_min");
  for (auto& s : h.signals) s.physical_max = r.take_real(8, "physical_max");
  for (auto& s : h.signals) s.digital_min = static_cast<int>(r.take_int(8, "digital_min"));
  for (auto& s : h.signals) s.digital_max = static_cast<int>(r.take_int(8, "digital_max"));
  for (auto& s : h.signals) s.prefiltering = r.take(80);
  for (auto& s : h.signals) s.samples_per_record = static_cast<int>(r.take_int(8, "samples_per_record"));
  for (auto& s : h.signals) s.reserved = r.take(32);

  std::size_t record_samples = 0;
  for (const auto& s : h.signals) {
    if (s.samples_per_record < 0) raise(ErrorCode::MalformedHeader, "negative samples_per_record");
    if (s.digital_min >= s.digital_max)
      raise(ErrorCode::DegenerateCalibration, "digital_min >= digital_max for '" + s.label + "'");
    if (s.physical_min == s.physical_max)
      raise(ErrorCode::DegenerateCalibration, "physical_min == physical_max for '" + s.label + "'");
    record_samples += static_cast<std::size_t>(s.samples_per_record);
  }

  std::size_t expected = static_cast<std::size_t>(h.header_bytes) +
                         2 * record_samples * static_cast<std::size_t>(h.num_records);
  if (bytes.size() < expected) raise(ErrorCode::TruncatedData, "fewer data bytes than header promises");
  if (bytes.size() > expected) raise(ErrorCode::MalformedHeader, "trailing bytes after last data record");

  std::vector<SignalTrace> traces(ns);
  for (int i = 0; i < ns; ++i) {
    const auto& s = h.signals[i];
    traces[i].label = s.label;
    traces[i].sampling_rate = ns > 0 ? s.samples_per_record / h.record_duration : 0.0;
    traces[i].samples.reserve(static_cast<std::size_t>(s.samples_per_record) * h.num_records);
  }

  std::size_t pos = static_cast<std::size_t>(h.header_bytes);
  for (int rec = 0; rec < h.num_records; ++rec) {
    for (int i = 0; i < ns; ++i) {
      const auto& s = h.signals[i];
      double scale = (s.physical_max - s.physical_min) /
                     (static_cast<double>(s.digital_max) - s.digital_min);
      for (int k = 0; k < s.samples_per_record; ++k) {
        std::uint16_t lo = bytes[pos];
        std::uint16_t hi = bytes[pos + 1];
        pos += 2;
        std::int16_t d = static_cast<std::int16_t>(static_cast<std::uint16_t>(lo | (hi << 8)));
        traces[i].samples.push_back(s.physical_min + (d - s.digital_min) * scale);
      }
    }
  }
  return {std::move(h), std::move(traces)};
}

int physical_to_digital(const SignalSpec& spec, double physical) {
  double scale = (spec.physical_max - spec.physical_min) /
                 (static_cast<double>(spec.digital_max) - spec.digital_min);
  long d = std::lround(spec.digital_min + (physical - spec.physical_min) / scale);
  if (d < spec.digital_min || d > spec.digital_max)
    raise(ErrorCode::RangeOverflow,
          "physical value " + std::to_string(physical) + " maps outside the digital range of '" +
              spec.label + "'");
  return static_cast<int>(d);
}

std::vector<std::uint8_t> write_edf(const EdfHeader& header, const std::vector<SignalTrace>& traces) {
  const int ns = static_cast<int>(header.signals.size());
  if (traces.size() != header.signals.size())
    raise(ErrorCode::LengthMismatch, "trace count does not match header signal count");
  if (header.num_records < 0) raise(ErrorCode::MalformedHeader, "negative num_records");
  if (ns > 0 && header.record_duration <= 0.0)
    raise(ErrorCode::MalformedHeader, "record_duration must be positive");

  std::size_t record_samples = 0;
  for (int i = 0; i < ns; ++i) {
    const auto& s = header.signals[i];
    if (s.digital_min >= s.digital_max)
      raise(ErrorCode::DegenerateCalibration, "digital_min >= digital_max for '" + s.label + "'");
    if (s.physical_min == s.physical_max)
      raise(ErrorCode::DegenerateCalibration, "physical_min == physical_max for '" + s.label + "'");
    if (s.digital_min < -32768 || s.digital_max > 32767)
      raise(ErrorCode::MalformedHeader, "digital range outside 16-bit for '" + s.label + "'");
    std::size_t want = static_cast<std::size_t>(s.samples_per_record) * header.num_records;
    if (traces[i].samples.size() != want)
      raise(ErrorCode::LengthMismatch,
            "trace '" + s.label + "' has " + std::to_string(traces[i].samples.size()) +
                " samples, header promises " + std::to_string(want));
    record_samples += static_cast<std::size_t>(s.samples_per_record);
  }

  std::vector<std::uint8_t> out;
  out.reserve(256 * (ns + 1) + 2 * record_samples * header.num_records);

  put_field(out, header.version, 8, "version");
  put_field(out, header.patient_id, 80, "patient_id");
  put_field(out, header.recording_id, 80, "recording_id");
  put_field(out, header.start_date, 8, "start_date");
  put_field(out, header.start_time, 8, "start_time");
  put_int(out, 256 * (ns + 1), 8, "header_bytes");
  put_field(out, header.reserved, 44, "reserved");
  put_int(out, header.num_records, 8, "num_records");
  put_real(out, header.record_duration, 8, "record_duration");
  put_int(out, ns, 4, "num_signals");

  for (const auto& s : header.signals) put_field(out, s.label, 16, "label");
  for (const auto& s : header.signals) put_field(out, s.transducer, 80, "transducer");
  for (const auto& s : header.signals) put_field(out, s.physical_dimension, 8, "physical_dimension");
  for (const auto& s : header.signals) put_real(out, s.physical_min, 8, "physical_min");
  for (const auto& s : header.signals) put_real(out, s.physical_max, 8, "physical_max");
  for (const auto& s : header.signals) put_int(out, s.digital_min, 8, "digital_min");
  for (const auto& s : header.signals) put_int(out, s.digital_max, 8, "digital_max");
  for (const auto& s : header.signals) put_field(out, s.prefiltering, 80, "prefiltering");
  for (const auto& s : header.signals) put_int(out, s.samples_per_record, 8, "samples_per_record");
  for (const auto& s : header.signals) put_field(out, s.reserved, 32, "reserved");

  for (int rec = 0; rec < header.num_records; ++rec) {
    for (int i = 0; i < ns; ++i) {
      const auto& s = header.signals[i];
      std::size_t base = static_cast<std::size_t>(rec) * s.samples_per_record;
      for (int k = 0; k < s.samples_per_record; ++k) {
        int d = physical_to_digital(s, traces[i].samples[base + k]);
        std::uint16_t u = static_cast<std::uint16_t>(static_cast<std::int16_t>(d));
        out.push_back(static_cast<std::uint8_t>(u & 0xff));
        out.push_back(static_cast<std::uint8_t>(u >> 8));
      }
    }
  }
  return out;
}

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) raise(ErrorCode::MissingFile, "cannot open '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return bytes;
}

void write_file_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) raise(ErrorCode::MissingFile, "cannot open '" + path + "' for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) raise(ErrorCode::MissingFile, "short write to '" + path + "'");
}

}  // namespace osa
