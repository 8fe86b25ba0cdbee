#ifndef OSA_EDF_HPP
#define OSA_EDF_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "osa/subject.hpp"

namespace osa {

// Classic EDF only: 256-byte ASCII main header, 256 bytes per signal,
// data records of 16-bit little-endian two's-complement integers.
// The EDF+ annotations channel is not supported; event annotations come
// from separate XML files.
struct SignalSpec {
  std::string label;               // 16 chars
  std::string transducer;          // 80 chars
  std::string physical_dimension;  // 8 chars
  double physical_min = 0.0;
  double physical_max = 0.0;
  int digital_min = 0;
  int digital_max = 0;
  std::string prefiltering;  // 80 chars
  int samples_per_record = 0;
  std::string reserved;  // 32 chars

  bool operator==(const SignalSpec&) const = default;
};

struct EdfHeader {
  std::string version = "0";  // 8 chars
  std::string patient_id;     // 80 chars
  std::string recording_id;   // 80 chars
  std::string start_date = "01.01.00";  // dd.mm.yy
  std::string start_time = "00.00.00";  // hh.mm.ss
  int header_bytes = 0;                 // 256 * (1 + signals)
  std::string reserved;                 // 44 chars
  int num_records = 0;
  double record_duration = 1.0;  // seconds
  std::vector<SignalSpec> signals;

  bool operator==(const EdfHeader&) const = default;
};

// Decodes a complete EDF byte image. Physical values are mapped as
//   physical = physical_min + (digital - digital_min) * scale,
//   scale = (physical_max - physical_min) / (digital_max - digital_min).
// Errors: MalformedHeader, TruncatedData, DegenerateCalibration.
std::pair<EdfHeader, std::vector<SignalTrace>> read_edf(const std::vector<std::uint8_t>& bytes);

// Encodes header + traces; inverse of read_edf on the digital samples.
// Fields are written left-justified and space-padded (canonical form), so
// write_edf(read_edf(f)) == f for files in canonical form.
// Errors: RangeOverflow when a physical value maps outside the digital range,
// LengthMismatch when traces do not match the header specs.
std::vector<std::uint8_t> write_edf(const EdfHeader& header, const std::vector<SignalTrace>& traces);

// The digital code a physical value maps to under a signal's calibration.
// Raises RangeOverflow if the rounded code falls outside [dmin, dmax].
int physical_to_digital(const SignalSpec& spec, double physical);

std::vector<std::uint8_t> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes);

}  // namespace osa

#endif  // OSA_EDF_HPP
