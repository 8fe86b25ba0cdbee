#include "osa/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "osa/errors.hpp"

namespace osa {
namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  char* end = nullptr;
  double v = std::strtod(value.c_str(), &end);
  if (end != value.c_str() + value.size() || value.empty())
    raise(ErrorCode::InvalidConfig, key + " expects a number, got '" + value + "'");
  return v;
}

long parse_long(const std::string& key, const std::string& value) {
  char* end = nullptr;
  long v = std::strtol(value.c_str(), &end, 10);
  if (end != value.c_str() + value.size() || value.empty())
    raise(ErrorCode::InvalidConfig, key + " expects an integer, got '" + value + "'");
  return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  char* end = nullptr;
  unsigned long long v = std::strtoull(value.c_str(), &end, 10);
  if (end != value.c_str() + value.size() || value.empty())
    raise(ErrorCode::InvalidConfig, key + " expects an unsigned integer, got '" + value + "'");
  return static_cast<std::uint64_t>(v);
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  raise(ErrorCode::InvalidConfig, key + " expects true/false, got '" + value + "'");
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
  std::vector<int> out;
  std::istringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(static_cast<int>(parse_long(key, trim(item))));
  if (out.empty()) raise(ErrorCode::InvalidConfig, key + " expects a comma-separated list");
  return out;
}

std::vector<std::string> parse_string_list(const std::string& value) {
  std::vector<std::string> out;
  std::istringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

FullConfig default_config() { return FullConfig{}; }

void apply_config_entry(FullConfig& cfg, const std::string& key, const std::string& value) {
  // run / data
  if (key == "windows") cfg.run.windows_dir = value;
  else if (key == "out") cfg.run.out_dir = value;
  else if (key == "model") {
    if (value == "svm") cfg.run.model = WhichModel::Svm;
    else if (value == "dl") cfg.run.model = WhichModel::Dl;
    else if (value == "both") cfg.run.model = WhichModel::Both;
    else raise(ErrorCode::InvalidConfig, "model must be svm, dl or both");
  }
  else if (key == "per_class") cfg.run.per_class = static_cast<std::size_t>(parse_long(key, value));
  else if (key == "folds") cfg.run.folds = static_cast<int>(parse_long(key, value));
  else if (key == "select_seed") cfg.run.select_seed = parse_u64(key, value);
  else if (key == "fold_seed") cfg.run.fold_seed = parse_u64(key, value);
  else if (key == "jobs") cfg.run.jobs = static_cast<int>(parse_long(key, value));
  else if (key == "pnn50_absolute") cfg.run.pnn50_absolute = parse_bool(key, value);
  // ingest
  else if (key == "channel_label") cfg.ingest.channel_label = value;
  else if (key == "annotation_patterns") cfg.ingest.annotation_patterns = parse_string_list(value);
  // filters
  else if (key == "notch_hz") cfg.filter.notch_hz = parse_double(key, value);
  else if (key == "notch_q") cfg.filter.notch_q = parse_double(key, value);
  else if (key == "bandpass_low_hz") cfg.filter.bandpass_low_hz = parse_double(key, value);
  else if (key == "bandpass_high_hz") cfg.filter.bandpass_high_hz = parse_double(key, value);
  else if (key == "zero_phase") cfg.filter.zero_phase = parse_bool(key, value);
  // svm
  else if (key == "svm_kernel") {
    if (value == "rbf") cfg.run.svm.kernel = KernelKind::Rbf;
    else if (value == "linear") cfg.run.svm.kernel = KernelKind::Linear;
    else raise(ErrorCode::InvalidConfig, "svm_kernel must be rbf or linear");
  }
  else if (key == "svm_c") cfg.run.svm.c = parse_double(key, value);
  else if (key == "svm_gamma") cfg.run.svm.gamma = parse_double(key, value);
  else if (key == "svm_tol") cfg.run.svm.tol = parse_double(key, value);
  else if (key == "svm_seed") cfg.run.svm.seed = parse_u64(key, value);
  // nn
  else if (key == "conv_units") cfg.run.nn.conv_units = parse_int_list(key, value);
  else if (key == "conv_kernel") cfg.run.nn.conv_kernel = static_cast<int>(parse_long(key, value));
  else if (key == "conv_strides") cfg.run.nn.conv_strides = parse_int_list(key, value);
  else if (key == "pool") cfg.run.nn.pool = static_cast<int>(parse_long(key, value));
  else if (key == "lstm_units") cfg.run.nn.lstm_units = parse_int_list(key, value);
  else if (key == "recurrent_dropout") cfg.run.nn.recurrent_dropout = parse_double(key, value);
  else if (key == "lstm_dropout") cfg.run.nn.inter_lstm_dropout = parse_double(key, value);
  else if (key == "dense_units") cfg.run.nn.dense_units = parse_int_list(key, value);
  else if (key == "learning_rate") cfg.run.nn.learning_rate = parse_double(key, value);
  else if (key == "rmsprop_rho") cfg.run.nn.rmsprop_rho = parse_double(key, value);
  else if (key == "rmsprop_eps") cfg.run.nn.rmsprop_eps = parse_double(key, value);
  else if (key == "batch_size") cfg.run.nn.batch_size = static_cast<int>(parse_long(key, value));
  else if (key == "max_epochs") cfg.run.nn.max_epochs = static_cast<int>(parse_long(key, value));
  else if (key == "patience") cfg.run.nn.patience = static_cast<int>(parse_long(key, value));
  else if (key == "min_delta") cfg.run.nn.min_delta = parse_double(key, value);
  else if (key == "nn_seed") cfg.run.nn.seed = parse_u64(key, value);
  else if (key == "bn_momentum") cfg.run.nn.bn_momentum = parse_double(key, value);
  else if (key == "bn_eps") cfg.run.nn.bn_eps = parse_double(key, value);
  else if (key == "float32") cfg.run.nn.use_float32 = parse_bool(key, value);
  // synthetic cohort
  else if (key == "synth_duration_s") cfg.cohort.duration = parse_double(key, value);
  else if (key == "synth_event_spacing_s") cfg.cohort.event_spacing = parse_double(key, value);
  else if (key == "synth_sampling_rate") cfg.cohort.sampling_rate = parse_double(key, value);
  else if (key == "synth_noise_sd") cfg.cohort.noise_sd = parse_double(key, value);
  else if (key == "synth_mains_amplitude") cfg.cohort.mains_amplitude = parse_double(key, value);
  else raise(ErrorCode::UnknownConfigKey, "unknown config key '" + key + "'");
}

void load_config_file(FullConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::MissingFile, "cannot open config file '" + path + "'");
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    std::size_t eq = s.find('=');
    if (eq == std::string::npos)
      raise(ErrorCode::InvalidConfig,
            path + ":" + std::to_string(line_no) + ": expected key = value");
    std::string key = trim(s.substr(0, eq));
    std::string value = trim(s.substr(eq + 1));
    apply_config_entry(cfg, key, value);
  }
}

}  // namespace osa
