#include <cstdio>
#include <cstring>
#include <fstream>

#include "osa/model.hpp"

#include <json.hpp>

namespace osa {

void validate_model_config(const ModelConfig& cfg) {
  auto positive = [](const std::vector<int>& v) {
    for (int x : v)
      if (x <= 0) return false;
    return !v.empty();
  };
  if (!positive(cfg.conv_units) || !positive(cfg.lstm_units) || !positive(cfg.dense_units))
    raise(ErrorCode::InvalidConfig, "unit counts must be positive");
  if (cfg.conv_strides.size() != cfg.conv_units.size())
    raise(ErrorCode::InvalidConfig, "conv_strides must match conv_units in length");
  for (int s : cfg.conv_strides)
    if (s < 1) raise(ErrorCode::InvalidConfig, "conv strides must be >= 1");
  if (cfg.conv_kernel < 1) raise(ErrorCode::InvalidConfig, "conv_kernel must be >= 1");
  if (cfg.pool < 1) raise(ErrorCode::InvalidConfig, "pool must be >= 1");
  if (cfg.recurrent_dropout < 0.0 || cfg.recurrent_dropout >= 1.0 || cfg.inter_lstm_dropout < 0.0 ||
      cfg.inter_lstm_dropout >= 1.0)
    raise(ErrorCode::InvalidConfig, "dropout rates must be in [0,1)");
  if (cfg.output_classes < 2) raise(ErrorCode::InvalidConfig, "need at least 2 output classes");
  if (cfg.learning_rate <= 0.0) raise(ErrorCode::InvalidConfig, "learning rate must be positive");
  if (cfg.rmsprop_rho < 0.0 || cfg.rmsprop_rho >= 1.0) raise(ErrorCode::InvalidConfig, "rho must be in [0,1)");
  if (cfg.rmsprop_eps <= 0.0) raise(ErrorCode::InvalidConfig, "eps must be positive");
  if (cfg.batch_size < 2) raise(ErrorCode::InvalidConfig, "batch_size must be >= 2");
  if (cfg.max_epochs < 1 || cfg.patience < 1) raise(ErrorCode::InvalidConfig, "epochs/patience must be >= 1");
  if (cfg.min_delta < 0.0) raise(ErrorCode::InvalidConfig, "min_delta must be nonnegative");
}

std::string model_config_to_json(const ModelConfig& cfg, long input_length) {
  nlohmann::json j;
  j["format"] = "osa-nn";
  j["version"] = 1;
  j["input_length"] = input_length;
  j["conv_units"] = cfg.conv_units;
  j["conv_kernel"] = cfg.conv_kernel;
  j["conv_strides"] = cfg.conv_strides;
  j["pool"] = cfg.pool;
  j["lstm_units"] = cfg.lstm_units;
  j["recurrent_dropout"] = cfg.recurrent_dropout;
  j["inter_lstm_dropout"] = cfg.inter_lstm_dropout;
  j["dense_units"] = cfg.dense_units;
  j["output_classes"] = cfg.output_classes;
  j["learning_rate"] = cfg.learning_rate;
  j["rmsprop_rho"] = cfg.rmsprop_rho;
  j["rmsprop_eps"] = cfg.rmsprop_eps;
  j["batch_size"] = cfg.batch_size;
  j["max_epochs"] = cfg.max_epochs;
  j["patience"] = cfg.patience;
  j["min_delta"] = cfg.min_delta;
  j["seed"] = cfg.seed;
  j["bn_momentum"] = cfg.bn_momentum;
  j["bn_eps"] = cfg.bn_eps;
  j["use_float32"] = cfg.use_float32;
  return j.dump(1);
}

ModelConfig model_config_from_json(const std::string& text, long* input_length) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorCode::MalformedHeader, std::string("bad model config JSON: ") + e.what());
  }
  if (j.value("format", "") != "osa-nn" || j.value("version", -1) != 1)
    raise(ErrorCode::MalformedHeader, "unrecognized checkpoint sidecar format/version");

  ModelConfig cfg;
  cfg.conv_units = j.at("conv_units").get<std::vector<int>>();
  cfg.conv_kernel = j.at("conv_kernel").get<int>();
  cfg.conv_strides = j.at("conv_strides").get<std::vector<int>>();
  cfg.pool = j.at("pool").get<int>();
  cfg.lstm_units = j.at("lstm_units").get<std::vector<int>>();
  cfg.recurrent_dropout = j.at("recurrent_dropout").get<double>();
  cfg.inter_lstm_dropout = j.at("inter_lstm_dropout").get<double>();
  cfg.dense_units = j.at("dense_units").get<std::vector<int>>();
  cfg.output_classes = j.at("output_classes").get<int>();
  cfg.learning_rate = j.at("learning_rate").get<double>();
  cfg.rmsprop_rho = j.at("rmsprop_rho").get<double>();
  cfg.rmsprop_eps = j.at("rmsprop_eps").get<double>();
  cfg.batch_size = j.at("batch_size").get<int>();
  cfg.max_epochs = j.at("max_epochs").get<int>();
  cfg.patience = j.at("patience").get<int>();
  cfg.min_delta = j.value("min_delta", 1e-3);
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.bn_momentum = j.at("bn_momentum").get<double>();
  cfg.bn_eps = j.at("bn_eps").get<double>();
  cfg.use_float32 = j.value("use_float32", true);
  if (input_length != nullptr) *input_length = j.at("input_length").get<long>();
  return cfg;
}

namespace detail {
namespace {

constexpr char kMagic[4] = {'O', 'S', 'N', 'N'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}
void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}
void put_f64(std::vector<std::uint8_t>& out, double v) {
  std::uint64_t u;
  std::memcpy(&u, &v, 8);
  put_u64(out, u);
}

struct Reader {
  const std::vector<std::uint8_t>& b;
  std::size_t pos = 0;
  void need(std::size_t n) const {
    if (pos + n > b.size()) raise(ErrorCode::TruncatedData, "checkpoint ends early");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[pos + i]) << (8 * i);
    pos += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[pos + i]) << (8 * i);
    pos += 8;
    return v;
  }
  double f64() {
    std::uint64_t u = u64();
    double v;
    std::memcpy(&v, &u, 8);
    return v;
  }
  std::string str(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(b.data() + pos), n);
    pos += n;
    return s;
  }
};

}  // namespace

void checkpoint_write_start(std::vector<std::uint8_t>& out, std::size_t tensor_count) {
  out.insert(out.end(), kMagic, kMagic + 4);
  put_u32(out, kVersion);
  put_u64(out, tensor_count);
}

void checkpoint_write_tensor(std::vector<std::uint8_t>& out, const std::string& name,
                             const std::vector<long>& shape, const std::vector<double>& values) {
  put_u32(out, static_cast<std::uint32_t>(name.size()));
  out.insert(out.end(), name.begin(), name.end());
  put_u32(out, static_cast<std::uint32_t>(shape.size()));
  for (long d : shape) put_u64(out, static_cast<std::uint64_t>(d));
  for (double v : values) put_f64(out, v);
}

std::vector<RawTensor> checkpoint_read(const std::vector<std::uint8_t>& bytes) {
  Reader r{bytes};
  r.need(4);
  if (std::memcmp(bytes.data(), kMagic, 4) != 0)
    raise(ErrorCode::MalformedHeader, "not a checkpoint file");
  r.pos = 4;
  if (r.u32() != kVersion) raise(ErrorCode::MalformedHeader, "unsupported checkpoint version");
  std::uint64_t count = r.u64();

  std::vector<RawTensor> out;
  out.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    RawTensor t;
    t.name = r.str(r.u32());
    std::uint32_t rank = r.u32();
    std::uint64_t numel = 1;
    for (std::uint32_t d = 0; d < rank; ++d) {
      t.shape.push_back(static_cast<long>(r.u64()));
      numel *= static_cast<std::uint64_t>(t.shape.back());
    }
    t.values.resize(numel);
    for (std::uint64_t k = 0; k < numel; ++k) t.values[k] = r.f64();
    out.push_back(std::move(t));
  }
  if (r.pos != bytes.size()) raise(ErrorCode::MalformedHeader, "trailing bytes in checkpoint");
  return out;
}

}  // namespace detail

void write_checkpoint_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) raise(ErrorCode::MissingFile, "cannot write '" + path + "'");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::vector<std::uint8_t> read_checkpoint_bytes(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) raise(ErrorCode::MissingFile, "cannot open '" + path + "'");
  return std::vector<std::uint8_t>((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
}

void write_checkpoint_sidecar(const std::string& path, const std::string& json_text) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) raise(ErrorCode::MissingFile, "cannot write '" + path + "'");
  f << json_text << "\n";
}

std::string read_checkpoint_sidecar(const std::string& path) {
  std::ifstream f(path);
  if (!f) raise(ErrorCode::MissingFile, "cannot open '" + path + "'");
  return std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
}

void write_history_csv(const std::string& path, const std::vector<EpochStats>& history) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) raise(ErrorCode::MissingFile, "cannot write '" + path + "'");
  f << "epoch,train_loss,val_loss,val_acc\n";
  char buf[128];
  for (const auto& row : history) {
    std::snprintf(buf, sizeof(buf), "%d,%.12g,%.12g,%.12g\n", row.epoch, row.train_loss, row.val_loss,
                  row.val_acc);
    f << buf;
  }
}

}  // namespace osa
