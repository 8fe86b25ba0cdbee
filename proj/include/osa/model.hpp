#ifndef OSA_MODEL_HPP
#define OSA_MODEL_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "osa/lstm.hpp"
#include "osa/rmsprop.hpp"

namespace osa {

// Architecture and optimizer settings for the sequence classifier:
// conv blocks (conv -> batch norm -> relu -> max pool), LSTM stack with
// recurrent and inter-layer dropout, tanh dense stack, softmax head.
struct ModelConfig {
  std::vector<int> conv_units = {256, 128, 64};
  int conv_kernel = 16;
  std::vector<int> conv_strides = {16, 4, 2};  // per conv layer, decimating
  int pool = 2;
  std::vector<int> lstm_units = {128, 128, 64};
  double recurrent_dropout = 0.4;
  double inter_lstm_dropout = 0.4;
  std::vector<int> dense_units = {128, 64, 32, 16, 8, 4};
  int output_classes = 2;
  double learning_rate = 0.001;
  double rmsprop_rho = 0.9;
  double rmsprop_eps = 1e-7;
  int batch_size = 32;
  int max_epochs = 15;
  int patience = 3;
  double min_delta = 1e-3;  // required val-loss improvement for early stopping
  std::uint64_t seed = 0;
  double bn_momentum = 0.9;
  double bn_eps = 1e-5;
  bool use_float32 = true;  // experiment-level precision switch
};

void validate_model_config(const ModelConfig& cfg);
std::string model_config_to_json(const ModelConfig& cfg, long input_length);
ModelConfig model_config_from_json(const std::string& text, long* input_length);

template <typename S>
struct ParamRef {
  std::string name;
  Tensor<S>* value = nullptr;
  Tensor<S>* grad = nullptr;  // null for non-trainable state (BN running stats)
};

template <typename S>
class SequenceClassifier {
 public:
  SequenceClassifier(const ModelConfig& cfg, long input_length) : cfg_(cfg), input_length_(input_length) {
    validate_model_config(cfg);
    build();
    initialize(Rng(derive_seed(cfg.seed, 0x11)));
  }

  const ModelConfig& config() const { return cfg_; }
  long input_length() const { return input_length_; }
  long lstm_sequence_length() const { return lstm_time_; }

  // x [B, input_length, 1] -> logits [B, classes]
  Tensor<S> forward(const Tensor<S>& x, bool train, Rng& rng) {
    if (x.rank() != 3 || x.dim(1) != input_length_ || x.dim(2) != 1)
      raise(ErrorCode::ShapeMismatch, "model input must be [B," + std::to_string(input_length_) + ",1]");
    train_mode_ = train;

    Tensor<S> h = x;
    for (auto& blk : conv_) {
      h = conv1d_forward(h, blk.w, blk.b, blk.stride, &blk.conv_cache);
      h = batch_norm_forward(h, blk.bn, train, cfg_.bn_momentum, cfg_.bn_eps, &blk.bn_cache);
      h = relu_forward(h, &blk.relu_mask);
      h = max_pool1d_forward(h, cfg_.pool, &blk.pool_cache);
    }

    for (std::size_t i = 0; i < lstm_.size(); ++i) {
      auto& blk = lstm_[i];
      h = lstm_forward(h, blk.p, cfg_.recurrent_dropout, train, rng, &blk.cache);
      if (i + 1 < lstm_.size()) {
        h = dropout_forward(h, cfg_.inter_lstm_dropout, train, rng, &blk.drop_mask);
      } else {
        // Final LSTM: keep only the last timestep, then its dropout.
        Tensor<S> last({h.dim(0), h.dim(2)});
        for (long n = 0; n < h.dim(0); ++n)
          std::copy(h.data.data() + (n * h.dim(1) + h.dim(1) - 1) * h.dim(2),
                    h.data.data() + (n * h.dim(1) + h.dim(1)) * h.dim(2),
                    last.data.data() + n * h.dim(2));
        h = dropout_forward(last, cfg_.inter_lstm_dropout, train, rng, &blk.drop_mask);
      }
    }

    for (auto& blk : dense_) {
      h = dense_forward(h, blk.w, blk.b, &blk.cache);
      if (blk.has_tanh) h = tanh_forward(h, &blk.tanh_y);
    }
    return h;
  }

  // Consumes the caches of the last forward; accumulates nothing (grads are
  // overwritten per call).
  void backward(const Tensor<S>& dlogits) {
    Tensor<S> d = dlogits;
    for (auto it = dense_.rbegin(); it != dense_.rend(); ++it) {
      if (it->has_tanh) d = tanh_backward(it->tanh_y, d);
      DenseGrads<S> g = dense_backward(it->cache, it->w, d);
      it->dw = std::move(g.dw);
      it->db = std::move(g.db);
      d = std::move(g.dx);
    }

    for (long i = static_cast<long>(lstm_.size()) - 1; i >= 0; --i) {
      auto& blk = lstm_[static_cast<std::size_t>(i)];
      d = dropout_backward(blk.drop_mask, d);
      Tensor<S> dh_seq;
      if (i + 1 == static_cast<long>(lstm_.size())) {
        dh_seq = Tensor<S>({blk.cache.batch, blk.cache.time, blk.p.units});
        for (long n = 0; n < blk.cache.batch; ++n)
          std::copy(d.data.data() + n * blk.p.units, d.data.data() + (n + 1) * blk.p.units,
                    dh_seq.data.data() + (n * blk.cache.time + blk.cache.time - 1) * blk.p.units);
      } else {
        dh_seq = std::move(d);
      }
      LstmGrads<S> g = lstm_backward(blk.cache, blk.p, dh_seq);
      blk.dwx = std::move(g.dwx);
      blk.dwh = std::move(g.dwh);
      blk.db = std::move(g.db);
      d = std::move(g.dx);
    }

    for (auto it = conv_.rbegin(); it != conv_.rend(); ++it) {
      d = max_pool1d_backward(it->pool_cache, d);
      d = relu_backward(it->relu_mask, d);
      BatchNormGrads<S> bg = batch_norm_backward(it->bn_cache, it->bn, d);
      it->dgamma = std::move(bg.dgamma);
      it->dbeta = std::move(bg.dbeta);
      d = std::move(bg.dx);
      Conv1dGrads<S> cg = conv1d_backward(it->conv_cache, it->w, it->stride, d);
      it->dw = std::move(cg.dw);
      it->db = std::move(cg.db);
      d = std::move(cg.dx);
    }
  }

  // Trainable parameters with their gradients.
  std::vector<ParamRef<S>> params() {
    std::vector<ParamRef<S>> out;
    for (std::size_t i = 0; i < conv_.size(); ++i) {
      auto& b = conv_[i];
      std::string p = "conv" + std::to_string(i + 1);
      out.push_back({p + ".w", &b.w, &b.dw});
      out.push_back({p + ".b", &b.b, &b.db});
      out.push_back({p + ".bn.gamma", &b.bn.gamma, &b.dgamma});
      out.push_back({p + ".bn.beta", &b.bn.beta, &b.dbeta});
    }
    for (std::size_t i = 0; i < lstm_.size(); ++i) {
      auto& b = lstm_[i];
      std::string p = "lstm" + std::to_string(i + 1);
      out.push_back({p + ".wx", &b.p.wx, &b.dwx});
      out.push_back({p + ".wh", &b.p.wh, &b.dwh});
      out.push_back({p + ".b", &b.p.b, &b.db});
    }
    for (std::size_t i = 0; i < dense_.size(); ++i) {
      auto& b = dense_[i];
      std::string p = "dense" + std::to_string(i + 1);
      out.push_back({p + ".w", &b.w, &b.dw});
      out.push_back({p + ".b", &b.b, &b.db});
    }
    return out;
  }

  // Parameters plus batch-norm running statistics; the full model state.
  std::vector<ParamRef<S>> state_tensors() {
    std::vector<ParamRef<S>> out = params();
    for (std::size_t i = 0; i < conv_.size(); ++i) {
      auto& b = conv_[i];
      std::string p = "conv" + std::to_string(i + 1);
      out.push_back({p + ".bn.running_mean", &b.bn.running_mean, nullptr});
      out.push_back({p + ".bn.running_var", &b.bn.running_var, nullptr});
    }
    return out;
  }

  std::vector<Tensor<S>> snapshot() {
    std::vector<Tensor<S>> copy;
    for (auto& ref : state_tensors()) copy.push_back(*ref.value);
    return copy;
  }

  void restore(const std::vector<Tensor<S>>& snap) {
    auto refs = state_tensors();
    if (snap.size() != refs.size()) raise(ErrorCode::ShapeMismatch, "snapshot size mismatch");
    for (std::size_t i = 0; i < refs.size(); ++i) *refs[i].value = snap[i];
  }

 private:
  struct ConvBlock {
    Tensor<S> w, b;
    BatchNormState<S> bn;
    long stride = 1;
    Conv1dCache<S> conv_cache;
    BatchNormCache<S> bn_cache;
    Tensor<S> relu_mask;
    MaxPoolCache<S> pool_cache;
    Tensor<S> dw, db, dgamma, dbeta;
  };
  struct LstmBlock {
    LstmParams<S> p;
    LstmCache<S> cache;
    Tensor<S> drop_mask;
    Tensor<S> dwx, dwh, db;
  };
  struct DenseBlock {
    Tensor<S> w, b;
    bool has_tanh = true;
    DenseCache<S> cache;
    Tensor<S> tanh_y;
    Tensor<S> dw, db;
  };

  void build() {
    long time = input_length_;
    long channels = 1;
    for (std::size_t i = 0; i < cfg_.conv_units.size(); ++i) {
      ConvBlock blk;
      blk.stride = cfg_.conv_strides[i];
      long units = cfg_.conv_units[i];
      blk.w = Tensor<S>({cfg_.conv_kernel, channels, units});
      blk.b = Tensor<S>({units});
      blk.bn = BatchNormState<S>(units);
      time = pooled_length(conv_output_length(time, cfg_.conv_kernel, blk.stride), cfg_.pool);
      channels = units;
      conv_.push_back(std::move(blk));
    }
    lstm_time_ = time;

    long in = channels;
    for (int units : cfg_.lstm_units) {
      lstm_.emplace_back();
      lstm_.back().p = LstmParams<S>(in, units);
      in = units;
    }

    for (int units : cfg_.dense_units) {
      DenseBlock blk;
      blk.w = Tensor<S>({in, units});
      blk.b = Tensor<S>({units});
      blk.has_tanh = true;
      dense_.push_back(std::move(blk));
      in = units;
    }
    DenseBlock head;
    head.w = Tensor<S>({in, cfg_.output_classes});
    head.b = Tensor<S>({cfg_.output_classes});
    head.has_tanh = false;
    dense_.push_back(std::move(head));
  }

  static void fanin_uniform(Tensor<S>& w, long fan_in, Rng& rng) {
    double s = std::sqrt(1.0 / static_cast<double>(fan_in));
    for (auto& v : w.data) v = static_cast<S>(rng.uniform(-s, s));
  }

  void initialize(Rng rng) {
    for (auto& blk : conv_) fanin_uniform(blk.w, blk.w.dim(0) * blk.w.dim(1), rng), blk.b.set_zero();
    for (auto& blk : lstm_) {
      fanin_uniform(blk.p.wx, blk.p.input, rng);
      fanin_uniform(blk.p.wh, blk.p.units, rng);
      blk.p.b.set_zero();
      // forget-gate bias starts at 1 to keep early memory open
      for (long j = 0; j < blk.p.units; ++j) blk.p.b.data[blk.p.units + j] = S(1);
    }
    for (auto& blk : dense_) fanin_uniform(blk.w, blk.w.dim(0), rng), blk.b.set_zero();
  }

  ModelConfig cfg_;
  long input_length_;
  long lstm_time_ = 0;
  bool train_mode_ = false;
  std::vector<ConvBlock> conv_;
  std::vector<LstmBlock> lstm_;
  std::vector<DenseBlock> dense_;
};

// ------------------------------------------------------------- training --

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_acc = 0.0;
};

struct TrainResult {
  std::vector<EpochStats> history;
  int best_epoch = 0;
  double best_val_loss = 0.0;
};

// Mean loss and accuracy over a dataset, inference mode, fixed batch order.
template <typename S>
std::pair<double, double> evaluate_model(SequenceClassifier<S>& model, const Tensor<S>& x,
                                         const std::vector<int>& labels, int batch_size) {
  const long n = x.dim(0), len = x.dim(1);
  Rng rng(0);  // inference draws nothing
  double loss_sum = 0.0;
  long correct = 0;
  for (long start = 0; start < n; start += batch_size) {
    long bs = std::min<long>(batch_size, n - start);
    Tensor<S> batch({bs, len, 1});
    std::copy(x.data.data() + start * len, x.data.data() + (start + bs) * len, batch.data.data());
    std::vector<int> batch_labels(labels.begin() + start, labels.begin() + start + bs);
    Tensor<S> logits = model.forward(batch, false, rng);
    SoftmaxResult<S> sm = softmax_cross_entropy(logits, batch_labels);
    loss_sum += sm.loss * static_cast<double>(bs);
    for (long i = 0; i < bs; ++i) {
      int pred = logits(i, 1) > logits(i, 0) ? 1 : 0;
      if (pred == batch_labels[static_cast<std::size_t>(i)]) ++correct;
    }
  }
  return {loss_sum / static_cast<double>(n), static_cast<double>(correct) / static_cast<double>(n)};
}

// RMSProp + cross-entropy with early stopping on validation loss; the best
// validation snapshot is restored before returning. Deterministic given
// cfg.seed. Errors: NonFiniteLoss.
template <typename S>
TrainResult train_model(SequenceClassifier<S>& model, const Tensor<S>& train_x,
                        const std::vector<int>& train_labels, const Tensor<S>& val_x,
                        const std::vector<int>& val_labels) {
  const ModelConfig& cfg = model.config();
  const long n = train_x.dim(0), len = train_x.dim(1);
  if (static_cast<std::size_t>(n) != train_labels.size())
    raise(ErrorCode::LengthMismatch, "train labels do not match sample count");
  if (n == 0) raise(ErrorCode::EmptyTrainingSet, "no training samples");

  std::vector<RmsPropState<S>> opt;
  auto param_refs = model.params();
  opt.reserve(param_refs.size());
  for (auto& ref : param_refs) opt.emplace_back(ref.value->shape);

  Rng rng(derive_seed(cfg.seed, 0x5eed));
  TrainResult result;
  result.best_val_loss = std::numeric_limits<double>::infinity();
  std::vector<Tensor<S>> best_snapshot = model.snapshot();
  int stale = 0;

  std::vector<long> order(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    rng.shuffle(order);

    // Batch boundaries; a trailing single sample joins the previous batch
    // so batch norm always sees at least two rows.
    std::vector<std::pair<long, long>> batches;
    for (long start = 0; start < n; start += cfg.batch_size)
      batches.emplace_back(start, std::min<long>(n, start + cfg.batch_size));
    if (batches.size() > 1 && batches.back().second - batches.back().first == 1) {
      batches[batches.size() - 2].second = n;
      batches.pop_back();
    }

    double loss_sum = 0.0;
    for (auto [b0, b1] : batches) {
      long bs = b1 - b0;
      Tensor<S> batch({bs, len, 1});
      std::vector<int> batch_labels(static_cast<std::size_t>(bs));
      for (long i = 0; i < bs; ++i) {
        long src = order[static_cast<std::size_t>(b0 + i)];
        std::copy(train_x.data.data() + src * len, train_x.data.data() + (src + 1) * len,
                  batch.data.data() + i * len);
        batch_labels[static_cast<std::size_t>(i)] = train_labels[static_cast<std::size_t>(src)];
      }

      Tensor<S> logits = model.forward(batch, true, rng);
      SoftmaxResult<S> sm = softmax_cross_entropy(logits, batch_labels);
      if (!std::isfinite(sm.loss))
        raise(ErrorCode::NonFiniteLoss, "epoch " + std::to_string(epoch) + ", batch at " +
                                            std::to_string(b0) + ": loss is not finite");
      loss_sum += sm.loss * static_cast<double>(bs);
      model.backward(sm.dlogits);

      auto refs = model.params();
      for (std::size_t p = 0; p < refs.size(); ++p)
        rmsprop_step(*refs[p].value, *refs[p].grad, opt[p], cfg.learning_rate, cfg.rmsprop_rho,
                     cfg.rmsprop_eps);
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = loss_sum / static_cast<double>(n);
    auto [val_loss, val_acc] = evaluate_model(model, val_x, val_labels, cfg.batch_size);
    stats.val_loss = val_loss;
    stats.val_acc = val_acc;
    result.history.push_back(stats);
    if (!std::isfinite(val_loss)) raise(ErrorCode::NonFiniteLoss, "validation loss is not finite");

    if (val_loss < result.best_val_loss - cfg.min_delta) {
      result.best_val_loss = val_loss;
      result.best_epoch = epoch;
      best_snapshot = model.snapshot();
      stale = 0;
    } else if (++stale >= cfg.patience) {
      break;
    }
  }

  model.restore(best_snapshot);
  return result;
}

// Class predictions (argmax of the softmax head), inference mode.
template <typename S>
std::vector<int> predict_model(SequenceClassifier<S>& model, const Tensor<S>& x, int batch_size) {
  const long n = x.dim(0), len = x.dim(1);
  Rng rng(0);
  std::vector<int> out(static_cast<std::size_t>(n));
  for (long start = 0; start < n; start += batch_size) {
    long bs = std::min<long>(batch_size, n - start);
    Tensor<S> batch({bs, len, 1});
    std::copy(x.data.data() + start * len, x.data.data() + (start + bs) * len, batch.data.data());
    Tensor<S> logits = model.forward(batch, false, rng);
    for (long i = 0; i < bs; ++i)
      out[static_cast<std::size_t>(start + i)] = logits(i, 1) > logits(i, 0) ? 1 : 0;
  }
  return out;
}

// ----------------------------------------------------------- checkpoints --

namespace detail {
void checkpoint_write_start(std::vector<std::uint8_t>& out, std::size_t tensor_count);
void checkpoint_write_tensor(std::vector<std::uint8_t>& out, const std::string& name,
                             const std::vector<long>& shape, const std::vector<double>& values);
struct RawTensor {
  std::string name;
  std::vector<long> shape;
  std::vector<double> values;
};
std::vector<RawTensor> checkpoint_read(const std::vector<std::uint8_t>& bytes);
}  // namespace detail

void write_checkpoint_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> read_checkpoint_bytes(const std::string& path);
void write_checkpoint_sidecar(const std::string& path, const std::string& json_text);
std::string read_checkpoint_sidecar(const std::string& path);

// Versioned binary checkpoint (shape table + little-endian 64-bit floats)
// with a JSON sidecar holding the ModelConfig.
template <typename S>
void save_checkpoint(const std::string& path, SequenceClassifier<S>& model) {
  auto refs = model.state_tensors();
  std::vector<std::uint8_t> bytes;
  detail::checkpoint_write_start(bytes, refs.size());
  for (auto& ref : refs) {
    std::vector<double> values(ref.value->data.begin(), ref.value->data.end());
    detail::checkpoint_write_tensor(bytes, ref.name, ref.value->shape, values);
  }
  write_checkpoint_bytes(path, bytes);
  write_checkpoint_sidecar(path + ".json", model_config_to_json(model.config(), model.input_length()));
}

template <typename S>
SequenceClassifier<S> load_checkpoint(const std::string& path) {
  long input_length = 0;
  ModelConfig cfg = model_config_from_json(read_checkpoint_sidecar(path + ".json"), &input_length);
  SequenceClassifier<S> model(cfg, input_length);
  auto raw = detail::checkpoint_read(read_checkpoint_bytes(path));
  auto refs = model.state_tensors();
  if (raw.size() != refs.size()) raise(ErrorCode::ShapeMismatch, "checkpoint tensor count mismatch");
  for (std::size_t i = 0; i < refs.size(); ++i) {
    if (raw[i].name != refs[i].name || raw[i].shape != refs[i].value->shape)
      raise(ErrorCode::ShapeMismatch, "checkpoint tensor '" + raw[i].name + "' does not match model");
    for (std::size_t k = 0; k < raw[i].values.size(); ++k)
      refs[i].value->data[k] = static_cast<S>(raw[i].values[k]);
  }
  return model;
}

// Training history CSV: epoch, train_loss, val_loss, val_acc.
void write_history_csv(const std::string& path, const std::vector<EpochStats>& history);

}  // namespace osa

#endif  // OSA_MODEL_HPP
