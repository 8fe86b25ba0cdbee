#ifndef OSA_LAYERS_HPP
#define OSA_LAYERS_HPP

#include <cmath>
#include <vector>

#include "osa/rng.hpp"
#include "osa/tensor.hpp"

namespace osa {

// Forward/backward pairs for every layer of the classifier. Forward fills a
// cache; backward consumes it and returns input/parameter gradients.
// Conventions: activations are [batch, time, channels] or [batch, features],
// row-major; cross-correlation convention for conv (no kernel flip).

// ---------------------------------------------------------------- conv1d --

template <typename S>
struct Conv1dCache {
  Tensor<S> columns;  // [batch * t_out, kernel * ch_in]
  long batch = 0, time = 0, t_out = 0, ch_in = 0;
};

// x [B, T, Cin], w [K, Cin, Cout], b [Cout] -> y [B, T_out, Cout]
//   y[n,t,o] = sum_{k,c} w[k,c,o] * x[n, t*stride + k, c] + b[o]
template <typename S>
Tensor<S> conv1d_forward(const Tensor<S>& x, const Tensor<S>& w, const Tensor<S>& b, long stride,
                         Conv1dCache<S>* cache = nullptr) {
  if (x.rank() != 3 || w.rank() != 3 || b.rank() != 1) raise(ErrorCode::ShapeMismatch, "conv1d rank");
  const long batch = x.dim(0), time = x.dim(1), ch_in = x.dim(2);
  const long k = w.dim(0), ch_out = w.dim(2);
  if (w.dim(1) != ch_in) raise(ErrorCode::ShapeMismatch, "conv1d channel mismatch");
  if (b.dim(0) != ch_out) raise(ErrorCode::ShapeMismatch, "conv1d bias mismatch");
  const long t_out = conv_output_length(time, k, stride);

  Tensor<S> columns({batch * t_out, k * ch_in});
  for (long n = 0; n < batch; ++n) {
    const S* xn = x.data.data() + n * time * ch_in;
    for (long t = 0; t < t_out; ++t) {
      S* row = columns.data.data() + (n * t_out + t) * k * ch_in;
      const S* src = xn + t * stride * ch_in;
      std::copy(src, src + k * ch_in, row);
    }
  }

  Tensor<S> y({batch, t_out, ch_out});
  y.mat(batch * t_out, ch_out).noalias() = columns.mat(batch * t_out, k * ch_in) * w.mat(k * ch_in, ch_out);
  y.mat(batch * t_out, ch_out).rowwise() += b.mat(1, ch_out).row(0);

  if (cache != nullptr) {
    cache->columns = std::move(columns);
    cache->batch = batch;
    cache->time = time;
    cache->t_out = t_out;
    cache->ch_in = ch_in;
  }
  return y;
}

template <typename S>
struct Conv1dGrads {
  Tensor<S> dx, dw, db;
};

template <typename S>
Conv1dGrads<S> conv1d_backward(const Conv1dCache<S>& cache, const Tensor<S>& w, long stride,
                               const Tensor<S>& dy) {
  const long k = w.dim(0), ch_in = w.dim(1), ch_out = w.dim(2);
  const long batch = cache.batch, t_out = cache.t_out, time = cache.time;
  if (dy.dim(0) != batch || dy.dim(1) != t_out || dy.dim(2) != ch_out)
    raise(ErrorCode::ShapeMismatch, "conv1d_backward dy shape");

  Conv1dGrads<S> g;
  g.dw = Tensor<S>({k, ch_in, ch_out});
  g.db = Tensor<S>({ch_out});
  g.dx = Tensor<S>({batch, time, ch_in});

  auto dy_mat = dy.mat(batch * t_out, ch_out);
  g.dw.mat(k * ch_in, ch_out).noalias() = cache.columns.mat(batch * t_out, k * ch_in).transpose() * dy_mat;
  g.db.mat(1, ch_out).row(0) = dy_mat.colwise().sum();

  Tensor<S> dcols({batch * t_out, k * ch_in});
  dcols.mat(batch * t_out, k * ch_in).noalias() = dy_mat * w.mat(k * ch_in, ch_out).transpose();

  for (long n = 0; n < batch; ++n) {
    S* dxn = g.dx.data.data() + n * time * ch_in;
    for (long t = 0; t < t_out; ++t) {
      const S* row = dcols.data.data() + (n * t_out + t) * k * ch_in;
      S* dst = dxn + t * stride * ch_in;
      for (long i = 0; i < k * ch_in; ++i) dst[i] += row[i];
    }
  }
  return g;
}

// ------------------------------------------------------------ batch norm --

template <typename S>
struct BatchNormState {
  Tensor<S> gamma, beta;
  Tensor<S> running_mean, running_var;

  explicit BatchNormState(long channels = 0)
      : gamma({channels}), beta({channels}), running_mean({channels}), running_var({channels}) {
    gamma.fill(S(1));
    running_var.fill(S(1));
  }
};

template <typename S>
struct BatchNormCache {
  Tensor<S> xhat;           // [rows, C]
  std::vector<S> inv_std;   // per channel
  long rows = 0;
  bool train = false;
};

// Per-channel standardization over batch x time (population variance), then
// scale/shift. Train mode updates running stats with
// running = momentum * running + (1 - momentum) * batch.
template <typename S>
Tensor<S> batch_norm_forward(const Tensor<S>& x, BatchNormState<S>& state, bool train,
                             double momentum, double eps, BatchNormCache<S>* cache = nullptr) {
  const long c = x.dim(x.rank() - 1);
  if (state.gamma.dim(0) != c) raise(ErrorCode::ShapeMismatch, "batch_norm channel mismatch");
  const long rows = x.numel() / c;
  if (train && x.dim(0) < 2) raise(ErrorCode::TinyBatch, "batch_norm train mode needs batch >= 2");

  Tensor<S> y(x.shape);

  if (cache != nullptr) {
    cache->xhat = Tensor<S>({rows, c});
    cache->inv_std.assign(static_cast<std::size_t>(c), S(0));
    cache->rows = rows;
    cache->train = train;
  }

  // Row-wise passes keep memory access contiguous; per-channel accumulators
  // stay in cache.
  std::vector<S> mean(static_cast<std::size_t>(c)), var(static_cast<std::size_t>(c));
  if (train) {
    std::vector<S> sum(static_cast<std::size_t>(c), S(0)), sumsq(static_cast<std::size_t>(c), S(0));
    const S* xp = x.data.data();
    for (long r = 0; r < rows; ++r, xp += c) {
      for (long j = 0; j < c; ++j) {
        sum[static_cast<std::size_t>(j)] += xp[j];
        sumsq[static_cast<std::size_t>(j)] += xp[j] * xp[j];
      }
    }
    for (long j = 0; j < c; ++j) {
      std::size_t js = static_cast<std::size_t>(j);
      mean[js] = sum[js] / static_cast<S>(rows);
      var[js] = std::max(S(0), sumsq[js] / static_cast<S>(rows) - mean[js] * mean[js]);
      state.running_mean.data[j] =
          static_cast<S>(momentum) * state.running_mean.data[j] + static_cast<S>(1.0 - momentum) * mean[js];
      state.running_var.data[j] =
          static_cast<S>(momentum) * state.running_var.data[j] + static_cast<S>(1.0 - momentum) * var[js];
    }
  } else {
    for (long j = 0; j < c; ++j) {
      mean[static_cast<std::size_t>(j)] = state.running_mean.data[j];
      var[static_cast<std::size_t>(j)] = state.running_var.data[j];
    }
  }

  std::vector<S> inv_std(static_cast<std::size_t>(c));
  for (long j = 0; j < c; ++j)
    inv_std[static_cast<std::size_t>(j)] =
        S(1) / std::sqrt(var[static_cast<std::size_t>(j)] + static_cast<S>(eps));

  const S* xp = x.data.data();
  S* yp = y.data.data();
  S* hp = cache != nullptr ? cache->xhat.data.data() : nullptr;
  for (long r = 0; r < rows; ++r, xp += c, yp += c) {
    for (long j = 0; j < c; ++j) {
      std::size_t js = static_cast<std::size_t>(j);
      S xhat = (xp[j] - mean[js]) * inv_std[js];
      yp[j] = xhat * state.gamma.data[j] + state.beta.data[j];
      if (hp != nullptr) hp[j] = xhat;
    }
    if (hp != nullptr) hp += c;
  }
  if (cache != nullptr)
    for (long j = 0; j < c; ++j)
      cache->inv_std[static_cast<std::size_t>(j)] = inv_std[static_cast<std::size_t>(j)];
  return y;
}

template <typename S>
struct BatchNormGrads {
  Tensor<S> dx, dgamma, dbeta;
};

template <typename S>
BatchNormGrads<S> batch_norm_backward(const BatchNormCache<S>& cache, const BatchNormState<S>& state,
                                      const Tensor<S>& dy) {
  const long c = dy.dim(dy.rank() - 1);
  const long rows = cache.rows;

  BatchNormGrads<S> g;
  g.dx = Tensor<S>(dy.shape);
  g.dgamma = Tensor<S>({c});
  g.dbeta = Tensor<S>({c});

  {
    const S* dp = dy.data.data();
    const S* hp = cache.xhat.data.data();
    for (long r = 0; r < rows; ++r, dp += c, hp += c) {
      for (long j = 0; j < c; ++j) {
        g.dgamma.data[j] += dp[j] * hp[j];
        g.dbeta.data[j] += dp[j];
      }
    }
  }

  std::vector<S> scale(static_cast<std::size_t>(c));
  for (long j = 0; j < c; ++j)
    scale[static_cast<std::size_t>(j)] = state.gamma.data[j] * cache.inv_std[static_cast<std::size_t>(j)];

  const S* dp = dy.data.data();
  const S* hp = cache.xhat.data.data();
  S* op = g.dx.data.data();
  const S n = static_cast<S>(rows);
  for (long r = 0; r < rows; ++r, dp += c, hp += c, op += c) {
    for (long j = 0; j < c; ++j) {
      std::size_t js = static_cast<std::size_t>(j);
      if (cache.train) {
        op[j] = (dp[j] * n - g.dbeta.data[j] - hp[j] * g.dgamma.data[j]) * (scale[js] / n);
      } else {
        op[j] = dp[j] * scale[js];  // running stats are constants
      }
    }
  }
  return g;
}

// ------------------------------------------------------------ activations --

template <typename S>
Tensor<S> relu_forward(const Tensor<S>& x, Tensor<S>* mask = nullptr) {
  Tensor<S> y(x.shape);
  if (mask != nullptr) *mask = Tensor<S>(x.shape);
  for (long i = 0; i < x.numel(); ++i) {
    bool on = x.data[i] > S(0);
    y.data[i] = on ? x.data[i] : S(0);
    if (mask != nullptr) mask->data[i] = on ? S(1) : S(0);
  }
  return y;
}

template <typename S>
Tensor<S> relu_backward(const Tensor<S>& mask, const Tensor<S>& dy) {
  Tensor<S> dx(dy.shape);
  dx.array() = dy.array() * mask.array();
  return dx;
}

template <typename S>
Tensor<S> tanh_forward(const Tensor<S>& x, Tensor<S>* y_cache = nullptr) {
  Tensor<S> y(x.shape);
  for (long i = 0; i < x.numel(); ++i) y.data[i] = std::tanh(x.data[i]);
  if (y_cache != nullptr) *y_cache = y;
  return y;
}

template <typename S>
Tensor<S> tanh_backward(const Tensor<S>& y, const Tensor<S>& dy) {
  Tensor<S> dx(dy.shape);
  dx.array() = dy.array() * (S(1) - y.array() * y.array());
  return dx;
}

// -------------------------------------------------------------- max pool --

template <typename S>
struct MaxPoolCache {
  std::vector<long> argmax;  // flat source index per output element
  std::vector<long> in_shape;
};

// Non-overlapping windows along time; the trailing remainder is dropped.
// Gradient goes to the argmax (first element on ties).
template <typename S>
Tensor<S> max_pool1d_forward(const Tensor<S>& x, long pool, MaxPoolCache<S>* cache = nullptr) {
  if (x.rank() != 3) raise(ErrorCode::ShapeMismatch, "max_pool1d expects [B,T,C]");
  const long batch = x.dim(0), time = x.dim(1), c = x.dim(2);
  const long t_out = pooled_length(time, pool);

  Tensor<S> y({batch, t_out, c});
  if (cache != nullptr) {
    cache->argmax.assign(static_cast<std::size_t>(y.numel()), 0);
    cache->in_shape = x.shape;
  }
  for (long n = 0; n < batch; ++n) {
    for (long t = 0; t < t_out; ++t) {
      for (long j = 0; j < c; ++j) {
        long base = (n * time + t * pool) * c + j;
        long best = base;
        S best_v = x.data[base];
        for (long p = 1; p < pool; ++p) {
          long idx = base + p * c;
          if (x.data[idx] > best_v) {
            best_v = x.data[idx];
            best = idx;
          }
        }
        long out_idx = (n * t_out + t) * c + j;
        y.data[out_idx] = best_v;
        if (cache != nullptr) cache->argmax[static_cast<std::size_t>(out_idx)] = best;
      }
    }
  }
  return y;
}

template <typename S>
Tensor<S> max_pool1d_backward(const MaxPoolCache<S>& cache, const Tensor<S>& dy) {
  Tensor<S> dx(cache.in_shape);
  for (long i = 0; i < dy.numel(); ++i) dx.data[cache.argmax[static_cast<std::size_t>(i)]] += dy.data[i];
  return dx;
}

// ----------------------------------------------------------------- dense --

template <typename S>
struct DenseCache {
  Tensor<S> x;  // [B, F]
};

template <typename S>
Tensor<S> dense_forward(const Tensor<S>& x, const Tensor<S>& w, const Tensor<S>& b,
                        DenseCache<S>* cache = nullptr) {
  if (x.rank() != 2 || w.rank() != 2 || b.rank() != 1) raise(ErrorCode::ShapeMismatch, "dense rank");
  const long batch = x.dim(0), fin = x.dim(1), fout = w.dim(1);
  if (w.dim(0) != fin || b.dim(0) != fout) raise(ErrorCode::ShapeMismatch, "dense shape mismatch");

  Tensor<S> y({batch, fout});
  y.mat(batch, fout).noalias() = x.mat(batch, fin) * w.mat(fin, fout);
  y.mat(batch, fout).rowwise() += b.mat(1, fout).row(0);
  if (cache != nullptr) cache->x = x;
  return y;
}

template <typename S>
struct DenseGrads {
  Tensor<S> dx, dw, db;
};

template <typename S>
DenseGrads<S> dense_backward(const DenseCache<S>& cache, const Tensor<S>& w, const Tensor<S>& dy) {
  const long batch = cache.x.dim(0), fin = cache.x.dim(1), fout = w.dim(1);
  DenseGrads<S> g;
  g.dw = Tensor<S>({fin, fout});
  g.db = Tensor<S>({fout});
  g.dx = Tensor<S>({batch, fin});
  g.dw.mat(fin, fout).noalias() = cache.x.mat(batch, fin).transpose() * dy.mat(batch, fout);
  g.db.mat(1, fout).row(0) = dy.mat(batch, fout).colwise().sum();
  g.dx.mat(batch, fin).noalias() = dy.mat(batch, fout) * w.mat(fin, fout).transpose();
  return g;
}

// --------------------------------------------------------------- dropout --

// Inverted dropout: kept elements are scaled by 1/(1-rate) so the
// expectation is preserved; inference is the identity.
template <typename S>
Tensor<S> dropout_forward(const Tensor<S>& x, double rate, bool train, Rng& rng,
                          Tensor<S>* mask = nullptr) {
  if (rate < 0.0 || rate >= 1.0) raise(ErrorCode::InvalidConfig, "dropout rate must be in [0,1)");
  if (!train || rate == 0.0) {
    if (mask != nullptr) {
      *mask = Tensor<S>(x.shape);
      mask->fill(S(1));
    }
    return x;
  }
  const S keep_scale = static_cast<S>(1.0 / (1.0 - rate));
  Tensor<S> y(x.shape);
  if (mask != nullptr) *mask = Tensor<S>(x.shape);
  for (long i = 0; i < x.numel(); ++i) {
    S m = rng.uniform() >= rate ? keep_scale : S(0);
    y.data[i] = x.data[i] * m;
    if (mask != nullptr) mask->data[i] = m;
  }
  return y;
}

template <typename S>
Tensor<S> dropout_backward(const Tensor<S>& mask, const Tensor<S>& dy) {
  Tensor<S> dx(dy.shape);
  dx.array() = dy.array() * mask.array();
  return dx;
}

// ------------------------------------------------- softmax cross entropy --

template <typename S>
struct SoftmaxResult {
  double loss = 0.0;       // mean over the batch
  Tensor<S> probabilities; // [B, C]
  Tensor<S> dlogits;       // (softmax - onehot) / B
};

template <typename S>
SoftmaxResult<S> softmax_cross_entropy(const Tensor<S>& logits, const std::vector<int>& labels) {
  if (logits.rank() != 2) raise(ErrorCode::ShapeMismatch, "logits must be [B,C]");
  const long batch = logits.dim(0), classes = logits.dim(1);
  if (static_cast<std::size_t>(batch) != labels.size())
    raise(ErrorCode::LengthMismatch, "label count does not match batch");

  SoftmaxResult<S> r;
  r.probabilities = Tensor<S>({batch, classes});
  r.dlogits = Tensor<S>({batch, classes});

  double loss = 0.0;
  for (long n = 0; n < batch; ++n) {
    const S* row = logits.data.data() + n * classes;
    S m = row[0];
    for (long j = 1; j < classes; ++j) m = std::max(m, row[j]);
    double z = 0.0;
    for (long j = 0; j < classes; ++j) z += std::exp(static_cast<double>(row[j] - m));
    int label = labels[static_cast<std::size_t>(n)];
    if (label < 0 || label >= classes) raise(ErrorCode::BadArguments, "label out of range");
    for (long j = 0; j < classes; ++j) {
      double p = std::exp(static_cast<double>(row[j] - m)) / z;
      r.probabilities(n, j) = static_cast<S>(p);
      r.dlogits(n, j) = static_cast<S>((p - (j == label ? 1.0 : 0.0)) / static_cast<double>(batch));
    }
    loss -= std::log(std::max(static_cast<double>(r.probabilities(n, label)), 1e-300));
  }
  r.loss = loss / static_cast<double>(batch);
  return r;
}

}  // namespace osa

#endif  // OSA_LAYERS_HPP
