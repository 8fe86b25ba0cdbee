#ifndef OSA_LSTM_HPP
#define OSA_LSTM_HPP

#include "osa/layers.hpp"

namespace osa {

// Standard LSTM cell over full sequences. Gate blocks are stored column-wise
// in the order [i, f, g, o]:
//   z = x_t Wx + (h_{t-1} * rmask) Wh + b
//   i, f, o = sigmoid(z_i, z_f, z_o); g = tanh(z_g)
//   c_t = f * c_{t-1} + i * g ; h_t = o * tanh(c_t)
// Recurrent dropout draws one inverted mask per sequence (train mode) and
// applies it only to the hidden state entering the recurrent transform.

template <typename S>
struct LstmParams {
  Tensor<S> wx;  // [input, 4 * units]
  Tensor<S> wh;  // [units, 4 * units]
  Tensor<S> b;   // [4 * units]
  long input = 0, units = 0;

  LstmParams() = default;
  LstmParams(long input_dim, long unit_count)
      : wx({input_dim, 4 * unit_count}),
        wh({unit_count, 4 * unit_count}),
        b({4 * unit_count}),
        input(input_dim),
        units(unit_count) {}
};

template <typename S>
struct LstmCache {
  Tensor<S> x;                    // [B, T, input]
  Tensor<S> rmask;                // [B, units]
  std::vector<Tensor<S>> hm_prev; // masked previous hidden, per t
  std::vector<Tensor<S>> gate_i, gate_f, gate_g, gate_o;
  std::vector<Tensor<S>> cell, tanh_cell;
  long batch = 0, time = 0;
};

template <typename S>
Tensor<S> lstm_forward(const Tensor<S>& x, const LstmParams<S>& params, double recurrent_dropout,
                       bool train, Rng& rng, LstmCache<S>* cache = nullptr) {
  if (x.rank() != 3) raise(ErrorCode::ShapeMismatch, "lstm expects [B,T,in]");
  const long batch = x.dim(0), time = x.dim(1), in = x.dim(2);
  const long u = params.units;
  if (in != params.input) raise(ErrorCode::ShapeMismatch, "lstm input width mismatch");

  Tensor<S> rmask({batch, u});
  if (train && recurrent_dropout > 0.0) {
    const S keep_scale = static_cast<S>(1.0 / (1.0 - recurrent_dropout));
    for (long i = 0; i < rmask.numel(); ++i)
      rmask.data[i] = rng.uniform() >= recurrent_dropout ? keep_scale : S(0);
  } else {
    rmask.fill(S(1));
  }

  if (cache != nullptr) {
    cache->x = x;
    cache->rmask = rmask;
    cache->hm_prev.clear();
    cache->gate_i.clear();
    cache->gate_f.clear();
    cache->gate_g.clear();
    cache->gate_o.clear();
    cache->cell.clear();
    cache->tanh_cell.clear();
    cache->batch = batch;
    cache->time = time;
  }

  Tensor<S> h({batch, u}), c({batch, u});
  Tensor<S> out({batch, time, u});

  Tensor<S> xt({batch, in}), z({batch, 4 * u}), hm({batch, u});
  for (long t = 0; t < time; ++t) {
    for (long n = 0; n < batch; ++n)
      std::copy(x.data.data() + (n * time + t) * in, x.data.data() + (n * time + t) * in + in,
                xt.data.data() + n * in);

    hm.array() = h.array() * rmask.array();
    z.mat(batch, 4 * u).noalias() = xt.mat(batch, in) * params.wx.mat(in, 4 * u);
    z.mat(batch, 4 * u).noalias() += hm.mat(batch, u) * params.wh.mat(u, 4 * u);
    z.mat(batch, 4 * u).rowwise() += params.b.mat(1, 4 * u).row(0);

    Tensor<S> gi({batch, u}), gf({batch, u}), gg({batch, u}), go({batch, u});
    for (long n = 0; n < batch; ++n) {
      const S* zr = z.data.data() + n * 4 * u;
      for (long j = 0; j < u; ++j) {
        gi(n, j) = S(1) / (S(1) + std::exp(-zr[j]));
        gf(n, j) = S(1) / (S(1) + std::exp(-zr[u + j]));
        gg(n, j) = std::tanh(zr[2 * u + j]);
        go(n, j) = S(1) / (S(1) + std::exp(-zr[3 * u + j]));
      }
    }

    Tensor<S> c_new({batch, u});
    c_new.array() = gf.array() * c.array() + gi.array() * gg.array();
    Tensor<S> tanh_c({batch, u});
    for (long i = 0; i < tanh_c.numel(); ++i) tanh_c.data[i] = std::tanh(c_new.data[i]);

    Tensor<S> h_new({batch, u});
    h_new.array() = go.array() * tanh_c.array();

    for (long n = 0; n < batch; ++n)
      std::copy(h_new.data.data() + n * u, h_new.data.data() + n * u + u,
                out.data.data() + (n * time + t) * u);

    if (cache != nullptr) {
      cache->hm_prev.push_back(hm);
      cache->gate_i.push_back(gi);
      cache->gate_f.push_back(gf);
      cache->gate_g.push_back(gg);
      cache->gate_o.push_back(go);
      cache->cell.push_back(c_new);
      cache->tanh_cell.push_back(tanh_c);
    }
    h = std::move(h_new);
    c = std::move(c_new);
  }
  return out;
}

template <typename S>
struct LstmGrads {
  Tensor<S> dx, dwx, dwh, db;
};

// Backpropagation through time over the full hidden sequence gradient.
template <typename S>
LstmGrads<S> lstm_backward(const LstmCache<S>& cache, const LstmParams<S>& params, const Tensor<S>& dh_seq) {
  const long batch = cache.batch, time = cache.time;
  const long u = params.units, in = params.input;
  if (dh_seq.dim(0) != batch || dh_seq.dim(1) != time || dh_seq.dim(2) != u)
    raise(ErrorCode::ShapeMismatch, "lstm_backward dh shape");

  LstmGrads<S> g;
  g.dx = Tensor<S>({batch, time, in});
  g.dwx = Tensor<S>({in, 4 * u});
  g.dwh = Tensor<S>({u, 4 * u});
  g.db = Tensor<S>({4 * u});

  Tensor<S> dh_next({batch, u}), dc_next({batch, u});
  Tensor<S> dh({batch, u}), dc({batch, u}), dz({batch, 4 * u}), xt({batch, in}), dxt({batch, in});

  for (long t = time - 1; t >= 0; --t) {
    for (long n = 0; n < batch; ++n)
      std::copy(dh_seq.data.data() + (n * time + t) * u, dh_seq.data.data() + (n * time + t) * u + u,
                dh.data.data() + n * u);
    dh.array() += dh_next.array();

    const auto& gi = cache.gate_i[static_cast<std::size_t>(t)];
    const auto& gf = cache.gate_f[static_cast<std::size_t>(t)];
    const auto& gg = cache.gate_g[static_cast<std::size_t>(t)];
    const auto& go = cache.gate_o[static_cast<std::size_t>(t)];
    const auto& tanh_c = cache.tanh_cell[static_cast<std::size_t>(t)];

    dc.array() = dc_next.array() + dh.array() * go.array() * (S(1) - tanh_c.array() * tanh_c.array());

    for (long n = 0; n < batch; ++n) {
      for (long j = 0; j < u; ++j) {
        S c_prev = t > 0 ? cache.cell[static_cast<std::size_t>(t - 1)](n, j) : S(0);
        S di = dc(n, j) * gg(n, j);
        S df = dc(n, j) * c_prev;
        S dgv = dc(n, j) * gi(n, j);
        S dov = dh(n, j) * tanh_c(n, j);
        dz(n, j) = di * gi(n, j) * (S(1) - gi(n, j));
        dz(n, u + j) = df * gf(n, j) * (S(1) - gf(n, j));
        dz(n, 2 * u + j) = dgv * (S(1) - gg(n, j) * gg(n, j));
        dz(n, 3 * u + j) = dov * go(n, j) * (S(1) - go(n, j));
      }
    }

    for (long n = 0; n < batch; ++n)
      std::copy(cache.x.data.data() + (n * time + t) * in,
                cache.x.data.data() + (n * time + t) * in + in, xt.data.data() + n * in);

    g.dwx.mat(in, 4 * u).noalias() += xt.mat(batch, in).transpose() * dz.mat(batch, 4 * u);
    g.dwh.mat(u, 4 * u).noalias() +=
        cache.hm_prev[static_cast<std::size_t>(t)].mat(batch, u).transpose() * dz.mat(batch, 4 * u);
    g.db.mat(1, 4 * u).row(0) += dz.mat(batch, 4 * u).colwise().sum();

    dxt.mat(batch, in).noalias() = dz.mat(batch, 4 * u) * params.wx.mat(in, 4 * u).transpose();
    for (long n = 0; n < batch; ++n)
      std::copy(dxt.data.data() + n * in, dxt.data.data() + n * in + in,
                g.dx.data.data() + (n * time + t) * in);

    dh_next.mat(batch, u).noalias() = dz.mat(batch, 4 * u) * params.wh.mat(u, 4 * u).transpose();
    dh_next.array() *= cache.rmask.array();  // mask sits between h_{t-1} and Wh

    dc_next.array() = dc.array() * gf.array();
  }
  return g;
}

}  // namespace osa

#endif  // OSA_LSTM_HPP
