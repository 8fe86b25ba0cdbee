#include <doctest.h>

#include "grad_check.hpp"
#include "osa/layers.hpp"
#include "osa/rmsprop.hpp"
#include "osa/rng.hpp"

using namespace osa;
using osa::testutil::max_grad_error;

namespace {

template <typename S>
Tensor<S> random_tensor(std::vector<long> shape, Rng& rng, double scale = 1.0) {
  Tensor<S> t(std::move(shape));
  for (auto& v : t.data) v = static_cast<S>(rng.normal(0.0, scale));
  return t;
}

// Weighted-sum loss turns any tensor output into a scalar with fixed,
// non-degenerate sensitivities.
template <typename S>
double weighted_sum(const Tensor<S>& y, const Tensor<S>& w) {
  double s = 0.0;
  for (long i = 0; i < y.numel(); ++i) s += static_cast<double>(y.data[i] * w.data[i]);
  return s;
}

}  // namespace

TEST_CASE("conv1d hand values") {
  // x = [1,2,3,4], kernel [1,0,-1], stride 1 -> [-2,-2]
  auto x = Tensor<double>::from_values({1, 4, 1}, {1, 2, 3, 4});
  auto w = Tensor<double>::from_values({3, 1, 1}, {1, 0, -1});
  auto b = Tensor<double>::from_values({1}, {0});
  auto y = conv1d_forward(x, w, b, 1);
  CHECK(y.shape == std::vector<long>{1, 2, 1});
  CHECK(y.data[0] == doctest::Approx(-2.0));
  CHECK(y.data[1] == doctest::Approx(-2.0));

  SUBCASE("k=1 identity kernel") {
    auto w1 = Tensor<double>::from_values({1, 1, 1}, {1});
    auto y1 = conv1d_forward(x, w1, b, 1);
    CHECK(y1.data == x.data);
  }
  SUBCASE("stride 2") {
    auto y2 = conv1d_forward(x, w, b, 2);
    CHECK(y2.shape == std::vector<long>{1, 1, 1});
    CHECK(y2.data[0] == doctest::Approx(-2.0));
  }
  SUBCASE("input shorter than kernel") {
    auto tiny = Tensor<double>::from_values({1, 2, 1}, {1, 2});
    CHECK_THROWS_AS(conv1d_forward(tiny, w, b, 1), Error);
  }
}

TEST_CASE("conv1d gradients match finite differences") {
  Rng rng(11);
  for (int trial = 0; trial < 3; ++trial) {
    long batch = 2, time = 11, cin = 3, k = 4, cout = 2, stride = trial + 1;
    auto x = random_tensor<double>({batch, time, cin}, rng);
    auto w = random_tensor<double>({k, cin, cout}, rng, 0.5);
    auto b = random_tensor<double>({cout}, rng, 0.1);
    long t_out = conv_output_length(time, k, stride);
    auto weights = random_tensor<double>({batch, t_out, cout}, rng);

    Conv1dCache<double> cache;
    conv1d_forward(x, w, b, stride, &cache);
    auto grads = conv1d_backward(cache, w, stride, weights);

    auto loss = [&]() { return weighted_sum(conv1d_forward(x, w, b, stride), weights); };
    CHECK(max_grad_error(w, grads.dw, loss) < 1e-4);
    CHECK(max_grad_error(b, grads.db, loss) < 1e-4);
    CHECK(max_grad_error(x, grads.dx, loss) < 1e-4);
  }
}

TEST_CASE("batch norm forward definition and gradient") {
  Rng rng(12);
  auto x = random_tensor<double>({3, 4, 2}, rng, 2.0);
  BatchNormState<double> state(2);

  SUBCASE("train mode standardizes each channel") {
    auto y = batch_norm_forward(x, state, true, 0.9, 1e-5);
    auto ym = y.mat(12, 2);
    for (long c = 0; c < 2; ++c) {
      CHECK(std::abs(ym.col(c).mean()) < 1e-6);
      double var = (ym.col(c).array() - ym.col(c).mean()).square().sum() / 12.0;
      CHECK(var == doctest::Approx(1.0).epsilon(1e-3));  // eps shrinks it slightly
    }
  }
  SUBCASE("gamma 0, beta 5 gives constant 5") {
    state.gamma.fill(0.0);
    state.beta.fill(5.0);
    auto y = batch_norm_forward(x, state, true, 0.9, 1e-5);
    for (double v : y.data) CHECK(v == doctest::Approx(5.0));
  }
  SUBCASE("train-mode batch of one is rejected") {
    auto single = random_tensor<double>({1, 4, 2}, rng);
    try {
      batch_norm_forward(single, state, true, 0.9, 1e-5);
      FAIL("expected TinyBatch");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::TinyBatch);
    }
  }
  SUBCASE("gradients vs finite differences (train and infer)") {
    auto weights = random_tensor<double>({3, 4, 2}, rng);
    for (bool train : {true, false}) {
      state.gamma.data = {1.3, 0.7};
      state.beta.data = {0.2, -0.1};
      state.running_mean.data = {0.1, -0.2};
      state.running_var.data = {1.5, 0.8};
      BatchNormState<double> frozen = state;  // keep running stats fixed for the check

      BatchNormCache<double> cache;
      batch_norm_forward(x, frozen, train, 0.0, 1e-5, &cache);  // momentum 0: stats replaced
      frozen.running_mean = state.running_mean;                 // restore for reproducible loss
      frozen.running_var = state.running_var;
      auto grads = batch_norm_backward(cache, frozen, weights);

      auto loss = [&]() {
        BatchNormState<double> tmp = frozen;
        return weighted_sum(batch_norm_forward(x, tmp, train, 0.9, 1e-5), weights);
      };
      CHECK(max_grad_error(x, grads.dx, loss) < 1e-4);
      CHECK(max_grad_error(frozen.gamma, grads.dgamma, loss) < 1e-4);
      CHECK(max_grad_error(frozen.beta, grads.dbeta, loss) < 1e-4);
    }
  }
  SUBCASE("running stats feed inference") {
    BatchNormState<double> s2(2);
    for (int i = 0; i < 200; ++i) batch_norm_forward(x, s2, true, 0.9, 1e-5);
    auto y_infer = batch_norm_forward(x, s2, false, 0.9, 1e-5);
    auto y_train = batch_norm_forward(x, s2, true, 0.9, 1e-5);
    for (long i = 0; i < y_infer.numel(); ++i)
      CHECK(y_infer.data[i] == doctest::Approx(y_train.data[i]).epsilon(1e-3));
  }
}

TEST_CASE("relu and tanh activations") {
  auto x = Tensor<double>::from_values({3}, {-1.0, 0.0, 2.0});
  auto y = relu_forward(x);
  CHECK(y.data == std::vector<double>{0.0, 0.0, 2.0});

  auto t = tanh_forward(x);
  CHECK(t.data[1] == doctest::Approx(0.0).scale(1.0));
  auto tneg = tanh_forward(Tensor<double>::from_values({3}, {1.0, 0.0, -2.0}));
  CHECK(t.data[2] == doctest::Approx(-tneg.data[2]));  // odd function

  SUBCASE("gradients away from the relu kink") {
    Rng rng(13);
    auto xr = random_tensor<double>({2, 5}, rng);
    for (auto& v : xr.data)
      if (std::abs(v) < 0.05) v += 0.1;  // keep clear of x = 0
    auto weights = random_tensor<double>({2, 5}, rng);

    Tensor<double> mask;
    relu_forward(xr, &mask);
    auto dx = relu_backward(mask, weights);
    auto loss_relu = [&]() { return weighted_sum(relu_forward(xr), weights); };
    CHECK(max_grad_error(xr, dx, loss_relu) < 1e-4);

    Tensor<double> ycache;
    tanh_forward(xr, &ycache);
    auto dxt = tanh_backward(ycache, weights);
    auto loss_tanh = [&]() { return weighted_sum(tanh_forward(xr), weights); };
    CHECK(max_grad_error(xr, dxt, loss_tanh) < 1e-4);
  }
}

TEST_CASE("max pooling selects window maxima and routes gradient one-hot") {
  auto x = Tensor<double>::from_values({1, 6, 1}, {3, 1, 4, 1, 5, 9});
  MaxPoolCache<double> cache;
  auto y = max_pool1d_forward(x, 2, &cache);
  CHECK(y.data == std::vector<double>{3, 4, 9});

  auto dy = Tensor<double>::from_values({1, 3, 1}, {1, 10, 100});
  auto dx = max_pool1d_backward(cache, dy);
  CHECK(dx.data == std::vector<double>{1, 0, 10, 0, 0, 100});

  SUBCASE("constant input halves the length; first-index tie break") {
    auto c = Tensor<double>::from_values({1, 6, 1}, {7, 7, 7, 7, 7, 7});
    MaxPoolCache<double> cc;
    auto yc = max_pool1d_forward(c, 2, &cc);
    CHECK(yc.data == std::vector<double>{7, 7, 7});
    for (std::size_t i = 0; i < cc.argmax.size(); ++i)
      CHECK(cc.argmax[i] == static_cast<long>(2 * i));  // first element wins ties
  }
  SUBCASE("trailing remainder dropped") {
    auto o = Tensor<double>::from_values({1, 5, 1}, {1, 2, 3, 4, 9});
    CHECK(max_pool1d_forward(o, 2).data == std::vector<double>{2, 4});
  }
}

TEST_CASE("dense layer hand values and gradients") {
  auto x = Tensor<double>::from_values({1, 2}, {1, 2});
  auto w = Tensor<double>::from_values({2, 2}, {1, 0, 0, -1});
  auto b = Tensor<double>::from_values({2}, {0.5, 0.5});
  auto y = dense_forward(x, w, b);
  CHECK(y.data[0] == doctest::Approx(1.5));
  CHECK(y.data[1] == doctest::Approx(-1.5));

  SUBCASE("identity weights pass through") {
    auto wi = Tensor<double>::from_values({2, 2}, {1, 0, 0, 1});
    auto b0 = Tensor<double>({2});
    CHECK(dense_forward(x, wi, b0).data == x.data);
  }
  SUBCASE("gradients match finite differences tightly") {
    Rng rng(14);
    auto xr = random_tensor<double>({3, 4}, rng);
    auto wr = random_tensor<double>({4, 2}, rng);
    auto br = random_tensor<double>({2}, rng);
    auto weights = random_tensor<double>({3, 2}, rng);

    DenseCache<double> cache;
    dense_forward(xr, wr, br, &cache);
    auto g = dense_backward(cache, wr, weights);
    auto loss = [&]() { return weighted_sum(dense_forward(xr, wr, br), weights); };
    CHECK(max_grad_error(wr, g.dw, loss, 1e-4) < 1e-6);
    CHECK(max_grad_error(br, g.db, loss, 1e-4) < 1e-6);
    CHECK(max_grad_error(xr, g.dx, loss, 1e-4) < 1e-6);
  }
}

TEST_CASE("dropout: identity cases and mask statistics") {
  Rng rng(15);
  auto x = random_tensor<double>({100, 120}, rng);

  auto same = dropout_forward(x, 0.0, true, rng);
  CHECK(same.data == x.data);
  auto infer = dropout_forward(x, 0.4, false, rng);
  CHECK(infer.data == x.data);

  Tensor<double> mask;
  auto y = dropout_forward(x, 0.4, true, rng, &mask);
  long kept = 0;
  double sum_mask = 0.0;
  for (double m : mask.data) {
    if (m != 0.0) {
      ++kept;
      CHECK(m == doctest::Approx(1.0 / 0.6));
    }
    sum_mask += m;
  }
  double kept_fraction = static_cast<double>(kept) / static_cast<double>(mask.numel());
  CHECK(kept_fraction == doctest::Approx(0.6).epsilon(0.05));  // 0.6 +- 0.03
  // inverted scaling preserves the expectation
  CHECK(sum_mask / static_cast<double>(mask.numel()) == doctest::Approx(1.0).epsilon(0.05));

  auto dx = dropout_backward(mask, y);
  for (long i = 0; i < dx.numel(); ++i)
    if (mask.data[i] == 0.0) CHECK(dx.data[i] == 0.0);
}

TEST_CASE("softmax cross entropy hand values") {
  auto logits = Tensor<double>::from_values({1, 2}, {0.0, 0.0});
  auto r = softmax_cross_entropy(logits, {0});
  CHECK(r.loss == doctest::Approx(std::log(2.0)).epsilon(1e-9));
  CHECK(r.dlogits.data[0] == doctest::Approx(-0.5));
  CHECK(r.dlogits.data[1] == doctest::Approx(0.5));

  SUBCASE("saturated correct prediction has ~zero loss") {
    auto big = Tensor<double>::from_values({1, 2}, {100.0, -100.0});
    CHECK(softmax_cross_entropy(big, {0}).loss <= 1e-6);
  }
  SUBCASE("shift invariance") {
    auto a = Tensor<double>::from_values({2, 2}, {0.3, -0.7, 1.2, 0.4});
    auto b = Tensor<double>::from_values({2, 2}, {10.3, 9.3, 11.2, 10.4});
    CHECK(softmax_cross_entropy(a, {1, 0}).loss ==
          doctest::Approx(softmax_cross_entropy(b, {1, 0}).loss).epsilon(1e-9));
  }
  SUBCASE("rows sum to one and loss is nonnegative") {
    Rng rng(16);
    auto l = random_tensor<double>({5, 2}, rng, 3.0);
    auto res = softmax_cross_entropy(l, {0, 1, 0, 1, 1});
    CHECK(res.loss >= 0.0);
    for (long n = 0; n < 5; ++n)
      CHECK(res.probabilities(n, 0) + res.probabilities(n, 1) == doctest::Approx(1.0).epsilon(1e-6));
  }
  SUBCASE("dlogits matches finite differences") {
    Rng rng(17);
    auto l = random_tensor<double>({4, 2}, rng);
    std::vector<int> labels = {0, 1, 1, 0};
    auto res = softmax_cross_entropy(l, labels);
    auto loss = [&]() { return softmax_cross_entropy(l, labels).loss; };
    CHECK(max_grad_error(l, res.dlogits, loss) < 1e-4);
  }
}

TEST_CASE("rmsprop hand step and invariants") {
  auto p = Tensor<double>::from_values({1}, {0.0});
  auto g = Tensor<double>::from_values({1}, {1.0});
  RmsPropState<double> state({1});
  rmsprop_step(p, g, state, 0.001, 0.9, 1e-7);
  CHECK(state.v.data[0] == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(p.data[0] == doctest::Approx(-0.00316227).epsilon(1e-5));

  SUBCASE("zero gradient leaves the parameter; v decays by rho") {
    auto p2 = Tensor<double>::from_values({1}, {0.7});
    auto zero = Tensor<double>::from_values({1}, {0.0});
    RmsPropState<double> s2({1});
    s2.v.data[0] = 0.5;
    rmsprop_step(p2, zero, s2, 0.001, 0.9, 1e-7);
    CHECK(p2.data[0] == doctest::Approx(0.7));
    CHECK(s2.v.data[0] == doctest::Approx(0.45));
  }
  SUBCASE("v stays nonnegative under random gradient sequences") {
    Rng rng(18);
    auto p3 = Tensor<double>::from_values({4}, {0, 0, 0, 0});
    RmsPropState<double> s3({4});
    for (int step = 0; step < 200; ++step) {
      auto gr = random_tensor<double>({4}, rng, 2.0);
      rmsprop_step(p3, gr, s3, 0.001, 0.9, 1e-7);
      for (double v : s3.v.data) CHECK(v >= 0.0);
    }
  }
  SUBCASE("shape mismatch is rejected") {
    auto bad = Tensor<double>::from_values({2}, {1, 1});
    RmsPropState<double> s4({1});
    auto p4 = Tensor<double>::from_values({1}, {0.0});
    CHECK_THROWS_AS(rmsprop_step(p4, bad, s4, 0.001, 0.9, 1e-7), Error);
  }
}

TEST_CASE("conv/pool length formulas match runtime shapes on random triples") {
  Rng rng(19);
  auto b0 = Tensor<double>({1});
  for (int trial = 0; trial < 100; ++trial) {
    long time = 8 + static_cast<long>(rng.uniform_int(200));
    long k = 1 + static_cast<long>(rng.uniform_int(std::min<long>(time, 24)));
    long stride = 1 + static_cast<long>(rng.uniform_int(8));
    Tensor<double> x({1, time, 1});
    Tensor<double> w({k, 1, 1});
    auto y = conv1d_forward(x, w, b0, stride);
    CHECK(y.dim(1) == conv_output_length(time, k, stride));
    CHECK(y.dim(1) == (time - k) / stride + 1);
    if (y.dim(1) >= 2) {
      auto p = max_pool1d_forward(y, 2);
      CHECK(p.dim(1) == pooled_length(y.dim(1), 2));
      CHECK(p.dim(1) == y.dim(1) / 2);
    }
  }
}
