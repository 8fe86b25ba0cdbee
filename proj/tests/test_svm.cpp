#include <doctest.h>

#include <cmath>

#include "osa/rng.hpp"
#include "osa/svm.hpp"

using namespace osa;

namespace {

// Independent oracle: exhaustive cyclic pairwise coordinate ascent on the
// dual with the analytic two-variable solution, swept to stationarity. No
// heuristics, no error cache; shares nothing with the SMO implementation.
Eigen::VectorXd oracle_dual_solve(const Eigen::MatrixXd& x, const std::vector<int>& y,
                                  KernelKind kind, double gamma, double c) {
  const long n = x.rows();
  Eigen::MatrixXd k(n, n);
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j)
      k(i, j) = kernel_eval(kind, gamma, Eigen::VectorXd(x.row(i)), Eigen::VectorXd(x.row(j)));

  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
  for (int sweep = 0; sweep < 20000; ++sweep) {
    double moved = 0.0;
    for (long i = 0; i < n; ++i) {
      for (long j = i + 1; j < n; ++j) {
        double yi = y[static_cast<std::size_t>(i)], yj = y[static_cast<std::size_t>(j)];
        double s = yi * yj;
        double lo, hi;
        if (s < 0) {
          lo = std::max(0.0, alpha[j] - alpha[i]);
          hi = std::min(c, c + alpha[j] - alpha[i]);
        } else {
          lo = std::max(0.0, alpha[i] + alpha[j] - c);
          hi = std::min(c, alpha[i] + alpha[j]);
        }
        if (lo >= hi) continue;
        double eta = k(i, i) + k(j, j) - 2.0 * k(i, j);
        if (eta <= 1e-15) continue;
        // dual gradient components at the current alpha
        double gi = 1.0, gj = 1.0;
        for (long t = 0; t < n; ++t) {
          gi -= alpha[t] * y[static_cast<std::size_t>(t)] * yi * k(i, t);
          gj -= alpha[t] * y[static_cast<std::size_t>(t)] * yj * k(j, t);
        }
        double aj = alpha[j] + (gj - s * gi) / eta;
        aj = std::min(hi, std::max(lo, aj));
        double ai = alpha[i] + s * (alpha[j] - aj);
        moved += std::abs(aj - alpha[j]);
        alpha[i] = ai;
        alpha[j] = aj;
      }
    }
    if (moved < 1e-14) break;
  }
  return alpha;
}

}  // namespace

TEST_CASE("standardizer drops constant features and centers the rest") {
  Eigen::MatrixXd train(4, 3);
  train << 1.0, 7.0, -2.0,
           2.0, 7.0, -1.0,
           3.0, 7.0,  0.0,
           4.0, 7.0,  5.0;
  Standardizer s = standardize_fit(train);
  CHECK(s.kept == std::vector<int>{0, 2});

  Eigen::MatrixXd z = standardize_apply(s, train);
  for (long j = 0; j < z.cols(); ++j) {
    CHECK(std::abs(z.col(j).mean()) < 1e-9);
    double var = (z.col(j).array() - z.col(j).mean()).square().sum() / 4.0;
    CHECK(std::abs(std::sqrt(var) - 1.0) < 1e-9);
  }

  // a held-out vector equal to the training mean maps to zero
  Eigen::VectorXd mean_vec(3);
  mean_vec << 2.5, 7.0, 0.5;
  Eigen::VectorXd z0 = standardize_apply(s, mean_vec);
  for (long j = 0; j < z0.size(); ++j) CHECK(std::abs(z0[j]) < 1e-9);

  SUBCASE("all-constant training set raises EmptyFeatureSpace") {
    Eigen::MatrixXd flat = Eigen::MatrixXd::Constant(5, 3, 2.0);
    try {
      standardize_fit(flat);
      FAIL("expected EmptyFeatureSpace");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::EmptyFeatureSpace);
    }
  }
  SUBCASE("empty training set") {
    try {
      standardize_fit(Eigen::MatrixXd(0, 3));
      FAIL("expected EmptyTrainingSet");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::EmptyTrainingSet);
    }
  }
  SUBCASE("dimension mismatch on apply") {
    Eigen::VectorXd wrong(2);
    wrong << 1.0, 2.0;
    try {
      standardize_apply(s, wrong);
      FAIL("expected DimensionMismatch");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::DimensionMismatch);
    }
  }
}

TEST_CASE("two separable points: correct labels, zero decision at the midpoint") {
  Eigen::MatrixXd x(2, 2);
  x << -1.0, 0.0,
        1.0, 0.0;
  std::vector<int> y = {-1, 1};
  SvmConfig cfg;
  cfg.kernel = KernelKind::Linear;
  cfg.c = 1.0;
  SvmModel model = svm_train(x, y, cfg, Standardizer{});

  CHECK(svm_predict(model, Eigen::Vector2d(-1.0, 0.0)).label == Label::Normal);
  CHECK(svm_predict(model, Eigen::Vector2d(1.0, 0.0)).label == Label::Severe);
  CHECK(std::abs(svm_predict(model, Eigen::Vector2d(0.0, 0.0)).decision_value) < 1e-6);
  CHECK(model.kkt_residual <= cfg.tol);
}

TEST_CASE("XOR with an RBF kernel reaches 100% training accuracy") {
  Eigen::MatrixXd x(4, 2);
  x << 0.0, 0.0,
       1.0, 1.0,
       0.0, 1.0,
       1.0, 0.0;
  std::vector<int> y = {-1, -1, 1, 1};
  SvmConfig cfg;
  cfg.kernel = KernelKind::Rbf;
  cfg.gamma = 1.0;
  cfg.c = 10.0;
  SvmModel model = svm_train(x, y, cfg, Standardizer{});
  for (long i = 0; i < 4; ++i) {
    auto pred = svm_predict(model, Eigen::VectorXd(x.row(i)));
    CHECK((pred.label == Label::Severe ? 1 : -1) == y[static_cast<std::size_t>(i)]);
  }
}

TEST_CASE("SMO objective matches the independent dual solver on 10-sample problems") {
  Rng rng(314);
  for (int trial = 0; trial < 12; ++trial) {
    const long n = 10;
    Eigen::MatrixXd x(n, 3);
    std::vector<int> y(n);
    for (long i = 0; i < n; ++i) {
      y[static_cast<std::size_t>(i)] = i < n / 2 ? -1 : 1;
      for (long j = 0; j < 3; ++j)
        x(i, j) = rng.normal(y[static_cast<std::size_t>(i)] * 0.7, 1.0);
    }
    KernelKind kind = trial % 2 == 0 ? KernelKind::Rbf : KernelKind::Linear;
    double gamma = 0.5;
    double c = trial % 3 == 0 ? 0.5 : 2.0;

    SvmConfig cfg;
    cfg.kernel = kind;
    cfg.gamma = gamma;
    cfg.c = c;
    cfg.tol = 1e-5;
    cfg.seed = static_cast<std::uint64_t>(trial);
    SvmModel model = svm_train(x, y, cfg, Standardizer{});

    // reconstruct alpha from the stored duals (row order is preserved)
    Eigen::VectorXd alpha_smo = Eigen::VectorXd::Zero(n);
    long sv = 0;
    for (long i = 0; i < n && sv < model.support_vectors.rows(); ++i) {
      if ((model.support_vectors.row(sv) - x.row(i)).norm() < 1e-12) {
        alpha_smo[i] = std::abs(model.dual_coefs[sv]);
        ++sv;
      }
    }
    CHECK(sv == model.support_vectors.rows());

    Eigen::VectorXd alpha_ref = oracle_dual_solve(x, y, kind, gamma, c);
    double obj_smo = svm_dual_objective(x, y, kind, gamma, alpha_smo);
    double obj_ref = svm_dual_objective(x, y, kind, gamma, alpha_ref);
    CHECK(std::abs(obj_smo - obj_ref) < 1e-4);

    // dual feasibility: box constraints and the equality constraint
    double sum_ay = 0.0;
    for (long i = 0; i < n; ++i) {
      CHECK(alpha_smo[i] >= -1e-12);
      CHECK(alpha_smo[i] <= c + 1e-12);
      sum_ay += alpha_smo[i] * y[static_cast<std::size_t>(i)];
    }
    CHECK(std::abs(sum_ay) < 1e-9);
    CHECK(model.kkt_residual <= cfg.tol);
  }
}

TEST_CASE("unbound support vectors reproduce their own label") {
  Rng rng(99);
  const long n = 30;
  Eigen::MatrixXd x(n, 2);
  std::vector<int> y(n);
  for (long i = 0; i < n; ++i) {
    y[static_cast<std::size_t>(i)] = i % 2 == 0 ? -1 : 1;
    x(i, 0) = rng.normal(y[static_cast<std::size_t>(i)] * 2.0, 0.5);
    x(i, 1) = rng.normal(0.0, 0.5);
  }
  SvmConfig cfg;
  cfg.kernel = KernelKind::Rbf;
  cfg.gamma = 0.7;
  cfg.c = 5.0;
  SvmModel model = svm_train(x, y, cfg, Standardizer{});
  for (long s = 0; s < model.support_vectors.rows(); ++s) {
    double a = std::abs(model.dual_coefs[s]);
    if (a >= cfg.c - 1e-9) continue;  // bound SVs may sit inside the margin
    auto pred = svm_predict(model, Eigen::VectorXd(model.support_vectors.row(s)));
    CHECK((pred.label == Label::Severe ? 1.0 : -1.0) * model.dual_coefs[s] > 0.0);
  }
}

TEST_CASE("training order does not change predictions; label is the decision sign") {
  Rng rng(1234);
  const long n = 40;
  Eigen::MatrixXd x(n, 2);
  std::vector<int> y(n);
  for (long i = 0; i < n; ++i) {
    y[static_cast<std::size_t>(i)] = i % 2 == 0 ? -1 : 1;
    x(i, 0) = rng.normal(y[static_cast<std::size_t>(i)] * 1.0, 1.0);
    x(i, 1) = rng.normal(0.0, 1.0);
  }
  SvmConfig cfg;
  cfg.kernel = KernelKind::Rbf;
  cfg.gamma = 0.6;
  cfg.c = 1.0;
  SvmModel a = svm_train(x, y, cfg, Standardizer{});

  std::vector<long> perm(n);
  for (long i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
  Rng prng(5);
  prng.shuffle(perm);
  Eigen::MatrixXd xp(n, 2);
  std::vector<int> yp(n);
  for (long i = 0; i < n; ++i) {
    xp.row(i) = x.row(perm[static_cast<std::size_t>(i)]);
    yp[static_cast<std::size_t>(i)] = y[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
  }
  SvmModel b = svm_train(xp, yp, cfg, Standardizer{});

  Rng trng(6);
  for (int t = 0; t < 50; ++t) {
    Eigen::Vector2d v(trng.normal(0.0, 2.0), trng.normal(0.0, 2.0));
    auto pa = svm_predict(a, v);
    auto pb = svm_predict(b, v);
    CHECK(pa.label == pb.label);
    CHECK((pa.decision_value >= 0.0) == (pa.label == Label::Severe));
  }
}

TEST_CASE("error paths: single class, non-finite, dimension mismatch") {
  Eigen::MatrixXd x(3, 2);
  x << 0, 0, 1, 0, 2, 0;
  SvmConfig cfg;
  try {
    svm_train(x, {1, 1, 1}, cfg, Standardizer{});
    FAIL("expected SingleClassData");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SingleClassData);
  }
  Eigen::MatrixXd bad = x;
  bad(1, 1) = std::numeric_limits<double>::quiet_NaN();
  try {
    svm_train(bad, {-1, 1, 1}, cfg, Standardizer{});
    FAIL("expected NonFiniteFeature");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonFiniteFeature);
  }
  SvmModel m = svm_train(x, {-1, 1, 1}, cfg, Standardizer{});
  Eigen::VectorXd wrong(3);
  wrong << 1, 2, 3;
  try {
    svm_predict(m, wrong);
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionMismatch);
  }
}

TEST_CASE("JSON round trip preserves predictions; default gamma is 1/(d*var)") {
  Rng rng(7);
  Eigen::MatrixXd x(12, 9);
  std::vector<int> y(12);
  for (long i = 0; i < 12; ++i) {
    y[static_cast<std::size_t>(i)] = i < 6 ? -1 : 1;
    for (long j = 0; j < 9; ++j) x(i, j) = rng.normal(y[static_cast<std::size_t>(i)] * 0.5, 1.0);
  }
  SvmConfig cfg;
  SvmModel model = svm_train_raw(x, y, cfg);
  SvmModel loaded = svm_from_json(svm_to_json(model));

  for (long i = 0; i < 12; ++i) {
    auto a = svm_predict(model, Eigen::VectorXd(x.row(i)));
    auto b = svm_predict(loaded, Eigen::VectorXd(x.row(i)));
    CHECK(a.label == b.label);
    CHECK(a.decision_value == doctest::Approx(b.decision_value).epsilon(1e-12));
  }
  CHECK(loaded.gamma == doctest::Approx(model.gamma));
  // standardized features have unit variance, so auto gamma is 1/9
  CHECK(model.gamma == doctest::Approx(1.0 / 9.0).epsilon(1e-6));
}
