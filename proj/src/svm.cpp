#include "osa/svm.hpp"

#include <cmath>
#include <limits>

#include "osa/errors.hpp"
#include "osa/rng.hpp"

#include <json.hpp>

namespace osa {

Standardizer standardize_fit(const Eigen::MatrixXd& train) {
  if (train.rows() == 0) raise(ErrorCode::EmptyTrainingSet, "no training vectors");
  if (!train.allFinite()) raise(ErrorCode::NonFiniteFeature, "non-finite feature in training set");

  const int dim = static_cast<int>(train.cols());
  Standardizer s;
  s.input_dim = dim;

  std::vector<double> means, sds;
  for (int j = 0; j < dim; ++j) {
    double mean = train.col(j).mean();
    double var = (train.col(j).array() - mean).square().sum() / static_cast<double>(train.rows());
    double sd = std::sqrt(var);
    if (sd <= 1e-12 * std::max(1.0, std::abs(mean))) continue;  // constant feature, drop
    s.kept.push_back(j);
    means.push_back(mean);
    sds.push_back(sd);
  }
  if (s.kept.empty()) raise(ErrorCode::EmptyFeatureSpace, "every feature is constant");

  s.means = Eigen::Map<Eigen::VectorXd>(means.data(), static_cast<long>(means.size()));
  s.sds = Eigen::Map<Eigen::VectorXd>(sds.data(), static_cast<long>(sds.size()));
  return s;
}

Eigen::VectorXd standardize_apply(const Standardizer& s, const Eigen::VectorXd& v) {
  if (v.size() != s.input_dim)
    raise(ErrorCode::DimensionMismatch,
          "vector has " + std::to_string(v.size()) + " features, standardizer expects " +
              std::to_string(s.input_dim));
  Eigen::VectorXd out(static_cast<long>(s.kept.size()));
  for (std::size_t k = 0; k < s.kept.size(); ++k)
    out[static_cast<long>(k)] = (v[s.kept[k]] - s.means[static_cast<long>(k)]) / s.sds[static_cast<long>(k)];
  return out;
}

Eigen::MatrixXd standardize_apply(const Standardizer& s, const Eigen::MatrixXd& rows) {
  Eigen::MatrixXd out(rows.rows(), static_cast<long>(s.kept.size()));
  for (long i = 0; i < rows.rows(); ++i)
    out.row(i) = standardize_apply(s, Eigen::VectorXd(rows.row(i))).transpose();
  return out;
}

double kernel_eval(KernelKind kind, double gamma, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (kind == KernelKind::Linear) return a.dot(b);
  return std::exp(-gamma * (a - b).squaredNorm());
}

namespace {

// Platt-style SMO working state.
struct Smo {
  const Eigen::MatrixXd& x;
  const std::vector<int>& y;
  Eigen::MatrixXd k;  // full kernel matrix
  Eigen::VectorXd alpha;
  Eigen::VectorXd error;  // f(x_i) - y_i
  double bias = 0.0;
  double c;
  double tol;
  Rng rng;

  Smo(const Eigen::MatrixXd& x_, const std::vector<int>& y_, double c_, double tol_, std::uint64_t seed)
      : x(x_), y(y_), c(c_), tol(tol_), rng(seed) {
    const long n = x.rows();
    alpha = Eigen::VectorXd::Zero(n);
    error.resize(n);
    for (long i = 0; i < n; ++i) error[i] = -static_cast<double>(y[static_cast<std::size_t>(i)]);
  }

  bool take_step(long i1, long i2) {
    if (i1 == i2) return false;
    const double a1_old = alpha[i1], a2_old = alpha[i2];
    const double y1 = y[static_cast<std::size_t>(i1)], y2 = y[static_cast<std::size_t>(i2)];
    const double e1 = error[i1], e2 = error[i2];
    const double s = y1 * y2;

    double lo, hi;
    if (s < 0) {
      lo = std::max(0.0, a2_old - a1_old);
      hi = std::min(c, c + a2_old - a1_old);
    } else {
      lo = std::max(0.0, a1_old + a2_old - c);
      hi = std::min(c, a1_old + a2_old);
    }
    if (lo >= hi) return false;

    const double k11 = k(i1, i1), k12 = k(i1, i2), k22 = k(i2, i2);
    const double eta = k11 + k22 - 2.0 * k12;

    double a2;
    if (eta > 0.0) {
      a2 = a2_old + y2 * (e1 - e2) / eta;
      a2 = std::min(hi, std::max(lo, a2));
    } else {
      // Degenerate curvature: evaluate the objective at both clip ends.
      const double f1 = y1 * e1 - a1_old * k11 - s * a2_old * k12;
      const double f2 = y2 * e2 - a2_old * k22 - s * a1_old * k12;
      const double l1 = a1_old + s * (a2_old - lo);
      const double h1 = a1_old + s * (a2_old - hi);
      const double lo_obj = l1 * f1 + lo * f2 + 0.5 * l1 * l1 * k11 + 0.5 * lo * lo * k22 + s * lo * l1 * k12;
      const double hi_obj = h1 * f1 + hi * f2 + 0.5 * h1 * h1 * k11 + 0.5 * hi * hi * k22 + s * hi * h1 * k12;
      if (lo_obj < hi_obj - 1e-12) a2 = lo;
      else if (lo_obj > hi_obj + 1e-12) a2 = hi;
      else return false;
    }
    if (std::abs(a2 - a2_old) < 1e-12 * (a2 + a2_old + 1e-12)) return false;

    // Snap to the exact box bounds so rounding residue never turns a bound
    // support vector into a phantom free one.
    const double snap = 1e-10 * c;
    if (a2 < snap) a2 = 0.0;
    else if (a2 > c - snap) a2 = c;
    double a1 = a1_old + s * (a2_old - a2);
    if (a1 < snap) a1 = 0.0;
    else if (a1 > c - snap) a1 = c;
    const double d1 = y1 * (a1 - a1_old);
    const double d2 = y2 * (a2 - a2_old);

    const double b1 = bias - (e1 + d1 * k11 + d2 * k12);
    const double b2 = bias - (e2 + d1 * k12 + d2 * k22);
    double b_new;
    if (a1 > 0.0 && a1 < c) b_new = b1;
    else if (a2 > 0.0 && a2 < c) b_new = b2;
    else b_new = (b1 + b2) / 2.0;

    const double db = b_new - bias;
    for (long j = 0; j < error.size(); ++j) error[j] += d1 * k(i1, j) + d2 * k(i2, j) + db;
    bias = b_new;
    alpha[i1] = a1;
    alpha[i2] = a2;
    return true;
  }

  bool examine(long i2) {
    const long n = alpha.size();
    const double y2 = y[static_cast<std::size_t>(i2)];
    const double e2 = error[i2];
    const double r2 = e2 * y2;
    if (!((r2 < -tol && alpha[i2] < c) || (r2 > tol && alpha[i2] > 0.0))) return false;

    // Second-choice heuristic: maximize |E1 - E2| over non-bound points.
    long best = -1;
    double best_gap = -1.0;
    for (long i = 0; i < n; ++i) {
      if (alpha[i] > 0.0 && alpha[i] < c) {
        double gap = std::abs(error[i] - e2);
        if (gap > best_gap) {
          best_gap = gap;
          best = i;
        }
      }
    }
    if (best >= 0 && take_step(best, i2)) return true;

    // Fall back to scanning non-bound points, then all, from a seeded start.
    long start = static_cast<long>(rng.uniform_int(static_cast<std::uint64_t>(n)));
    for (long off = 0; off < n; ++off) {
      long i = (start + off) % n;
      if (alpha[i] > 0.0 && alpha[i] < c && take_step(i, i2)) return true;
    }
    start = static_cast<long>(rng.uniform_int(static_cast<std::uint64_t>(n)));
    for (long off = 0; off < n; ++off) {
      long i = (start + off) % n;
      if (take_step(i, i2)) return true;
    }
    return false;
  }

  // max over i of the KKT violation of y_i f(x_i) - 1.
  double kkt_violation() const {
    double worst = 0.0;
    for (long i = 0; i < alpha.size(); ++i) {
      double yf = y[static_cast<std::size_t>(i)] * (error[i] + y[static_cast<std::size_t>(i)]);
      if (alpha[i] < c) worst = std::max(worst, 1.0 - yf);
      if (alpha[i] > 0.0) worst = std::max(worst, yf - 1.0);
    }
    return worst;
  }

  // Platt's incremental bias can drift when every support vector sits at a
  // bound; the KKT inequalities then only pin b to an interval. Recompute it
  // as the interval midpoint (exact when free SVs exist).
  void refresh_bias() {
    double b_low = -std::numeric_limits<double>::infinity();
    double b_high = std::numeric_limits<double>::infinity();
    for (long i = 0; i < alpha.size(); ++i) {
      double yi = y[static_cast<std::size_t>(i)];
      double f_nob = error[i] + yi - bias;  // decision value without bias
      if (yi > 0) {
        if (alpha[i] < c) b_low = std::max(b_low, 1.0 - f_nob);
        if (alpha[i] > 0.0) b_high = std::min(b_high, 1.0 - f_nob);
      } else {
        if (alpha[i] < c) b_high = std::min(b_high, -1.0 - f_nob);
        if (alpha[i] > 0.0) b_low = std::max(b_low, -1.0 - f_nob);
      }
    }
    if (!std::isfinite(b_low) && !std::isfinite(b_high)) return;
    double b_new;
    if (!std::isfinite(b_low)) b_new = b_high;
    else if (!std::isfinite(b_high)) b_new = b_low;
    else b_new = (b_low + b_high) / 2.0;
    double db = b_new - bias;
    for (long j = 0; j < error.size(); ++j) error[j] += db;
    bias = b_new;
  }

  void run(int max_passes) {
    const long n = alpha.size();
    int changed = 0;
    bool examine_all = true;
    int idle = 0;
    while (idle < max_passes) {
      changed = 0;
      if (examine_all) {
        for (long i = 0; i < n; ++i) changed += examine(i) ? 1 : 0;
      } else {
        for (long i = 0; i < n; ++i)
          if (alpha[i] > 0.0 && alpha[i] < c) changed += examine(i) ? 1 : 0;
      }
      if (examine_all) {
        if (changed == 0) {
          refresh_bias();
          if (kkt_violation() <= tol) return;
        }
        examine_all = false;
      } else if (changed == 0) {
        examine_all = true;
      }
      idle = changed == 0 ? idle + 1 : 0;
    }
    refresh_bias();
  }
};

}  // namespace

SvmModel svm_train(const Eigen::MatrixXd& x, const std::vector<int>& y, const SvmConfig& cfg,
                   const Standardizer& standardizer) {
  const long n = x.rows();
  if (static_cast<std::size_t>(n) != y.size())
    raise(ErrorCode::LengthMismatch, "labels do not match sample count");
  if (!x.allFinite()) raise(ErrorCode::NonFiniteFeature, "non-finite feature");

  bool has_pos = false, has_neg = false;
  for (int v : y) {
    if (v == 1) has_pos = true;
    else if (v == -1) has_neg = true;
    else raise(ErrorCode::BadArguments, "labels must be +1 or -1");
  }
  if (!has_pos || !has_neg) raise(ErrorCode::SingleClassData, "training data has a single class");

  double gamma = cfg.gamma;
  if (cfg.kernel == KernelKind::Rbf && gamma <= 0.0) {
    double mean_var = 0.0;
    for (long j = 0; j < x.cols(); ++j) {
      double mean = x.col(j).mean();
      mean_var += (x.col(j).array() - mean).square().sum() / static_cast<double>(n);
    }
    mean_var /= static_cast<double>(x.cols());
    gamma = mean_var > 0.0 ? 1.0 / (static_cast<double>(x.cols()) * mean_var) : 1.0;
  }

  Smo smo(x, y, cfg.c, cfg.tol, cfg.seed);
  smo.k.resize(n, n);
  if (cfg.kernel == KernelKind::Linear) {
    smo.k.noalias() = x * x.transpose();
  } else {
    Eigen::VectorXd sq = x.rowwise().squaredNorm();
    smo.k.noalias() = x * x.transpose();
    for (long i = 0; i < n; ++i)
      for (long j = 0; j < n; ++j) smo.k(i, j) = std::exp(-gamma * (sq[i] + sq[j] - 2.0 * smo.k(i, j)));
  }
  smo.run(cfg.max_passes);

  SvmModel model;
  model.kernel = cfg.kernel;
  model.gamma = gamma;
  model.c = cfg.c;
  model.bias = smo.bias;
  model.standardizer = standardizer;
  model.kkt_residual = smo.kkt_violation();
  model.seed = cfg.seed;

  std::vector<long> sv;
  for (long i = 0; i < n; ++i)
    if (smo.alpha[i] > 0.0) sv.push_back(i);
  model.support_vectors.resize(static_cast<long>(sv.size()), x.cols());
  model.dual_coefs.resize(static_cast<long>(sv.size()));
  for (std::size_t k = 0; k < sv.size(); ++k) {
    model.support_vectors.row(static_cast<long>(k)) = x.row(sv[k]);
    model.dual_coefs[static_cast<long>(k)] = smo.alpha[sv[k]] * y[static_cast<std::size_t>(sv[k])];
  }
  return model;
}

SvmModel svm_train_raw(const Eigen::MatrixXd& x_raw, const std::vector<int>& y, const SvmConfig& cfg) {
  Standardizer s = standardize_fit(x_raw);
  return svm_train(standardize_apply(s, x_raw), y, cfg, s);
}

SvmPrediction svm_predict(const SvmModel& model, const Eigen::VectorXd& v_raw) {
  Eigen::VectorXd v = model.standardizer.input_dim > 0 ? standardize_apply(model.standardizer, v_raw)
                                                       : v_raw;
  if (v.size() != model.support_vectors.cols())
    raise(ErrorCode::DimensionMismatch, "feature vector does not match the model");

  double f = model.bias;
  for (long i = 0; i < model.support_vectors.rows(); ++i)
    f += model.dual_coefs[i] * kernel_eval(model.kernel, model.gamma,
                                           Eigen::VectorXd(model.support_vectors.row(i)), v);
  SvmPrediction pred;
  pred.decision_value = f;
  pred.label = f >= 0.0 ? Label::Severe : Label::Normal;
  return pred;
}

double svm_dual_objective(const Eigen::MatrixXd& x, const std::vector<int>& y, KernelKind kind,
                          double gamma, const Eigen::VectorXd& alpha) {
  const long n = x.rows();
  double obj = alpha.sum();
  for (long i = 0; i < n; ++i) {
    for (long j = 0; j < n; ++j) {
      if (alpha[i] == 0.0 || alpha[j] == 0.0) continue;
      double kij = kernel_eval(kind, gamma, Eigen::VectorXd(x.row(i)), Eigen::VectorXd(x.row(j)));
      obj -= 0.5 * alpha[i] * alpha[j] * y[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(j)] * kij;
    }
  }
  return obj;
}

namespace {

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  nlohmann::json a = nlohmann::json::array();
  for (long i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& a) {
  Eigen::VectorXd v(static_cast<long>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<long>(i)] = a.at(i).get<double>();
  return v;
}

}  // namespace

std::string svm_to_json(const SvmModel& model) {
  nlohmann::json j;
  j["format"] = "osa-svm";
  j["version"] = 1;
  j["kernel"] = model.kernel == KernelKind::Rbf ? "rbf" : "linear";
  j["gamma"] = model.gamma;
  j["c"] = model.c;
  j["bias"] = model.bias;
  j["kkt_residual"] = model.kkt_residual;
  j["seed"] = model.seed;
  j["dual_coefs"] = vector_to_json(model.dual_coefs);
  j["support_vectors"] = nlohmann::json::array();
  for (long i = 0; i < model.support_vectors.rows(); ++i)
    j["support_vectors"].push_back(vector_to_json(model.support_vectors.row(i)));
  j["standardizer"] = {{"input_dim", model.standardizer.input_dim},
                       {"kept", model.standardizer.kept},
                       {"means", vector_to_json(model.standardizer.means)},
                       {"sds", vector_to_json(model.standardizer.sds)}};
  return j.dump(1);
}

SvmModel svm_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorCode::MalformedHeader, std::string("bad SVM model JSON: ") + e.what());
  }
  if (j.value("format", "") != "osa-svm" || j.value("version", -1) != 1)
    raise(ErrorCode::MalformedHeader, "unrecognized SVM model format/version");

  SvmModel m;
  m.kernel = j.at("kernel").get<std::string>() == "rbf" ? KernelKind::Rbf : KernelKind::Linear;
  m.gamma = j.at("gamma").get<double>();
  m.c = j.at("c").get<double>();
  m.bias = j.at("bias").get<double>();
  m.kkt_residual = j.value("kkt_residual", 0.0);
  m.seed = j.value("seed", 0ULL);
  m.dual_coefs = vector_from_json(j.at("dual_coefs"));
  const auto& svs = j.at("support_vectors");
  long cols = svs.empty() ? 0 : static_cast<long>(svs.at(0).size());
  m.support_vectors.resize(static_cast<long>(svs.size()), cols);
  for (std::size_t i = 0; i < svs.size(); ++i)
    m.support_vectors.row(static_cast<long>(i)) = vector_from_json(svs.at(i)).transpose();
  const auto& st = j.at("standardizer");
  m.standardizer.input_dim = st.at("input_dim").get<int>();
  m.standardizer.kept = st.at("kept").get<std::vector<int>>();
  m.standardizer.means = vector_from_json(st.at("means"));
  m.standardizer.sds = vector_from_json(st.at("sds"));
  return m;
}

}  // namespace osa
