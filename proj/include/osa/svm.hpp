#ifndef OSA_SVM_HPP
#define OSA_SVM_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "osa/subject.hpp"

namespace osa {

// Per-feature affine transform fitted on training data. Zero-variance
// features are dropped (recorded in `kept`); population SD convention.
struct Standardizer {
  Eigen::VectorXd means;  // over kept features, in input order
  Eigen::VectorXd sds;
  std::vector<int> kept;  // indices into the raw feature vector
  int input_dim = 0;
};

// Errors: EmptyTrainingSet, EmptyFeatureSpace (all features constant),
// NonFiniteFeature.
Standardizer standardize_fit(const Eigen::MatrixXd& train);

// Errors: DimensionMismatch.
Eigen::VectorXd standardize_apply(const Standardizer& s, const Eigen::VectorXd& v);
Eigen::MatrixXd standardize_apply(const Standardizer& s, const Eigen::MatrixXd& rows);

enum class KernelKind { Linear, Rbf };

struct SvmConfig {
  KernelKind kernel = KernelKind::Rbf;
  double c = 1.0;
  double gamma = 0.0;  // <= 0 selects 1 / (dim * mean feature variance)
  double tol = 1e-3;
  std::uint64_t seed = 0;
  int max_passes = 200;  // full sweeps without progress before giving up
};

struct SvmModel {
  KernelKind kernel = KernelKind::Rbf;
  double gamma = 0.0;
  double c = 1.0;
  double bias = 0.0;
  Eigen::MatrixXd support_vectors;  // one row per SV, standardized space
  Eigen::VectorXd dual_coefs;       // alpha_i * y_i per SV
  Standardizer standardizer;
  double kkt_residual = 0.0;  // max KKT violation at convergence
  std::uint64_t seed = 0;
};

double kernel_eval(KernelKind kind, double gamma, const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// SMO dual optimization on standardized features; y in {-1 Normal, +1 Severe}.
// Deterministic given the seed (it fixes scan order tie-breaking).
// Errors: SingleClassData, NonFiniteFeature, LengthMismatch.
SvmModel svm_train(const Eigen::MatrixXd& x, const std::vector<int>& y, const SvmConfig& cfg,
                   const Standardizer& standardizer);

// Fits the standardizer on X, then trains on the transformed rows.
SvmModel svm_train_raw(const Eigen::MatrixXd& x_raw, const std::vector<int>& y, const SvmConfig& cfg);

struct SvmPrediction {
  Label label = Label::Normal;
  double decision_value = 0.0;  // sum alpha_i y_i K(x_i, v) + bias
};

// `v_raw` is in raw feature space; the model applies its own standardizer.
// Errors: DimensionMismatch.
SvmPrediction svm_predict(const SvmModel& model, const Eigen::VectorXd& v_raw);

// Dual objective sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij for a
// candidate alpha; used by tests to compare against an independent solver.
double svm_dual_objective(const Eigen::MatrixXd& x, const std::vector<int>& y, KernelKind kind,
                          double gamma, const Eigen::VectorXd& alpha);

// Versioned JSON round-trip.
std::string svm_to_json(const SvmModel& model);
SvmModel svm_from_json(const std::string& text);

}  // namespace osa

#endif  // OSA_SVM_HPP
