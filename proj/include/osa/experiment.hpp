#ifndef OSA_EXPERIMENT_HPP
#define OSA_EXPERIMENT_HPP

#include <string>
#include <vector>

#include "osa/folds.hpp"
#include "osa/metrics.hpp"
#include "osa/model.hpp"
#include "osa/stats.hpp"
#include "osa/svm.hpp"

namespace osa {

enum class WhichModel { Svm, Dl, Both };

struct RunConfig {
  std::string windows_dir;  // window store to evaluate on
  std::string out_dir;      // run artifacts; empty disables persistence
  WhichModel model = WhichModel::Both;
  std::size_t per_class = 1000;
  int folds = 10;
  std::uint64_t select_seed = 11;
  std::uint64_t fold_seed = 22;
  SvmConfig svm;
  ModelConfig nn;
  bool pnn50_absolute = false;
  int jobs = 1;  // fold-level parallelism
};

struct ReportTable {
  bool has_svm = false, has_dl = false, has_t_test = false;
  std::vector<MetricsRow> svm_rows, dl_rows;  // one per fold
  MetricsAggregate svm_agg, dl_agg;
  TTestResult accuracy_t_test;  // DL vs SVM accuracies, paired by fold
  FiveNumberSummary svm_acc_summary, dl_acc_summary;
  std::vector<std::size_t> svm_test_excluded;  // per fold, windows without valid features
};

// Runs the full cross-validated study on a window store: sample selection,
// stratified folds, per-fold SVM on HRV/EDR features and/or the deep model
// on raw windows, metrics per fold, aggregates and the paired t-test.
// All artifacts land under cfg.out_dir; a rerun with the same config and
// seeds writes identical report files.
ReportTable run_experiment(const RunConfig& cfg);

// Aligned per-fold table mirroring the study layout, plus aggregate rows.
std::string render_report_text(const ReportTable& table);

// Machine-readable form: one row per fold and model, then aggregates.
std::string render_report_csv(const ReportTable& table);

// Five-number summaries + t-test as JSON (box-plot input).
std::string render_report_summary_json(const ReportTable& table);

// Re-render a persisted run directory (reads report.csv).
ReportTable load_report_csv(const std::string& path);

}  // namespace osa

#endif  // OSA_EXPERIMENT_HPP
