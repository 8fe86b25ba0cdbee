#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "osa/experiment.hpp"
#include "osa/pipeline.hpp"
#include "osa/synth.hpp"

using namespace osa;

namespace {

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
}

// Small cohort -> window store on disk; returns the store directory.
std::string build_store(const std::filesystem::path& dir) {
  CohortParams params;
  params.duration = 480.0;  // ~11 windows per subject
  auto records = generate_synthetic_cohort(3, 3, 5, params);
  std::string manifest = write_cohort((dir / "cohort").string(), records, 5);
  preprocess_cohort(manifest, (dir / "windows").string(), FilterConfig{}, IngestConfig{});
  return (dir / "windows").string();
}

RunConfig small_run(const std::string& windows_dir) {
  RunConfig cfg;
  cfg.windows_dir = windows_dir;
  cfg.per_class = 24;
  cfg.folds = 3;
  cfg.select_seed = 1;
  cfg.fold_seed = 2;
  cfg.svm.seed = 3;
  cfg.nn.seed = 4;
  // shrink the network so the test stays fast
  cfg.nn.conv_units = {8, 8, 8};
  cfg.nn.lstm_units = {8, 8, 4};
  cfg.nn.dense_units = {8, 4};
  cfg.nn.max_epochs = 2;
  cfg.nn.patience = 2;
  cfg.nn.batch_size = 8;
  return cfg;
}

}  // namespace

TEST_CASE("run_experiment: structure, persistence and determinism") {
  namespace fs = std::filesystem;
  auto dir = fs::temp_directory_path() / "osa_experiment_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::string windows_dir = build_store(dir);

  RunConfig cfg = small_run(windows_dir);
  cfg.out_dir = (dir / "run1").string();
  ReportTable table = run_experiment(cfg);

  CHECK(table.has_svm);
  CHECK(table.has_dl);
  CHECK(table.svm_rows.size() == 3);
  CHECK(table.dl_rows.size() == 3);
  CHECK(table.has_t_test);
  for (const auto& row : table.svm_rows) {
    CHECK(row.accuracy >= 0.0);
    CHECK(row.accuracy <= 100.0);
  }

  CHECK(fs::exists(dir / "run1/report.txt"));
  CHECK(fs::exists(dir / "run1/report.csv"));
  CHECK(fs::exists(dir / "run1/summary.json"));
  CHECK(fs::exists(dir / "run1/fold_plans.json"));
  for (int f = 1; f <= 3; ++f) {
    char name[16];
    std::snprintf(name, sizeof(name), "fold_%02d", f);
    CHECK(fs::exists(dir / "run1" / name / "metrics.json"));
    CHECK(fs::exists(dir / "run1" / name / "svm_model.json"));
    CHECK(fs::exists(dir / "run1" / name / "nn_checkpoint.bin"));
    CHECK(fs::exists(dir / "run1" / name / "nn_history.csv"));
  }

  SUBCASE("same seeds reproduce the report byte for byte") {
    cfg.out_dir = (dir / "run2").string();
    run_experiment(cfg);
    CHECK(read_text((dir / "run1/report.csv").string()) == read_text((dir / "run2/report.csv").string()));
    CHECK(read_text((dir / "run1/summary.json").string()) ==
          read_text((dir / "run2/summary.json").string()));
  }

  SUBCASE("report re-rendering from the persisted CSV matches") {
    ReportTable loaded = load_report_csv((dir / "run1/report.csv").string());
    CHECK(loaded.svm_rows.size() == table.svm_rows.size());
    CHECK(loaded.dl_rows.size() == table.dl_rows.size());
    CHECK(loaded.svm_agg.mean.accuracy ==
          doctest::Approx(table.svm_agg.mean.accuracy).epsilon(1e-4));
    CHECK(loaded.has_t_test);
    CHECK(loaded.accuracy_t_test.t == doctest::Approx(table.accuracy_t_test.t).epsilon(1e-4));
  }

  SUBCASE("single-model runs produce one row set") {
    cfg.out_dir.clear();
    cfg.model = WhichModel::Svm;
    ReportTable svm_only = run_experiment(cfg);
    CHECK(svm_only.has_svm);
    CHECK(!svm_only.has_dl);
    CHECK(!svm_only.has_t_test);
    CHECK(svm_only.svm_rows.size() == 3);
    CHECK(svm_only.dl_rows.empty());
  }

  fs::remove_all(dir);
}
