// Command-line front end: synthetic cohort generation, preprocessing,
// feature export, cross-validated evaluation and report rendering.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "osa/config.hpp"
#include "osa/hrv.hpp"

namespace {

int cmd_synth(int n_normal, int n_severe, std::uint64_t seed, const std::string& out,
              const osa::FullConfig& cfg) {
  auto records = osa::generate_synthetic_cohort(n_normal, n_severe, seed, cfg.cohort);
  std::string manifest = osa::write_cohort(out, records, seed);
  std::size_t events = 0;
  for (const auto& r : records) events += r.events.size();
  std::printf("wrote %zu subjects (%zu events) to %s\n", records.size(), events, manifest.c_str());
  return 0;
}

int cmd_preprocess(const std::string& in, const std::string& out, const osa::FullConfig& cfg) {
  osa::PreprocessStats stats = osa::preprocess_cohort(in, out, cfg.filter, cfg.ingest);
  std::printf("preprocessed %zu subjects: %zu windows, %zu events skipped\n", stats.subjects,
              stats.windows, stats.skipped.size());
  for (const auto& [subject, skip] : stats.skipped)
    std::fprintf(stderr, "  skip %s: %s (start %.1f s, duration %.1f s)\n", subject.c_str(),
                 osa::skip_reason_name(skip.reason), skip.event.start, skip.event.duration);
  return 0;
}

int cmd_features(const std::string& windows_dir, const std::string& out, const osa::FullConfig& cfg) {
  auto windows = osa::read_window_store(windows_dir);
  std::vector<osa::FeatureVector> features(windows.size());
  std::vector<bool> valid(windows.size(), false);
  std::size_t failures = 0;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    try {
      features[i] = osa::extract_feature_vector(windows[i], cfg.run.pnn50_absolute);
      valid[i] = true;
    } catch (const osa::Error& e) {
      ++failures;
      std::fprintf(stderr, "  window %s excluded: %s\n", windows[i].id.c_str(), e.what());
    }
  }
  osa::write_feature_csv(out, windows, features, valid);
  std::printf("wrote %zu feature rows to %s (%zu windows excluded)\n", windows.size() - failures,
              out.c_str(), failures);
  return 0;
}

int cmd_crossval(osa::FullConfig cfg, const std::string& model, std::uint64_t seed, bool seed_given,
                 const std::string& out) {
  if (!model.empty()) osa::apply_config_entry(cfg, "model", model);
  if (!out.empty()) cfg.run.out_dir = out;
  if (seed_given) {
    cfg.run.select_seed = osa::derive_seed(seed, 1);
    cfg.run.fold_seed = osa::derive_seed(seed, 2);
    cfg.run.svm.seed = osa::derive_seed(seed, 3);
    cfg.run.nn.seed = osa::derive_seed(seed, 4);
  }
  if (cfg.run.windows_dir.empty())
    osa::raise(osa::ErrorCode::BadArguments, "config must set windows = <window store dir>");

  osa::ReportTable table = osa::run_experiment(cfg.run);
  std::cout << osa::render_report_text(table);
  if (!cfg.run.out_dir.empty()) std::printf("artifacts under %s\n", cfg.run.out_dir.c_str());
  return 0;
}

int cmd_report(const std::string& run_dir) {
  osa::ReportTable table = osa::load_report_csv(run_dir + "/report.csv");
  std::cout << osa::render_report_text(table);
  std::cout << osa::render_report_summary_json(table) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"OSA severity classification pipeline (ECG -> windows -> SVM / CNN-LSTM-DNN)"};
  app.require_subcommand(1);

  osa::FullConfig cfg = osa::default_config();
  std::string config_path;

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic ECG cohort");
  int n_normal = 20, n_severe = 20;
  std::uint64_t synth_seed = 1;
  std::string synth_out = "cohort";
  synth->add_option("--subjects-normal", n_normal, "normal subjects")->check(CLI::PositiveNumber);
  synth->add_option("--subjects-severe", n_severe, "severe subjects")->check(CLI::PositiveNumber);
  synth->add_option("--seed", synth_seed, "master seed");
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--config", config_path, "key=value config file");

  // preprocess
  auto* preprocess = app.add_subcommand("preprocess", "filter ECGs and extract event windows");
  std::string pre_in, pre_out;
  preprocess->add_option("--in", pre_in, "cohort manifest.jsonl")->required();
  preprocess->add_option("--out", pre_out, "window store directory")->required();
  preprocess->add_option("--config", config_path, "key=value config file");

  // features
  auto* features = app.add_subcommand("features", "export the HRV/EDR feature table");
  std::string feat_windows, feat_out;
  features->add_option("--windows", feat_windows, "window store directory")->required();
  features->add_option("--out", feat_out, "output CSV path")->required();
  features->add_option("--config", config_path, "key=value config file");

  // crossval
  auto* crossval = app.add_subcommand("crossval", "run the k-fold study");
  std::string cv_model, cv_out;
  std::uint64_t cv_seed = 0;
  bool cv_seed_given = false;
  crossval->add_option("--model", cv_model, "svm, dl or both")
      ->check(CLI::IsMember({"svm", "dl", "both"}));
  crossval->add_option("--config", config_path, "key=value config file")->required();
  crossval->add_option("--seed", cv_seed, "master seed for selection/folds/models")
      ->each([&](const std::string&) { cv_seed_given = true; });
  crossval->add_option("--out", cv_out, "run directory");

  // report
  auto* report = app.add_subcommand("report", "re-render a persisted run");
  std::string run_dir;
  report->add_option("--run", run_dir, "run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // help text, success
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;  // usage error
  }

  try {
    if (!config_path.empty()) osa::load_config_file(cfg, config_path);
    if (synth->parsed()) return cmd_synth(n_normal, n_severe, synth_seed, synth_out, cfg);
    if (preprocess->parsed()) return cmd_preprocess(pre_in, pre_out, cfg);
    if (features->parsed()) return cmd_features(feat_windows, feat_out, cfg);
    if (crossval->parsed()) return cmd_crossval(cfg, cv_model, cv_seed, cv_seed_given, cv_out);
    if (report->parsed()) return cmd_report(run_dir);
  } catch (const osa::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.exit_category();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
