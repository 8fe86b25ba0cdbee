#include "osa/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "osa/hrv.hpp"

#include <json.hpp>

namespace osa {
namespace {

struct FoldOutcome {
  MetricsRow svm_row, dl_row;
  ConfusionMatrix svm_cm, dl_cm;
  std::size_t svm_test_excluded = 0;
  std::vector<EpochStats> history;
};

struct Dataset {
  std::vector<EventWindow> windows;        // all selected windows, selection order
  std::vector<Label> labels;               // per selected window
  Eigen::MatrixXd features;                // rows aligned with windows
  std::vector<bool> feature_valid;
  long window_len = 0;
};

ConfusionMatrix accumulate_confusion(const std::vector<Label>& truth, const std::vector<Label>& pred) {
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    bool pos = truth[i] == Label::Severe;
    bool hit = pred[i] == Label::Severe;
    if (pos && hit) ++cm.tp;
    else if (pos && !hit) ++cm.fn;
    else if (!pos && hit) ++cm.fp;
    else ++cm.tn;
  }
  return cm;
}

void run_svm_fold(const Dataset& data, const FoldPlan& plan, const SvmConfig& svm_cfg, int fold,
                  const std::string& fold_dir, FoldOutcome& out) {
  std::vector<std::size_t> train_rows;
  for (std::size_t id : plan.train_ids)
    if (data.feature_valid[id]) train_rows.push_back(id);

  Eigen::MatrixXd x(static_cast<long>(train_rows.size()), data.features.cols());
  std::vector<int> y(train_rows.size());
  for (std::size_t i = 0; i < train_rows.size(); ++i) {
    x.row(static_cast<long>(i)) = data.features.row(static_cast<long>(train_rows[i]));
    y[i] = data.labels[train_rows[i]] == Label::Severe ? 1 : -1;
  }

  SvmConfig cfg = svm_cfg;
  cfg.seed = derive_seed(svm_cfg.seed, static_cast<std::uint64_t>(fold));
  SvmModel model = svm_train_raw(x, y, cfg);

  std::vector<Label> truth, pred;
  for (std::size_t id : plan.test_ids) {
    if (!data.feature_valid[id]) {
      ++out.svm_test_excluded;
      continue;
    }
    truth.push_back(data.labels[id]);
    pred.push_back(svm_predict(model, Eigen::VectorXd(data.features.row(static_cast<long>(id)))).label);
  }
  out.svm_cm = accumulate_confusion(truth, pred);
  out.svm_row = metrics_from_confusion(out.svm_cm);

  if (!fold_dir.empty()) {
    std::ofstream f(fold_dir + "/svm_model.json", std::ios::trunc);
    f << svm_to_json(model) << "\n";
  }
}

template <typename S>
void run_dl_fold(const Dataset& data, const FoldPlan& plan, const ModelConfig& nn_cfg, int fold,
                 const std::string& fold_dir, FoldOutcome& out) {
  const long len = data.window_len;
  auto gather = [&](const std::vector<std::size_t>& ids, Tensor<S>& x, std::vector<int>& labels) {
    x = Tensor<S>({static_cast<long>(ids.size()), len, 1});
    labels.resize(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const auto& w = data.windows[ids[i]];
      for (long k = 0; k < len; ++k) x.data[static_cast<long>(i) * len + k] = static_cast<S>(w.samples[k]);
      labels[i] = data.labels[ids[i]] == Label::Severe ? 1 : 0;
    }
  };

  Tensor<S> train_x, val_x, test_x;
  std::vector<int> train_y, val_y, test_y;
  gather(plan.train_ids, train_x, train_y);
  gather(plan.val_ids, val_x, val_y);
  gather(plan.test_ids, test_x, test_y);

  ModelConfig cfg = nn_cfg;
  cfg.seed = derive_seed(nn_cfg.seed, static_cast<std::uint64_t>(fold));
  SequenceClassifier<S> model(cfg, len);
  TrainResult trained = train_model(model, train_x, train_y, val_x, val_y);
  out.history = trained.history;

  std::vector<int> pred = predict_model(model, test_x, cfg.batch_size);
  std::vector<Label> truth_labels, pred_labels;
  for (std::size_t i = 0; i < test_y.size(); ++i) {
    truth_labels.push_back(test_y[i] == 1 ? Label::Severe : Label::Normal);
    pred_labels.push_back(pred[i] == 1 ? Label::Severe : Label::Normal);
  }
  out.dl_cm = accumulate_confusion(truth_labels, pred_labels);
  out.dl_row = metrics_from_confusion(out.dl_cm);

  if (!fold_dir.empty()) {
    save_checkpoint(fold_dir + "/nn_checkpoint.bin", model);
    write_history_csv(fold_dir + "/nn_history.csv", trained.history);
  }
}

nlohmann::json confusion_json(const ConfusionMatrix& cm) {
  return {{"tp", cm.tp}, {"fn", cm.fn}, {"tn", cm.tn}, {"fp", cm.fp}};
}

nlohmann::json row_json(const MetricsRow& row) {
  return {{"accuracy", row.accuracy},
          {"sensitivity", row.sensitivity},
          {"specificity", row.specificity},
          {"f_score", row.f_score},
          {"f_undefined", row.f_undefined}};
}

void write_fold_plans(const std::string& path, const std::vector<FoldPlan>& plans,
                      const std::vector<std::size_t>& selected) {
  nlohmann::json j;
  j["selected_window_indices"] = selected;
  j["folds"] = nlohmann::json::array();
  for (const auto& p : plans) {
    j["folds"].push_back({{"fold", p.fold_index},
                          {"test_ids", p.test_ids},
                          {"val_ids", p.val_ids},
                          {"train_ids", p.train_ids}});
  }
  std::ofstream f(path, std::ios::trunc);
  f << j.dump(1) << "\n";
}

}  // namespace

ReportTable run_experiment(const RunConfig& cfg) {
  namespace fs = std::filesystem;
  const bool persist = !cfg.out_dir.empty();
  if (persist) fs::create_directories(cfg.out_dir);

  std::vector<EventWindow> all_windows = read_window_store(cfg.windows_dir);
  std::vector<Label> all_labels;
  all_labels.reserve(all_windows.size());
  for (const auto& w : all_windows) all_labels.push_back(w.label);

  std::vector<std::size_t> selected = select_samples(all_labels, cfg.per_class, cfg.select_seed);

  Dataset data;
  data.windows.reserve(selected.size());
  for (std::size_t idx : selected) data.windows.push_back(std::move(all_windows[idx]));
  all_windows.clear();
  for (const auto& w : data.windows) data.labels.push_back(w.label);
  data.window_len = data.windows.empty() ? 0 : static_cast<long>(data.windows.front().samples.size());

  const bool want_svm = cfg.model != WhichModel::Dl;
  const bool want_dl = cfg.model != WhichModel::Svm;

  data.features.resize(static_cast<long>(data.windows.size()), FeatureVector::kSize);
  data.feature_valid.assign(data.windows.size(), false);
  if (want_svm) {
    for (std::size_t i = 0; i < data.windows.size(); ++i) {
      try {
        FeatureVector fv = extract_feature_vector(data.windows[i], cfg.pnn50_absolute);
        auto arr = fv.to_array();
        bool finite = true;
        for (double v : arr) finite = finite && std::isfinite(v);
        if (!finite) continue;
        for (int j = 0; j < FeatureVector::kSize; ++j)
          data.features(static_cast<long>(i), j) = arr[static_cast<std::size_t>(j)];
        data.feature_valid[i] = true;
      } catch (const Error&) {
        // window excluded from the SVM path; the deep model still sees it
      }
    }
  }

  std::vector<FoldPlan> plans = make_folds(data.labels, cfg.folds, cfg.fold_seed);
  if (persist) write_fold_plans(cfg.out_dir + "/fold_plans.json", plans, selected);

  std::vector<FoldOutcome> outcomes(plans.size());
  auto run_fold = [&](std::size_t f) {
    const FoldPlan& plan = plans[f];
    std::string fold_dir;
    if (persist) {
      char name[32];
      std::snprintf(name, sizeof(name), "fold_%02d", plan.fold_index);
      fold_dir = cfg.out_dir + "/" + name;
      fs::create_directories(fold_dir);
    }
    try {
      if (want_svm) run_svm_fold(data, plan, cfg.svm, plan.fold_index, fold_dir, outcomes[f]);
      if (want_dl) {
        if (cfg.nn.use_float32)
          run_dl_fold<float>(data, plan, cfg.nn, plan.fold_index, fold_dir, outcomes[f]);
        else
          run_dl_fold<double>(data, plan, cfg.nn, plan.fold_index, fold_dir, outcomes[f]);
      }
    } catch (const std::exception& e) {
      // fail marker so a partial run directory is self-describing
      if (persist) {
        std::ofstream marker(fold_dir + "/FAILED.json", std::ios::trunc);
        marker << nlohmann::json{{"fold", plan.fold_index}, {"error", e.what()}}.dump(1) << "\n";
      }
      throw;
    }
    if (persist) {
      nlohmann::json j;
      j["fold"] = plan.fold_index;
      if (want_svm) {
        j["svm"] = row_json(outcomes[f].svm_row);
        j["svm_confusion"] = confusion_json(outcomes[f].svm_cm);
        j["svm_test_excluded"] = outcomes[f].svm_test_excluded;
      }
      if (want_dl) {
        j["dl"] = row_json(outcomes[f].dl_row);
        j["dl_confusion"] = confusion_json(outcomes[f].dl_cm);
      }
      std::ofstream out(fold_dir + "/metrics.json", std::ios::trunc);
      out << j.dump(1) << "\n";
    }
  };

  if (cfg.jobs <= 1) {
    for (std::size_t f = 0; f < plans.size(); ++f) run_fold(f);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> thrown(static_cast<std::size_t>(cfg.jobs));
    for (int j = 0; j < cfg.jobs; ++j) pool.emplace_back([&, j]() {
      try {
        for (std::size_t f = static_cast<std::size_t>(j); f < plans.size();
             f += static_cast<std::size_t>(cfg.jobs))
          run_fold(f);
      } catch (...) {
        thrown[static_cast<std::size_t>(j)] = std::current_exception();
      }
    });
    for (auto& t : pool) t.join();
    for (auto& e : thrown)
      if (e) std::rethrow_exception(e);
  }

  ReportTable table;
  table.has_svm = want_svm;
  table.has_dl = want_dl;
  for (const auto& o : outcomes) {
    if (want_svm) {
      table.svm_rows.push_back(o.svm_row);
      table.svm_test_excluded.push_back(o.svm_test_excluded);
    }
    if (want_dl) table.dl_rows.push_back(o.dl_row);
  }

  std::vector<double> svm_acc, dl_acc;
  for (const auto& r : table.svm_rows) svm_acc.push_back(r.accuracy);
  for (const auto& r : table.dl_rows) dl_acc.push_back(r.accuracy);
  if (table.svm_rows.size() >= 2) {
    table.svm_agg = aggregate(table.svm_rows);
    table.svm_acc_summary = five_number_summary(svm_acc);
  }
  if (table.dl_rows.size() >= 2) {
    table.dl_agg = aggregate(table.dl_rows);
    table.dl_acc_summary = five_number_summary(dl_acc);
  }
  if (want_svm && want_dl && dl_acc.size() == svm_acc.size() && dl_acc.size() >= 2) {
    try {
      table.accuracy_t_test = paired_t_test(dl_acc, svm_acc);
      table.has_t_test = true;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateVariance) throw;
      // identical per-fold differences: the statistic is undefined, the
      // report simply omits it
    }
  }

  if (persist) {
    std::ofstream txt(cfg.out_dir + "/report.txt", std::ios::trunc);
    txt << render_report_text(table);
    std::ofstream csv(cfg.out_dir + "/report.csv", std::ios::trunc);
    csv << render_report_csv(table);
    std::ofstream summary(cfg.out_dir + "/summary.json", std::ios::trunc);
    summary << render_report_summary_json(table) << "\n";
  }
  return table;
}

namespace {

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

std::string render_report_text(const ReportTable& table) {
  std::ostringstream out;
  std::size_t folds = std::max(table.svm_rows.size(), table.dl_rows.size());
  if (folds == 0) raise(ErrorCode::IncompleteTable, "no fold rows to render");

  auto cell = [&](const std::string& s, int width) {
    std::string t = s;
    while (static_cast<int>(t.size()) < width) t = " " + t;
    return t;
  };

  out << "  K |      Acc. [%]      |  Sensitivity [%]   |  Specificity [%]   |    F-score [%]\n";
  out << "    |     SVM       DL   |     SVM       DL   |     SVM       DL   |     SVM       DL\n";
  out << "----+--------------------+--------------------+--------------------+-------------------\n";
  auto value = [&](const std::vector<MetricsRow>& rows, std::size_t f, double MetricsRow::*field) {
    return f < rows.size() ? fixed2(rows[f].*field) : std::string("-");
  };
  for (std::size_t f = 0; f < folds; ++f) {
    out << cell(std::to_string(f + 1), 3) << " |";
    for (auto field : {&MetricsRow::accuracy, &MetricsRow::sensitivity, &MetricsRow::specificity,
                       &MetricsRow::f_score}) {
      out << cell(value(table.svm_rows, f, field), 8) << " " << cell(value(table.dl_rows, f, field), 8)
          << "   |";
    }
    out.seekp(-1, std::ios_base::cur);
    out << "\n";
  }
  out << "----+--------------------+--------------------+--------------------+-------------------\n";
  auto agg_line = [&](const char* name, const MetricsRow& svm_v, const MetricsRow& dl_v) {
    out << cell(name, 3) << " |";
    for (auto field : {&MetricsRow::accuracy, &MetricsRow::sensitivity, &MetricsRow::specificity,
                       &MetricsRow::f_score}) {
      out << cell(table.has_svm ? fixed2(svm_v.*field) : "-", 8) << " "
          << cell(table.has_dl ? fixed2(dl_v.*field) : "-", 8) << "   |";
    }
    out.seekp(-1, std::ios_base::cur);
    out << "\n";
  };
  if (table.has_svm || table.has_dl) {
    agg_line("avg", table.svm_agg.mean, table.dl_agg.mean);
    agg_line("sd", table.svm_agg.sd, table.dl_agg.sd);
  }
  if (table.has_t_test) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "paired t-test on accuracies: t = %.3f, df = %d, p = %.3g\n",
                  table.accuracy_t_test.t, table.accuracy_t_test.df, table.accuracy_t_test.p_two_tailed);
    out << buf;
  }
  return out.str();
}

std::string render_report_csv(const ReportTable& table) {
  std::ostringstream out;
  out << "model,fold,accuracy,sensitivity,specificity,f_score\n";
  char buf[160];
  auto emit = [&](const char* model, const std::vector<MetricsRow>& rows) {
    for (std::size_t f = 0; f < rows.size(); ++f) {
      std::snprintf(buf, sizeof(buf), "%s,%zu,%.6f,%.6f,%.6f,%.6f\n", model, f + 1, rows[f].accuracy,
                    rows[f].sensitivity, rows[f].specificity, rows[f].f_score);
      out << buf;
    }
  };
  emit("svm", table.svm_rows);
  emit("dl", table.dl_rows);
  auto emit_agg = [&](const char* model, const MetricsAggregate& agg, bool present) {
    if (!present) return;
    std::snprintf(buf, sizeof(buf), "%s,mean,%.6f,%.6f,%.6f,%.6f\n", model, agg.mean.accuracy,
                  agg.mean.sensitivity, agg.mean.specificity, agg.mean.f_score);
    out << buf;
    std::snprintf(buf, sizeof(buf), "%s,sd,%.6f,%.6f,%.6f,%.6f\n", model, agg.sd.accuracy,
                  agg.sd.sensitivity, agg.sd.specificity, agg.sd.f_score);
    out << buf;
  };
  emit_agg("svm", table.svm_agg, table.has_svm && table.svm_rows.size() >= 2);
  emit_agg("dl", table.dl_agg, table.has_dl && table.dl_rows.size() >= 2);
  if (table.has_t_test) {
    std::snprintf(buf, sizeof(buf), "t_test,accuracy,%.6f,%d,%.6g,\n", table.accuracy_t_test.t,
                  table.accuracy_t_test.df, table.accuracy_t_test.p_two_tailed);
    out << buf;
  }
  return out.str();
}

std::string render_report_summary_json(const ReportTable& table) {
  auto summary_json = [](const FiveNumberSummary& s) {
    return nlohmann::json{{"min", s.min}, {"q1", s.q1}, {"median", s.median}, {"q3", s.q3}, {"max", s.max}};
  };
  nlohmann::json j;
  if (table.has_svm && table.svm_rows.size() >= 2) {
    j["svm"] = {{"accuracy_mean", table.svm_agg.mean.accuracy},
                {"accuracy_sd", table.svm_agg.sd.accuracy},
                {"accuracy_boxplot", summary_json(table.svm_acc_summary)}};
  }
  if (table.has_dl && table.dl_rows.size() >= 2) {
    j["dl"] = {{"accuracy_mean", table.dl_agg.mean.accuracy},
               {"accuracy_sd", table.dl_agg.sd.accuracy},
               {"accuracy_boxplot", summary_json(table.dl_acc_summary)}};
  }
  if (table.has_t_test) {
    j["t_test"] = {{"t", table.accuracy_t_test.t},
                   {"df", table.accuracy_t_test.df},
                   {"p_two_tailed", table.accuracy_t_test.p_two_tailed}};
  }
  return j.dump(1);
}

ReportTable load_report_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::MissingFile, "cannot open " + path);

  ReportTable table;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string model, fold, a, s, sp, f1;
    std::getline(ss, model, ',');
    std::getline(ss, fold, ',');
    std::getline(ss, a, ',');
    std::getline(ss, s, ',');
    std::getline(ss, sp, ',');
    std::getline(ss, f1, ',');
    if (model == "t_test") {
      table.has_t_test = true;
      table.accuracy_t_test.t = std::stod(a);
      table.accuracy_t_test.df = std::stoi(s);
      table.accuracy_t_test.p_two_tailed = std::stod(sp);
      continue;
    }
    if (fold == "mean" || fold == "sd") continue;  // recomputed below
    MetricsRow row;
    row.accuracy = std::stod(a);
    row.sensitivity = std::stod(s);
    row.specificity = std::stod(sp);
    row.f_score = std::stod(f1);
    if (model == "svm") {
      table.svm_rows.push_back(row);
      table.has_svm = true;
    } else if (model == "dl") {
      table.dl_rows.push_back(row);
      table.has_dl = true;
    }
  }
  if (!table.has_svm && !table.has_dl) raise(ErrorCode::IncompleteTable, "report has no fold rows");

  std::vector<double> svm_acc, dl_acc;
  for (const auto& r : table.svm_rows) svm_acc.push_back(r.accuracy);
  for (const auto& r : table.dl_rows) dl_acc.push_back(r.accuracy);
  if (table.svm_rows.size() >= 2) {
    table.svm_agg = aggregate(table.svm_rows);
    table.svm_acc_summary = five_number_summary(svm_acc);
  }
  if (table.dl_rows.size() >= 2) {
    table.dl_agg = aggregate(table.dl_rows);
    table.dl_acc_summary = five_number_summary(dl_acc);
  }
  return table;
}

}  // namespace osa
