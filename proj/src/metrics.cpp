#include "osa/metrics.hpp"

#include <cmath>
#include <tuple>

#include "osa/errors.hpp"

namespace osa {

MetricsRow metrics_from_confusion(const ConfusionMatrix& cm) {
  if (cm.tp < 0 || cm.fn < 0 || cm.tn < 0 || cm.fp < 0)
    raise(ErrorCode::BadArguments, "confusion counts must be nonnegative");
  if (cm.tp + cm.fn <= 0) raise(ErrorCode::EmptyClass, "no positive samples in the test set");
  if (cm.tn + cm.fp <= 0) raise(ErrorCode::EmptyClass, "no negative samples in the test set");

  MetricsRow row;
  row.accuracy = 100.0 * static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
  row.sensitivity = 100.0 * static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn);
  row.specificity = 100.0 * static_cast<double>(cm.tn) / static_cast<double>(cm.tn + cm.fp);
  if (cm.tp + cm.fp == 0) {
    row.f_score = 0.0;
    row.f_undefined = true;
  } else {
    double precision = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fp);
    double sens = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn);
    row.f_score = precision + sens > 0.0 ? 100.0 * 2.0 * precision * sens / (precision + sens) : 0.0;
  }
  return row;
}

MetricsAggregate aggregate(const std::vector<MetricsRow>& rows) {
  if (rows.size() < 2) raise(ErrorCode::TooShort, "need at least 2 rows to aggregate");
  const double n = static_cast<double>(rows.size());

  auto stats = [&](auto field) {
    double mean = 0.0;
    for (const auto& r : rows) mean += field(r);
    mean /= n;
    double var = 0.0;
    for (const auto& r : rows) var += (field(r) - mean) * (field(r) - mean);
    var /= n - 1.0;
    return std::pair<double, double>(mean, std::sqrt(var));
  };

  MetricsAggregate agg;
  std::tie(agg.mean.accuracy, agg.sd.accuracy) = stats([](const MetricsRow& r) { return r.accuracy; });
  std::tie(agg.mean.sensitivity, agg.sd.sensitivity) =
      stats([](const MetricsRow& r) { return r.sensitivity; });
  std::tie(agg.mean.specificity, agg.sd.specificity) =
      stats([](const MetricsRow& r) { return r.specificity; });
  std::tie(agg.mean.f_score, agg.sd.f_score) = stats([](const MetricsRow& r) { return r.f_score; });
  return agg;
}

}  // namespace osa
