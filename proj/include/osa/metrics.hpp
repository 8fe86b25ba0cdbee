#ifndef OSA_METRICS_HPP
#define OSA_METRICS_HPP

#include <vector>

namespace osa {

// Severe is the positive class throughout.
struct ConfusionMatrix {
  long tp = 0, fn = 0, tn = 0, fp = 0;

  long total() const { return tp + fn + tn + fp; }
};

struct MetricsRow {
  double accuracy = 0.0;     // percent
  double sensitivity = 0.0;  // percent, tp / (tp + fn)
  double specificity = 0.0;  // percent, tn / (tn + fp)
  double f_score = 0.0;      // percent, harmonic mean of precision and sensitivity
  bool f_undefined = false;  // tp + fp == 0; f_score reported as 0
};

// Errors: EmptyClass when either class is missing from the test set.
MetricsRow metrics_from_confusion(const ConfusionMatrix& cm);

struct MetricsAggregate {
  MetricsRow mean;
  MetricsRow sd;  // sample SD, n-1
};

// Errors: TooShort (< 2 rows).
MetricsAggregate aggregate(const std::vector<MetricsRow>& rows);

}  // namespace osa

#endif  // OSA_METRICS_HPP
