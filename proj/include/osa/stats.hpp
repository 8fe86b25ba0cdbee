#ifndef OSA_STATS_HPP
#define OSA_STATS_HPP

#include <span>

namespace osa {

struct TTestResult {
  double t = 0.0;
  int df = 0;
  double p_two_tailed = 0.0;
};

// Paired-sample t-test: d = a - b, t = mean(d) / (sd(d)/sqrt(n)), df = n-1;
// the two-tailed p-value comes from the regularized incomplete beta
// evaluation of the t distribution.
// Errors: LengthMismatch, TooShort (n < 2), DegenerateVariance.
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b);

// Regularized incomplete beta function I_x(a, b), continued-fraction
// evaluation; exposed for the statistics tests.
double regularized_incomplete_beta(double a, double b, double x);

struct FiveNumberSummary {
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
};

// Quartiles by linear interpolation at rank (n-1)p.
// Errors: EmptySeries.
FiveNumberSummary five_number_summary(std::span<const double> values);

}  // namespace osa

#endif  // OSA_STATS_HPP
