#ifndef OSA_TESTS_GRAD_CHECK_HPP
#define OSA_TESTS_GRAD_CHECK_HPP

#include <cmath>
#include <functional>

#include "osa/tensor.hpp"

namespace osa::testutil {

inline double rel_err(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(1e-6, std::abs(analytic) + std::abs(numeric));
}

// Central finite differences of `loss` wrt every element of `param`,
// compared against `analytic`; returns the max relative error.
template <typename S>
double max_grad_error(Tensor<S>& param, const Tensor<S>& analytic,
                      const std::function<double()>& loss, double h = 1e-3) {
  double worst = 0.0;
  for (long i = 0; i < param.numel(); ++i) {
    S saved = param.data[i];
    param.data[i] = saved + static_cast<S>(h);
    double up = loss();
    param.data[i] = saved - static_cast<S>(h);
    double down = loss();
    param.data[i] = saved;
    double numeric = (up - down) / (2.0 * h);
    worst = std::max(worst, rel_err(static_cast<double>(analytic.data[i]), numeric));
  }
  return worst;
}

}  // namespace osa::testutil

#endif
