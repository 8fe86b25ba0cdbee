#ifndef OSA_RMSPROP_HPP
#define OSA_RMSPROP_HPP

#include "osa/tensor.hpp"

namespace osa {

// Root-mean-square propagation: a leaky accumulator of squared gradients
// scales each coordinate's step.
template <typename S>
struct RmsPropState {
  Tensor<S> v;  // same shape as the parameter, nonnegative

  explicit RmsPropState(const std::vector<long>& shape = {}) : v(shape) {}
};

// v <- rho v + (1 - rho) g^2 ; param <- param - lr g / (sqrt(v) + eps)
template <typename S>
void rmsprop_step(Tensor<S>& param, const Tensor<S>& grad, RmsPropState<S>& state, double lr,
                  double rho, double eps) {
  if (!param.same_shape(grad) || !param.same_shape(state.v))
    raise(ErrorCode::ShapeMismatch, "rmsprop_step shape mismatch");
  const S lr_s = static_cast<S>(lr), rho_s = static_cast<S>(rho), eps_s = static_cast<S>(eps);
  for (long i = 0; i < param.numel(); ++i) {
    S g = grad.data[i];
    state.v.data[i] = rho_s * state.v.data[i] + (S(1) - rho_s) * g * g;
    param.data[i] -= lr_s * g / (std::sqrt(state.v.data[i]) + eps_s);
  }
}

}  // namespace osa

#endif  // OSA_RMSPROP_HPP
