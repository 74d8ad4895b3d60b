#include "ksalsa/adam.hpp"

#include <cmath>

#include "ksalsa/errors.hpp"

namespace ksalsa {

void validate(const AdamOptions& o) {
  if (!(o.lr > 0.0) || !std::isfinite(o.lr)) throw ArgumentError("adam: lr must be positive");
  if (!(o.beta1 >= 0.0 && o.beta1 < 1.0)) throw ArgumentError("adam: beta1 must be in [0, 1)");
  if (!(o.beta2 >= 0.0 && o.beta2 < 1.0)) throw ArgumentError("adam: beta2 must be in [0, 1)");
  if (!(o.eps > 0.0)) throw ArgumentError("adam: eps must be positive");
}

AdamState AdamState::fresh(const Tensor::Dims& dims) {
  return {Tensor::zeros(dims), Tensor::zeros(dims), 0};
}

AdamStep adam_step(const AdamState& state, const Tensor& grad, const AdamOptions& o) {
  validate(o);
  require_same_shape(state.m, grad, "adam_step");
  require_same_shape(state.v, grad, "adam_step");
  const std::size_t n = grad.size();
  std::vector<double> m(n), v(n), update(n);
  const long t = state.step + 1;
  const double m_corr = 1.0 - std::pow(o.beta1, double(t));
  const double v_corr = 1.0 - std::pow(o.beta2, double(t));
  for (std::size_t i = 0; i < n; ++i) {
    const double g = grad[i];
    m[i] = o.beta1 * state.m[i] + (1.0 - o.beta1) * g;
    v[i] = o.beta2 * state.v[i] + (1.0 - o.beta2) * g * g;
    const double m_hat = m[i] / m_corr;
    const double v_hat = v[i] / v_corr;
    update[i] = -o.lr * m_hat / (std::sqrt(v_hat) + o.eps);
  }
  const auto& dims = grad.dims();
  return {{Tensor(dims, std::move(m)), Tensor(dims, std::move(v)), t},
          Tensor(dims, std::move(update))};
}

}  // namespace ksalsa
