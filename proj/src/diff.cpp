#include "ksalsa/diff.hpp"

#include <cmath>

#include "ksalsa/errors.hpp"

namespace ksalsa {

Tensor finite_diff_gradient(const ScalarFn& f, const Tensor& x, double h) {
  if (!(h > 0.0)) throw ArgumentError("finite_diff_gradient: h must be positive");
  std::vector<double> probe = x.vector();
  std::vector<double> grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = probe[i];
    probe[i] = saved + h;
    const double plus = f(Tensor(x.dims(), probe));
    probe[i] = saved - h;
    const double minus = f(Tensor(x.dims(), probe));
    probe[i] = saved;
    if (!std::isfinite(plus) || !std::isfinite(minus)) {
      throw NumericError("finite_diff_gradient: non-finite function value at coordinate " +
                         std::to_string(i));
    }
    grad[i] = (plus - minus) / (2.0 * h);
  }
  return Tensor(x.dims(), std::move(grad));
}

Tensor finite_diff_vjp(const DiffOp& op, const Tensor& x, const Tensor& cotangent, double h) {
  return finite_diff_gradient(
      [&](const Tensor& p) { return dot(op.forward(p).values(), cotangent.values()); }, x, h);
}

}  // namespace ksalsa
