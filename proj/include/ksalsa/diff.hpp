#pragma once

#include <functional>

#include "ksalsa/tensor.hpp"

namespace ksalsa {

// A differentiable map with an explicit vector-Jacobian product. There is no
// tape; callers compose vjp calls by hand in reverse order.
class DiffOp {
 public:
  virtual ~DiffOp() = default;

  virtual Tensor forward(const Tensor& input) const = 0;
  // Returns J(input)^T * cotangent, shaped like input.
  virtual Tensor vjp(const Tensor& input, const Tensor& cotangent) const = 0;
};

using ScalarFn = std::function<double(const Tensor&)>;

// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h for every i.
// Throws NumericError naming the coordinate if f is non-finite there.
Tensor finite_diff_gradient(const ScalarFn& f, const Tensor& x, double h = 1e-5);

// Gradient of <op(x), cotangent> by finite differences, for auditing vjp.
Tensor finite_diff_vjp(const DiffOp& op, const Tensor& x, const Tensor& cotangent,
                       double h = 1e-5);

}  // namespace ksalsa
