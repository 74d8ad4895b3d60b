#pragma once

#include "ksalsa/tensor.hpp"

namespace ksalsa {

// Defaults follow the averaging setup: lr 0.1, beta1 0.9, beta2 0.99.
struct AdamOptions {
  double lr = 0.1;
  double beta1 = 0.9;
  double beta2 = 0.99;
  double eps = 1e-8;
};

void validate(const AdamOptions& options);

struct AdamState {
  Tensor m;
  Tensor v;
  long step = 0;

  static AdamState fresh(const Tensor::Dims& dims);
};

struct AdamStep {
  AdamState state;
  Tensor update;  // add to the parameters
};

// m <- b1 m + (1-b1) g;  v <- b2 v + (1-b2) g^2;
// update = -lr * mhat / (sqrt(vhat) + eps) with bias-corrected mhat, vhat.
AdamStep adam_step(const AdamState& state, const Tensor& grad, const AdamOptions& options);

}  // namespace ksalsa
