#include "ksalsa/tensor.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <utility>

#include "ksalsa/errors.hpp"

namespace ksalsa {

std::size_t element_count(const Tensor::Dims& dims) {
  if (dims.empty()) return 0;
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1},
                         std::multiplies<>());
}

std::string dims_to_string(const Tensor::Dims& dims) {
  std::ostringstream out;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) out << "x";
    out << dims[i];
  }
  return out.str();
}

Tensor::Tensor(Dims dims, std::vector<double> data)
    : dims_(std::move(dims)), data_(std::move(data)) {
  for (std::size_t d : dims_) {
    if (d == 0) throw ArgumentError("tensor dims must be positive, got " + dims_to_string(dims_));
  }
  if (element_count(dims_) != data_.size()) {
    throw ArgumentError("tensor of dims " + dims_to_string(dims_) + " needs " +
                        std::to_string(element_count(dims_)) + " values, got " +
                        std::to_string(data_.size()));
  }
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      throw NumericError("non-finite tensor value at flat index " + std::to_string(i));
    }
  }
}

Tensor Tensor::zeros(Dims dims) { return filled(std::move(dims), 0.0); }

Tensor Tensor::filled(Dims dims, double value) {
  std::vector<double> data(element_count(dims), value);
  return Tensor(std::move(dims), std::move(data));
}

Tensor Tensor::reshaped(Dims dims) const {
  if (element_count(dims) != size()) {
    throw ArgumentError("cannot reshape " + dims_to_string(dims_) + " to " + dims_to_string(dims));
  }
  Tensor out;
  out.dims_ = std::move(dims);
  out.data_ = data_;
  return out;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (!a.same_shape(b)) {
    throw ArgumentError(std::string(what) + ": shape mismatch " + dims_to_string(a.dims()) +
                        " vs " + dims_to_string(b.dims()));
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double squared_norm(std::span<const double> a) { return dot(a, a); }

Tensor operator+(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "tensor add");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i];
  return Tensor(a.dims(), std::move(out));
}

Tensor operator-(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "tensor subtract");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] - b[i];
  return Tensor(a.dims(), std::move(out));
}

Tensor operator*(double s, const Tensor& a) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = s * a[i];
  return Tensor(a.dims(), std::move(out));
}

double relative_l2_error(const Tensor& a, const Tensor& reference) {
  require_same_shape(a, reference, "relative_l2_error");
  double diff = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - reference[i];
    diff += d * d;
  }
  const double ref = std::sqrt(squared_norm(reference.values()));
  return std::sqrt(diff) / std::max(ref, 1e-300);
}

}  // namespace ksalsa
