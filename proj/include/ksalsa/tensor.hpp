#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace ksalsa {

// Dense row-major array of doubles. Values are checked for finiteness on
// construction and cannot be modified afterwards; build a std::vector and
// wrap it to produce a new tensor.
class Tensor {
 public:
  using Dims = std::vector<std::size_t>;

  Tensor() = default;
  Tensor(Dims dims, std::vector<double> data);

  static Tensor zeros(Dims dims);
  static Tensor filled(Dims dims, double value);

  const Dims& dims() const { return dims_; }
  std::size_t rank() const { return dims_.size(); }
  std::size_t dim(std::size_t axis) const { return dims_.at(axis); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<const double> values() const { return data_; }
  const std::vector<double>& vector() const { return data_; }
  double operator[](std::size_t i) const { return data_[i]; }

  bool same_shape(const Tensor& other) const { return dims_ == other.dims_; }
  Tensor reshaped(Dims dims) const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Dims dims_;
  std::vector<double> data_;
};

std::size_t element_count(const Tensor::Dims& dims);
std::string dims_to_string(const Tensor::Dims& dims);

// Throws ArgumentError unless a and b have identical dims.
void require_same_shape(const Tensor& a, const Tensor& b, const char* what);

double dot(std::span<const double> a, std::span<const double> b);
double squared_norm(std::span<const double> a);

Tensor operator+(const Tensor& a, const Tensor& b);
Tensor operator-(const Tensor& a, const Tensor& b);
Tensor operator*(double s, const Tensor& a);

// ||a - b||_2 / max(||b||_2, tiny); b is the reference.
double relative_l2_error(const Tensor& a, const Tensor& reference);

}  // namespace ksalsa
