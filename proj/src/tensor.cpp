#include "slimtag/tensor.hpp"

#include <atomic>
#include <cmath>
#include <sstream>

namespace slimtag {

namespace {
std::atomic<Precision> g_precision{Precision::F32};
}

Precision precision() { return g_precision.load(std::memory_order_relaxed); }
void set_precision(Precision p) { g_precision.store(p, std::memory_order_relaxed); }

double round_to_mode(double x) {
  return precision() == Precision::F32 ? static_cast<double>(static_cast<float>(x)) : x;
}

int64_t shape_numel(const std::vector<int>& shape) {
  int64_t n = 1;
  for (int d : shape) {
    if (d < 0) throw DimensionError("negative dimension in shape");
    n *= d;
  }
  return n;
}

Tensor Tensor::zeros(std::vector<int> shape) {
  Tensor t;
  t.shape_ = std::move(shape);
  t.data_.assign(static_cast<size_t>(shape_numel(t.shape_)), 0.0);
  t.init_strides();
  return t;
}

Tensor Tensor::full(std::vector<int> shape, double value) {
  Tensor t = zeros(std::move(shape));
  double v = round_to_mode(value);
  for (auto& x : t.data_) x = v;
  return t;
}

Tensor Tensor::from(std::vector<int> shape, std::vector<double> values) {
  if (shape_numel(shape) != static_cast<int64_t>(values.size()))
    throw DimensionError("element count does not match shape");
  Tensor t;
  t.shape_ = std::move(shape);
  t.data_ = std::move(values);
  t.init_strides();
  t.round_to_mode_inplace();
  return t;
}

Tensor Tensor::scalar(double value) { return from({1}, {value}); }

void Tensor::init_strides() {
  cols_ = shape_.empty() ? 0 : shape_.back();
}

int Tensor::rows() const {
  if (ndim() != 2) throw DimensionError("rows(): tensor is not 2-D, shape " + shape_str());
  return shape_[0];
}

int Tensor::cols() const {
  if (ndim() != 2) throw DimensionError("cols(): tensor is not 2-D, shape " + shape_str());
  return shape_[1];
}

double Tensor::item() const {
  if (!is_scalar()) throw DimensionError("item(): tensor is not scalar, shape " + shape_str());
  return data_[0];
}

void Tensor::round_to_mode_inplace() {
  if (precision() == Precision::F32) {
    for (auto& x : data_) x = static_cast<double>(static_cast<float>(x));
  }
}

void Tensor::check_finite(const char* what) const {
  for (double x : data_) {
    if (!std::isfinite(x))
      throw NumericError(std::string("non-finite value produced by ") + what);
  }
}

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < shape_.size(); ++i) {
    if (i) os << ", ";
    os << shape_[i];
  }
  os << ")";
  return os.str();
}

}  // namespace slimtag
