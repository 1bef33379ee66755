#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "slimtag/error.hpp"

namespace slimtag {

// Storage/arithmetic width applied by every tensor operation. F32 is the
// deployment default; F64 is used by gradient checks and enumeration oracles.
enum class Precision { F32, F64 };

Precision precision();
void set_precision(Precision p);

// RAII precision switch for tests.
struct PrecisionGuard {
  explicit PrecisionGuard(Precision p) : saved_(precision()) { set_precision(p); }
  ~PrecisionGuard() { set_precision(saved_); }
  PrecisionGuard(const PrecisionGuard&) = delete;
  PrecisionGuard& operator=(const PrecisionGuard&) = delete;

 private:
  Precision saved_;
};

// Rounds a value through float when the global mode is F32.
double round_to_mode(double x);

// Dense row-major tensor. Values are held as doubles; in F32 mode every
// public operation rounds its output through float so the representable set
// matches a float32 deployment. Copies are deep (value semantics).
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(std::vector<int> shape);
  static Tensor full(std::vector<int> shape, double value);
  static Tensor from(std::vector<int> shape, std::vector<double> values);
  static Tensor scalar(double value);

  const std::vector<int>& shape() const { return shape_; }
  int dim(int i) const { return shape_.at(static_cast<size_t>(i)); }
  int ndim() const { return static_cast<int>(shape_.size()); }
  int64_t size() const { return static_cast<int64_t>(data_.size()); }
  bool empty() const { return data_.empty(); }
  bool is_scalar() const { return size() == 1; }

  // 2-D accessors.
  int rows() const;
  int cols() const;
  double at(int r, int c) const { return data_[static_cast<size_t>(r) * cols_ + c]; }
  double& at(int r, int c) { return data_[static_cast<size_t>(r) * cols_ + c]; }

  double operator[](int64_t i) const { return data_[static_cast<size_t>(i)]; }
  double& operator[](int64_t i) { return data_[static_cast<size_t>(i)]; }

  const double* data() const { return data_.data(); }
  double* data() { return data_.data(); }
  const std::vector<double>& values() const { return data_; }

  double item() const;

  // Applies the current precision mode to every element in place.
  void round_to_mode_inplace();

  // Throws NumericError naming `what` if any element is NaN or Inf.
  void check_finite(const char* what) const;

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  std::string shape_str() const;

 private:
  std::vector<int> shape_;
  std::vector<double> data_;
  int cols_ = 0;  // cached last-dim stride for 2-D at()

  void init_strides();
};

int64_t shape_numel(const std::vector<int>& shape);

}  // namespace slimtag
