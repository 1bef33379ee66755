#pragma once

#include <cstdint>
#include <vector>

#include "slimtag/tensor.hpp"

namespace slimtag {

// INT8 values with a per-tensor scale: dequantized value = scale * value.
// scale = max|W| / 127, or 1 for an all-zero tensor.
struct QuantizedTensor {
  std::vector<int8_t> values;
  double scale = 1.0;
  std::vector<int> shape;

  int64_t size() const { return static_cast<int64_t>(values.size()); }
  int rows() const { return shape.at(0); }
  int cols() const { return shape.at(1); }
};

}  // namespace slimtag
