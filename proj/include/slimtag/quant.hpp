#pragma once

#include "slimtag/quant_types.hpp"
#include "slimtag/tensor.hpp"

namespace slimtag {

struct EncoderModel;

// Per-tensor symmetric INT8 quantization: values = round(W/s) clamped to
// [-127, 127] with s = max|W|/127 (s = 1 for all-zero input). Rounding is
// half-away-from-zero.
QuantizedTensor quantize_tensor(const Tensor& w);

// Same rule applied at runtime to an activation tensor.
QuantizedTensor quantize_activations(const Tensor& x);

Tensor dequantize(const QuantizedTensor& q);

// Integer matmul with int32 accumulation, rescaled by the two scales.
// Overflow is impossible for inner dimensions up to 2^16; larger inputs are
// rejected.
Tensor qmatmul(const QuantizedTensor& a, const QuantizedTensor& w);

// x [n x in] against an INT8 weight, dynamic activation quantization, bias
// kept in full precision.
Tensor qlinear(const Tensor& x, const QuantizedTensor& w, const Tensor& bias);

struct QuantReport {
  int64_t converted_params = 0;
  int64_t retained_params = 0;
  int64_t converted_tensors = 0;
  // Serialized payload bytes of converted tensors before/after.
  int64_t fp32_bytes = 0;
  int64_t int8_bytes = 0;
};

// Replaces the weights of every fully-connected layer with INT8 tensors;
// biases, embeddings and norm parameters stay full precision. Refuses to
// run twice.
QuantReport quantize_model(EncoderModel& model);

}  // namespace slimtag
