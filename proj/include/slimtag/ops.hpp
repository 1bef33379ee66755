#pragma once

#include <vector>

#include "slimtag/tape.hpp"
#include "slimtag/tensor_ops.hpp"

namespace slimtag {

// Differentiable wrappers over the raw tensor kernels. Every op here has a
// backward rule; the numerics tests sweep each one against central finite
// differences in F64 mode.

VarPtr vmatmul(Tape& t, const VarPtr& a, const VarPtr& b);
VarPtr vtranspose(Tape& t, const VarPtr& a);
VarPtr vadd(Tape& t, const VarPtr& a, const VarPtr& b);
VarPtr vbias_add(Tape& t, const VarPtr& x, const VarPtr& bias);
VarPtr vmul_scalar(Tape& t, const VarPtr& x, double c);
VarPtr vgelu(Tape& t, const VarPtr& x);
VarPtr vlayer_norm(Tape& t, const VarPtr& x, const VarPtr& gamma,
                   const VarPtr& beta, double eps = 1e-5);
VarPtr vsoftmax_rows(Tape& t, const VarPtr& x);
VarPtr vlog_softmax_rows(Tape& t, const VarPtr& x);
VarPtr vembedding(Tape& t, const VarPtr& table, const std::vector<int>& ids);
VarPtr vslice_cols(Tape& t, const VarPtr& x, int c0, int c1);
VarPtr vconcat_cols(Tape& t, const std::vector<VarPtr>& parts);
VarPtr vsum(Tape& t, const VarPtr& x);
// out[i] = x[i, ids[i]]; ids must be valid column indices.
VarPtr vgather_cols(Tape& t, const VarPtr& x, const std::vector<int>& ids);
// Scalar dot product with a constant weight vector.
VarPtr vdot_const(Tape& t, const VarPtr& x, const std::vector<double>& w);
// Inverted dropout; identity when rate == 0.
VarPtr vdropout(Tape& t, const VarPtr& x, double rate, Rng& rng);

// Scalar KL(P || Q) over rows with row_mask[i] == 1, where P is a constant
// probability tensor and logq holds log Q. Gradient flows into logq only.
VarPtr vkl_vs_const(Tape& t, const Tensor& p, const VarPtr& logq,
                    const std::vector<uint8_t>& row_mask);

// Reverse sweep entry point; asserts a scalar loss.
void backward(const VarPtr& loss, Tape& tape);

}  // namespace slimtag
