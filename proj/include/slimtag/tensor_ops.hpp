#pragma once

#include <cstdint>
#include <vector>

#include "slimtag/rng.hpp"
#include "slimtag/tensor.hpp"

namespace slimtag {

// Raw (non-differentiable) tensor math. The tape ops in ops.hpp wrap these
// for the training path; inference and the CRF recursions use them directly.

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul_scalar(const Tensor& a, double c);
// x: [n x d], bias: [d]; adds bias[j] to every row.
Tensor bias_add(const Tensor& x, const Tensor& bias);
Tensor gelu(const Tensor& x);
// Row-wise layer norm over the last dimension. Optionally saves the
// normalized values and 1/sigma for the backward pass.
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                  double eps, Tensor* save_xhat = nullptr,
                  Tensor* save_inv_sigma = nullptr);
Tensor softmax_rows(const Tensor& x);

// Numerically stable log-softmax along `axis` (1-D: axis 0; 2-D: 0 or 1).
Tensor log_softmax(const Tensor& x, int axis);
Tensor log_softmax_rows(const Tensor& x);

// log sum_i exp(x_i) with max-shift; exact on constant vectors.
double log_sum_exp(const double* x, int64_t n);
double log_sum_exp(const Tensor& x);
double log_sum_exp(const std::vector<double>& x);

// Gathers rows of `table` by id: out[i, :] = table[ids[i], :].
Tensor embedding_rows(const Tensor& table, const std::vector<int>& ids);
Tensor slice_cols(const Tensor& x, int c0, int c1);
Tensor concat_cols(const std::vector<Tensor>& parts);
double sum_all(const Tensor& x);

Tensor random_normal(std::vector<int> shape, Rng& rng, double stddev);
Tensor random_uniform(std::vector<int> shape, Rng& rng, double lo, double hi);

}  // namespace slimtag
