#include "slimtag/tensor_ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace slimtag {

namespace {

constexpr double kGeluCoeff = 0.044715;
const double kSqrt2OverPi = std::sqrt(2.0 / 3.14159265358979323846);

void require_2d(const Tensor& t, const char* op) {
  if (t.ndim() != 2) throw DimensionError(std::string(op) + ": expected 2-D tensor, got " + t.shape_str());
}

// C[m x n] = A[m x k] * B[k x n] in float32 arithmetic.
Tensor matmul_f32(const Tensor& a, const Tensor& b) {
  const int m = a.rows(), k = a.cols(), n = b.cols();
  std::vector<float> af(static_cast<size_t>(m) * k), bf(static_cast<size_t>(k) * n);
  for (int64_t i = 0; i < a.size(); ++i) af[static_cast<size_t>(i)] = static_cast<float>(a[i]);
  for (int64_t i = 0; i < b.size(); ++i) bf[static_cast<size_t>(i)] = static_cast<float>(b[i]);
  std::vector<float> cf(static_cast<size_t>(m) * n, 0.0f);
  for (int i = 0; i < m; ++i) {
    const float* arow = af.data() + static_cast<size_t>(i) * k;
    float* crow = cf.data() + static_cast<size_t>(i) * n;
    for (int kk = 0; kk < k; ++kk) {
      const float av = arow[kk];
      const float* brow = bf.data() + static_cast<size_t>(kk) * n;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
  Tensor c = Tensor::zeros({m, n});
  for (int64_t i = 0; i < c.size(); ++i) c[i] = static_cast<double>(cf[static_cast<size_t>(i)]);
  return c;
}

Tensor matmul_f64(const Tensor& a, const Tensor& b) {
  const int m = a.rows(), k = a.cols(), n = b.cols();
  Tensor c = Tensor::zeros({m, n});
  for (int i = 0; i < m; ++i) {
    const double* arow = a.data() + static_cast<size_t>(i) * k;
    double* crow = c.data() + static_cast<size_t>(i) * n;
    for (int kk = 0; kk < k; ++kk) {
      const double av = arow[kk];
      const double* brow = b.data() + static_cast<size_t>(kk) * n;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
  return c;
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_2d(a, "matmul");
  require_2d(b, "matmul");
  if (a.cols() != b.rows())
    throw DimensionError("matmul: inner dimensions disagree, " + a.shape_str() + " x " + b.shape_str());
  Tensor c = precision() == Precision::F32 ? matmul_f32(a, b) : matmul_f64(a, b);
  c.check_finite("matmul");
  return c;
}

Tensor transpose(const Tensor& a) {
  require_2d(a, "transpose");
  const int m = a.rows(), n = a.cols();
  Tensor t = Tensor::zeros({n, m});
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) t.at(j, i) = a.at(i, j);
  return t;
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b))
    throw DimensionError("add: shape mismatch " + a.shape_str() + " vs " + b.shape_str());
  Tensor c = a;
  for (int64_t i = 0; i < c.size(); ++i) c[i] = round_to_mode(c[i] + b[i]);
  c.check_finite("add");
  return c;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b))
    throw DimensionError("sub: shape mismatch " + a.shape_str() + " vs " + b.shape_str());
  Tensor c = a;
  for (int64_t i = 0; i < c.size(); ++i) c[i] = round_to_mode(c[i] - b[i]);
  c.check_finite("sub");
  return c;
}

Tensor mul_scalar(const Tensor& a, double c) {
  Tensor out = a;
  for (int64_t i = 0; i < out.size(); ++i) out[i] = round_to_mode(out[i] * c);
  out.check_finite("mul_scalar");
  return out;
}

Tensor bias_add(const Tensor& x, const Tensor& bias) {
  require_2d(x, "bias_add");
  if (bias.ndim() != 1 || bias.dim(0) != x.cols())
    throw DimensionError("bias_add: bias shape " + bias.shape_str() + " does not match " + x.shape_str());
  Tensor out = x;
  const int n = x.rows(), d = x.cols();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) out.at(i, j) = round_to_mode(out.at(i, j) + bias[j]);
  out.check_finite("bias_add");
  return out;
}

Tensor gelu(const Tensor& x) {
  Tensor out = x;
  for (int64_t i = 0; i < out.size(); ++i) {
    const double v = out[i];
    const double u = kSqrt2OverPi * (v + kGeluCoeff * v * v * v);
    out[i] = round_to_mode(0.5 * v * (1.0 + std::tanh(u)));
  }
  out.check_finite("gelu");
  return out;
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                  double eps, Tensor* save_xhat, Tensor* save_inv_sigma) {
  require_2d(x, "layer_norm");
  const int n = x.rows(), d = x.cols();
  if (gamma.size() != d || beta.size() != d)
    throw DimensionError("layer_norm: parameter shape does not match feature dim");
  Tensor out = Tensor::zeros({n, d});
  Tensor xhat = Tensor::zeros({n, d});
  Tensor inv_sigma = Tensor::zeros({n});
  for (int i = 0; i < n; ++i) {
    double mean = 0.0;
    for (int j = 0; j < d; ++j) mean += x.at(i, j);
    mean /= d;
    double var = 0.0;
    for (int j = 0; j < d; ++j) {
      const double c = x.at(i, j) - mean;
      var += c * c;
    }
    var /= d;
    const double is = 1.0 / std::sqrt(var + eps);
    inv_sigma[i] = is;
    for (int j = 0; j < d; ++j) {
      const double xh = (x.at(i, j) - mean) * is;
      xhat.at(i, j) = xh;
      out.at(i, j) = round_to_mode(gamma[j] * xh + beta[j]);
    }
  }
  out.check_finite("layer_norm");
  if (save_xhat) *save_xhat = std::move(xhat);
  if (save_inv_sigma) *save_inv_sigma = std::move(inv_sigma);
  return out;
}

Tensor softmax_rows(const Tensor& x) {
  require_2d(x, "softmax_rows");
  const int n = x.rows(), d = x.cols();
  Tensor out = Tensor::zeros({n, d});
  for (int i = 0; i < n; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < d; ++j) mx = std::max(mx, x.at(i, j));
    double denom = 0.0;
    for (int j = 0; j < d; ++j) denom += std::exp(x.at(i, j) - mx);
    for (int j = 0; j < d; ++j)
      out.at(i, j) = round_to_mode(std::exp(x.at(i, j) - mx) / denom);
  }
  out.check_finite("softmax_rows");
  return out;
}

double log_sum_exp(const double* x, int64_t n) {
  if (n < 1) throw DimensionError("log_sum_exp: empty input");
  double mx = x[0];
  for (int64_t i = 1; i < n; ++i) mx = std::max(mx, x[i]);
  double s = 0.0;
  for (int64_t i = 0; i < n; ++i) s += std::exp(x[i] - mx);
  return round_to_mode(mx + std::log(s));
}

double log_sum_exp(const Tensor& x) { return log_sum_exp(x.data(), x.size()); }
double log_sum_exp(const std::vector<double>& x) {
  return log_sum_exp(x.data(), static_cast<int64_t>(x.size()));
}

Tensor log_softmax(const Tensor& x, int axis) {
  if (x.ndim() == 1) {
    if (axis != 0) throw DimensionError("log_softmax: bad axis for 1-D input");
    const double lse = log_sum_exp(x);
    Tensor out = x;
    for (int64_t i = 0; i < out.size(); ++i) out[i] = round_to_mode(out[i] - lse);
    return out;
  }
  require_2d(x, "log_softmax");
  if (axis == 0) return transpose(log_softmax(transpose(x), 1));
  if (axis != 1) throw DimensionError("log_softmax: bad axis for 2-D input");
  const int n = x.rows(), d = x.cols();
  Tensor out = Tensor::zeros({n, d});
  for (int i = 0; i < n; ++i) {
    const double lse = log_sum_exp(x.data() + static_cast<size_t>(i) * d, d);
    for (int j = 0; j < d; ++j) out.at(i, j) = round_to_mode(x.at(i, j) - lse);
  }
  out.check_finite("log_softmax");
  return out;
}

Tensor log_softmax_rows(const Tensor& x) { return log_softmax(x, 1); }

Tensor embedding_rows(const Tensor& table, const std::vector<int>& ids) {
  require_2d(table, "embedding_rows");
  const int d = table.cols();
  Tensor out = Tensor::zeros({static_cast<int>(ids.size()), d});
  for (size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= table.rows())
      throw DataError("embedding_rows: id " + std::to_string(ids[i]) + " out of range");
    for (int j = 0; j < d; ++j) out.at(static_cast<int>(i), j) = table.at(ids[i], j);
  }
  return out;
}

Tensor slice_cols(const Tensor& x, int c0, int c1) {
  require_2d(x, "slice_cols");
  if (c0 < 0 || c1 > x.cols() || c0 >= c1)
    throw DimensionError("slice_cols: bad column range");
  Tensor out = Tensor::zeros({x.rows(), c1 - c0});
  for (int i = 0; i < x.rows(); ++i)
    for (int j = c0; j < c1; ++j) out.at(i, j - c0) = x.at(i, j);
  return out;
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no parts");
  const int n = parts[0].rows();
  int total = 0;
  for (const auto& p : parts) {
    if (p.rows() != n) throw DimensionError("concat_cols: row counts differ");
    total += p.cols();
  }
  Tensor out = Tensor::zeros({n, total});
  int off = 0;
  for (const auto& p : parts) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < p.cols(); ++j) out.at(i, off + j) = p.at(i, j);
    off += p.cols();
  }
  return out;
}

double sum_all(const Tensor& x) {
  double s = 0.0;
  for (int64_t i = 0; i < x.size(); ++i) s += x[i];
  return round_to_mode(s);
}

Tensor random_normal(std::vector<int> shape, Rng& rng, double stddev) {
  Tensor t = Tensor::zeros(std::move(shape));
  for (int64_t i = 0; i < t.size(); ++i) t[i] = round_to_mode(rng.normal() * stddev);
  return t;
}

Tensor random_uniform(std::vector<int> shape, Rng& rng, double lo, double hi) {
  Tensor t = Tensor::zeros(std::move(shape));
  for (int64_t i = 0; i < t.size(); ++i) t[i] = round_to_mode(rng.uniform(lo, hi));
  return t;
}

}  // namespace slimtag
