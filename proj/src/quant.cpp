#include "slimtag/quant.hpp"

#include <cmath>

#include "slimtag/encoder.hpp"

namespace slimtag {

namespace {

QuantizedTensor quantize_impl(const Tensor& w, const char* what) {
  w.check_finite(what);
  double max_abs = 0.0;
  for (int64_t i = 0; i < w.size(); ++i) max_abs = std::max(max_abs, std::abs(w[i]));
  QuantizedTensor q;
  q.shape = w.shape();
  q.scale = max_abs == 0.0 ? 1.0 : max_abs / 127.0;
  q.values.resize(static_cast<size_t>(w.size()));
  for (int64_t i = 0; i < w.size(); ++i) {
    // std::round is half-away-from-zero.
    double r = std::round(w[i] / q.scale);
    if (r > 127.0) r = 127.0;
    if (r < -127.0) r = -127.0;
    q.values[static_cast<size_t>(i)] = static_cast<int8_t>(r);
  }
  return q;
}

}  // namespace

QuantizedTensor quantize_tensor(const Tensor& w) { return quantize_impl(w, "quantize_tensor"); }

QuantizedTensor quantize_activations(const Tensor& x) {
  return quantize_impl(x, "quantize_activations");
}

Tensor dequantize(const QuantizedTensor& q) {
  Tensor out = Tensor::zeros(q.shape);
  for (int64_t i = 0; i < q.size(); ++i)
    out[i] = round_to_mode(q.scale * q.values[static_cast<size_t>(i)]);
  return out;
}

Tensor qmatmul(const QuantizedTensor& a, const QuantizedTensor& w) {
  if (a.shape.size() != 2 || w.shape.size() != 2)
    throw DimensionError("qmatmul: expected 2-D operands");
  const int m = a.rows(), k = a.cols(), n = w.cols();
  if (w.rows() != k) throw DimensionError("qmatmul: inner dimensions disagree");
  if (k > (1 << 16))
    throw NumericError("qmatmul: inner dimension exceeds the int32 accumulation bound");

  Tensor out = Tensor::zeros({m, n});
  const double rescale = a.scale * w.scale;
  std::vector<int32_t> acc(static_cast<size_t>(n));
  for (int i = 0; i < m; ++i) {
    std::fill(acc.begin(), acc.end(), 0);
    const int8_t* arow = a.values.data() + static_cast<size_t>(i) * k;
    for (int kk = 0; kk < k; ++kk) {
      const int32_t av = arow[kk];
      if (av == 0) continue;
      const int8_t* wrow = w.values.data() + static_cast<size_t>(kk) * n;
      for (int j = 0; j < n; ++j) acc[static_cast<size_t>(j)] += av * wrow[j];
    }
    for (int j = 0; j < n; ++j)
      out.at(i, j) = round_to_mode(rescale * acc[static_cast<size_t>(j)]);
  }
  out.check_finite("qmatmul");
  return out;
}

Tensor qlinear(const Tensor& x, const QuantizedTensor& w, const Tensor& bias) {
  QuantizedTensor qx = quantize_activations(x);
  Tensor y = qmatmul(qx, w);
  return bias_add(y, bias);
}

QuantReport quantize_model(EncoderModel& model) {
  if (model.quantized) throw ConfigError("model is already quantized");
  QuantReport report;
  auto convert = [&](LinearLayer& l) {
    const Tensor& w = l.w->value;
    report.converted_params += w.size();
    report.converted_tensors += 1;
    report.fp32_bytes += w.size() * 4;
    report.int8_bytes += w.size();
    l.qw = quantize_tensor(w);
    l.w = make_const(Tensor::zeros({0}));  // payload dropped
  };
  for (auto& b : model.blocks) {
    convert(b.wq);
    convert(b.wk);
    convert(b.wv);
    convert(b.wo);
    convert(b.ffn1);
    convert(b.ffn2);
  }
  convert(model.head);
  model.quantized = true;
  for (auto& p : model.named_params()) report.retained_params += p.var->value.size();
  return report;
}

}  // namespace slimtag
