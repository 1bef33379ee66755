#include "slimtag/ops.hpp"

#include <cmath>

namespace slimtag {

namespace {

const double kSqrt2OverPi = std::sqrt(2.0 / 3.14159265358979323846);
constexpr double kGeluCoeff = 0.044715;

void accumulate(Node& dst, const Tensor& g) {
  Tensor& acc = dst.ensure_grad();
  for (int64_t i = 0; i < acc.size(); ++i) acc[i] += g[i];
}

}  // namespace

VarPtr vmatmul(Tape& t, const VarPtr& a, const VarPtr& b) {
  Tensor c = matmul(a->value, b->value);
  return t.record(std::move(c), {a, b}, [a, b](Node& self) {
    if (a->requires_grad) accumulate(*a, matmul(self.grad, transpose(b->value)));
    if (b->requires_grad) accumulate(*b, matmul(transpose(a->value), self.grad));
  });
}

VarPtr vtranspose(Tape& t, const VarPtr& a) {
  return t.record(transpose(a->value), {a}, [a](Node& self) {
    if (a->requires_grad) accumulate(*a, transpose(self.grad));
  });
}

VarPtr vadd(Tape& t, const VarPtr& a, const VarPtr& b) {
  return t.record(add(a->value, b->value), {a, b}, [a, b](Node& self) {
    if (a->requires_grad) accumulate(*a, self.grad);
    if (b->requires_grad) accumulate(*b, self.grad);
  });
}

VarPtr vbias_add(Tape& t, const VarPtr& x, const VarPtr& bias) {
  return t.record(bias_add(x->value, bias->value), {x, bias}, [x, bias](Node& self) {
    if (x->requires_grad) accumulate(*x, self.grad);
    if (bias->requires_grad) {
      Tensor& g = bias->ensure_grad();
      const int n = self.grad.rows(), d = self.grad.cols();
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) g[j] += self.grad.at(i, j);
    }
  });
}

VarPtr vmul_scalar(Tape& t, const VarPtr& x, double c) {
  return t.record(mul_scalar(x->value, c), {x}, [x, c](Node& self) {
    if (x->requires_grad) accumulate(*x, mul_scalar(self.grad, c));
  });
}

VarPtr vgelu(Tape& t, const VarPtr& x) {
  return t.record(gelu(x->value), {x}, [x](Node& self) {
    if (!x->requires_grad) return;
    Tensor& g = x->ensure_grad();
    for (int64_t i = 0; i < g.size(); ++i) {
      const double v = x->value[i];
      const double u = kSqrt2OverPi * (v + kGeluCoeff * v * v * v);
      const double th = std::tanh(u);
      const double sech2 = 1.0 - th * th;
      const double du = kSqrt2OverPi * (1.0 + 3.0 * kGeluCoeff * v * v);
      const double dy = 0.5 * (1.0 + th) + 0.5 * v * sech2 * du;
      g[i] += self.grad[i] * dy;
    }
  });
}

VarPtr vlayer_norm(Tape& t, const VarPtr& x, const VarPtr& gamma,
                   const VarPtr& beta, double eps) {
  auto xhat = std::make_shared<Tensor>();
  auto inv_sigma = std::make_shared<Tensor>();
  Tensor out = layer_norm(x->value, gamma->value, beta->value, eps, xhat.get(), inv_sigma.get());
  return t.record(std::move(out), {x, gamma, beta},
                  [x, gamma, beta, xhat, inv_sigma](Node& self) {
    const int n = self.grad.rows(), d = self.grad.cols();
    if (gamma->requires_grad) {
      Tensor& gg = gamma->ensure_grad();
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) gg[j] += self.grad.at(i, j) * xhat->at(i, j);
    }
    if (beta->requires_grad) {
      Tensor& gb = beta->ensure_grad();
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) gb[j] += self.grad.at(i, j);
    }
    if (x->requires_grad) {
      Tensor& gx = x->ensure_grad();
      for (int i = 0; i < n; ++i) {
        double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
        for (int j = 0; j < d; ++j) {
          const double dxh = self.grad.at(i, j) * gamma->value[j];
          mean_dxhat += dxh;
          mean_dxhat_xhat += dxh * xhat->at(i, j);
        }
        mean_dxhat /= d;
        mean_dxhat_xhat /= d;
        const double is = (*inv_sigma)[i];
        for (int j = 0; j < d; ++j) {
          const double dxh = self.grad.at(i, j) * gamma->value[j];
          gx.at(i, j) += is * (dxh - mean_dxhat - xhat->at(i, j) * mean_dxhat_xhat);
        }
      }
    }
  });
}

VarPtr vsoftmax_rows(Tape& t, const VarPtr& x) {
  Tensor y = softmax_rows(x->value);
  auto yv = std::make_shared<Tensor>(y);
  return t.record(std::move(y), {x}, [x, yv](Node& self) {
    if (!x->requires_grad) return;
    Tensor& g = x->ensure_grad();
    const int n = self.grad.rows(), d = self.grad.cols();
    for (int i = 0; i < n; ++i) {
      double dot = 0.0;
      for (int j = 0; j < d; ++j) dot += self.grad.at(i, j) * yv->at(i, j);
      for (int j = 0; j < d; ++j)
        g.at(i, j) += yv->at(i, j) * (self.grad.at(i, j) - dot);
    }
  });
}

VarPtr vlog_softmax_rows(Tape& t, const VarPtr& x) {
  Tensor y = log_softmax_rows(x->value);
  auto yv = std::make_shared<Tensor>(y);
  return t.record(std::move(y), {x}, [x, yv](Node& self) {
    if (!x->requires_grad) return;
    Tensor& g = x->ensure_grad();
    const int n = self.grad.rows(), d = self.grad.cols();
    for (int i = 0; i < n; ++i) {
      double rowsum = 0.0;
      for (int j = 0; j < d; ++j) rowsum += self.grad.at(i, j);
      for (int j = 0; j < d; ++j)
        g.at(i, j) += self.grad.at(i, j) - std::exp(yv->at(i, j)) * rowsum;
    }
  });
}

VarPtr vembedding(Tape& t, const VarPtr& table, const std::vector<int>& ids) {
  return t.record(embedding_rows(table->value, ids), {table}, [table, ids](Node& self) {
    if (!table->requires_grad) return;
    Tensor& g = table->ensure_grad();
    const int d = self.grad.cols();
    for (size_t i = 0; i < ids.size(); ++i)
      for (int j = 0; j < d; ++j) g.at(ids[i], j) += self.grad.at(static_cast<int>(i), j);
  });
}

VarPtr vslice_cols(Tape& t, const VarPtr& x, int c0, int c1) {
  return t.record(slice_cols(x->value, c0, c1), {x}, [x, c0, c1](Node& self) {
    if (!x->requires_grad) return;
    Tensor& g = x->ensure_grad();
    for (int i = 0; i < self.grad.rows(); ++i)
      for (int j = c0; j < c1; ++j) g.at(i, j) += self.grad.at(i, j - c0);
  });
}

VarPtr vconcat_cols(Tape& t, const std::vector<VarPtr>& parts) {
  std::vector<Tensor> vals;
  vals.reserve(parts.size());
  for (const auto& p : parts) vals.push_back(p->value);
  return t.record(concat_cols(vals), {parts.begin(), parts.end()}, [parts](Node& self) {
    int off = 0;
    for (const auto& p : parts) {
      const int w = p->value.cols();
      if (p->requires_grad) {
        Tensor& g = p->ensure_grad();
        for (int i = 0; i < self.grad.rows(); ++i)
          for (int j = 0; j < w; ++j) g.at(i, j) += self.grad.at(i, off + j);
      }
      off += w;
    }
  });
}

VarPtr vsum(Tape& t, const VarPtr& x) {
  return t.record(Tensor::scalar(sum_all(x->value)), {x}, [x](Node& self) {
    if (!x->requires_grad) return;
    Tensor& g = x->ensure_grad();
    for (int64_t i = 0; i < g.size(); ++i) g[i] += self.grad[0];
  });
}

VarPtr vgather_cols(Tape& t, const VarPtr& x, const std::vector<int>& ids) {
  const int n = x->value.rows();
  if (static_cast<int>(ids.size()) != n)
    throw DimensionError("vgather_cols: ids length does not match rows");
  Tensor out = Tensor::zeros({n});
  for (int i = 0; i < n; ++i) {
    if (ids[i] < 0 || ids[i] >= x->value.cols())
      throw DataError("vgather_cols: column id out of range");
    out[i] = x->value.at(i, ids[i]);
  }
  return t.record(std::move(out), {x}, [x, ids](Node& self) {
    if (!x->requires_grad) return;
    Tensor& g = x->ensure_grad();
    for (size_t i = 0; i < ids.size(); ++i)
      g.at(static_cast<int>(i), ids[i]) += self.grad[static_cast<int64_t>(i)];
  });
}

VarPtr vdot_const(Tape& t, const VarPtr& x, const std::vector<double>& w) {
  if (x->value.size() != static_cast<int64_t>(w.size()))
    throw DimensionError("vdot_const: length mismatch");
  double s = 0.0;
  for (size_t i = 0; i < w.size(); ++i) s += x->value[static_cast<int64_t>(i)] * w[i];
  return t.record(Tensor::scalar(round_to_mode(s)), {x}, [x, w](Node& self) {
    if (!x->requires_grad) return;
    Tensor& g = x->ensure_grad();
    for (size_t i = 0; i < w.size(); ++i) g[static_cast<int64_t>(i)] += self.grad[0] * w[i];
  });
}

VarPtr vdropout(Tape& t, const VarPtr& x, double rate, Rng& rng) {
  if (rate < 0.0 || rate >= 1.0) throw ConfigError("dropout rate must be in [0, 1)");
  if (rate == 0.0) return x;
  auto mask = std::make_shared<std::vector<double>>(static_cast<size_t>(x->value.size()));
  const double keep = 1.0 - rate;
  for (auto& m : *mask) m = rng.uniform() < rate ? 0.0 : 1.0 / keep;
  Tensor out = x->value;
  for (int64_t i = 0; i < out.size(); ++i)
    out[i] = round_to_mode(out[i] * (*mask)[static_cast<size_t>(i)]);
  return t.record(std::move(out), {x}, [x, mask](Node& self) {
    if (!x->requires_grad) return;
    Tensor& g = x->ensure_grad();
    for (int64_t i = 0; i < g.size(); ++i)
      g[i] += self.grad[i] * (*mask)[static_cast<size_t>(i)];
  });
}

VarPtr vkl_vs_const(Tape& t, const Tensor& p, const VarPtr& logq,
                    const std::vector<uint8_t>& row_mask) {
  if (!p.same_shape(logq->value))
    throw DimensionError("vkl_vs_const: shape mismatch");
  if (static_cast<int>(row_mask.size()) != p.rows())
    throw DimensionError("vkl_vs_const: mask length mismatch");
  const int n = p.rows(), d = p.cols();
  double kl = 0.0;
  for (int i = 0; i < n; ++i) {
    if (!row_mask[i]) continue;
    for (int j = 0; j < d; ++j) {
      const double pij = p.at(i, j);
      if (pij > 0.0) kl += pij * (std::log(pij) - logq->value.at(i, j));
    }
  }
  Tensor out = Tensor::scalar(round_to_mode(kl));
  out.check_finite("kl_vs_const");
  auto pv = std::make_shared<Tensor>(p);
  return t.record(std::move(out), {logq}, [logq, pv, row_mask](Node& self) {
    if (!logq->requires_grad) return;
    Tensor& g = logq->ensure_grad();
    const int n = pv->rows(), d = pv->cols();
    for (int i = 0; i < n; ++i) {
      if (!row_mask[i]) continue;
      for (int j = 0; j < d; ++j) g.at(i, j) -= self.grad[0] * pv->at(i, j);
    }
  });
}

void backward(const VarPtr& loss, Tape& tape) { tape.backward(loss); }

}  // namespace slimtag
