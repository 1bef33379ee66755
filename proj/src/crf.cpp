#include "slimtag/crf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace slimtag {

TransitionMatrix TransitionMatrix::zeros(int num_tags) {
  if (num_tags < 1) throw ConfigError("transition matrix needs at least one tag");
  TransitionMatrix t;
  t.num_tags = num_tags;
  t.scores = make_param(Tensor::zeros({num_tags + 2, num_tags + 2}));
  t.reset_sentinels();
  return t;
}

void TransitionMatrix::reset_sentinels() {
  Tensor& s = scores->value;
  const int total = num_tags + 2;
  for (int i = 0; i < total; ++i) {
    s.at(i, start_index()) = kNegInf;  // nothing enters START
    s.at(end_index(), i) = kNegInf;    // nothing leaves END
  }
}

void TransitionMatrix::validate() const {
  const Tensor& s = scores->value;
  const int total = num_tags + 2;
  if (s.ndim() != 2 || s.rows() != total || s.cols() != total)
    throw DimensionError("transition matrix has wrong shape " + s.shape_str());
  for (int i = 0; i < total; ++i) {
    if (s.at(i, start_index()) > kNegInf / 2 || s.at(end_index(), i) > kNegInf / 2)
      throw DataError("transition sentinel entries have been overwritten");
  }
}

std::vector<int> EmissionView::valid_positions() const {
  if (static_cast<int>(mask.size()) != seq_len())
    throw DimensionError("emission mask length does not match logits");
  std::vector<int> vp;
  for (int i = 0; i < seq_len(); ++i)
    if (mask[static_cast<size_t>(i)]) vp.push_back(i);
  if (vp.empty()) throw DataError("emission view has no valid positions");
  return vp;
}

namespace {

void check_tag(int tag, int num_tags) {
  if (tag < 0 || tag >= num_tags)
    throw DataError("tag index out of range: " + std::to_string(tag));
}

}  // namespace

double path_score(const EmissionView& em, const TransitionMatrix& trans,
                  const std::vector<int>& tags) {
  const auto vp = em.valid_positions();
  const int K = em.num_tags();
  if (static_cast<int>(tags.size()) != em.seq_len())
    throw DimensionError("tag sequence length does not match emissions");
  const Tensor& T = trans.scores->value;
  const int S = trans.start_index(), E = trans.end_index();

  // Accumulation order matches the Viterbi recursion term for term, so the
  // decoded best score reproduces this function bit for bit.
  int y0 = tags[static_cast<size_t>(vp[0])];
  check_tag(y0, K);
  double score = T.at(S, y0) + em.logits.at(vp[0], y0);
  int prev = y0;
  for (size_t t = 1; t < vp.size(); ++t) {
    const int y = tags[static_cast<size_t>(vp[t])];
    check_tag(y, K);
    score = score + T.at(prev, y) + em.logits.at(vp[t], y);
    prev = y;
  }
  score = score + T.at(prev, E);
  return round_to_mode(score);
}

double log_partition(const EmissionView& em, const TransitionMatrix& trans) {
  const auto vp = em.valid_positions();
  const int K = em.num_tags();
  const Tensor& T = trans.scores->value;
  const int S = trans.start_index(), E = trans.end_index();

  std::vector<double> alpha(static_cast<size_t>(K)), next(static_cast<size_t>(K)),
      scratch(static_cast<size_t>(K));
  for (int j = 0; j < K; ++j) alpha[static_cast<size_t>(j)] = T.at(S, j) + em.logits.at(vp[0], j);
  for (size_t t = 1; t < vp.size(); ++t) {
    for (int j = 0; j < K; ++j) {
      for (int i = 0; i < K; ++i)
        scratch[static_cast<size_t>(i)] = alpha[static_cast<size_t>(i)] + T.at(i, j);
      next[static_cast<size_t>(j)] = log_sum_exp(scratch.data(), K) + em.logits.at(vp[t], j);
    }
    std::swap(alpha, next);
  }
  for (int j = 0; j < K; ++j) scratch[static_cast<size_t>(j)] = alpha[static_cast<size_t>(j)] + T.at(j, E);
  return round_to_mode(log_sum_exp(scratch.data(), K));
}

double nll(const EmissionView& em, const TransitionMatrix& trans,
           const std::vector<int>& gold_tags) {
  return round_to_mode(log_partition(em, trans) - path_score(em, trans, gold_tags));
}

namespace {

// Shared forward-backward work used by marginals and the NLL gradient.
struct ForwardBackward {
  std::vector<int> vp;
  int K = 0;
  double log_z = 0.0;
  std::vector<std::vector<double>> alpha, beta;  // [m][K]

  ForwardBackward(const EmissionView& em, const TransitionMatrix& trans) {
    vp = em.valid_positions();
    K = em.num_tags();
    const Tensor& T = trans.scores->value;
    const int S = trans.start_index(), E = trans.end_index();
    const size_t m = vp.size();
    alpha.assign(m, std::vector<double>(static_cast<size_t>(K)));
    beta.assign(m, std::vector<double>(static_cast<size_t>(K)));
    std::vector<double> scratch(static_cast<size_t>(K));

    for (int j = 0; j < K; ++j) alpha[0][static_cast<size_t>(j)] = T.at(S, j) + em.logits.at(vp[0], j);
    for (size_t t = 1; t < m; ++t) {
      for (int j = 0; j < K; ++j) {
        for (int i = 0; i < K; ++i)
          scratch[static_cast<size_t>(i)] = alpha[t - 1][static_cast<size_t>(i)] + T.at(i, j);
        alpha[t][static_cast<size_t>(j)] = log_sum_exp(scratch.data(), K) + em.logits.at(vp[t], j);
      }
    }
    for (int j = 0; j < K; ++j)
      scratch[static_cast<size_t>(j)] = alpha[m - 1][static_cast<size_t>(j)] + T.at(j, E);
    log_z = log_sum_exp(scratch.data(), K);

    for (int j = 0; j < K; ++j) beta[m - 1][static_cast<size_t>(j)] = T.at(j, E);
    for (size_t t = m - 1; t > 0; --t) {
      for (int i = 0; i < K; ++i) {
        for (int j = 0; j < K; ++j)
          scratch[static_cast<size_t>(j)] =
              T.at(i, j) + em.logits.at(vp[t], j) + beta[t][static_cast<size_t>(j)];
        beta[t - 1][static_cast<size_t>(i)] = log_sum_exp(scratch.data(), K);
      }
    }
  }

  double posterior(size_t t, int j) const {
    return std::exp(alpha[t][static_cast<size_t>(j)] + beta[t][static_cast<size_t>(j)] - log_z);
  }
};

}  // namespace

Tensor marginals(const EmissionView& em, const TransitionMatrix& trans) {
  ForwardBackward fb(em, trans);
  Tensor out = Tensor::zeros({em.seq_len(), em.num_tags()});
  for (size_t t = 0; t < fb.vp.size(); ++t)
    for (int j = 0; j < fb.K; ++j)
      out.at(fb.vp[t], j) = round_to_mode(fb.posterior(t, j));
  out.check_finite("marginals");
  return out;
}

ViterbiResult viterbi(const EmissionView& em, const TransitionMatrix& trans) {
  const auto vp = em.valid_positions();
  const int K = em.num_tags();
  const Tensor& T = trans.scores->value;
  const int S = trans.start_index(), E = trans.end_index();
  const size_t m = vp.size();

  std::vector<std::vector<double>> delta(m, std::vector<double>(static_cast<size_t>(K)));
  std::vector<std::vector<int>> from(m, std::vector<int>(static_cast<size_t>(K), -1));
  for (int j = 0; j < K; ++j) delta[0][static_cast<size_t>(j)] = T.at(S, j) + em.logits.at(vp[0], j);
  for (size_t t = 1; t < m; ++t) {
    for (int j = 0; j < K; ++j) {
      double best = -std::numeric_limits<double>::infinity();
      int best_i = 0;
      for (int i = 0; i < K; ++i) {
        const double cand = delta[t - 1][static_cast<size_t>(i)] + T.at(i, j);
        if (cand > best) {  // strict: ties keep the lowest index
          best = cand;
          best_i = i;
        }
      }
      delta[t][static_cast<size_t>(j)] = best + em.logits.at(vp[t], j);
      from[t][static_cast<size_t>(j)] = best_i;
    }
  }
  double best = -std::numeric_limits<double>::infinity();
  int best_j = 0;
  for (int j = 0; j < K; ++j) {
    const double cand = delta[m - 1][static_cast<size_t>(j)] + T.at(j, E);
    if (cand > best) {
      best = cand;
      best_j = j;
    }
  }

  ViterbiResult res;
  res.score = round_to_mode(best);
  res.tags.assign(static_cast<size_t>(em.seq_len()), -1);
  int cur = best_j;
  for (size_t t = m; t-- > 0;) {
    res.tags[static_cast<size_t>(vp[t])] = cur;
    if (t > 0) cur = from[t][static_cast<size_t>(cur)];
  }
  return res;
}

VarPtr crf_nll_loss(Tape& tape, const VarPtr& emissions, const TransitionMatrix& trans,
                    const std::vector<int>& gold_tags, const std::vector<uint8_t>& mask) {
  EmissionView em{emissions->value, mask};
  const double loss = nll(em, trans, gold_tags);
  Tensor value = Tensor::scalar(loss);
  value.check_finite("crf_nll");
  VarPtr tvar = trans.scores;
  const int num_tags = trans.num_tags;
  return tape.record(std::move(value), {emissions, tvar},
                     [emissions, tvar, num_tags, gold_tags, mask](Node& self) {
    TransitionMatrix tm{tvar, num_tags};
    EmissionView em2{emissions->value, mask};
    ForwardBackward fb(em2, tm);
    const Tensor& T = tvar->value;
    const double gout = self.grad[0];
    const int K = fb.K;
    const size_t m = fb.vp.size();
    const int S = tm.start_index(), E = tm.end_index();

    if (emissions->requires_grad) {
      Tensor& ge = emissions->ensure_grad();
      for (size_t t = 0; t < m; ++t) {
        const int pos = fb.vp[t];
        const int gold = gold_tags[static_cast<size_t>(pos)];
        for (int j = 0; j < K; ++j) {
          double g = fb.posterior(t, j);
          if (j == gold) g -= 1.0;
          ge.at(pos, j) += gout * g;
        }
      }
    }
    if (tvar->requires_grad) {
      Tensor& gt = tvar->ensure_grad();
      const int g0 = gold_tags[static_cast<size_t>(fb.vp[0])];
      const int gl = gold_tags[static_cast<size_t>(fb.vp[m - 1])];
      for (int j = 0; j < K; ++j) {
        double g = fb.posterior(0, j) - (j == g0 ? 1.0 : 0.0);
        gt.at(S, j) += gout * g;
      }
      for (int j = 0; j < K; ++j) {
        double g = fb.posterior(m - 1, j) - (j == gl ? 1.0 : 0.0);
        gt.at(j, E) += gout * g;
      }
      for (size_t t = 0; t + 1 < m; ++t) {
        const int ga = gold_tags[static_cast<size_t>(fb.vp[t])];
        const int gb = gold_tags[static_cast<size_t>(fb.vp[t + 1])];
        for (int i = 0; i < K; ++i) {
          for (int j = 0; j < K; ++j) {
            const double pair = std::exp(fb.alpha[t][static_cast<size_t>(i)] + T.at(i, j) +
                                         em2.logits.at(fb.vp[t + 1], j) +
                                         fb.beta[t + 1][static_cast<size_t>(j)] - fb.log_z);
            double g = pair - ((i == ga && j == gb) ? 1.0 : 0.0);
            gt.at(i, j) += gout * g;
          }
        }
      }
    }
  });
}

Tensor bio_masked_transitions(const Tensor& trans_scores, const LabelScheme& scheme) {
  const int K = scheme.num_tags();
  if (trans_scores.rows() != K + 2 || trans_scores.cols() != K + 2)
    throw DimensionError("bio_masked_transitions: shape does not match scheme");
  Tensor out = trans_scores;
  const int S = K;
  auto forbid_into_i = [&](int from_tag) {
    for (int c = 0; c < scheme.num_classes(); ++c) {
      const int i_tag = scheme.i_tag(c);
      const bool same_class_ok = scheme.tag_class(from_tag) == c &&
                                 (scheme.is_b(from_tag) || scheme.is_i(from_tag));
      if (!same_class_ok) out.at(from_tag, i_tag) = kNegInf;
    }
  };
  for (int t = 0; t < K; ++t) forbid_into_i(t);
  for (int c = 0; c < scheme.num_classes(); ++c) out.at(S, scheme.i_tag(c)) = kNegInf;
  return out;
}

}  // namespace slimtag
