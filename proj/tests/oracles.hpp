#pragma once

// Brute-force CRF oracles: exhaustive enumeration over all K^m label paths.
// Test-only code, independent of the forward/backward recursions it checks.

#include <utility>
#include <vector>

#include "slimtag/crf.hpp"

namespace slimtag::oracle {

struct Instance {
  Tensor emissions;              // [n x K]
  std::vector<uint8_t> mask;
  Tensor transitions;            // [(K+2) x (K+2)]
  int num_tags = 0;

  int start() const { return num_tags; }
  int end() const { return num_tags + 1; }

  std::vector<int> valid() const {
    std::vector<int> vp;
    for (size_t i = 0; i < mask.size(); ++i)
      if (mask[i]) vp.push_back(static_cast<int>(i));
    return vp;
  }
};

// Same term order as the production scorer so optima agree bit for bit.
inline double score_path(const Instance& in, const std::vector<int>& labels) {
  const auto vp = in.valid();
  double s = in.transitions.at(in.start(), labels[0]) + in.emissions.at(vp[0], labels[0]);
  for (size_t t = 1; t < vp.size(); ++t)
    s = s + in.transitions.at(labels[t - 1], labels[t]) + in.emissions.at(vp[t], labels[t]);
  return s + in.transitions.at(labels.back(), in.end());
}

template <class Fn>
void for_each_path(int m, int K, Fn&& fn) {
  std::vector<int> labels(static_cast<size_t>(m), 0);
  while (true) {
    fn(labels);
    int pos = m - 1;
    while (pos >= 0 && labels[static_cast<size_t>(pos)] == K - 1) {
      labels[static_cast<size_t>(pos)] = 0;
      --pos;
    }
    if (pos < 0) break;
    ++labels[static_cast<size_t>(pos)];
  }
}

inline double log_partition(const Instance& in) {
  const int m = static_cast<int>(in.valid().size());
  double max_score = -1e300;
  for_each_path(m, in.num_tags, [&](const std::vector<int>& labels) {
    max_score = std::max(max_score, score_path(in, labels));
  });
  double sum = 0.0;
  for_each_path(m, in.num_tags, [&](const std::vector<int>& labels) {
    sum += std::exp(score_path(in, labels) - max_score);
  });
  return max_score + std::log(sum);
}

inline Tensor marginals(const Instance& in) {
  const auto vp = in.valid();
  const int m = static_cast<int>(vp.size());
  const double log_z = log_partition(in);
  Tensor out = Tensor::zeros({in.emissions.rows(), in.num_tags});
  for_each_path(m, in.num_tags, [&](const std::vector<int>& labels) {
    const double p = std::exp(score_path(in, labels) - log_z);
    for (int t = 0; t < m; ++t) out.at(vp[static_cast<size_t>(t)], labels[static_cast<size_t>(t)]) += p;
  });
  return out;
}

// Reversed-lexicographic preference among optimal paths reproduces the
// production decoder's lowest-index backtrack tie rule.
inline bool reverse_lex_less(const std::vector<int>& a, const std::vector<int>& b) {
  for (size_t i = a.size(); i-- > 0;) {
    if (a[i] != b[i]) return a[i] < b[i];
  }
  return false;
}

inline std::pair<std::vector<int>, double> viterbi(const Instance& in) {
  const int m = static_cast<int>(in.valid().size());
  std::vector<int> best;
  double best_score = -1e300;
  for_each_path(m, in.num_tags, [&](const std::vector<int>& labels) {
    const double s = score_path(in, labels);
    if (s > best_score || (s == best_score && reverse_lex_less(labels, best))) {
      best_score = s;
      best = labels;
    }
  });
  return {best, best_score};
}

inline double nll(const Instance& in, const std::vector<int>& gold_valid) {
  return log_partition(in) - score_path(in, gold_valid);
}

// Random small instance; emissions/transitions in [-w, w].
inline Instance random_instance(Rng& rng, int n, int K, double w = 2.0) {
  Instance in;
  in.num_tags = K;
  in.emissions = random_uniform({n, K}, rng, -w, w);
  in.mask.assign(static_cast<size_t>(n), 1);
  in.transitions = random_uniform({K + 2, K + 2}, rng, -w, w);
  for (int i = 0; i < K + 2; ++i) {
    in.transitions.at(i, K) = kNegInf;
    in.transitions.at(K + 1, i) = kNegInf;
  }
  return in;
}

inline TransitionMatrix wrap_transitions(const Instance& in) {
  TransitionMatrix t;
  t.num_tags = in.num_tags;
  t.scores = make_param(in.transitions);
  return t;
}

}  // namespace slimtag::oracle
