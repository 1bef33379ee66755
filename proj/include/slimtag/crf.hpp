#pragma once

#include <cstdint>
#include <vector>

#include "slimtag/labels.hpp"
#include "slimtag/ops.hpp"
#include "slimtag/tape.hpp"
#include "slimtag/tensor.hpp"

namespace slimtag {

// Finite stand-in for -inf so log-space arithmetic never produces NaN.
inline constexpr double kNegInf = -1e9;

// Learned transition scores over (K+2)x(K+2) where the two extra indices are
// the virtual START row and END column. Transitions into START and out of
// END are pinned at kNegInf and never selected.
struct TransitionMatrix {
  VarPtr scores;  // [(K+2) x (K+2)]
  int num_tags = 0;

  static TransitionMatrix zeros(int num_tags);

  int start_index() const { return num_tags; }
  int end_index() const { return num_tags + 1; }

  // Re-pins the sentinel entries; called after optimizer steps.
  void reset_sentinels();
  void validate() const;
};

// Emission logits plus the valid-position mask (specials/padding excluded).
// Masked interior positions are bridged: the transition term connects the
// nearest valid neighbours.
struct EmissionView {
  const Tensor& logits;                 // [n x K]
  const std::vector<uint8_t>& mask;     // n entries, 1 = scored

  int seq_len() const { return logits.rows(); }
  int num_tags() const { return logits.cols(); }
  std::vector<int> valid_positions() const;
};

// Score of one tag path: emissions plus transitions, including the
// START->first and last->END boundary terms.
double path_score(const EmissionView& em, const TransitionMatrix& trans,
                  const std::vector<int>& tags);

// log Z by the forward recursion in log space, O(n K^2).
double log_partition(const EmissionView& em, const TransitionMatrix& trans);

// Negative log-likelihood of the gold path: log Z - score(gold). Gold tags
// at masked positions are ignored.
double nll(const EmissionView& em, const TransitionMatrix& trans,
           const std::vector<int>& gold_tags);

// Forward-backward posteriors P(y_i = k | X); masked rows are zero.
Tensor marginals(const EmissionView& em, const TransitionMatrix& trans);

struct ViterbiResult {
  std::vector<int> tags;  // full length; -1 at masked positions
  double score;
};

// Max-score decoding; ties broken by the lowest tag index at each backtrack
// step.
ViterbiResult viterbi(const EmissionView& em, const TransitionMatrix& trans);

// Differentiable NLL for training. The backward rule is analytic:
// d/dE = marginals - onehot(gold), d/dT = expected - observed transition
// counts.
VarPtr crf_nll_loss(Tape& tape, const VarPtr& emissions, const TransitionMatrix& trans,
                    const std::vector<int>& gold_tags, const std::vector<uint8_t>& mask);

// Copy of the transitions with BIO-invalid moves (O -> I-c, B-c -> I-c',
// START -> I-c) pinned to kNegInf. Optional strict decoding aid; off by
// default everywhere.
Tensor bio_masked_transitions(const Tensor& trans_scores, const LabelScheme& scheme);

}  // namespace slimtag
