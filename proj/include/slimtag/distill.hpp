#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "slimtag/labels.hpp"
#include "slimtag/ops.hpp"
#include "slimtag/tape.hpp"

namespace slimtag {

struct KDConfig {
  double alpha = 0.5;
  double tau = 4.0;

  void validate() const;
};

// Row-wise softmax of logits / tau.
Tensor soften(const Tensor& logits, double tau);

struct KLStats {
  int64_t clamped = 0;  // student probabilities clamped by epsilon
};

// Sum over valid tokens and classes of p_tea * log(p_tea / p_stu). Zero
// student mass against non-zero teacher mass is clamped at 1e-12 and
// reported.
double kl_term(const Tensor& teacher_soft, const Tensor& student_soft,
               const std::vector<uint8_t>& valid_mask, KLStats* stats = nullptr);

struct KDParts {
  double total = 0.0;
  double ce = 0.0;        // mean hard cross-entropy over valid tokens
  double kl_mean = 0.0;   // mean KL at temperature tau, unscaled
  double soft = 0.0;      // tau^2 * kl_mean
  int valid_tokens = 0;
};

// alpha * CE(gold, softmax(student)) + (1-alpha) * tau^2 * KL(soft teacher,
// soft student), both terms averaged over the same valid-token count.
// Differentiable w.r.t. the student logits only.
VarPtr kd_loss(Tape& tape, const VarPtr& student_logits, const Tensor& teacher_logits,
               const std::vector<int>& gold_tags, const KDConfig& config,
               KDParts* parts = nullptr);

// Mean token-level cross-entropy over valid positions: the hard half of the
// distillation objective and the whole objective of a linear (no-CRF)
// teacher.
VarPtr token_ce_loss(Tape& tape, const VarPtr& logits, const std::vector<int>& gold_tags);

// Raw value counterpart for validation logging.
double token_ce_value(const Tensor& logits, const std::vector<int>& gold_tags);

// Frozen teacher emissions, one matrix per example: a JSONL index next to a
// raw little-endian payload file (same binary conventions as checkpoints).
class LogitCache {
 public:
  static void write(const std::string& path_prefix, const std::vector<Tensor>& logits);
  static LogitCache read(const std::string& path_prefix);
  static LogitCache from(std::vector<Tensor> logits);

  size_t size() const { return logits_.size(); }
  const Tensor& at(size_t i) const { return logits_.at(i); }

 private:
  std::vector<Tensor> logits_;
};

}  // namespace slimtag
