#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "slimtag/labels.hpp"

namespace slimtag {

// Token-index entity span, half-open, derived from word-level tags.
struct EntitySpan {
  int start = 0;
  int end = 0;
  int class_id = 0;
  bool operator==(const EntitySpan&) const = default;
  bool operator<(const EntitySpan& o) const {
    if (start != o.start) return start < o.start;
    if (end != o.end) return end < o.end;
    return class_id < o.class_id;
  }
};

// Strict-scheme decoding of a BIO tag sequence. B-c opens a span, I-c of the
// same class extends it, and I-c after O or a different class opens a new
// span (the conventional strict repair).
std::vector<EntitySpan> extract_spans(const std::vector<int>& tags, const LabelScheme& scheme);

struct ClassPRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  int64_t tp = 0, fp = 0, fn = 0;
  int64_t support = 0;  // gold span count
};

struct PrfReport {
  std::map<std::string, ClassPRF> per_class;  // classes with gold support only
  double macro_precision = 0.0, macro_recall = 0.0, macro_f1 = 0.0;
  double micro_precision = 0.0, micro_recall = 0.0, micro_f1 = 0.0;
};

// Exact (start, end, class) matching; per-class scores use the 0-convention
// on empty denominators; macro averages over classes present in gold.
PrfReport span_prf(const std::vector<EntitySpan>& gold, const std::vector<EntitySpan>& pred,
                   const LabelScheme& scheme);

// Exact tag match rate, O included, ignore-index positions excluded.
double token_accuracy(const std::vector<int>& gold_tags, const std::vector<int>& pred_tags);

// Corpus-level accumulator; merging per-sentence counts is associative, so
// aggregation order never changes the report.
class EvalAccumulator {
 public:
  explicit EvalAccumulator(const LabelScheme& scheme);

  void add_sentence(const std::vector<int>& gold_tags, const std::vector<int>& pred_tags);
  void merge(const EvalAccumulator& other);

  struct Report {
    std::map<std::string, ClassPRF> per_class;
    double macro_precision = 0.0, macro_recall = 0.0, macro_f1 = 0.0;
    double micro_precision = 0.0, micro_recall = 0.0, micro_f1 = 0.0;
    double token_accuracy = 0.0;
    std::vector<std::string> confusion_labels;           // O + classes
    std::vector<std::vector<int64_t>> confusion_counts;  // rows = true
    std::vector<std::vector<double>> confusion;          // row-normalized
  };
  Report finalize() const;

 private:
  LabelScheme scheme_;
  std::vector<int64_t> tp_, fp_, fn_, support_;
  int64_t tokens_total_ = 0, tokens_correct_ = 0;
  std::vector<std::vector<int64_t>> confusion_;  // (1+C) x (1+C), B/I collapsed
};

// Row-normalized confusion matrix over {O, classes} for one tag pair;
// convenience wrapper over the accumulator.
std::vector<std::vector<double>> confusion_matrix(const std::vector<int>& gold_tags,
                                                  const std::vector<int>& pred_tags,
                                                  const LabelScheme& scheme);

std::string render_report_table(const EvalAccumulator::Report& report);
std::string report_to_json(const EvalAccumulator::Report& report);
std::string confusion_to_csv(const EvalAccumulator::Report& report);

}  // namespace slimtag
