#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "slimtag/checkpoint.hpp"
#include "slimtag/pipeline.hpp"
#include "slimtag/synth.hpp"
#include "slimtag/trainer.hpp"

namespace slimtag {

struct LatencyStats {
  double median_ms = 0.0;
  double p95_ms = 0.0;
  double std_ms = 0.0;
  double mean_ms = 0.0;
  int reps = 0;
  int warmup = 0;
  int threads = 1;
  int seq_len = 0;
};

// Wall-clock per-sentence forward pass (plus Viterbi when the model carries
// a CRF). Warmup runs are discarded before the statistics.
LatencyStats measure_latency(EncoderModel& model, int seq_len, int reps, int warmup,
                             uint64_t seed);

struct ModelStats {
  int64_t params = 0;
  int64_t payload_bytes = 0;    // tensor payloads as serialized
  int64_t file_bytes = 0;       // full checkpoint file
  int64_t converted_params = 0;  // INT8 tensors
  int64_t converted_bytes = 0;   // INT8 payload + per-tensor scale records
  int64_t converted_fp32_bytes = 0;  // what those tensors would cost at FP32
};

ModelStats model_stats(const std::string& checkpoint_path);

struct BenchEntry {
  std::string name;
  ModelStats stats;
  LatencyStats latency;
  double speedup = 1.0;  // baseline_median / model_median
};

struct BenchReport {
  std::vector<BenchEntry> entries;
  std::string baseline;
  int threads = 1;
  int seq_len = 0;
  int reps = 0;
  int warmup = 0;
  std::string precision;
};

std::string bench_to_json(const BenchReport& report);
std::string render_bench_table(const BenchReport& report);

struct SweepRow {
  int active_layers = 0;
  double macro_f1 = 0.0;
  double token_accuracy = 0.0;
  std::string variant;  // "truncated" or "distilled"
};

// Fig-2-style sweep: evaluates the teacher truncated to k = 1..L blocks
// (no retraining) on the given dataset.
std::vector<SweepRow> truncation_sweep(EncoderModel& teacher, const Dataset& data,
                                       const LabelScheme& scheme, int threads = 1);

std::string sweep_to_csv(const std::vector<SweepRow>& rows);

// Full ablation: per seed, trains the CRF teacher, a linear teacher, the
// three student variants (no-KD, standard KD, CRF-KD) and the quantized
// CRF-KD, evaluates them strictly on the test split, runs the truncation
// sweep and collects latency/size numbers.
struct AblationConfig {
  SynthConfig synth;  // per-seed corpora reseed from `seeds`
  double split_train = 0.8, split_valid = 0.1, split_test = 0.1;
  EncoderConfig teacher;        // vocab_size/num_tags filled from the corpus
  int student_layers = 2;
  std::vector<int> layer_indices;  // empty = default pick
  KDConfig kd;
  TrainConfig teacher_train;
  TrainConfig student_train;
  std::vector<uint64_t> seeds = {1, 2, 3, 4, 5};
  int threads = 1;
  bool with_latency = true;
  int latency_reps = 30;
  int latency_warmup = 5;
  int latency_seq_len = 32;
};

struct AblationModelRow {
  std::string name;
  std::vector<double> macro_f1;  // per seed
  std::vector<double> accuracy, precision, recall;
  std::map<std::string, std::vector<double>> class_f1;

  double mean_f1() const;
};

struct AblationResult {
  std::vector<AblationModelRow> rows;   // table-1 order
  std::vector<SweepRow> sweep;          // per-k means plus the distilled row
  BenchReport latency;                  // measured on the first seed's models
  nlohmann::json summary;
};

AblationResult run_ablation(const AblationConfig& config, std::ostream* progress = nullptr);

std::string ablation_table1(const AblationResult& r);
std::string ablation_table3(const AblationResult& r);

}  // namespace slimtag
