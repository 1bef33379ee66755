#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "slimtag/distill.hpp"
#include "slimtag/pipeline.hpp"

namespace slimtag {

struct TrainConfig {
  double learning_rate = 3e-5;
  double weight_decay = 0.01;
  int batch_size = 16;
  int max_epochs = 10;
  double warmup_fraction = 0.05;
  int patience = 3;  // validation evaluations without improvement
  uint64_t seed = 0;
  int eval_every = 0;  // steps; 0 = once per epoch
  double clip_norm = 1.0;

  void validate() const;
};

struct AdamWState {
  Tensor m, v;
};

// One decoupled-weight-decay update (beta1 0.9, beta2 0.999, eps 1e-8) with
// bias-corrected moments; `t` is the 1-based step count.
void adamw_step(Tensor& param, const Tensor& grad, AdamWState& state, int64_t t, double lr,
                double weight_decay);

// Linear 0 -> peak over the warmup steps, then linear peak -> 0.
double lr_schedule(int64_t step, int64_t total_steps, double peak_lr, double warmup_fraction);

class AdamW {
 public:
  AdamW(std::vector<NamedParam> params, double weight_decay);

  void zero_grad();
  double grad_norm() const;
  void clip_grad_norm(double max_norm);
  void scale_grads(double factor);
  void step(double lr);
  int64_t steps_done() const { return t_; }

 private:
  struct Slot {
    NamedParam param;
    AdamWState state;
  };
  std::vector<Slot> slots_;
  double weight_decay_;
  int64_t t_ = 0;
};

struct TrainLog {
  std::vector<nlohmann::json> records;

  void add(nlohmann::json j) { records.push_back(std::move(j)); }
  void save_jsonl(const std::string& path) const;
};

struct TrainOutcome {
  TrainLog log;
  double best_val_macro_f1 = 0.0;
  int64_t best_step = 0;
  std::string stop_reason;  // "early_stop" or "max_epochs"
  int64_t steps = 0;
};

// Teacher objective: per-sentence CRF NLL when the model carries a CRF,
// otherwise mean token cross-entropy. Early-stops on validation strict
// macro-F1 and restores the best parameters.
TrainOutcome train_teacher(EncoderModel& model, const Dataset& train, const Dataset& valid,
                           const LabelScheme& scheme, const TrainConfig& config);

// Student objective: kd_loss against cached teacher emissions, aligned by
// dataset index. alpha = 1 degenerates to plain CE training (no-KD).
TrainOutcome train_student(EncoderModel& student, const LogitCache& cache, const Dataset& train,
                           const Dataset& valid, const LogitCache* valid_cache,
                           const LabelScheme& scheme, const KDConfig& kd,
                           const TrainConfig& config);

}  // namespace slimtag
