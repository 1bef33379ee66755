#include "slimtag/trainer.hpp"

#include <cmath>
#include <fstream>

namespace slimtag {

using nlohmann::json;

void TrainConfig::validate() const {
  if (learning_rate <= 0.0 || weight_decay < 0.0) throw ConfigError("bad optimizer settings");
  if (batch_size < 1 || max_epochs < 1) throw ConfigError("batch_size and max_epochs must be positive");
  if (warmup_fraction < 0.0 || warmup_fraction > 1.0)
    throw ConfigError("warmup_fraction must be in [0, 1]");
  if (patience < 1) throw ConfigError("patience must be >= 1");
  if (eval_every < 0) throw ConfigError("eval_every must be >= 0");
  if (clip_norm <= 0.0) throw ConfigError("clip_norm must be positive");
}

void adamw_step(Tensor& param, const Tensor& grad, AdamWState& state, int64_t t, double lr,
                double weight_decay) {
  if (!param.same_shape(grad)) throw DimensionError("adamw_step: shape mismatch");
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  if (state.m.size() != param.size()) {
    state.m = Tensor::zeros(param.shape());
    state.v = Tensor::zeros(param.shape());
  }
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(t));
  for (int64_t i = 0; i < param.size(); ++i) {
    const double g = grad[i];
    state.m[i] = b1 * state.m[i] + (1.0 - b1) * g;
    state.v[i] = b2 * state.v[i] + (1.0 - b2) * g * g;
    const double mhat = state.m[i] / bc1;
    const double vhat = state.v[i] / bc2;
    double p = param[i];
    p -= lr * weight_decay * p;  // decoupled decay
    p -= lr * mhat / (std::sqrt(vhat) + eps);
    param[i] = round_to_mode(p);
  }
  param.check_finite("adamw_step");
}

double lr_schedule(int64_t step, int64_t total_steps, double peak_lr, double warmup_fraction) {
  if (total_steps < 1) throw ConfigError("lr_schedule: total_steps must be positive");
  if (step < 0 || step > total_steps) throw ConfigError("lr_schedule: step out of range");
  const double warmup = warmup_fraction * static_cast<double>(total_steps);
  if (warmup > 0.0 && static_cast<double>(step) <= warmup)
    return peak_lr * (static_cast<double>(step) / warmup);
  const double decay_span = static_cast<double>(total_steps) - warmup;
  if (decay_span <= 0.0) return 0.0;
  return peak_lr * ((static_cast<double>(total_steps) - static_cast<double>(step)) / decay_span);
}

AdamW::AdamW(std::vector<NamedParam> params, double weight_decay) : weight_decay_(weight_decay) {
  slots_.reserve(params.size());
  for (auto& p : params) slots_.push_back({std::move(p), {}});
}

void AdamW::zero_grad() {
  for (auto& s : slots_) {
    Tensor& g = s.param.var->ensure_grad();
    std::fill(g.data(), g.data() + g.size(), 0.0);
  }
}

double AdamW::grad_norm() const {
  double sq = 0.0;
  for (const auto& s : slots_) {
    const Tensor& g = s.param.var->grad;
    for (int64_t i = 0; i < g.size(); ++i) sq += g[i] * g[i];
  }
  return std::sqrt(sq);
}

void AdamW::clip_grad_norm(double max_norm) {
  const double norm = grad_norm();
  if (norm <= max_norm || norm == 0.0) return;
  scale_grads(max_norm / norm);
}

void AdamW::scale_grads(double factor) {
  for (auto& s : slots_) {
    Tensor& g = s.param.var->ensure_grad();
    for (int64_t i = 0; i < g.size(); ++i) g[i] *= factor;
  }
}

void AdamW::step(double lr) {
  ++t_;
  for (auto& s : slots_) {
    const double wd = s.param.decay ? weight_decay_ : 0.0;
    adamw_step(s.param.var->value, s.param.var->grad, s.state, t_, lr, wd);
  }
}

void TrainLog::save_jsonl(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write train log: " + path);
  for (const auto& r : records) out << r.dump() << "\n";
}

namespace {

std::vector<Tensor> snapshot_params(std::vector<NamedParam>& params) {
  std::vector<Tensor> out;
  out.reserve(params.size());
  for (auto& p : params) out.push_back(p.var->value);
  return out;
}

void restore_params(std::vector<NamedParam>& params, const std::vector<Tensor>& snap) {
  for (size_t i = 0; i < params.size(); ++i) params[i].var->value = snap[i];
}

struct Objective {
  // Returns the loss node; fills optional component values.
  std::function<VarPtr(Tape&, const VarPtr& logits, size_t index, const TokenizedExample& ex,
                       KDParts* parts)>
      loss;
  // Validation loss (no gradients); index is into the validation set.
  std::function<double(const Tensor& logits, size_t index, const TokenizedExample& ex)> val_loss;
};

TrainOutcome run_training(EncoderModel& model, const Dataset& train, const Dataset& valid,
                          const LabelScheme& scheme, const TrainConfig& config,
                          const Objective& objective, bool log_parts) {
  config.validate();
  if (train.empty() || valid.empty()) throw DataError("training needs non-empty train/valid sets");

  AdamW opt(model.named_params(), config.weight_decay);
  auto params = model.named_params();
  Rng shuffle_rng(config.seed);
  Rng dropout_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);

  const int64_t steps_per_epoch =
      (static_cast<int64_t>(train.size()) + config.batch_size - 1) / config.batch_size;
  const int64_t total_steps = steps_per_epoch * config.max_epochs;

  TrainOutcome out;
  std::vector<Tensor> best_snapshot = snapshot_params(params);
  double best_f1 = -1.0;
  int64_t best_step = 0;
  int bad_evals = 0;
  bool stop = false;
  int64_t step = 0;

  auto run_eval = [&](int epoch) {
    const auto report = evaluate_dataset(model, valid, scheme, 1);
    double vloss = 0.0;
    for (size_t i = 0; i < valid.size(); ++i) {
      const Tensor logits = emissions(model, valid[i].token_ids, valid[i].attention_mask);
      vloss += objective.val_loss(logits, i, valid[i]);
    }
    vloss /= static_cast<double>(valid.size());
    const bool improved = report.macro_f1 > best_f1;
    if (improved) {
      best_f1 = report.macro_f1;
      best_step = step;
      best_snapshot = snapshot_params(params);
      bad_evals = 0;
    } else {
      ++bad_evals;
    }
    out.log.add(json{{"type", "eval"},
                     {"step", step},
                     {"epoch", epoch},
                     {"val_macro_f1", report.macro_f1},
                     {"val_loss", vloss},
                     {"best", improved}});
    if (bad_evals >= config.patience) stop = true;
  };

  for (int epoch = 0; epoch < config.max_epochs && !stop; ++epoch) {
    std::vector<size_t> order(train.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    shuffle_rng.shuffle(order);

    for (int64_t b = 0; b < steps_per_epoch && !stop; ++b) {
      const size_t lo = static_cast<size_t>(b) * config.batch_size;
      const size_t hi = std::min(train.size(), lo + config.batch_size);
      if (lo >= hi) break;
      opt.zero_grad();
      double batch_loss = 0.0, batch_ce = 0.0, batch_kl = 0.0;
      for (size_t i = lo; i < hi; ++i) {
        const TokenizedExample& ex = train[order[i]];
        Tape tape(true);
        ForwardOptions fo;
        fo.training = true;
        fo.dropout_rng = &dropout_rng;
        VarPtr logits = encoder_forward(tape, model, ex.token_ids, ex.attention_mask, fo);
        KDParts parts;
        VarPtr loss = objective.loss(tape, logits, order[i], ex, log_parts ? &parts : nullptr);
        const double lv = loss->value.item();
        if (!std::isfinite(lv))
          throw NumericError("training diverged: non-finite loss at step " + std::to_string(step));
        batch_loss += lv;
        batch_ce += parts.ce;
        batch_kl += parts.soft;
        tape.backward(loss);
      }
      const double inv = 1.0 / static_cast<double>(hi - lo);
      batch_loss *= inv;
      opt.scale_grads(inv);
      opt.clip_grad_norm(config.clip_norm);
      ++step;
      const double lr = lr_schedule(step, total_steps, config.learning_rate, config.warmup_fraction);
      opt.step(lr);
      if (model.crf) model.crf->reset_sentinels();

      json rec{{"type", "step"}, {"step", step}, {"epoch", epoch}, {"lr", lr}, {"loss", batch_loss}};
      if (log_parts) {
        rec["ce"] = batch_ce * inv;
        rec["soft"] = batch_kl * inv;
      }
      out.log.add(std::move(rec));

      if (config.eval_every > 0 && step % config.eval_every == 0) run_eval(epoch);
    }
    if (config.eval_every == 0 && !stop) run_eval(epoch);
  }

  out.stop_reason = stop ? "early_stop" : "max_epochs";
  out.best_val_macro_f1 = best_f1;
  out.best_step = best_step;
  out.steps = step;
  restore_params(params, best_snapshot);
  if (model.crf) model.crf->reset_sentinels();
  out.log.add(json{{"type", "stop"},
                   {"reason", out.stop_reason},
                   {"best_step", best_step},
                   {"best_val_macro_f1", best_f1},
                   {"steps", step}});
  return out;
}

}  // namespace

TrainOutcome train_teacher(EncoderModel& model, const Dataset& train, const Dataset& valid,
                           const LabelScheme& scheme, const TrainConfig& config) {
  Objective obj;
  if (model.has_crf()) {
    obj.loss = [&model](Tape& tape, const VarPtr& logits, size_t, const TokenizedExample& ex,
                        KDParts*) {
      return crf_nll_loss(tape, logits, *model.crf, ex.tag_ids, scoring_mask(ex));
    };
    obj.val_loss = [&model](const Tensor& logits, size_t, const TokenizedExample& ex) {
      const auto mask = scoring_mask(ex);
      EmissionView em{logits, mask};
      return nll(em, *model.crf, ex.tag_ids);
    };
  } else {
    obj.loss = [](Tape& tape, const VarPtr& logits, size_t, const TokenizedExample& ex, KDParts*) {
      return token_ce_loss(tape, logits, ex.tag_ids);
    };
    obj.val_loss = [](const Tensor& logits, size_t, const TokenizedExample& ex) {
      return token_ce_value(logits, ex.tag_ids);
    };
  }
  return run_training(model, train, valid, scheme, config, obj, false);
}

TrainOutcome train_student(EncoderModel& student, const LogitCache& cache, const Dataset& train,
                           const Dataset& valid, const LogitCache* valid_cache,
                           const LabelScheme& scheme, const KDConfig& kd,
                           const TrainConfig& config) {
  kd.validate();
  if (student.has_crf()) throw ConfigError("distilled students use a linear head, not a CRF");
  if (cache.size() != train.size())
    throw DataError("teacher logit cache does not match the training set size");
  for (size_t i = 0; i < train.size(); ++i) {
    if (cache.at(i).rows() != static_cast<int>(train[i].size()))
      throw DataError("teacher logit cache row " + std::to_string(i) +
                      " does not match the tokenized example");
  }
  if (valid_cache && valid_cache->size() != valid.size())
    throw DataError("validation logit cache does not match the validation set size");

  Objective obj;
  obj.loss = [&cache, &kd](Tape& tape, const VarPtr& logits, size_t index,
                           const TokenizedExample& ex, KDParts* parts) {
    return kd_loss(tape, logits, cache.at(index), ex.tag_ids, kd, parts);
  };
  obj.val_loss = [valid_cache, &kd](const Tensor& logits, size_t index,
                                    const TokenizedExample& ex) {
    if (!valid_cache) return token_ce_value(logits, ex.tag_ids);
    Tape tape(false);
    KDParts parts;
    kd_loss(tape, make_const(logits), valid_cache->at(index), ex.tag_ids, kd, &parts);
    return parts.total;
  };
  return run_training(student, train, valid, scheme, config, obj, true);
}

}  // namespace slimtag
