#include "slimtag/distill.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

namespace slimtag {

using nlohmann::json;

void KDConfig::validate() const {
  if (tau <= 0.0) throw ConfigError("kd temperature must be positive");
  if (alpha < 0.0 || alpha > 1.0) throw ConfigError("kd alpha must be in [0, 1]");
}

Tensor soften(const Tensor& logits, double tau) {
  if (tau <= 0.0) throw ConfigError("kd temperature must be positive");
  return softmax_rows(mul_scalar(logits, 1.0 / tau));
}

double kl_term(const Tensor& teacher_soft, const Tensor& student_soft,
               const std::vector<uint8_t>& valid_mask, KLStats* stats) {
  if (!teacher_soft.same_shape(student_soft))
    throw DimensionError("kl_term: shape mismatch");
  if (static_cast<int>(valid_mask.size()) != teacher_soft.rows())
    throw DimensionError("kl_term: mask length mismatch");
  constexpr double kEps = 1e-12;
  double kl = 0.0;
  int64_t clamped = 0;
  for (int i = 0; i < teacher_soft.rows(); ++i) {
    if (!valid_mask[static_cast<size_t>(i)]) continue;
    for (int j = 0; j < teacher_soft.cols(); ++j) {
      const double p = teacher_soft.at(i, j);
      if (p <= 0.0) continue;
      double q = student_soft.at(i, j);
      if (q < kEps) {
        q = kEps;
        ++clamped;
      }
      kl += p * std::log(p / q);
    }
  }
  if (stats) stats->clamped += clamped;
  return round_to_mode(kl);
}

namespace {

struct ValidTokens {
  std::vector<uint8_t> mask;
  std::vector<int> gold_clamped;
  std::vector<double> pick_weight;  // -1/count at valid rows
  int count = 0;
};

ValidTokens scan_gold(const std::vector<int>& gold_tags, int n, int num_tags) {
  if (static_cast<int>(gold_tags.size()) != n)
    throw DimensionError("gold tag length does not match logits");
  ValidTokens v;
  v.mask.assign(static_cast<size_t>(n), 0);
  v.gold_clamped.assign(static_cast<size_t>(n), 0);
  v.pick_weight.assign(static_cast<size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    const int g = gold_tags[static_cast<size_t>(i)];
    if (g == LabelScheme::kIgnoreIndex) continue;
    if (g < 0 || g >= num_tags) throw DataError("gold tag out of range");
    v.mask[static_cast<size_t>(i)] = 1;
    v.gold_clamped[static_cast<size_t>(i)] = g;
    ++v.count;
  }
  if (v.count == 0) throw DataError("no valid tokens in example");
  for (int i = 0; i < n; ++i)
    if (v.mask[static_cast<size_t>(i)])
      v.pick_weight[static_cast<size_t>(i)] = -1.0 / v.count;
  return v;
}

}  // namespace

VarPtr token_ce_loss(Tape& tape, const VarPtr& logits, const std::vector<int>& gold_tags) {
  const ValidTokens v = scan_gold(gold_tags, logits->value.rows(), logits->value.cols());
  VarPtr logp = vlog_softmax_rows(tape, logits);
  return vdot_const(tape, vgather_cols(tape, logp, v.gold_clamped), v.pick_weight);
}

double token_ce_value(const Tensor& logits, const std::vector<int>& gold_tags) {
  const ValidTokens v = scan_gold(gold_tags, logits.rows(), logits.cols());
  const Tensor logp = log_softmax_rows(logits);
  double s = 0.0;
  for (int i = 0; i < logits.rows(); ++i)
    if (v.mask[static_cast<size_t>(i)])
      s -= logp.at(i, v.gold_clamped[static_cast<size_t>(i)]);
  return round_to_mode(s / v.count);
}

VarPtr kd_loss(Tape& tape, const VarPtr& student_logits, const Tensor& teacher_logits,
               const std::vector<int>& gold_tags, const KDConfig& config, KDParts* parts) {
  config.validate();
  if (!student_logits->value.same_shape(teacher_logits))
    throw DimensionError("kd_loss: student and teacher logit shapes disagree");
  const int n = student_logits->value.rows();
  const ValidTokens v = scan_gold(gold_tags, n, student_logits->value.cols());
  const std::vector<uint8_t>& valid = v.mask;
  const int valid_count = v.count;

  // Hard term: mean CE at tau = 1.
  VarPtr ce = token_ce_loss(tape, student_logits, gold_tags);

  // Soft term: tau^2 * mean KL between softened distributions. The teacher
  // side is a constant.
  Tensor teacher_soft = soften(teacher_logits, config.tau);
  VarPtr logq_tau =
      vlog_softmax_rows(tape, vmul_scalar(tape, student_logits, 1.0 / config.tau));
  VarPtr kl_sum = vkl_vs_const(tape, teacher_soft, logq_tau, valid);
  VarPtr kl_mean = vmul_scalar(tape, kl_sum, 1.0 / valid_count);
  VarPtr soft = vmul_scalar(tape, kl_mean, config.tau * config.tau);

  VarPtr total = vadd(tape, vmul_scalar(tape, ce, config.alpha),
                      vmul_scalar(tape, soft, 1.0 - config.alpha));
  if (parts) {
    parts->total = total->value.item();
    parts->ce = ce->value.item();
    parts->kl_mean = kl_mean->value.item();
    parts->soft = soft->value.item();
    parts->valid_tokens = valid_count;
  }
  return total;
}

LogitCache LogitCache::from(std::vector<Tensor> logits) {
  LogitCache c;
  c.logits_ = std::move(logits);
  return c;
}

void LogitCache::write(const std::string& path_prefix, const std::vector<Tensor>& logits) {
  const bool f32 = precision() == Precision::F32;
  const std::string dtype = f32 ? "f32" : "f64";
  std::ofstream idx(path_prefix + ".jsonl");
  std::ofstream bin(path_prefix + ".bin", std::ios::binary);
  if (!idx || !bin) throw IoError("cannot write logit cache: " + path_prefix);
  int64_t offset = 0;
  for (size_t i = 0; i < logits.size(); ++i) {
    const Tensor& t = logits[i];
    const int64_t bytes = t.size() * (f32 ? 4 : 8);
    idx << json{{"index", i},
                {"rows", t.rows()},
                {"cols", t.cols()},
                {"dtype", dtype},
                {"offset", offset},
                {"bytes", bytes}}
               .dump()
        << "\n";
    if (f32) {
      std::vector<float> buf(static_cast<size_t>(t.size()));
      for (int64_t j = 0; j < t.size(); ++j) buf[static_cast<size_t>(j)] = static_cast<float>(t[j]);
      bin.write(reinterpret_cast<const char*>(buf.data()),
                static_cast<std::streamsize>(buf.size() * 4));
    } else {
      bin.write(reinterpret_cast<const char*>(t.data()),
                static_cast<std::streamsize>(t.size() * 8));
    }
    offset += bytes;
  }
  if (!idx || !bin) throw IoError("failed writing logit cache: " + path_prefix);
}

LogitCache LogitCache::read(const std::string& path_prefix) {
  std::ifstream idx(path_prefix + ".jsonl");
  std::ifstream bin(path_prefix + ".bin", std::ios::binary);
  if (!idx || !bin) throw IoError("cannot open logit cache: " + path_prefix);
  LogitCache cache;
  std::string line;
  size_t expect = 0;
  while (std::getline(idx, line)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw IoError("corrupt logit cache index: " + std::string(e.what()));
    }
    if (j.at("index").get<size_t>() != expect)
      throw IoError("logit cache index out of order");
    ++expect;
    const int rows = j.at("rows").get<int>();
    const int cols = j.at("cols").get<int>();
    const std::string dtype = j.at("dtype").get<std::string>();
    const int64_t bytes = j.at("bytes").get<int64_t>();
    bin.seekg(j.at("offset").get<int64_t>());
    const int64_t count = static_cast<int64_t>(rows) * cols;
    std::vector<double> vals(static_cast<size_t>(count));
    if (dtype == "f32") {
      if (bytes != count * 4) throw IoError("corrupt logit cache: byte count mismatch");
      std::vector<float> buf(static_cast<size_t>(count));
      bin.read(reinterpret_cast<char*>(buf.data()), bytes);
      if (bin.gcount() != bytes) throw IoError("corrupt logit cache: truncated payload");
      for (size_t i = 0; i < buf.size(); ++i) vals[i] = buf[i];
    } else if (dtype == "f64") {
      if (bytes != count * 8) throw IoError("corrupt logit cache: byte count mismatch");
      bin.read(reinterpret_cast<char*>(vals.data()), bytes);
      if (bin.gcount() != bytes) throw IoError("corrupt logit cache: truncated payload");
    } else {
      throw IoError("logit cache has unknown dtype: " + dtype);
    }
    cache.logits_.push_back(Tensor::from({rows, cols}, std::move(vals)));
  }
  return cache;
}

}  // namespace slimtag
