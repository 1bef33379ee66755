#include "slimtag/encoder.hpp"

#include <cmath>
#include <numeric>

#include "slimtag/quant.hpp"

namespace slimtag {

void EncoderConfig::validate() const {
  if (num_layers < 0) throw ConfigError("num_layers must be >= 0");
  if (hidden_dim < 1 || num_heads < 1 || ffn_dim < 1)
    throw ConfigError("encoder dimensions must be positive");
  if (hidden_dim % num_heads != 0)
    throw ConfigError("hidden_dim must be divisible by num_heads");
  if (vocab_size < 1 || max_seq_len < 1 || num_tags < 1)
    throw ConfigError("vocab_size, max_seq_len and num_tags must be positive");
  if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("dropout must be in [0, 1)");
}

int LinearLayer::in_features() const {
  return qw ? qw->rows() : w->value.rows();
}

int LinearLayer::out_features() const {
  return qw ? qw->cols() : w->value.cols();
}

namespace {

LinearLayer make_linear(int in, int out, Rng& rng) {
  LinearLayer l;
  l.w = make_param(random_normal({in, out}, rng, 0.02));
  l.b = make_param(Tensor::zeros({out}));
  return l;
}

VarPtr make_norm_gamma(int d) { return make_param(Tensor::full({d}, 1.0)); }
VarPtr make_norm_beta(int d) { return make_param(Tensor::zeros({d})); }

VarPtr linear(Tape& tape, const VarPtr& x, const LinearLayer& l) {
  if (l.qw) return tape.record(qlinear(x->value, *l.qw, l.b->value), {}, nullptr);
  return vbias_add(tape, vmatmul(tape, x, l.w), l.b);
}

VarPtr maybe_dropout(Tape& tape, const VarPtr& x, const EncoderConfig& cfg,
                     const ForwardOptions& opts) {
  if (!opts.training || cfg.dropout == 0.0) return x;
  if (!opts.dropout_rng) throw ConfigError("training forward needs a dropout rng");
  return vdropout(tape, x, cfg.dropout, *opts.dropout_rng);
}

void copy_linear(const LinearLayer& src, LinearLayer& dst) {
  dst.w = make_param(src.w->value);
  dst.b = make_param(src.b->value);
  dst.qw.reset();
}

}  // namespace

EncoderModel build_model(const EncoderConfig& config, uint64_t seed, bool with_crf) {
  config.validate();
  Rng rng(seed);
  EncoderModel m;
  m.config = config;
  m.tok_emb = make_param(random_normal({config.vocab_size, config.hidden_dim}, rng, 0.02));
  m.pos_emb = make_param(random_normal({config.max_seq_len, config.hidden_dim}, rng, 0.02));
  m.blocks.resize(static_cast<size_t>(config.num_layers));
  for (auto& b : m.blocks) {
    b.ln1_gamma = make_norm_gamma(config.hidden_dim);
    b.ln1_beta = make_norm_beta(config.hidden_dim);
    b.wq = make_linear(config.hidden_dim, config.hidden_dim, rng);
    b.wk = make_linear(config.hidden_dim, config.hidden_dim, rng);
    b.wv = make_linear(config.hidden_dim, config.hidden_dim, rng);
    b.wo = make_linear(config.hidden_dim, config.hidden_dim, rng);
    b.ln2_gamma = make_norm_gamma(config.hidden_dim);
    b.ln2_beta = make_norm_beta(config.hidden_dim);
    b.ffn1 = make_linear(config.hidden_dim, config.ffn_dim, rng);
    b.ffn2 = make_linear(config.ffn_dim, config.hidden_dim, rng);
  }
  m.final_gamma = make_norm_gamma(config.hidden_dim);
  m.final_beta = make_norm_beta(config.hidden_dim);
  m.head = make_linear(config.hidden_dim, config.num_tags, rng);
  if (with_crf) m.crf = TransitionMatrix::zeros(config.num_tags);
  return m;
}

std::vector<NamedParam> EncoderModel::named_params() {
  std::vector<NamedParam> out;
  auto add = [&](const std::string& name, const VarPtr& v, bool decay, bool lw = false) {
    out.push_back({name, v, decay, lw});
  };
  auto add_linear = [&](const std::string& prefix, LinearLayer& l) {
    if (!l.qw) add(prefix + ".weight", l.w, true, true);
    add(prefix + ".bias", l.b, false);
  };
  add("embed.token", tok_emb, true);
  add("embed.position", pos_emb, true);
  for (size_t i = 0; i < blocks.size(); ++i) {
    const std::string p = "block." + std::to_string(i);
    auto& b = blocks[i];
    add(p + ".ln1.gamma", b.ln1_gamma, false);
    add(p + ".ln1.beta", b.ln1_beta, false);
    add_linear(p + ".attn.wq", b.wq);
    add_linear(p + ".attn.wk", b.wk);
    add_linear(p + ".attn.wv", b.wv);
    add_linear(p + ".attn.wo", b.wo);
    add(p + ".ln2.gamma", b.ln2_gamma, false);
    add(p + ".ln2.beta", b.ln2_beta, false);
    add_linear(p + ".ffn.w1", b.ffn1);
    add_linear(p + ".ffn.w2", b.ffn2);
  }
  add("final_norm.gamma", final_gamma, false);
  add("final_norm.beta", final_beta, false);
  add_linear("head", head);
  if (crf) add("crf.transitions", crf->scores, false);
  return out;
}

std::vector<VarPtr> EncoderModel::trainable() {
  if (quantized) throw ConfigError("quantized models are not trainable");
  std::vector<VarPtr> out;
  for (auto& p : named_params()) out.push_back(p.var);
  return out;
}

int64_t EncoderModel::param_count() {
  int64_t n = 0;
  for (auto& p : named_params()) n += p.var->value.size();
  auto add_q = [&](const LinearLayer& l) {
    if (l.qw) n += l.qw->size();
  };
  for (auto& b : blocks) {
    add_q(b.wq);
    add_q(b.wk);
    add_q(b.wv);
    add_q(b.wo);
    add_q(b.ffn1);
    add_q(b.ffn2);
  }
  add_q(head);
  return n;
}

VarPtr encoder_forward(Tape& tape, EncoderModel& model, const std::vector<int>& token_ids,
                       const std::vector<uint8_t>& attention_mask, const ForwardOptions& opts) {
  const EncoderConfig& cfg = model.config;
  const int n = static_cast<int>(token_ids.size());
  if (n == 0) throw DataError("empty token sequence");
  if (n > cfg.max_seq_len)
    throw DataError("sequence length " + std::to_string(n) + " exceeds max_seq_len");
  if (attention_mask.size() != token_ids.size())
    throw DimensionError("attention mask length does not match tokens");
  for (int id : token_ids)
    if (id < 0 || id >= cfg.vocab_size)
      throw DataError("token id " + std::to_string(id) + " outside vocabulary");

  std::vector<int> positions(static_cast<size_t>(n));
  std::iota(positions.begin(), positions.end(), 0);
  VarPtr x = vadd(tape, vembedding(tape, model.tok_emb, token_ids),
                  vembedding(tape, model.pos_emb, positions));
  x = maybe_dropout(tape, x, cfg, opts);

  Tensor mask_bias = Tensor::zeros({n});
  for (int j = 0; j < n; ++j)
    if (!attention_mask[static_cast<size_t>(j)]) mask_bias[j] = kNegInf;
  VarPtr mask_bias_c = make_const(std::move(mask_bias));

  const int dh = cfg.hidden_dim / cfg.num_heads;
  const double att_scale = 1.0 / std::sqrt(static_cast<double>(dh));

  for (auto& b : model.blocks) {
    VarPtr h = vlayer_norm(tape, x, b.ln1_gamma, b.ln1_beta);
    VarPtr q = linear(tape, h, b.wq);
    VarPtr k = linear(tape, h, b.wk);
    VarPtr v = linear(tape, h, b.wv);
    std::vector<VarPtr> heads;
    heads.reserve(static_cast<size_t>(cfg.num_heads));
    for (int i = 0; i < cfg.num_heads; ++i) {
      VarPtr qh = vslice_cols(tape, q, i * dh, (i + 1) * dh);
      VarPtr kh = vslice_cols(tape, k, i * dh, (i + 1) * dh);
      VarPtr vh = vslice_cols(tape, v, i * dh, (i + 1) * dh);
      VarPtr scores = vmul_scalar(tape, vmatmul(tape, qh, vtranspose(tape, kh)), att_scale);
      scores = vbias_add(tape, scores, mask_bias_c);
      VarPtr probs = vsoftmax_rows(tape, scores);
      heads.push_back(vmatmul(tape, probs, vh));
    }
    VarPtr att = linear(tape, vconcat_cols(tape, heads), b.wo);
    att = maybe_dropout(tape, att, cfg, opts);
    x = vadd(tape, x, att);

    VarPtr h2 = vlayer_norm(tape, x, b.ln2_gamma, b.ln2_beta);
    VarPtr f = vgelu(tape, linear(tape, h2, b.ffn1));
    f = maybe_dropout(tape, f, cfg, opts);
    f = linear(tape, f, b.ffn2);
    f = maybe_dropout(tape, f, cfg, opts);
    x = vadd(tape, x, f);
  }
  x = vlayer_norm(tape, x, model.final_gamma, model.final_beta);
  return linear(tape, x, model.head);
}

Tensor emissions(EncoderModel& model, const std::vector<int>& token_ids,
                 const std::vector<uint8_t>& attention_mask) {
  Tape tape(false);
  return encoder_forward(tape, model, token_ids, attention_mask)->value;
}

std::vector<int> default_layer_indices(int teacher_layers, int student_layers) {
  if (student_layers < 1 || student_layers > teacher_layers)
    throw ConfigError("student depth must be between 1 and the teacher depth");
  if (student_layers == 1) return {teacher_layers};
  std::vector<int> out;
  out.reserve(static_cast<size_t>(student_layers));
  const int span = teacher_layers - 1, slots = student_layers - 1;
  for (int i = 0; i < student_layers; ++i)
    out.push_back(1 + (span * i + slots - 1) / slots);  // ceil -> ties round up
  out.front() = 1;
  out.back() = teacher_layers;
  return out;
}

EncoderModel init_student_from_teacher(EncoderModel& teacher, const EncoderConfig& student_config,
                                       const std::vector<int>& layer_indices, bool with_crf,
                                       uint64_t seed) {
  student_config.validate();
  if (teacher.quantized) throw ConfigError("cannot transfer layers from a quantized teacher");
  const EncoderConfig& tc = teacher.config;
  if (student_config.hidden_dim != tc.hidden_dim || student_config.vocab_size != tc.vocab_size ||
      student_config.num_tags != tc.num_tags || student_config.ffn_dim != tc.ffn_dim ||
      student_config.max_seq_len != tc.max_seq_len)
    throw DimensionError("student dimensions do not match the teacher");
  if (static_cast<int>(layer_indices.size()) != student_config.num_layers)
    throw DimensionError("layer index count does not match student depth");
  for (size_t i = 0; i < layer_indices.size(); ++i) {
    if (layer_indices[i] < 1 || layer_indices[i] > tc.num_layers)
      throw DimensionError("layer index out of range: " + std::to_string(layer_indices[i]));
    if (i > 0 && layer_indices[i] <= layer_indices[i - 1])
      throw DimensionError("layer indices must be strictly ascending");
  }

  EncoderModel student = build_model(student_config, seed, with_crf);
  student.tok_emb = make_param(teacher.tok_emb->value);
  student.pos_emb = make_param(teacher.pos_emb->value);
  for (size_t k = 0; k < layer_indices.size(); ++k) {
    const BlockParams& src = teacher.blocks[static_cast<size_t>(layer_indices[k] - 1)];
    BlockParams& dst = student.blocks[k];
    dst.ln1_gamma = make_param(src.ln1_gamma->value);
    dst.ln1_beta = make_param(src.ln1_beta->value);
    copy_linear(src.wq, dst.wq);
    copy_linear(src.wk, dst.wk);
    copy_linear(src.wv, dst.wv);
    copy_linear(src.wo, dst.wo);
    dst.ln2_gamma = make_param(src.ln2_gamma->value);
    dst.ln2_beta = make_param(src.ln2_beta->value);
    copy_linear(src.ffn1, dst.ffn1);
    copy_linear(src.ffn2, dst.ffn2);
  }
  student.final_gamma = make_param(teacher.final_gamma->value);
  student.final_beta = make_param(teacher.final_beta->value);
  copy_linear(teacher.head, student.head);
  return student;
}

EncoderModel truncate(const EncoderModel& model, int k) {
  if (k < 1 || k > model.config.num_layers)
    throw ConfigError("truncation depth out of range");
  EncoderModel view = model;
  view.blocks.resize(static_cast<size_t>(k));
  view.config.num_layers = k;
  return view;
}

}  // namespace slimtag
