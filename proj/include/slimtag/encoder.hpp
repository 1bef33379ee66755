#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "slimtag/crf.hpp"
#include "slimtag/ops.hpp"
#include "slimtag/quant_types.hpp"
#include "slimtag/tape.hpp"

namespace slimtag {

struct EncoderConfig {
  int num_layers = 4;
  int hidden_dim = 64;
  int num_heads = 4;
  int ffn_dim = 128;
  int vocab_size = 256;
  int max_seq_len = 64;
  int num_tags = 13;
  double dropout = 0.1;

  void validate() const;
  bool operator==(const EncoderConfig&) const = default;
};

// A fully-connected layer; weight is [in x out] so y = x W + b. When `qw`
// is set the layer runs the INT8 path and `w` holds no payload.
struct LinearLayer {
  VarPtr w;
  VarPtr b;
  std::optional<QuantizedTensor> qw;

  int in_features() const;
  int out_features() const;
};

struct BlockParams {
  VarPtr ln1_gamma, ln1_beta;
  LinearLayer wq, wk, wv, wo;
  VarPtr ln2_gamma, ln2_beta;
  LinearLayer ffn1, ffn2;
};

struct NamedParam {
  std::string name;
  VarPtr var;
  bool decay = true;      // excluded for biases, norms, transitions
  bool linear_weight = false;  // quantization targets
};

// Pre-norm transformer encoder with learned positions, a linear tag head
// and an optional CRF on top.
struct EncoderModel {
  EncoderConfig config;
  VarPtr tok_emb;  // [vocab x d]
  VarPtr pos_emb;  // [max_seq_len x d]
  std::vector<BlockParams> blocks;
  VarPtr final_gamma, final_beta;
  LinearLayer head;
  std::optional<TransitionMatrix> crf;
  bool quantized = false;

  bool has_crf() const { return crf.has_value(); }
  std::vector<NamedParam> named_params();
  std::vector<VarPtr> trainable();
  int64_t param_count();
};

EncoderModel build_model(const EncoderConfig& config, uint64_t seed, bool with_crf);

struct ForwardOptions {
  bool training = false;
  Rng* dropout_rng = nullptr;  // required when training and dropout > 0
};

// Emission logits [n x num_tags]. Masked (pad) positions never influence
// unmasked outputs: their keys are removed from every attention softmax.
VarPtr encoder_forward(Tape& tape, EncoderModel& model, const std::vector<int>& token_ids,
                       const std::vector<uint8_t>& attention_mask,
                       const ForwardOptions& opts = {});

// Inference-only convenience; runs a non-recording tape.
Tensor emissions(EncoderModel& model, const std::vector<int>& token_ids,
                 const std::vector<uint8_t>& attention_mask);

// Default layer pick generalizing "first and last, evenly spaced, ties
// rounded up": 1-based indices; 12 -> 4 gives {1, 5, 9, 12}.
std::vector<int> default_layer_indices(int teacher_layers, int student_layers);

// Builds the student and copies teacher block layer_indices[k] into student
// block k (deep copies). Embeddings and the head transfer directly.
EncoderModel init_student_from_teacher(EncoderModel& teacher, const EncoderConfig& student_config,
                                       const std::vector<int>& layer_indices, bool with_crf,
                                       uint64_t seed);

// View of the model running only the first k blocks; shares parameters.
EncoderModel truncate(const EncoderModel& model, int k);

}  // namespace slimtag
