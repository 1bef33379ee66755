#include "slimtag/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include <json.hpp>

#include "slimtag/version.hpp"

namespace slimtag {

using nlohmann::json;

namespace {

json config_to_json(const EncoderConfig& c) {
  return json{{"num_layers", c.num_layers},   {"hidden_dim", c.hidden_dim},
              {"num_heads", c.num_heads},     {"ffn_dim", c.ffn_dim},
              {"vocab_size", c.vocab_size},   {"max_seq_len", c.max_seq_len},
              {"num_tags", c.num_tags},       {"dropout", c.dropout}};
}

EncoderConfig config_from_json(const json& j) {
  EncoderConfig c;
  c.num_layers = j.at("num_layers").get<int>();
  c.hidden_dim = j.at("hidden_dim").get<int>();
  c.num_heads = j.at("num_heads").get<int>();
  c.ffn_dim = j.at("ffn_dim").get<int>();
  c.vocab_size = j.at("vocab_size").get<int>();
  c.max_seq_len = j.at("max_seq_len").get<int>();
  c.num_tags = j.at("num_tags").get<int>();
  c.dropout = j.at("dropout").get<double>();
  return c;
}

struct PendingTensor {
  const Tensor* fp = nullptr;
  const QuantizedTensor* q = nullptr;
};

// Collects every persistable tensor of the model, FP and INT8.
std::map<std::string, PendingTensor> collect(EncoderModel& model) {
  std::map<std::string, PendingTensor> out;
  for (auto& p : model.named_params()) out[p.name] = {&p.var->value, nullptr};
  auto add_q = [&](const std::string& name, const LinearLayer& l) {
    if (l.qw) out[name + ".weight"] = {nullptr, &*l.qw};
  };
  for (size_t i = 0; i < model.blocks.size(); ++i) {
    const std::string p = "block." + std::to_string(i);
    auto& b = model.blocks[i];
    add_q(p + ".attn.wq", b.wq);
    add_q(p + ".attn.wk", b.wk);
    add_q(p + ".attn.wv", b.wv);
    add_q(p + ".attn.wo", b.wo);
    add_q(p + ".ffn.w1", b.ffn1);
    add_q(p + ".ffn.w2", b.ffn2);
  }
  add_q("head", model.head);
  return out;
}

void write_u64_le(std::ostream& out, uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(buf), 8);
}

uint64_t read_u64_le(std::istream& in) {
  unsigned char buf[8];
  in.read(reinterpret_cast<char*>(buf), 8);
  if (in.gcount() != 8) throw IoError("corrupt checkpoint: truncated header length");
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(buf[i]) << (8 * i);
  return v;
}

}  // namespace

void save_checkpoint(EncoderModel& model, const LabelScheme& scheme, const std::string& path) {
  const bool f32 = precision() == Precision::F32;
  const std::string fp_dtype = f32 ? "f32" : "f64";
  const int fp_width = f32 ? 4 : 8;

  auto tensors = collect(model);
  json table = json::object();
  int64_t offset = 0;
  for (const auto& [name, t] : tensors) {  // std::map: sorted-name order
    json entry;
    if (t.q) {
      entry["dtype"] = "i8";
      entry["shape"] = t.q->shape;
      entry["bytes"] = t.q->size();
      entry["scale"] = t.q->scale;
    } else {
      entry["dtype"] = fp_dtype;
      entry["shape"] = t.fp->shape();
      entry["bytes"] = t.fp->size() * fp_width;
    }
    entry["offset"] = offset;
    offset += entry["bytes"].get<int64_t>();
    table[name] = entry;
  }

  json header{{"config", config_to_json(model.config)},
              {"creation", {{"tool", kToolName}, {"version", kVersion}}},
              {"has_crf", model.has_crf()},
              {"label_scheme", {{"classes", scheme.classes()}}},
              {"precision", fp_dtype},
              {"quantized", model.quantized},
              {"tensors", table}};
  const std::string header_str = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint: " + path);
  out.write(kCheckpointMagic, 8);
  write_u64_le(out, header_str.size());
  out.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));
  for (const auto& [name, t] : tensors) {
    (void)name;
    if (t.q) {
      out.write(reinterpret_cast<const char*>(t.q->values.data()),
                static_cast<std::streamsize>(t.q->size()));
    } else if (f32) {
      std::vector<float> buf(static_cast<size_t>(t.fp->size()));
      for (int64_t i = 0; i < t.fp->size(); ++i) buf[static_cast<size_t>(i)] = static_cast<float>((*t.fp)[i]);
      out.write(reinterpret_cast<const char*>(buf.data()),
                static_cast<std::streamsize>(buf.size() * 4));
    } else {
      out.write(reinterpret_cast<const char*>(t.fp->data()),
                static_cast<std::streamsize>(t.fp->size() * 8));
    }
  }
  if (!out) throw IoError("failed writing checkpoint payload: " + path);
}

namespace {

CheckpointInfo parse_header(std::istream& in, const std::string& path) {
  char magic[8];
  in.read(magic, 8);
  if (in.gcount() != 8 || std::memcmp(magic, kCheckpointMagic, 8) != 0)
    throw IoError("corrupt checkpoint: bad magic in " + path);
  const uint64_t header_len = read_u64_le(in);
  std::string header_str(header_len, '\0');
  in.read(header_str.data(), static_cast<std::streamsize>(header_len));
  if (static_cast<uint64_t>(in.gcount()) != header_len)
    throw IoError("corrupt checkpoint: truncated header in " + path);
  json header;
  try {
    header = json::parse(header_str);
  } catch (const json::parse_error& e) {
    throw IoError("corrupt checkpoint: bad header JSON in " + path + ": " + e.what());
  }
  CheckpointInfo info;
  try {
    info.config = config_from_json(header.at("config"));
    info.scheme = LabelScheme(header.at("label_scheme").at("classes").get<std::vector<std::string>>());
    info.has_crf = header.at("has_crf").get<bool>();
    info.quantized = header.at("quantized").get<bool>();
    info.precision = header.at("precision").get<std::string>();
    for (const auto& [name, e] : header.at("tensors").items()) {
      TensorEntry t;
      t.dtype = e.at("dtype").get<std::string>();
      t.shape = e.at("shape").get<std::vector<int>>();
      t.offset = e.at("offset").get<int64_t>();
      t.bytes = e.at("bytes").get<int64_t>();
      if (e.contains("scale")) t.scale = e.at("scale").get<double>();
      info.tensors[name] = t;
    }
  } catch (const json::exception& e) {
    throw IoError("corrupt checkpoint: header fields missing in " + path + ": " + e.what());
  }
  return info;
}

}  // namespace

CheckpointInfo read_checkpoint_info(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  return parse_header(in, path);
}

EncoderModel load_checkpoint(const std::string& path, LabelScheme* scheme_out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  CheckpointInfo info = parse_header(in, path);
  const std::streamoff payload_base = in.tellg();

  EncoderModel model = build_model(info.config, 0, info.has_crf);
  if (scheme_out) *scheme_out = info.scheme;

  auto read_entry = [&](const std::string& name,
                        const std::vector<int>& want_shape) -> Tensor {
    auto it = info.tensors.find(name);
    if (it == info.tensors.end()) throw IoError("checkpoint missing tensor: " + name);
    const TensorEntry& e = it->second;
    if (e.shape != want_shape)
      throw IoError("checkpoint tensor shape mismatch: " + name);
    if (e.dtype == "i8")
      throw IoError("checkpoint tensor has unexpected INT8 payload: " + name);
    in.seekg(payload_base + e.offset);
    const int64_t count = shape_numel(e.shape);
    Tensor t;
    if (e.dtype == "f32") {
      if (e.bytes != count * 4) throw IoError("corrupt checkpoint: byte count mismatch for " + name);
      std::vector<float> buf(static_cast<size_t>(count));
      in.read(reinterpret_cast<char*>(buf.data()), e.bytes);
      if (in.gcount() != e.bytes) throw IoError("corrupt checkpoint: truncated payload for " + name);
      std::vector<double> vals(buf.begin(), buf.end());
      t = Tensor::from(e.shape, std::move(vals));
    } else if (e.dtype == "f64") {
      if (e.bytes != count * 8) throw IoError("corrupt checkpoint: byte count mismatch for " + name);
      std::vector<double> vals(static_cast<size_t>(count));
      in.read(reinterpret_cast<char*>(vals.data()), e.bytes);
      if (in.gcount() != e.bytes) throw IoError("corrupt checkpoint: truncated payload for " + name);
      t = Tensor::from(e.shape, std::move(vals));
    } else {
      throw IoError("checkpoint tensor has unknown dtype: " + e.dtype);
    }
    return t;
  };

  auto load_fp = [&](const std::string& name, VarPtr& var) {
    var = make_param(read_entry(name, var->value.shape()));
  };
  auto load_linear = [&](const std::string& name, LinearLayer& l) {
    const std::vector<int> wshape = {l.w->value.rows(), l.w->value.cols()};
    auto it = info.tensors.find(name + ".weight");
    if (it == info.tensors.end()) throw IoError("checkpoint missing tensor: " + name + ".weight");
    if (it->second.dtype == "i8") {
      const TensorEntry& e = it->second;
      if (e.shape != wshape) throw IoError("checkpoint tensor shape mismatch: " + name + ".weight");
      const int64_t count = shape_numel(e.shape);
      if (e.bytes != count) throw IoError("corrupt checkpoint: byte count mismatch for " + name);
      in.seekg(payload_base + e.offset);
      QuantizedTensor q;
      q.shape = e.shape;
      q.scale = e.scale;
      q.values.resize(static_cast<size_t>(count));
      in.read(reinterpret_cast<char*>(q.values.data()), e.bytes);
      if (in.gcount() != e.bytes)
        throw IoError("corrupt checkpoint: truncated payload for " + name);
      l.qw = std::move(q);
      l.w = make_const(Tensor::zeros({0}));
    } else {
      l.w = make_param(read_entry(name + ".weight", wshape));
    }
    l.b = make_param(read_entry(name + ".bias", {l.b->value.dim(0)}));
  };

  load_fp("embed.token", model.tok_emb);
  load_fp("embed.position", model.pos_emb);
  for (size_t i = 0; i < model.blocks.size(); ++i) {
    const std::string p = "block." + std::to_string(i);
    auto& b = model.blocks[i];
    load_fp(p + ".ln1.gamma", b.ln1_gamma);
    load_fp(p + ".ln1.beta", b.ln1_beta);
    load_linear(p + ".attn.wq", b.wq);
    load_linear(p + ".attn.wk", b.wk);
    load_linear(p + ".attn.wv", b.wv);
    load_linear(p + ".attn.wo", b.wo);
    load_fp(p + ".ln2.gamma", b.ln2_gamma);
    load_fp(p + ".ln2.beta", b.ln2_beta);
    load_linear(p + ".ffn.w1", b.ffn1);
    load_linear(p + ".ffn.w2", b.ffn2);
  }
  load_fp("final_norm.gamma", model.final_gamma);
  load_fp("final_norm.beta", model.final_beta);
  load_linear("head", model.head);
  if (info.has_crf) {
    load_fp("crf.transitions", model.crf->scores);
    model.crf->validate();
  }
  model.quantized = info.quantized;
  return model;
}

}  // namespace slimtag
