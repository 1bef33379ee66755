#include "slimtag/runconfig.hpp"

#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>

extern char** environ;

namespace slimtag {

using nlohmann::json;

namespace {

void merge_into(json& base, const json& overlay) {
  if (!overlay.is_object() || !base.is_object()) {
    base = overlay;
    return;
  }
  for (const auto& [k, v] : overlay.items()) {
    if (base.contains(k) && base[k].is_object() && v.is_object())
      merge_into(base[k], v);
    else
      base[k] = v;
  }
}

}  // namespace

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("bad JSON in config " + path + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config root must be an object: " + path);
  if (j.contains("include")) {
    const std::string inc = j.at("include").get<std::string>();
    j.erase("include");
    const auto dir = std::filesystem::path(path).parent_path();
    json base = load_config_file((dir / inc).string());
    merge_into(base, j);
    return base;
  }
  return j;
}

void apply_override(json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override must look like key.path=value: " + assignment);
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;  // plain string
  }
  json* cur = &config;
  size_t pos = 0;
  while (true) {
    const size_t dot = key.find('.', pos);
    const std::string part = key.substr(pos, dot == std::string::npos ? dot : dot - pos);
    if (part.empty()) throw ConfigError("bad override key: " + key);
    if (dot == std::string::npos) {
      (*cur)[part] = value;
      break;
    }
    if (!cur->contains(part) || !(*cur)[part].is_object()) (*cur)[part] = json::object();
    cur = &(*cur)[part];
    pos = dot + 1;
  }
}

void apply_env_overrides(json& config) {
  constexpr const char* kPrefix = "SLIMTAG_";
  for (char** env = environ; env && *env; ++env) {
    const std::string entry(*env);
    if (entry.rfind(kPrefix, 0) != 0) continue;
    const auto eq = entry.find('=');
    if (eq == std::string::npos) continue;
    std::string key = entry.substr(std::string(kPrefix).size(), eq - std::string(kPrefix).size());
    std::string value = entry.substr(eq + 1);
    // TRAIN__LEARNING_RATE -> train.learning_rate
    std::string dotted;
    for (size_t i = 0; i < key.size(); ++i) {
      if (key[i] == '_' && i + 1 < key.size() && key[i + 1] == '_') {
        dotted += '.';
        ++i;
      } else {
        dotted += static_cast<char>(std::tolower(static_cast<unsigned char>(key[i])));
      }
    }
    apply_override(config, dotted + "=" + value);
  }
}

EncoderConfig encoder_config_from_json(const json& j) {
  EncoderConfig c;
  if (j.contains("num_layers")) c.num_layers = j.at("num_layers").get<int>();
  if (j.contains("hidden_dim")) c.hidden_dim = j.at("hidden_dim").get<int>();
  if (j.contains("num_heads")) c.num_heads = j.at("num_heads").get<int>();
  if (j.contains("ffn_dim")) c.ffn_dim = j.at("ffn_dim").get<int>();
  if (j.contains("vocab_size")) c.vocab_size = j.at("vocab_size").get<int>();
  if (j.contains("max_seq_len")) c.max_seq_len = j.at("max_seq_len").get<int>();
  if (j.contains("num_tags")) c.num_tags = j.at("num_tags").get<int>();
  if (j.contains("dropout")) c.dropout = j.at("dropout").get<double>();
  return c;
}

json encoder_config_to_json(const EncoderConfig& c) {
  return json{{"num_layers", c.num_layers},   {"hidden_dim", c.hidden_dim},
              {"num_heads", c.num_heads},     {"ffn_dim", c.ffn_dim},
              {"vocab_size", c.vocab_size},   {"max_seq_len", c.max_seq_len},
              {"num_tags", c.num_tags},       {"dropout", c.dropout}};
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig c;
  if (j.contains("learning_rate")) c.learning_rate = j.at("learning_rate").get<double>();
  if (j.contains("weight_decay")) c.weight_decay = j.at("weight_decay").get<double>();
  if (j.contains("batch_size")) c.batch_size = j.at("batch_size").get<int>();
  if (j.contains("max_epochs")) c.max_epochs = j.at("max_epochs").get<int>();
  if (j.contains("warmup_fraction")) c.warmup_fraction = j.at("warmup_fraction").get<double>();
  if (j.contains("patience")) c.patience = j.at("patience").get<int>();
  if (j.contains("seed")) c.seed = j.at("seed").get<uint64_t>();
  if (j.contains("eval_every")) c.eval_every = j.at("eval_every").get<int>();
  if (j.contains("clip_norm")) c.clip_norm = j.at("clip_norm").get<double>();
  return c;
}

KDConfig kd_config_from_json(const json& j) {
  KDConfig c;
  if (j.contains("alpha")) c.alpha = j.at("alpha").get<double>();
  if (j.contains("tau")) c.tau = j.at("tau").get<double>();
  return c;
}

SynthConfig synth_config_from_json(const json& j) {
  SynthConfig c;
  if (j.contains("num_sentences")) c.num_sentences = j.at("num_sentences").get<int>();
  if (j.contains("classes")) c.classes = j.at("classes").get<std::vector<std::string>>();
  if (j.contains("class_weights"))
    c.class_weights = j.at("class_weights").get<std::vector<double>>();
  if (j.contains("filler_vocab_size")) c.filler_vocab_size = j.at("filler_vocab_size").get<int>();
  if (j.contains("entity_vocab_per_class"))
    c.entity_vocab_per_class = j.at("entity_vocab_per_class").get<int>();
  if (j.contains("min_words")) c.min_words = j.at("min_words").get<int>();
  if (j.contains("max_words")) c.max_words = j.at("max_words").get<int>();
  if (j.contains("entity_rate")) c.entity_rate = j.at("entity_rate").get<double>();
  if (j.contains("min_entity_len")) c.min_entity_len = j.at("min_entity_len").get<int>();
  if (j.contains("max_entity_len")) c.max_entity_len = j.at("max_entity_len").get<int>();
  if (j.contains("entity_word_len")) c.entity_word_len = j.at("entity_word_len").get<int>();
  if (j.contains("seed")) c.seed = j.at("seed").get<uint64_t>();
  return c;
}

LabelScheme scheme_from_json(const json& j) {
  if (j.contains("classes"))
    return LabelScheme(j.at("classes").get<std::vector<std::string>>());
  return LabelScheme::default_scheme();
}

uint64_t fnv1a64(const void* data, size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  uint64_t h = 1469598103934665603ULL;
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

uint64_t fnv1a64_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file for hashing: " + path);
  uint64_t h = 1469598103934665603ULL;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    const auto* p = reinterpret_cast<const unsigned char*>(buf);
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= p[i];
      h *= 1099511628211ULL;
    }
  }
  return h;
}

}  // namespace slimtag
