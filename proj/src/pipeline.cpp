#include "slimtag/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <thread>

#include <json.hpp>

namespace slimtag {

using nlohmann::json;

Dataset prepare_dataset(const std::vector<AnnotatedSentence>& sentences, const Vocab& vocab,
                        const LabelScheme& scheme, int max_seq_len,
                        std::vector<std::string>* warnings) {
  Dataset out;
  out.reserve(sentences.size());
  for (const auto& s : sentences)
    out.push_back(align_labels(s, vocab, scheme, max_seq_len, warnings));
  return out;
}

std::vector<uint8_t> scoring_mask(const TokenizedExample& ex) {
  std::vector<uint8_t> mask(ex.size(), 0);
  for (size_t i = 0; i < ex.size(); ++i)
    if (ex.char_spans[i].first >= 0) mask[i] = 1;
  return mask;
}

std::vector<int> decode_tags(EncoderModel& model, const TokenizedExample& ex) {
  Tensor logits = emissions(model, ex.token_ids, ex.attention_mask);
  const std::vector<uint8_t> mask = scoring_mask(ex);
  if (model.has_crf()) {
    EmissionView em{logits, mask};
    return viterbi(em, *model.crf).tags;
  }
  std::vector<int> tags(ex.size(), -1);
  for (size_t i = 0; i < ex.size(); ++i) {
    if (!mask[i]) continue;
    int best = 0;
    for (int k = 1; k < logits.cols(); ++k)
      if (logits.at(static_cast<int>(i), k) > logits.at(static_cast<int>(i), best)) best = k;
    tags[i] = best;
  }
  return tags;
}

namespace {

void eval_range(EncoderModel& model, const Dataset& data, size_t begin, size_t end,
                EvalAccumulator& acc) {
  for (size_t i = begin; i < end; ++i) {
    const TokenizedExample& ex = data[i];
    const std::vector<int> pred = decode_tags(model, ex);
    acc.add_sentence(word_level_tags(ex, ex.tag_ids), word_level_tags(ex, pred));
  }
}

}  // namespace

EvalAccumulator::Report evaluate_dataset(EncoderModel& model, const Dataset& data,
                                         const LabelScheme& scheme, int threads) {
  if (threads < 1) throw ConfigError("threads must be >= 1");
  if (threads == 1 || data.size() < 2) {
    EvalAccumulator acc(scheme);
    eval_range(model, data, 0, data.size(), acc);
    return acc.finalize();
  }
  const size_t n_chunks = std::min<size_t>(static_cast<size_t>(threads), data.size());
  std::vector<EvalAccumulator> accs(n_chunks, EvalAccumulator(scheme));
  std::vector<std::thread> pool;
  const size_t chunk = (data.size() + n_chunks - 1) / n_chunks;
  for (size_t c = 0; c < n_chunks; ++c) {
    const size_t b = c * chunk, e = std::min(data.size(), b + chunk);
    if (b >= e) break;
    pool.emplace_back([&, b, e, c] { eval_range(model, data, b, e, accs[c]); });
  }
  for (auto& t : pool) t.join();
  EvalAccumulator total(scheme);
  for (const auto& a : accs) total.merge(a);  // fixed order keeps counts deterministic
  return total.finalize();
}

void save_examples_jsonl(const std::string& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write dataset file: " + path);
  for (const auto& ex : data) {
    json spans = json::array();
    for (const auto& [s, e] : ex.char_spans) spans.push_back({s, e});
    out << json{{"token_ids", ex.token_ids},
                {"char_spans", spans},
                {"tag_ids", ex.tag_ids},
                {"attention_mask", ex.attention_mask}}
               .dump()
        << "\n";
  }
}

Dataset load_examples_jsonl(const std::string& path, const LabelScheme& scheme) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset file: " + path);
  Dataset out;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError("bad JSON at " + path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    TokenizedExample ex;
    ex.token_ids = j.at("token_ids").get<std::vector<int>>();
    for (const auto& s : j.at("char_spans"))
      ex.char_spans.emplace_back(s.at(0).get<int>(), s.at(1).get<int>());
    ex.tag_ids = j.at("tag_ids").get<std::vector<int>>();
    ex.attention_mask = j.at("attention_mask").get<std::vector<uint8_t>>();
    ex.validate(scheme);
    out.push_back(std::move(ex));
  }
  return out;
}

Bundle load_bundle(const std::string& dir) {
  const auto base = std::filesystem::path(dir);
  std::ifstream meta(base / "bundle.json");
  if (!meta) throw IoError("cannot open bundle: " + (base / "bundle.json").string());
  json j;
  try {
    meta >> j;
  } catch (const json::parse_error& e) {
    throw DataError("bad bundle.json: " + std::string(e.what()));
  }
  LabelScheme scheme(j.at("scheme").at("classes").get<std::vector<std::string>>());
  Vocab vocab = Vocab::load((base / "vocab.txt").string());
  return Bundle{scheme, std::move(vocab),
                load_examples_jsonl((base / "train.jsonl").string(), scheme),
                load_examples_jsonl((base / "valid.jsonl").string(), scheme),
                load_examples_jsonl((base / "test.jsonl").string(), scheme)};
}

}  // namespace slimtag
