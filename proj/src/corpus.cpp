#include "slimtag/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "slimtag/rng.hpp"

namespace slimtag {

using nlohmann::json;

void AnnotatedSentence::validate(const LabelScheme& scheme) const {
  const int n = static_cast<int>(text.size());
  std::vector<EntityRef> sorted = entities;
  std::sort(sorted.begin(), sorted.end(),
            [](const EntityRef& a, const EntityRef& b) { return a.start < b.start; });
  int prev_end = 0;
  for (const auto& e : sorted) {
    if (e.start < 0 || e.end > n || e.start >= e.end)
      throw DataError("entity span out of bounds in: " + text);
    if (e.start < prev_end) throw DataError("overlapping entity spans in: " + text);
    if (e.class_id < 0 || e.class_id >= scheme.num_classes())
      throw DataError("entity class out of range in: " + text);
    prev_end = e.end;
  }
}

ResolveResult resolve_entities(const std::string& text,
                               const std::vector<std::pair<std::string, int>>& entity_strings) {
  for (const auto& [s, cls] : entity_strings) {
    (void)cls;
    if (s.empty()) throw DataError("empty entity string");
  }
  // Longest first; stable so equal lengths keep input order.
  std::vector<size_t> order(entity_strings.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return entity_strings[a].first.size() > entity_strings[b].first.size();
  });

  std::vector<uint8_t> claimed(text.size(), 0);
  auto range_free = [&](size_t from, size_t len) {
    for (size_t i = from; i < from + len; ++i)
      if (claimed[i]) return false;
    return true;
  };

  ResolveResult out;
  for (size_t idx : order) {
    const auto& [s, cls] = entity_strings[idx];
    bool placed = false;
    for (size_t from = text.find(s); from != std::string::npos; from = text.find(s, from + 1)) {
      if (range_free(from, s.size())) {
        for (size_t i = from; i < from + s.size(); ++i) claimed[i] = 1;
        out.spans.push_back({static_cast<int>(from), static_cast<int>(from + s.size()), cls});
        placed = true;
        break;
      }
    }
    if (!placed) out.unresolved.push_back(s);
  }
  std::sort(out.spans.begin(), out.spans.end(),
            [](const EntityRef& a, const EntityRef& b) { return a.start < b.start; });
  return out;
}

BioResult bio_encode(const std::vector<EntityRef>& spans,
                     const std::vector<std::pair<int, int>>& token_spans,
                     const LabelScheme& scheme) {
  std::vector<EntityRef> sorted = spans;
  std::sort(sorted.begin(), sorted.end(),
            [](const EntityRef& a, const EntityRef& b) { return a.start < b.start; });
  for (size_t i = 1; i < sorted.size(); ++i)
    if (sorted[i].start < sorted[i - 1].end)
      throw DataError("bio_encode: overlapping entity spans");

  BioResult out;
  out.tags.assign(token_spans.size(), 0);
  for (size_t t = 0; t < token_spans.size(); ++t) {
    const auto [s, e] = token_spans[t];
    for (const auto& ent : sorted) {
      if (s == ent.start) {
        out.tags[t] = scheme.b_tag(ent.class_id);
      } else if (s > ent.start && s < ent.end) {
        out.tags[t] = scheme.i_tag(ent.class_id);
      } else if (s < ent.start && e > ent.start) {
        out.tags[t] = scheme.b_tag(ent.class_id);
        out.warnings.push_back("token span (" + std::to_string(s) + "," + std::to_string(e) +
                               ") starts before entity at " + std::to_string(ent.start));
      } else {
        continue;
      }
      break;
    }
  }
  return out;
}

void TokenizedExample::validate(const LabelScheme& scheme) const {
  const size_t n = token_ids.size();
  if (char_spans.size() != n || tag_ids.size() != n || attention_mask.size() != n)
    throw DataError("tokenized example field lengths disagree");
  for (size_t i = 0; i < n; ++i) {
    if (tag_ids[i] == LabelScheme::kIgnoreIndex) continue;
    if (tag_ids[i] < 0 || tag_ids[i] >= scheme.num_tags())
      throw DataError("tag id out of range: " + std::to_string(tag_ids[i]));
  }
}

TokenizedExample align_labels(const AnnotatedSentence& sentence, const Vocab& vocab,
                              const LabelScheme& scheme, int max_seq_len,
                              std::vector<std::string>* warnings) {
  sentence.validate(scheme);
  std::vector<SubwordToken> pieces = tokenize(sentence.text, vocab);
  const int budget = max_seq_len - 2;  // room for [CLS] and [SEP]
  if (budget < 0) throw ConfigError("max_seq_len too small");
  if (static_cast<int>(pieces.size()) > budget)
    pieces.resize(static_cast<size_t>(budget));

  std::vector<std::pair<int, int>> spans;
  spans.reserve(pieces.size());
  for (const auto& p : pieces) spans.emplace_back(p.start, p.end);
  BioResult bio = bio_encode(sentence.entities, spans, scheme);
  if (warnings)
    warnings->insert(warnings->end(), bio.warnings.begin(), bio.warnings.end());

  TokenizedExample ex;
  const size_t n = pieces.size() + 2;
  ex.token_ids.reserve(n);
  ex.char_spans.reserve(n);
  ex.tag_ids.reserve(n);
  ex.attention_mask.reserve(n);

  ex.token_ids.push_back(vocab.cls_id());
  ex.char_spans.emplace_back(-1, -1);
  ex.tag_ids.push_back(LabelScheme::kIgnoreIndex);
  ex.attention_mask.push_back(1);
  for (size_t i = 0; i < pieces.size(); ++i) {
    ex.token_ids.push_back(pieces[i].id);
    ex.char_spans.emplace_back(pieces[i].start, pieces[i].end);
    ex.tag_ids.push_back(bio.tags[i]);
    ex.attention_mask.push_back(1);
  }
  ex.token_ids.push_back(vocab.sep_id());
  ex.char_spans.emplace_back(-1, -1);
  ex.tag_ids.push_back(LabelScheme::kIgnoreIndex);
  ex.attention_mask.push_back(1);
  return ex;
}

std::vector<std::vector<int>> word_groups(const TokenizedExample& ex) {
  std::vector<std::vector<int>> groups;
  int prev_end = -2;
  for (size_t i = 0; i < ex.size(); ++i) {
    const auto [s, e] = ex.char_spans[i];
    if (s < 0) {  // special or padding
      prev_end = -2;
      continue;
    }
    if (s == prev_end && !groups.empty()) {
      groups.back().push_back(static_cast<int>(i));
    } else {
      groups.push_back({static_cast<int>(i)});
    }
    prev_end = e;
  }
  return groups;
}

std::vector<int> word_level_tags(const TokenizedExample& ex, const std::vector<int>& subword_tags) {
  if (subword_tags.size() != ex.size())
    throw DataError("word_level_tags: tag sequence length mismatch");
  std::vector<int> out;
  for (const auto& g : word_groups(ex)) out.push_back(subword_tags[static_cast<size_t>(g[0])]);
  return out;
}

DatasetSplit split_dataset(const std::vector<AnnotatedSentence>& corpus,
                           double train_ratio, double valid_ratio, double test_ratio,
                           uint64_t seed) {
  if (corpus.empty()) throw DataError("split_dataset: empty corpus");
  if (std::abs(train_ratio + valid_ratio + test_ratio - 1.0) > 1e-9)
    throw ConfigError("split ratios must sum to 1");
  std::vector<size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);
  const size_t n = corpus.size();
  const size_t n_train = static_cast<size_t>(train_ratio * static_cast<double>(n));
  const size_t n_valid = static_cast<size_t>(valid_ratio * static_cast<double>(n));
  DatasetSplit split;
  for (size_t i = 0; i < n; ++i) {
    const auto& s = corpus[order[i]];
    if (i < n_train)
      split.train.push_back(s);
    else if (i < n_train + n_valid)
      split.valid.push_back(s);
    else
      split.test.push_back(s);
  }
  return split;
}

namespace {

json sentence_to_json(const AnnotatedSentence& s, const LabelScheme& scheme) {
  json ents = json::array();
  for (const auto& e : s.entities) {
    ents.push_back({{"start", e.start},
                    {"end", e.end},
                    {"class", scheme.classes()[static_cast<size_t>(e.class_id)]}});
  }
  return json{{"text", s.text}, {"entities", ents}};
}

}  // namespace

std::vector<AnnotatedSentence> load_jsonl(const std::string& path, const LabelScheme& scheme,
                                          std::vector<std::string>* unresolved) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus file: " + path);
  std::vector<AnnotatedSentence> out;
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
    AnnotatedSentence s;
    if (!j.contains("text") || !j["text"].is_string())
      throw DataError("missing text field at " + path + ":" + std::to_string(lineno));
    s.text = j["text"].get<std::string>();
    if (j.contains("entities")) {
      for (const auto& e : j["entities"]) {
        s.entities.push_back({e.at("start").get<int>(), e.at("end").get<int>(),
                              scheme.class_index(e.at("class").get<std::string>())});
      }
    } else if (j.contains("entity_strings")) {
      std::vector<std::pair<std::string, int>> raw;
      for (const auto& e : j["entity_strings"])
        raw.emplace_back(e.at("string").get<std::string>(),
                         scheme.class_index(e.at("class").get<std::string>()));
      ResolveResult r = resolve_entities(s.text, raw);
      s.entities = r.spans;
      if (unresolved)
        for (auto& u : r.unresolved)
          unresolved->push_back(path + ":" + std::to_string(lineno) + ": " + u);
    }
    s.validate(scheme);
    out.push_back(std::move(s));
  }
  return out;
}

void save_jsonl(const std::string& path, const std::vector<AnnotatedSentence>& corpus,
                const LabelScheme& scheme) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write corpus file: " + path);
  for (const auto& s : corpus) out << sentence_to_json(s, scheme).dump() << "\n";
}

void export_conll(const std::string& path, const std::vector<TokenizedExample>& examples,
                  const Vocab& vocab, const LabelScheme& scheme) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write TSV file: " + path);
  for (const auto& ex : examples) {
    for (size_t i = 0; i < ex.size(); ++i) {
      if (ex.tag_ids[i] == LabelScheme::kIgnoreIndex) continue;
      out << vocab.piece(ex.token_ids[i]) << "\t" << scheme.tag_name(ex.tag_ids[i]) << "\n";
    }
    out << "\n";
  }
}

}  // namespace slimtag
