#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "slimtag/labels.hpp"
#include "slimtag/tokenizer.hpp"

namespace slimtag {

struct EntityRef {
  int start;  // char offsets, half-open [start, end)
  int end;
  int class_id;
  bool operator==(const EntityRef&) const = default;
};

// Ingestion unit: raw text plus character-offset entity spans.
struct AnnotatedSentence {
  std::string text;
  std::vector<EntityRef> entities;

  void validate(const LabelScheme& scheme) const;
};

struct ResolveResult {
  std::vector<EntityRef> spans;           // sorted by start
  std::vector<std::string> unresolved;    // strings with no free occurrence
};

// Matches entity strings to their first unclaimed occurrence, longest
// strings first; claimed ranges are never re-claimed. Absent strings are
// reported, not fatal.
ResolveResult resolve_entities(const std::string& text,
                               const std::vector<std::pair<std::string, int>>& entity_strings);

struct BioResult {
  std::vector<int> tags;                  // per token
  std::vector<std::string> warnings;      // boundary-misalignment reports
};

// Tags each token span against the entity spans: B-c where the token starts
// the entity, I-c inside, O elsewhere. A token that overlaps an entity but
// starts before it gets B-c plus a warning.
BioResult bio_encode(const std::vector<EntityRef>& spans,
                     const std::vector<std::pair<int, int>>& token_spans,
                     const LabelScheme& scheme);

// One tokenized, label-aligned training example. char span (-1,-1) marks
// special tokens; their tag is the ignore index.
struct TokenizedExample {
  std::vector<int> token_ids;
  std::vector<std::pair<int, int>> char_spans;
  std::vector<int> tag_ids;
  std::vector<uint8_t> attention_mask;

  size_t size() const { return token_ids.size(); }
  void validate(const LabelScheme& scheme) const;
};

// Tokenizes, BIO-encodes at the subword level and wraps with [CLS]/[SEP].
// Every subword of an entity word carries a real tag (first B-c, rest I-c);
// only specials get the ignore index.
TokenizedExample align_labels(const AnnotatedSentence& sentence, const Vocab& vocab,
                              const LabelScheme& scheme, int max_seq_len,
                              std::vector<std::string>* warnings = nullptr);

// Groups token indices into words by contiguous char spans; specials and
// padding are excluded. Returns one vector of token indices per word.
std::vector<std::vector<int>> word_groups(const TokenizedExample& ex);

// Word-level tags (first-subword convention); pairs with word_groups.
std::vector<int> word_level_tags(const TokenizedExample& ex, const std::vector<int>& subword_tags);

struct DatasetSplit {
  std::vector<AnnotatedSentence> train, valid, test;
};

// Deterministic shuffle by seed; sizes are floor(r0*N), floor(r1*N), rest.
DatasetSplit split_dataset(const std::vector<AnnotatedSentence>& corpus,
                           double train_ratio, double valid_ratio, double test_ratio,
                           uint64_t seed);

// JSONL I/O. Native form carries explicit spans; the raw form carries
// entity strings and runs resolve_entities under the given scheme.
std::vector<AnnotatedSentence> load_jsonl(const std::string& path, const LabelScheme& scheme,
                                          std::vector<std::string>* unresolved = nullptr);
void save_jsonl(const std::string& path, const std::vector<AnnotatedSentence>& corpus,
                const LabelScheme& scheme);

// CoNLL-style TSV: `piece<TAB>tag`, blank line between sentences, specials
// omitted.
void export_conll(const std::string& path, const std::vector<TokenizedExample>& examples,
                  const Vocab& vocab, const LabelScheme& scheme);

}  // namespace slimtag
