#pragma once

#include <vector>

#include "slimtag/corpus.hpp"
#include "slimtag/encoder.hpp"
#include "slimtag/evalmetrics.hpp"

namespace slimtag {

using Dataset = std::vector<TokenizedExample>;

Dataset prepare_dataset(const std::vector<AnnotatedSentence>& sentences, const Vocab& vocab,
                        const LabelScheme& scheme, int max_seq_len,
                        std::vector<std::string>* warnings = nullptr);

// Positions the CRF/argmax decoder scores: real tokens only.
std::vector<uint8_t> scoring_mask(const TokenizedExample& ex);

// Subword-level predicted tags; -1 at specials/padding. CRF models decode
// with Viterbi, linear models with per-position argmax.
std::vector<int> decode_tags(EncoderModel& model, const TokenizedExample& ex);

// Word-level strict evaluation over a dataset; `threads` splits the corpus
// into deterministic chunks merged in order.
EvalAccumulator::Report evaluate_dataset(EncoderModel& model, const Dataset& data,
                                         const LabelScheme& scheme, int threads = 1);

// Tokenized-example JSONL, one object per line with the four aligned lists.
void save_examples_jsonl(const std::string& path, const Dataset& data);
Dataset load_examples_jsonl(const std::string& path, const LabelScheme& scheme);

// A prepared dataset bundle on disk: bundle.json + vocab.txt +
// {train,valid,test}.jsonl.
struct Bundle {
  LabelScheme scheme;
  Vocab vocab;
  Dataset train, valid, test;
};

Bundle load_bundle(const std::string& dir);

}  // namespace slimtag
