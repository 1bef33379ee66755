#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "slimtag/corpus.hpp"

namespace slimtag {

// Synthetic corpus generator. Entity words come from disjoint per-class
// vocabularies so a small encoder can learn the task; class frequencies are
// configurable to mimic imbalanced corpora (one dominant class, one rare).
struct SynthConfig {
  int num_sentences = 1000;
  std::vector<std::string> classes = {"MED", "ORG", "DIS", "HOR", "PHA", "CMT"};
  std::vector<double> class_weights = {0.5, 0.15, 0.15, 0.02, 0.08, 0.1};
  int filler_vocab_size = 120;
  int entity_vocab_per_class = 12;
  int min_words = 6;
  int max_words = 12;
  double entity_rate = 0.22;  // chance that a free word slot starts an entity
  int min_entity_len = 1;
  int max_entity_len = 3;
  int entity_word_len = 3;  // letters per entity word (subword-composed)
  uint64_t seed = 0;

  void validate() const;
};

struct SynthCorpus {
  std::vector<AnnotatedSentence> sentences;
  LabelScheme scheme;
  std::vector<std::string> filler_words;
  std::vector<std::vector<std::string>> entity_words;  // per class

  // Full subword vocabulary for the generated corpus: specials, filler and
  // entity words, plus the single characters of the generator alphabet.
  Vocab build_vocab() const;
};

SynthCorpus synth_generate(const SynthConfig& config);

}  // namespace slimtag
