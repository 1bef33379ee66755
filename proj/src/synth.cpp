#include "slimtag/synth.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "slimtag/rng.hpp"

namespace slimtag {

void SynthConfig::validate() const {
  if (classes.empty()) throw ConfigError("synth: need at least one class");
  if (class_weights.size() != classes.size())
    throw ConfigError("synth: class_weights length must match classes");
  for (double w : class_weights)
    if (w < 0.0) throw ConfigError("synth: negative class weight");
  if (num_sentences <= 0) throw ConfigError("synth: num_sentences must be positive");
  if (min_words < 1 || max_words < min_words) throw ConfigError("synth: bad sentence length range");
  if (entity_rate < 0.0 || entity_rate > 1.0) throw ConfigError("synth: entity_rate must be in [0,1]");
  if (min_entity_len < 1 || max_entity_len < min_entity_len)
    throw ConfigError("synth: bad entity length range");
  if (filler_vocab_size < 1 || entity_vocab_per_class < 1)
    throw ConfigError("synth: vocabulary sizes must be positive");
  if (entity_word_len < 1) throw ConfigError("synth: entity_word_len must be positive");
  double capacity = 1.0;
  for (int i = 0; i < entity_word_len; ++i) capacity *= 26.0;
  if (static_cast<double>(entity_vocab_per_class) * static_cast<double>(classes.size()) >
      0.5 * capacity)
    throw ConfigError("synth: entity vocabulary too large for the word length");
}

SynthCorpus synth_generate(const SynthConfig& config) {
  config.validate();
  SynthCorpus out;
  out.scheme = LabelScheme(config.classes);

  Rng rng(config.seed);

  out.filler_words.reserve(static_cast<size_t>(config.filler_vocab_size));
  for (int i = 0; i < config.filler_vocab_size; ++i)
    out.filler_words.push_back("w" + std::to_string(i));

  // Entity words are random letter strings, unique across all classes, so
  // the class vocabularies stay disjoint. They are deliberately absent from
  // the whole-word vocabulary: the tokenizer splits them into character
  // pieces and the encoder has to compose subwords to recover the class.
  out.entity_words.resize(config.classes.size());
  std::set<std::string> taken;
  for (size_t c = 0; c < config.classes.size(); ++c) {
    while (static_cast<int>(out.entity_words[c].size()) < config.entity_vocab_per_class) {
      std::string word;
      for (int k = 0; k < config.entity_word_len; ++k)
        word += static_cast<char>('a' + rng.uniform_int(0, 25));
      if (taken.insert(word).second) out.entity_words[c].push_back(word);
    }
  }
  out.sentences.reserve(static_cast<size_t>(config.num_sentences));
  for (int s = 0; s < config.num_sentences; ++s) {
    const int n_words = rng.uniform_int(config.min_words, config.max_words);
    AnnotatedSentence sent;
    int w = 0;
    bool after_entity = false;  // force a filler between entities
    while (w < n_words) {
      const int room = n_words - w;
      const bool start_entity = !after_entity && room >= config.min_entity_len &&
                                rng.uniform() < config.entity_rate;
      if (start_entity) {
        const int cls = rng.categorical(config.class_weights);
        const int len = rng.uniform_int(config.min_entity_len,
                                        std::min(config.max_entity_len, room));
        int start = -1;
        for (int k = 0; k < len; ++k) {
          if (!sent.text.empty()) sent.text += " ";
          if (k == 0) start = static_cast<int>(sent.text.size());
          const auto& words = out.entity_words[static_cast<size_t>(cls)];
          sent.text += words[static_cast<size_t>(rng.uniform_int(0, static_cast<int>(words.size()) - 1))];
        }
        sent.entities.push_back({start, static_cast<int>(sent.text.size()), cls});
        w += len;
        after_entity = true;
      } else {
        if (!sent.text.empty()) sent.text += " ";
        sent.text += out.filler_words[static_cast<size_t>(
            rng.uniform_int(0, static_cast<int>(out.filler_words.size()) - 1))];
        w += 1;
        after_entity = false;
      }
    }
    sent.validate(out.scheme);
    out.sentences.push_back(std::move(sent));
  }
  return out;
}

Vocab SynthCorpus::build_vocab() const {
  // Filler words are whole pieces; entity words are not, so they segment
  // into the character pieces below.
  std::vector<std::string> pieces = {Vocab::kPad, Vocab::kUnk, Vocab::kCls, Vocab::kSep};
  for (const auto& w : filler_words) pieces.push_back(w);
  for (char c = 'a'; c <= 'z'; ++c) {
    pieces.push_back(std::string(1, c));
    pieces.push_back("##" + std::string(1, c));
  }
  for (char c = '0'; c <= '9'; ++c) {
    pieces.push_back(std::string(1, c));
    pieces.push_back("##" + std::string(1, c));
  }
  return Vocab(std::move(pieces));
}

}  // namespace slimtag
