#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "slimtag/error.hpp"

namespace slimtag {

// Subword vocabulary: one piece per line, continuation pieces prefixed with
// "##". Ids are line numbers. The four special tokens are required.
class Vocab {
 public:
  static constexpr const char* kPad = "[PAD]";
  static constexpr const char* kUnk = "[UNK]";
  static constexpr const char* kCls = "[CLS]";
  static constexpr const char* kSep = "[SEP]";

  explicit Vocab(std::vector<std::string> pieces);

  static Vocab load(const std::string& path);
  void save(const std::string& path) const;

  int size() const { return static_cast<int>(pieces_.size()); }
  const std::string& piece(int id) const { return pieces_.at(static_cast<size_t>(id)); }
  int find(const std::string& piece) const;  // -1 when absent

  int pad_id() const { return pad_id_; }
  int unk_id() const { return unk_id_; }
  int cls_id() const { return cls_id_; }
  int sep_id() const { return sep_id_; }
  bool is_special(int id) const {
    return id == pad_id_ || id == unk_id_ || id == cls_id_ || id == sep_id_;
  }

 private:
  std::vector<std::string> pieces_;
  std::unordered_map<std::string, int> index_;
  int pad_id_ = -1, unk_id_ = -1, cls_id_ = -1, sep_id_ = -1;
};

struct SubwordToken {
  int id;
  int start;  // char offsets into the source text, half-open
  int end;
  bool continuation;
};

// Whitespace pre-split followed by greedy longest-match subword
// segmentation. A word with no full segmentation becomes a single [UNK]
// covering the whole word, so concatenated spans always reconstruct the
// non-whitespace text.
std::vector<SubwordToken> tokenize(const std::string& text, const Vocab& vocab);

}  // namespace slimtag
