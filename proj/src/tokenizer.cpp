#include "slimtag/tokenizer.hpp"

#include <cctype>
#include <fstream>

namespace slimtag {

Vocab::Vocab(std::vector<std::string> pieces) : pieces_(std::move(pieces)) {
  for (size_t i = 0; i < pieces_.size(); ++i) {
    if (pieces_[i].empty()) throw DataError("empty vocabulary piece at line " + std::to_string(i + 1));
    if (!index_.emplace(pieces_[i], static_cast<int>(i)).second)
      throw DataError("duplicate vocabulary piece: " + pieces_[i]);
  }
  pad_id_ = find(kPad);
  unk_id_ = find(kUnk);
  cls_id_ = find(kCls);
  sep_id_ = find(kSep);
  if (unk_id_ < 0) throw DataError("vocabulary has no [UNK] entry");
  if (pad_id_ < 0 || cls_id_ < 0 || sep_id_ < 0)
    throw DataError("vocabulary is missing a special token ([PAD]/[CLS]/[SEP])");
}

Vocab Vocab::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open vocabulary file: " + path);
  std::vector<std::string> pieces;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    pieces.push_back(line);
  }
  return Vocab(std::move(pieces));
}

void Vocab::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write vocabulary file: " + path);
  for (const auto& p : pieces_) out << p << "\n";
}

int Vocab::find(const std::string& piece) const {
  auto it = index_.find(piece);
  return it == index_.end() ? -1 : it->second;
}

std::vector<SubwordToken> tokenize(const std::string& text, const Vocab& vocab) {
  std::vector<SubwordToken> out;
  const int n = static_cast<int>(text.size());
  int pos = 0;
  while (pos < n) {
    while (pos < n && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos >= n) break;
    int word_end = pos;
    while (word_end < n && !std::isspace(static_cast<unsigned char>(text[word_end]))) ++word_end;

    // Greedy longest match within [pos, word_end).
    std::vector<SubwordToken> pieces;
    int start = pos;
    bool ok = true;
    while (start < word_end) {
      const bool cont = start > pos;
      int best_end = -1, best_id = -1;
      for (int end = word_end; end > start; --end) {
        std::string sub = text.substr(static_cast<size_t>(start),
                                      static_cast<size_t>(end - start));
        if (cont) sub = "##" + sub;
        const int id = vocab.find(sub);
        if (id >= 0) {
          best_end = end;
          best_id = id;
          break;
        }
      }
      if (best_id < 0) {
        ok = false;
        break;
      }
      pieces.push_back({best_id, start, best_end, cont});
      start = best_end;
    }
    if (ok) {
      out.insert(out.end(), pieces.begin(), pieces.end());
    } else {
      out.push_back({vocab.unk_id(), pos, word_end, false});
    }
    pos = word_end;
  }
  return out;
}

}  // namespace slimtag
