#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "slimtag/evalmetrics.hpp"
#include "slimtag/pipeline.hpp"
#include "slimtag/synth.hpp"

using namespace slimtag;

namespace {

Vocab tiny_vocab(std::vector<std::string> extra) {
  std::vector<std::string> pieces = {Vocab::kPad, Vocab::kUnk, Vocab::kCls, Vocab::kSep};
  pieces.insert(pieces.end(), extra.begin(), extra.end());
  return Vocab(std::move(pieces));
}

}  // namespace

TEST_CASE("resolve_entities: longest strings claim first") {
  auto r = resolve_entities("ab abc", {{"abc", 0}, {"ab", 1}});
  REQUIRE(r.spans.size() == 2);
  CHECK(r.spans[0] == EntityRef{0, 2, 1});
  CHECK(r.spans[1] == EntityRef{3, 6, 0});
  CHECK(r.unresolved.empty());
}

TEST_CASE("resolve_entities: whole text and absent string") {
  auto whole = resolve_entities("abc", {{"abc", 2}});
  REQUIRE(whole.spans.size() == 1);
  CHECK(whole.spans[0] == EntityRef{0, 3, 2});

  auto missing = resolve_entities("abc", {{"xyz", 0}});
  CHECK(missing.spans.empty());
  REQUIRE(missing.unresolved.size() == 1);
  CHECK(missing.unresolved[0] == "xyz");
}

TEST_CASE("resolve_entities: order independent without substring relations") {
  const std::string text = "one two three four";
  std::vector<std::pair<std::string, int>> a = {{"one", 0}, {"three", 1}, {"four", 2}};
  std::vector<std::pair<std::string, int>> b = {{"four", 2}, {"one", 0}, {"three", 1}};
  auto ra = resolve_entities(text, a);
  auto rb = resolve_entities(text, b);
  CHECK(ra.spans == rb.spans);
}

TEST_CASE("bio_encode casework") {
  LabelScheme scheme = LabelScheme::default_scheme();
  const int dis = scheme.class_index("DIS");
  // three tokens, entity covering tokens 1-2
  std::vector<std::pair<int, int>> tokens = {{0, 3}, {4, 7}, {8, 11}};
  auto r = bio_encode({{4, 11, dis}}, tokens, scheme);
  CHECK(r.tags == std::vector<int>{0, scheme.b_tag(dis), scheme.i_tag(dis)});
  CHECK(r.warnings.empty());

  auto none = bio_encode({}, tokens, scheme);
  CHECK(none.tags == std::vector<int>{0, 0, 0});

  auto single = bio_encode({{4, 7, dis}}, tokens, scheme);
  CHECK(single.tags == std::vector<int>{0, scheme.b_tag(dis), 0});
}

TEST_CASE("bio_encode: token starting before the entity warns and gets B") {
  LabelScheme scheme = LabelScheme::default_scheme();
  std::vector<std::pair<int, int>> tokens = {{0, 5}, {5, 8}};
  auto r = bio_encode({{2, 8, 0}}, tokens, scheme);
  CHECK(r.tags[0] == scheme.b_tag(0));
  CHECK(r.tags[1] == scheme.i_tag(0));
  CHECK(r.warnings.size() == 1);
}

TEST_CASE("bio_encode rejects overlapping spans") {
  LabelScheme scheme = LabelScheme::default_scheme();
  std::vector<std::pair<int, int>> tokens = {{0, 2}};
  CHECK_THROWS_AS(bio_encode({{0, 3, 0}, {2, 5, 1}}, tokens, scheme), DataError);
}

TEST_CASE("tokenize: greedy longest match with offsets") {
  Vocab v = tiny_vocab({"a", "b", "ab"});
  auto pieces = tokenize("ab", v);
  REQUIRE(pieces.size() == 1);
  CHECK(v.piece(pieces[0].id) == "ab");
  CHECK(pieces[0].start == 0);
  CHECK(pieces[0].end == 2);

  auto two = tokenize("a b", v);
  REQUIRE(two.size() == 2);
  CHECK(two[0].start == 0);
  CHECK(two[0].end == 1);
  CHECK(two[1].start == 2);
  CHECK(two[1].end == 3);
}

TEST_CASE("tokenize: one whole-vocab word and continuation pieces") {
  Vocab v = tiny_vocab({"hello", "he", "##llo"});
  auto whole = tokenize("hello", v);
  REQUIRE(whole.size() == 1);
  CHECK(v.piece(whole[0].id) == "hello");

  Vocab v2 = tiny_vocab({"he", "##llo"});
  auto split = tokenize("hello", v2);
  REQUIRE(split.size() == 2);
  CHECK(v2.piece(split[0].id) == "he");
  CHECK(v2.piece(split[1].id) == "##llo");
  CHECK(split[1].continuation);
  CHECK(split[1].start == 2);
  CHECK(split[1].end == 5);
}

TEST_CASE("tokenize: unknown word maps to [UNK] with the full span") {
  Vocab v = tiny_vocab({"x"});
  auto pieces = tokenize("x qqq x", v);
  REQUIRE(pieces.size() == 3);
  CHECK(pieces[1].id == v.unk_id());
  CHECK(pieces[1].start == 2);
  CHECK(pieces[1].end == 5);
  // concatenated spans reconstruct the non-whitespace text
  std::string rebuilt;
  for (const auto& p : pieces) rebuilt += std::string("x qqq x").substr(
      static_cast<size_t>(p.start), static_cast<size_t>(p.end - p.start));
  CHECK(rebuilt == "xqqqx");
}

TEST_CASE("align_labels: specials carry the ignore index") {
  LabelScheme scheme = LabelScheme::default_scheme();
  const int med = scheme.class_index("MED");
  Vocab v = tiny_vocab({"med0", "med1"});
  AnnotatedSentence s{"med0 med1", {{0, 9, med}}};
  TokenizedExample ex = align_labels(s, v, scheme, 16);
  REQUIRE(ex.size() == 4);
  CHECK(ex.token_ids.front() == v.cls_id());
  CHECK(ex.token_ids.back() == v.sep_id());
  CHECK(ex.tag_ids == std::vector<int>{LabelScheme::kIgnoreIndex, scheme.b_tag(med),
                                       scheme.i_tag(med), LabelScheme::kIgnoreIndex});
  CHECK(ex.attention_mask == std::vector<uint8_t>{1, 1, 1, 1});
}

TEST_CASE("align_labels: empty sentence keeps only specials") {
  LabelScheme scheme = LabelScheme::default_scheme();
  Vocab v = tiny_vocab({"x"});
  TokenizedExample ex = align_labels(AnnotatedSentence{"", {}}, v, scheme, 8);
  REQUIRE(ex.size() == 2);
  CHECK(ex.tag_ids[0] == LabelScheme::kIgnoreIndex);
  CHECK(ex.tag_ids[1] == LabelScheme::kIgnoreIndex);
}

TEST_CASE("align_labels: subwords inside an entity get real I tags") {
  LabelScheme scheme = LabelScheme::default_scheme();
  const int dis = scheme.class_index("DIS");
  Vocab v = tiny_vocab({"ab", "##cd", "##ef"});
  AnnotatedSentence s{"abcdef", {{0, 6, dis}}};
  TokenizedExample ex = align_labels(s, v, scheme, 16);
  REQUIRE(ex.size() == 5);
  CHECK(ex.tag_ids[1] == scheme.b_tag(dis));
  CHECK(ex.tag_ids[2] == scheme.i_tag(dis));
  CHECK(ex.tag_ids[3] == scheme.i_tag(dis));

  // word split mid-entity: second word's first subword continues the entity
  AnnotatedSentence s2{"ab abcdef", {{3, 9, dis}}};
  Vocab v2 = tiny_vocab({"ab", "abcd", "##ef"});
  TokenizedExample ex2 = align_labels(s2, v2, scheme, 16);
  // [CLS] ab abcd ##ef [SEP]
  CHECK(ex2.tag_ids[1] == 0);
  CHECK(ex2.tag_ids[2] == scheme.b_tag(dis));
  CHECK(ex2.tag_ids[3] == scheme.i_tag(dis));
}

TEST_CASE("word_groups and word_level_tags merge subwords") {
  LabelScheme scheme = LabelScheme::default_scheme();
  Vocab v = tiny_vocab({"he", "##llo", "x"});
  TokenizedExample ex = align_labels(AnnotatedSentence{"hello x", {{0, 5, 0}}}, v, scheme, 16);
  auto groups = word_groups(ex);
  REQUIRE(groups.size() == 2);
  CHECK(groups[0] == std::vector<int>{1, 2});
  CHECK(groups[1] == std::vector<int>{3});
  auto tags = word_level_tags(ex, ex.tag_ids);
  CHECK(tags == std::vector<int>{scheme.b_tag(0), 0});
}

TEST_CASE("split_dataset sizes and determinism") {
  std::vector<AnnotatedSentence> corpus(6895, AnnotatedSentence{"x", {}});
  auto s = split_dataset(corpus, 0.8, 0.1, 0.1, 1);
  CHECK(s.train.size() == 5516);
  CHECK(s.valid.size() == 689);
  CHECK(s.test.size() == 690);

  std::vector<AnnotatedSentence> ten(10, AnnotatedSentence{"x", {}});
  auto t = split_dataset(ten, 0.8, 0.1, 0.1, 1);
  CHECK(t.train.size() == 8);
  CHECK(t.valid.size() == 1);
  CHECK(t.test.size() == 1);

  std::vector<AnnotatedSentence> named;
  for (int i = 0; i < 50; ++i) named.push_back({"s" + std::to_string(i), {}});
  auto a = split_dataset(named, 0.8, 0.1, 0.1, 7);
  auto b = split_dataset(named, 0.8, 0.1, 0.1, 7);
  for (size_t i = 0; i < a.train.size(); ++i) CHECK(a.train[i].text == b.train[i].text);

  CHECK_THROWS_AS(split_dataset({}, 0.8, 0.1, 0.1, 1), DataError);
  CHECK_THROWS_AS(split_dataset(ten, 0.5, 0.1, 0.1, 1), ConfigError);
}

TEST_CASE("synth_generate: entity rate zero, determinism, class frequencies") {
  SynthConfig cfg;
  cfg.num_sentences = 50;
  cfg.entity_rate = 0.0;
  cfg.seed = 9;
  auto empty = synth_generate(cfg);
  for (const auto& s : empty.sentences) CHECK(s.entities.empty());

  SynthConfig c2;
  c2.num_sentences = 100;
  c2.seed = 4;
  auto a = synth_generate(c2);
  auto b = synth_generate(c2);
  for (size_t i = 0; i < a.sentences.size(); ++i) {
    CHECK(a.sentences[i].text == b.sentences[i].text);
    CHECK(a.sentences[i].entities == b.sentences[i].entities);
  }

  SynthConfig c3;
  c3.num_sentences = 10000;
  c3.seed = 21;
  c3.entity_rate = 0.3;
  auto big = synth_generate(c3);
  std::vector<int64_t> counts(c3.classes.size(), 0);
  int64_t total = 0;
  for (const auto& s : big.sentences)
    for (const auto& e : s.entities) {
      ++counts[static_cast<size_t>(e.class_id)];
      ++total;
    }
  REQUIRE(total > 0);
  for (size_t c = 0; c < counts.size(); ++c) {
    const double freq = static_cast<double>(counts[c]) / static_cast<double>(total);
    CHECK(std::abs(freq - c3.class_weights[c]) < 0.02);
  }
}

TEST_CASE("round trip: bio_encode then span extraction recovers gold spans") {
  SynthConfig cfg;
  cfg.num_sentences = 300;
  cfg.seed = 13;
  auto corpus = synth_generate(cfg);
  Vocab vocab = corpus.build_vocab();
  for (const auto& s : corpus.sentences) {
    TokenizedExample ex = align_labels(s, vocab, corpus.scheme, 64);
    const auto word_tags = word_level_tags(ex, ex.tag_ids);
    const auto spans = extract_spans(word_tags, corpus.scheme);
    // Map character entity spans to word indices for comparison.
    std::vector<EntitySpan> expected;
    const auto groups = word_groups(ex);
    for (const auto& e : s.entities) {
      int ws = -1, we = -1;
      for (size_t w = 0; w < groups.size(); ++w) {
        const auto [cs, ce] = ex.char_spans[static_cast<size_t>(groups[w][0])];
        (void)ce;
        if (cs == e.start) ws = static_cast<int>(w);
        if (cs >= e.start && cs < e.end) we = static_cast<int>(w) + 1;
      }
      REQUIRE(ws >= 0);
      expected.push_back({ws, we, e.class_id});
    }
    CHECK(spans == expected);
  }
}

TEST_CASE("jsonl round trip and raw entity-string form") {
  LabelScheme scheme = LabelScheme::default_scheme();
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "slimtag_corpus_test";
  fs::create_directories(dir);
  const std::string native = (dir / "native.jsonl").string();

  std::vector<AnnotatedSentence> corpus = {{"med0 w1", {{0, 4, 0}}}, {"w2", {}}};
  save_jsonl(native, corpus, scheme);
  auto loaded = load_jsonl(native, scheme);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].entities == corpus[0].entities);

  const std::string raw = (dir / "raw.jsonl").string();
  {
    std::ofstream out(raw);
    out << R"({"text": "aspirin cures pain", "entity_strings": [{"string": "aspirin", "class": "MED"}, {"string": "zzz", "class": "DIS"}]})"
        << "\n";
  }
  std::vector<std::string> unresolved;
  auto rawc = load_jsonl(raw, scheme, &unresolved);
  REQUIRE(rawc.size() == 1);
  REQUIRE(rawc[0].entities.size() == 1);
  CHECK(rawc[0].entities[0] == EntityRef{0, 7, 0});
  REQUIRE(unresolved.size() == 1);

  const std::string bad = (dir / "bad.jsonl").string();
  {
    std::ofstream out(bad);
    out << "{not json}\n";
  }
  CHECK_THROWS_AS(load_jsonl(bad, scheme), DataError);
}

TEST_CASE("conll export excludes specials and uses tag names") {
  LabelScheme scheme = LabelScheme::default_scheme();
  Vocab v = tiny_vocab({"med0", "w1"});
  Dataset data = {align_labels(AnnotatedSentence{"med0 w1", {{0, 4, 0}}}, v, scheme, 16)};
  namespace fs = std::filesystem;
  const auto path = fs::temp_directory_path() / "slimtag_conll_test.tsv";
  export_conll(path.string(), data, v, scheme);
  std::ifstream in(path);
  std::string l1, l2, l3;
  std::getline(in, l1);
  std::getline(in, l2);
  std::getline(in, l3);
  CHECK(l1 == "med0\tB-MED");
  CHECK(l2 == "w1\tO");
  CHECK(l3.empty());
}

TEST_CASE("vocab file round trip") {
  namespace fs = std::filesystem;
  const auto path = fs::temp_directory_path() / "slimtag_vocab_test.txt";
  Vocab v = tiny_vocab({"alpha", "##beta"});
  v.save(path.string());
  Vocab loaded = Vocab::load(path.string());
  CHECK(loaded.size() == v.size());
  CHECK(loaded.find("##beta") == v.find("##beta"));
  CHECK_THROWS_AS(Vocab::load("/nonexistent/vocab.txt"), IoError);
}
