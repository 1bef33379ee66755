#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "slimtag/checkpoint.hpp"
#include "test_util.hpp"

using namespace slimtag;
using namespace slimtag::testutil;

namespace {

EncoderConfig small_config() {
  EncoderConfig c;
  c.num_layers = 2;
  c.hidden_dim = 16;
  c.num_heads = 2;
  c.ffn_dim = 24;
  c.vocab_size = 32;
  c.max_seq_len = 12;
  c.num_tags = 5;
  c.dropout = 0.0;
  return c;
}

std::vector<int> ids_of(std::initializer_list<int> v) { return std::vector<int>(v); }

}  // namespace

TEST_CASE("forward shape contract and input validation") {
  PrecisionGuard g(Precision::F64);
  EncoderModel m = build_model(small_config(), 1, false);
  const std::vector<int> ids = ids_of({1, 5, 9, 2});
  const std::vector<uint8_t> mask(4, 1);
  Tensor out = emissions(m, ids, mask);
  CHECK(out.rows() == 4);
  CHECK(out.cols() == 5);

  CHECK_THROWS_AS(emissions(m, ids_of({1, 99}), std::vector<uint8_t>(2, 1)), DataError);
  CHECK_THROWS_AS(emissions(m, std::vector<int>(20, 1), std::vector<uint8_t>(20, 1)), DataError);
}

TEST_CASE("zero-layer config applies the head to the embeddings") {
  PrecisionGuard g(Precision::F64);
  EncoderConfig c = small_config();
  c.num_layers = 0;
  EncoderModel m = build_model(c, 3, false);
  Tensor out = emissions(m, ids_of({1, 2}), std::vector<uint8_t>(2, 1));
  CHECK(out.rows() == 2);
  CHECK(out.cols() == 5);
}

TEST_CASE("padding never disturbs non-pad logits") {
  PrecisionGuard g(Precision::F32);
  EncoderModel m = build_model(small_config(), 5, false);
  const std::vector<int> ids = ids_of({3, 7, 11});
  Tensor base = emissions(m, ids, std::vector<uint8_t>(3, 1));

  std::vector<int> padded = ids;
  padded.push_back(0);
  padded.push_back(0);
  std::vector<uint8_t> mask = {1, 1, 1, 0, 0};
  Tensor with_pad = emissions(m, padded, mask);
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 5; ++k)
      CHECK(std::abs(with_pad.at(i, k) - base.at(i, k)) < 1e-5);
}

TEST_CASE("default layer indices: first and last, even spacing, ties up") {
  CHECK(default_layer_indices(12, 4) == std::vector<int>{1, 5, 9, 12});
  CHECK(default_layer_indices(8, 2) == std::vector<int>{1, 8});
  CHECK(default_layer_indices(4, 2) == std::vector<int>{1, 4});
  CHECK(default_layer_indices(4, 4) == std::vector<int>{1, 2, 3, 4});
  CHECK(default_layer_indices(5, 1) == std::vector<int>{5});
  CHECK_THROWS_AS(default_layer_indices(4, 5), ConfigError);
}

TEST_CASE("layer transfer copies the requested teacher blocks bit-exactly") {
  PrecisionGuard g(Precision::F32);
  EncoderConfig tc = small_config();
  tc.num_layers = 12;
  EncoderModel teacher = build_model(tc, 7, true);
  EncoderConfig sc = tc;
  sc.num_layers = 4;
  EncoderModel student = init_student_from_teacher(teacher, sc, {1, 5, 9, 12}, false, 99);

  const int picks[4] = {0, 4, 8, 11};
  for (int k = 0; k < 4; ++k) {
    const auto& tb = teacher.blocks[static_cast<size_t>(picks[k])];
    const auto& sb = student.blocks[static_cast<size_t>(k)];
    CHECK(max_abs_diff(sb.wq.w->value, tb.wq.w->value) == 0.0);
    CHECK(max_abs_diff(sb.ffn2.w->value, tb.ffn2.w->value) == 0.0);
    CHECK(max_abs_diff(sb.ln1_gamma->value, tb.ln1_gamma->value) == 0.0);
    // copies, not views
    CHECK(sb.wq.w != tb.wq.w);
  }
  CHECK(max_abs_diff(student.tok_emb->value, teacher.tok_emb->value) == 0.0);
  CHECK(max_abs_diff(student.head.w->value, teacher.head.w->value) == 0.0);

  // mutating the student must not touch the teacher
  student.blocks[0].wq.w->value[0] += 1.0;
  CHECK(student.blocks[0].wq.w->value[0] != teacher.blocks[0].wq.w->value[0]);
}

TEST_CASE("identity transfer reproduces the teacher's logits") {
  PrecisionGuard g(Precision::F64);
  EncoderConfig tc = small_config();
  EncoderModel teacher = build_model(tc, 21, false);
  EncoderModel student = init_student_from_teacher(teacher, tc, {1, 2}, false, 5);
  const std::vector<int> ids = ids_of({4, 8, 15});
  const std::vector<uint8_t> mask(3, 1);
  Tensor a = emissions(teacher, ids, mask);
  Tensor b = emissions(student, ids, mask);
  CHECK(max_abs_diff(a, b) < 1e-6);
}

TEST_CASE("transfer dimension mismatches are rejected") {
  EncoderConfig tc = small_config();
  EncoderModel teacher = build_model(tc, 2, false);
  EncoderConfig bad = tc;
  bad.hidden_dim = 32;
  bad.num_heads = 2;
  CHECK_THROWS_AS(init_student_from_teacher(teacher, bad, {1, 2}, false, 0), DimensionError);
  EncoderConfig sc = tc;
  sc.num_layers = 2;
  CHECK_THROWS_AS(init_student_from_teacher(teacher, sc, {2, 1}, false, 0), DimensionError);
  CHECK_THROWS_AS(init_student_from_teacher(teacher, sc, {1, 7}, false, 0), DimensionError);
}

TEST_CASE("truncate runs the first k blocks without touching weights") {
  PrecisionGuard g(Precision::F64);
  EncoderConfig tc = small_config();
  tc.num_layers = 3;
  EncoderModel m = build_model(tc, 31, false);
  const std::vector<int> ids = ids_of({1, 2, 3});
  const std::vector<uint8_t> mask(3, 1);
  Tensor full = emissions(m, ids, mask);

  EncoderModel same = truncate(m, 3);
  CHECK(max_abs_diff(emissions(same, ids, mask), full) == 0.0);

  EncoderModel one = truncate(m, 1);
  CHECK(one.config.num_layers == 1);
  CHECK(one.blocks[0].wq.w == m.blocks[0].wq.w);  // view, not a copy
  Tensor t1 = emissions(one, ids, mask);
  CHECK(t1.rows() == 3);
  CHECK(max_abs_diff(t1, full) > 0.0);

  CHECK_THROWS_AS(truncate(m, 0), ConfigError);
  CHECK_THROWS_AS(truncate(m, 4), ConfigError);
}

TEST_CASE("parameter count matches the closed-form formula") {
  EncoderConfig c = small_config();
  EncoderModel m = build_model(c, 11, true);
  const int64_t d = c.hidden_dim, f = c.ffn_dim, K = c.num_tags;
  const int64_t embeddings = static_cast<int64_t>(c.vocab_size) * d + c.max_seq_len * d;
  const int64_t per_block = 4 * (d * d + d) + 2 * (2 * d) + (d * f + f) + (f * d + d);
  const int64_t head = d * K + K;
  const int64_t final_norm = 2 * d;
  const int64_t crf = (K + 2) * (K + 2);
  CHECK(m.param_count() == embeddings + c.num_layers * per_block + final_norm + head + crf);
}

TEST_CASE("checkpoint round trip is lossless and bit-stable") {
  PrecisionGuard g(Precision::F32);
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "slimtag_ckpt_test";
  fs::create_directories(dir);
  const std::string path = (dir / "model.ckpt").string();

  LabelScheme scheme({"AA", "BB"});
  EncoderConfig c = small_config();
  c.num_tags = scheme.num_tags();
  EncoderModel m = build_model(c, 77, true);
  save_checkpoint(m, scheme, path);

  LabelScheme loaded_scheme;
  EncoderModel loaded = load_checkpoint(path, &loaded_scheme);
  CHECK(loaded_scheme.classes() == scheme.classes());
  CHECK(loaded.config == m.config);
  CHECK(loaded.has_crf());

  const std::vector<int> ids = ids_of({1, 2, 3, 4});
  const std::vector<uint8_t> mask(4, 1);
  Tensor a = emissions(m, ids, mask);
  Tensor b = emissions(loaded, ids, mask);
  CHECK(max_abs_diff(a, b) == 0.0);

  // save -> load -> save is byte identical
  const std::string path2 = (dir / "model2.ckpt").string();
  save_checkpoint(loaded, loaded_scheme, path2);
  std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
  std::string s1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
  std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
  CHECK(s1 == s2);
}

TEST_CASE("corrupt checkpoints produce distinct errors, never crashes") {
  PrecisionGuard g(Precision::F32);
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "slimtag_ckpt_err";
  fs::create_directories(dir);
  const std::string path = (dir / "model.ckpt").string();
  LabelScheme scheme = LabelScheme::default_scheme();
  EncoderConfig c = small_config();
  c.num_tags = scheme.num_tags();
  EncoderModel m = build_model(c, 3, false);
  save_checkpoint(m, scheme, path);

  CHECK_THROWS_AS(load_checkpoint("/nonexistent.ckpt"), IoError);

  // truncated file
  {
    std::ifstream in(path, std::ios::binary);
    std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::ofstream out((dir / "trunc.ckpt").string(), std::ios::binary);
    out.write(all.data(), static_cast<std::streamsize>(all.size() / 2));
  }
  CHECK_THROWS_WITH_AS(load_checkpoint((dir / "trunc.ckpt").string()),
                       doctest::Contains("truncated"), IoError);

  // bad magic
  {
    std::ofstream out((dir / "magic.ckpt").string(), std::ios::binary);
    out << "NOTMAGIC" << std::string(64, 'x');
  }
  CHECK_THROWS_WITH_AS(load_checkpoint((dir / "magic.ckpt").string()),
                       doctest::Contains("bad magic"), IoError);
}

TEST_CASE("training dropout needs an rng; inference ignores dropout") {
  PrecisionGuard g(Precision::F64);
  EncoderConfig c = small_config();
  c.dropout = 0.5;
  EncoderModel m = build_model(c, 9, false);
  const std::vector<int> ids = ids_of({1, 2});
  const std::vector<uint8_t> mask(2, 1);
  Tensor a = emissions(m, ids, mask);
  Tensor b = emissions(m, ids, mask);
  CHECK(max_abs_diff(a, b) == 0.0);  // inference is deterministic

  Tape tape(true);
  ForwardOptions opts;
  opts.training = true;
  CHECK_THROWS_AS(encoder_forward(tape, m, ids, mask, opts), ConfigError);
}
