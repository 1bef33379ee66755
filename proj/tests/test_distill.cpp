#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "slimtag/distill.hpp"
#include "test_util.hpp"

using namespace slimtag;
using namespace slimtag::testutil;

TEST_CASE("soften: tau=1 is softmax, huge tau flattens, hand case") {
  PrecisionGuard g(Precision::F64);
  Rng rng(3);
  Tensor logits = random_uniform({3, 4}, rng, -2, 2);
  CHECK(max_abs_diff(soften(logits, 1.0), softmax_rows(logits)) == 0.0);

  Tensor flat = soften(logits, 1e6);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 4; ++j) CHECK(std::abs(flat.at(i, j) - 0.25) < 1e-4);

  Tensor two = Tensor::from({1, 2}, {2.0, 0.0});
  Tensor s = soften(two, 2.0);
  const double e = std::exp(1.0);
  CHECK(s.at(0, 0) == doctest::Approx(e / (e + 1.0)).epsilon(1e-12));
  CHECK(s.at(0, 1) == doctest::Approx(1.0 / (e + 1.0)).epsilon(1e-12));

  // rows sum to one
  for (int i = 0; i < 3; ++i) {
    double sum = 0.0;
    Tensor p = soften(logits, 4.0);
    for (int j = 0; j < 4; ++j) sum += p.at(i, j);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
  }
  CHECK_THROWS_AS(soften(logits, 0.0), ConfigError);
  CHECK_THROWS_AS(soften(logits, -1.0), ConfigError);
}

TEST_CASE("kl_term: zero cases and hand evaluation") {
  PrecisionGuard g(Precision::F64);
  Tensor p = Tensor::from({2, 2}, {0.75, 0.25, 0.5, 0.5});
  std::vector<uint8_t> all_on = {1, 1};
  CHECK(kl_term(p, p, all_on) == doctest::Approx(0.0));

  std::vector<uint8_t> all_off = {0, 0};
  Tensor q = Tensor::from({2, 2}, {0.5, 0.5, 0.9, 0.1});
  CHECK(kl_term(p, q, all_off) == 0.0);

  // one token: 0.75 ln 1.5 + 0.25 ln 0.5
  Tensor pt = Tensor::from({1, 2}, {0.75, 0.25});
  Tensor qt = Tensor::from({1, 2}, {0.5, 0.5});
  std::vector<uint8_t> one = {1};
  const double expect = 0.75 * std::log(1.5) + 0.25 * std::log(0.5);
  CHECK(kl_term(pt, qt, one) == doctest::Approx(expect).epsilon(1e-12));
  CHECK(kl_term(pt, qt, one) == doctest::Approx(0.1308).epsilon(1e-3));
  CHECK(kl_term(pt, qt, one) >= 0.0);

  // epsilon clamp reported
  Tensor qz = Tensor::from({1, 2}, {1.0, 0.0});
  KLStats stats;
  const double clamped = kl_term(pt, qz, one, &stats);
  CHECK(stats.clamped == 1);
  CHECK(std::isfinite(clamped));
}

TEST_CASE("kd_loss endpoints and the tau^2 factor") {
  PrecisionGuard g(Precision::F64);
  Rng rng(7);
  Tensor teacher = random_uniform({4, 3}, rng, -2, 2);
  Tensor student_init = random_uniform({4, 3}, rng, -2, 2);
  const std::vector<int> gold = {0, 2, LabelScheme::kIgnoreIndex, 1};

  // alpha = 1 is plain CE
  {
    Tape tape(false);
    KDConfig cfg{1.0, 4.0};
    KDParts parts;
    VarPtr loss = kd_loss(tape, make_const(student_init), teacher, gold, cfg, &parts);
    Tape t2(false);
    VarPtr ce = token_ce_loss(t2, make_const(student_init), gold);
    CHECK(std::abs(loss->value.item() - ce->value.item()) < 1e-7);
    CHECK(parts.valid_tokens == 3);
  }

  // alpha = 0, student == teacher: loss 0
  {
    Tape tape(false);
    KDConfig cfg{0.0, 4.0};
    VarPtr loss = kd_loss(tape, make_const(teacher), teacher, gold, cfg);
    CHECK(std::abs(loss->value.item()) < 1e-9);
  }

  // alpha = 0.5, tau = 4: equals 0.5 CE + 0.5 * 16 * meanKL, recomputed
  // term by term from the raw pieces
  {
    Tape tape(false);
    KDConfig cfg{0.5, 4.0};
    KDParts parts;
    VarPtr loss = kd_loss(tape, make_const(student_init), teacher, gold, cfg, &parts);

    Tape t2(false);
    const double ce = token_ce_loss(t2, make_const(student_init), gold)->value.item();
    std::vector<uint8_t> valid = {1, 1, 0, 1};
    const double kl =
        kl_term(soften(teacher, 4.0), soften(student_init, 4.0), valid) / 3.0;
    CHECK(std::abs(loss->value.item() - (0.5 * ce + 0.5 * 16.0 * kl)) < 1e-7);
    CHECK(std::abs(parts.soft - 16.0 * parts.kl_mean) < 1e-7);
  }
}

TEST_CASE("kd_loss is invariant to per-token constant shifts of teacher logits") {
  PrecisionGuard g(Precision::F64);
  Rng rng(11);
  Tensor teacher = random_uniform({3, 4}, rng, -1, 1);
  Tensor student = random_uniform({3, 4}, rng, -1, 1);
  const std::vector<int> gold = {1, 3, 0};
  KDConfig cfg;

  Tape t1(false);
  const double base = kd_loss(t1, make_const(student), teacher, gold, cfg)->value.item();

  Tensor shifted = teacher;
  for (int i = 0; i < 3; ++i) {
    const double c = rng.uniform(-5, 5);
    for (int j = 0; j < 4; ++j) shifted.at(i, j) += c;
  }
  // shifting the teacher's logits row-wise leaves its soft targets unchanged
  Tape t2(false);
  const double same = kd_loss(t2, make_const(student), shifted, gold, cfg)->value.item();
  CHECK(std::abs(base - same) < 1e-6);
}

TEST_CASE("kd_loss gradients match finite differences; teacher is frozen") {
  PrecisionGuard g(Precision::F64);
  Rng rng(13);
  for (int rep = 0; rep < 8; ++rep) {
    Tensor teacher = random_uniform({3, 4}, rng, -1.5, 1.5);
    VarPtr student = make_param(random_uniform({3, 4}, rng, -1.5, 1.5));
    const std::vector<int> gold = {2, LabelScheme::kIgnoreIndex, 1};
    KDConfig cfg{0.4, 3.0};

    Tape tape(true);
    VarPtr loss = kd_loss(tape, student, teacher, gold, cfg);
    zero_grad({student});
    tape.backward(loss);

    Tensor fd = finite_diff(
        [&]() {
          Tape t(false);
          return kd_loss(t, make_const(student->value), teacher, gold, cfg)->value.item();
        },
        student->value);
    CHECK(max_rel_err(student->grad, fd) < 1e-3);
  }
}

TEST_CASE("logit cache round trip") {
  PrecisionGuard g(Precision::F32);
  Rng rng(17);
  std::vector<Tensor> logits;
  for (int i = 0; i < 5; ++i) logits.push_back(random_uniform({2 + i, 4}, rng, -2, 2));
  namespace fs = std::filesystem;
  const auto prefix = (fs::temp_directory_path() / "slimtag_cache_test").string();
  LogitCache::write(prefix, logits);
  LogitCache cache = LogitCache::read(prefix);
  REQUIRE(cache.size() == 5);
  for (size_t i = 0; i < 5; ++i) CHECK(max_abs_diff(cache.at(i), logits[i]) == 0.0);

  CHECK_THROWS_AS(LogitCache::read("/nonexistent/prefix"), IoError);
}

TEST_CASE("kd config validation") {
  KDConfig bad_tau{0.5, 0.0};
  CHECK_THROWS_AS(bad_tau.validate(), ConfigError);
  KDConfig bad_alpha{1.5, 4.0};
  CHECK_THROWS_AS(bad_alpha.validate(), ConfigError);
  KDConfig defaults;
  CHECK(defaults.alpha == 0.5);
  CHECK(defaults.tau == 4.0);
}
