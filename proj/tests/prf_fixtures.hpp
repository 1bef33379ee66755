#pragma once

// Hand-built strict-evaluation fixtures over a two-class scheme {A, B}.
// Tag ids: O=0, B-A=1, I-A=2, B-B=3, I-B=4. Every expected value below was
// computed manually from the strict matching rules; none come from the
// implementation under test.

#include <map>
#include <string>
#include <vector>

namespace slimtag::prf_fixtures {

struct Expect {
  double precision, recall, f1;
};

struct Fixture {
  const char* name;
  std::vector<int> gold;
  std::vector<int> pred;
  std::map<std::string, Expect> per_class;  // classes present in gold only
  Expect macro;
};

inline const std::vector<Fixture>& all() {
  static const double TWO_THIRDS = 2.0 / 3.0;
  static const std::vector<Fixture> fixtures = {
      {"exact match", {1, 2, 0}, {1, 2, 0}, {{"A", {1, 1, 1}}}, {1, 1, 1}},
      {"boundary miss scores zero", {1, 2}, {1, 0}, {{"A", {0, 0, 0}}}, {0, 0, 0}},
      {"class miss", {1, 2}, {3, 4}, {{"A", {0, 0, 0}}}, {0, 0, 0}},
      {"one of two, one shifted", {1, 0, 1, 2}, {1, 0, 0, 1}, {{"A", {0.5, 0.5, 0.5}}},
       {0.5, 0.5, 0.5}},
      {"adjacent B both found", {1, 1}, {1, 1}, {{"A", {1, 1, 1}}}, {1, 1, 1}},
      {"adjacent B merged by pred", {1, 1}, {1, 2}, {{"A", {0, 0, 0}}}, {0, 0, 0}},
      {"I after O repaired, matching", {0, 2, 2}, {0, 1, 2}, {{"A", {1, 1, 1}}}, {1, 1, 1}},
      {"I after O on both sides", {0, 2}, {0, 2}, {{"A", {1, 1, 1}}}, {1, 1, 1}},
      {"I of a different class starts a span", {1, 4}, {1, 4},
       {{"A", {1, 1, 1}}, {"B", {1, 1, 1}}}, {1, 1, 1}},
      {"all predictions O", {1, 2, 0}, {0, 0, 0}, {{"A", {0, 0, 0}}}, {0, 0, 0}},
      {"no gold entities", {0, 0}, {1, 0}, {}, {0, 0, 0}},
      {"two classes both exact", {1, 0, 3, 4}, {1, 0, 3, 4},
       {{"A", {1, 1, 1}}, {"B", {1, 1, 1}}}, {1, 1, 1}},
      {"two classes, one boundary miss", {1, 0, 3, 4}, {1, 0, 3, 0},
       {{"A", {1, 1, 1}}, {"B", {0, 0, 0}}}, {0.5, 0.5, 0.5}},
      {"spurious class absent from gold", {1, 0, 0}, {1, 0, 3}, {{"A", {1, 1, 1}}}, {1, 1, 1}},
      {"two singles, one found", {1, 0, 1}, {0, 0, 1},
       {{"A", {1, 0.5, TWO_THIRDS}}}, {1, 0.5, TWO_THIRDS}},
      {"pred span too long", {1, 0}, {1, 2}, {{"A", {0, 0, 0}}}, {0, 0, 0}},
      {"pred span too short", {1, 2, 2}, {1, 2, 0}, {{"A", {0, 0, 0}}}, {0, 0, 0}},
      {"B after I splits correctly", {1, 2, 1}, {1, 2, 1}, {{"A", {1, 1, 1}}}, {1, 1, 1}},
      {"all O on both sides", {0, 0, 0}, {0, 0, 0}, {}, {0, 0, 0}},
      {"B then foreign I", {3, 2}, {3, 2}, {{"A", {1, 1, 1}}, {"B", {1, 1, 1}}}, {1, 1, 1}},
      {"start shifted left", {0, 1, 2}, {1, 2, 2}, {{"A", {0, 0, 0}}}, {0, 0, 0}},
      {"second class dropped", {1, 0, 3}, {1, 0, 0},
       {{"A", {1, 1, 1}}, {"B", {0, 0, 0}}}, {0.5, 0.5, 0.5}},
      {"classes swapped", {1, 0, 3}, {3, 0, 1},
       {{"A", {0, 0, 0}}, {"B", {0, 0, 0}}}, {0, 0, 0}},
      {"B B I pattern", {1, 1, 2}, {1, 1, 2}, {{"A", {1, 1, 1}}}, {1, 1, 1}},
      {"different-class golds merged by pred", {1, 3}, {1, 2},
       {{"A", {0, 0, 0}}, {"B", {0, 0, 0}}}, {0, 0, 0}},
      {"four golds, two found", {1, 0, 1, 0, 1, 0, 1}, {1, 0, 1, 0, 0, 0, 0},
       {{"A", {1, 0.5, TWO_THIRDS}}}, {1, 0.5, TWO_THIRDS}},
      {"one exact plus one spurious", {1, 0, 0}, {1, 0, 1},
       {{"A", {0.5, 1, TWO_THIRDS}}}, {0.5, 1, TWO_THIRDS}},
  };
  return fixtures;
}

}  // namespace slimtag::prf_fixtures
