#include <doctest.h>

#include "helpers.hpp"
#include "sessionpi/classify.hpp"

using namespace spi;
using namespace spi::test;

TEST_CASE("membership in L") {
  CHECK_FALSE(in_L(G("n:end"), P(kP2)));
  CHECK(in_L(G("n:end"), P(kSingle)));
  CHECK(in_L(G(""), p_nil()));
  CHECK(in_L(G("n:end"), P(kP2Split)));
  CHECK_FALSE(in_L(G("n:end"), P(kStuck)));
}

TEST_CASE("membership in K_n") {
  CHECK(in_K(G("n:end"), P(kP2), 2));
  CHECK_FALSE(in_K(G("n:end"), P(kP2), 1));
  for (long long n = 0; n <= 4; ++n) CHECK_FALSE(in_K(G("n:end"), P(kStuck), n));
  CHECK(in_K(G(""), p_nil(), 0));
}

TEST_CASE("hierarchy witnesses") {
  CHECK(congruent(gen_witness(1), P(kP2)));
  // odd case ends with an input on the left thread
  CHECK(congruent(gen_witness(2),
                  P("new(a1,b1:?end.end){ new(a2,b2:!end.end){ new(a3,b3:?end.end){ "
                    "in a1(x).out a2(x).in a3(y).0 | out b1(n).in b2(z).out b3(n).0 } } }")));
  for (int n = 1; n <= 4; ++n) {
    Process w = gen_witness(n);
    CHECK(check_st(witness_ctx(), w).ok);
    CHECK(in_K(witness_ctx(), w, n + 1));
    CHECK_FALSE(in_K(witness_ctx(), w, n));
  }
}

TEST_CASE("reports") {
  AnalysisReport r = report(G("n:end"), P(kP2));
  CHECK_FALSE(r.in_L);
  CHECK(r.min_degree == 2);
  CHECK(r.oracle.free);

  r = report(G("n:end"), P(kStuck));
  CHECK_FALSE(r.in_L);
  CHECK(r.min_degree == kInfDegree);
  CHECK_FALSE(r.oracle.free);

  r = report(G(""), p_nil());
  CHECK(r.in_L);
  CHECK(r.min_degree == 0);
  CHECK(r.oracle.free);
  CHECK(r.uncomposable);
}

TEST_CASE("report is consistent with its parts") {
  for (const char* s : {kP2, kSwapped, kStuck, kSingle, kP2Split}) {
    AnalysisReport r = report(G("n:end"), P(s));
    CHECK(r.in_L == (r.st.ok && r.ll.ok));
    for (auto& [n, v] : r.usage) CHECK(v.ok == (n >= r.min_degree));
  }
}

TEST_CASE("default degree bound") {
  CHECK(default_max_n(G("n:end"), P(kP2)) >= 2);
  CHECK(default_max_n(G(""), p_nil()) >= 0);
}
