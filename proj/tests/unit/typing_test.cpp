#include <doctest.h>

#include "helpers.hpp"
#include "sessionpi/ll_typing.hpp"
#include "sessionpi/session_typing.hpp"

using namespace spi;
using namespace spi::test;

TEST_CASE("session typing accepts") {
  CHECK(check_st(G("n:end"), P(kStuck)).ok);
  CHECK(check_st(G("n:end"), P(kP2)).ok);
  CHECK(check_st(G("n:end"), P(kSwapped)).ok);
  CHECK(check_st(G(""), p_nil()).ok);
  CHECK(check_st(G("x:!end.end, n:end"), P("out x(n).0")).ok);
  CHECK(check_st(G("x:+{l:end, r:!end.end}"), P("sel x l.0")).ok);
  CHECK(check_st(G("x:&{l:end, r:?end.end}"), P("bra x { l: 0, r: in x(v).0 }")).ok);
  // delegation: the received endpoint is used at its payload type
  CHECK(check_st(G("x:?(!end.end).end, n:end"), P("in x(u).out u(n).0")).ok);
}

TEST_CASE("session typing rejects") {
  CHECK_FALSE(check_st(G(""), P("out x(v).0")).ok);
  CHECK_FALSE(check_st(G("n:end"), P("new(x,y:!end.end){ out x(n).0 | out y(n).0 }")).ok);  // not dual
  CHECK_FALSE(check_st(G("x:!end.end"), p_nil()).ok);  // unconsumed
  CHECK_FALSE(check_st(G("x:!end.end, n:end"), P("in x(v).0")).ok);
  CHECK_FALSE(check_st(G("x:!(!end.end).end, n:end"), P("out x(n).0")).ok);  // payload
  CHECK_FALSE(check_st(G("x:+{l:end}"), P("sel x r.0")).ok);
  CHECK_FALSE(check_st(G("x:&{l:end, r:end}"), P("bra x { l: 0 }")).ok);
  CHECK_FALSE(check_st(G("x:!end.end, n:end"), P("out x(n).0 | out x(n).0")).ok);  // linear in both
}

TEST_CASE("session typing is deterministic") {
  Verdict a = check_st(G("n:end"), P(kStuck)), b = check_st(G("n:end"), P(kStuck));
  CHECK(a.ok == b.ok);
  CHECK(a.reason == b.reason);
}

TEST_CASE("composability") {
  CHECK(uncomposable(G("")));
  CHECK(uncomposable(G("n:end")));
  CHECK_FALSE(uncomposable(G("x:!end.end")));
  CHECK_FALSE(uncomposable(G("n:end, x:&{l:end}")));
}

TEST_CASE("free outputs become bound outputs") {
  CHECK(congruent(chr(P("out x(y).0")), P("nu z{ out x(z).(fwd z y | 0) }")));
  CHECK(congruent(chr(P(kSingle)), P("nu w:!end.end{ nu z:end{ out w(z).(fwd z n | 0) } | in w(s).0 }")));
  CHECK(congruent(chr(p_nil()), p_nil()));
}

TEST_CASE("type encoding into linear logic") {
  CHECK(ll_equal(enc_type_ll(t_end()), ll_bullet()));
  CHECK(ll_equal(enc_type_ll(T("!end.end")), ll_tensor(ll_bullet(), ll_bullet())));
  CHECK(ll_equal(enc_type_ll(T("?(!end.end).end")), ll_parr(ll_tensor(ll_bullet(), ll_bullet()), ll_bullet())));
  // output encodes the dual payload
  CHECK(ll_equal(enc_type_ll(T("!(!end.end).end")), ll_tensor(ll_parr(ll_bullet(), ll_bullet()), ll_bullet())));
  CHECK(ll_equal(enc_type_ll(T("+{l:end}")), ll_plus({{"l", ll_bullet()}})));
  CHECK(ll_equal(enc_type_ll(T("&{l:end}")), ll_with({{"l", ll_bullet()}})));
}

TEST_CASE("linear logic typing") {
  CHECK(check_ll({{nm("x"), ll_bullet()}}, p_nil()).ok);
  LLType a = enc_type_ll(T("!end.?end.end"));
  CHECK(check_ll({{nm("z"), dual_ll(a)}, {nm("y"), a}}, P("fwd z y")).ok);
  CHECK_FALSE(check_ll({{nm("z"), a}, {nm("y"), a}}, P("fwd z y")).ok);

  LLCtx n = enc_ctx_ll(G("n:end"));
  CHECK(check_ll(n, chr(P(kSingle), nullptr)).ok);
  CHECK(check_ll(n, chr(P(kP2Split), nullptr)).ok);
  LLVerdict v = check_ll(n, chr(P(kP2), nullptr));
  CHECK_FALSE(v.ok);
  CHECK(v.reason.find("two sessions") != std::string::npos);
}

TEST_CASE("linear logic typing rejects") {
  LLCtx n = enc_ctx_ll(G("n:end"));
  CHECK_FALSE(check_ll(n, P("out n(v).0")).ok);
  // restriction without a parallel body
  CHECK_FALSE(check_ll(n, P("nu x:!end.end{ 0 }")).ok);
  // name shared across mix
  CHECK_FALSE(check_ll({{nm("x"), ll_bullet()}}, P("in x(v).0 | in x(w).0")).ok);
  // leftover non-unit assignment
  CHECK_FALSE(check_ll({{nm("x"), ll_tensor(ll_bullet(), ll_bullet())}}, p_nil()).ok);
}

TEST_CASE("derivations on request") {
  LLVerdict v = check_ll(enc_ctx_ll(G("n:end")), chr(P(kSingle), nullptr), true);
  REQUIRE(v.ok);
  REQUIRE(v.derivation);
  CHECK(v.derivation->rule == "T-Cut");
}
