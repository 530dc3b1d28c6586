#include <doctest.h>

#include "helpers.hpp"
#include "sessionpi/encodings.hpp"
#include "sessionpi/ll_typing.hpp"
#include "sessionpi/random.hpp"
#include "sessionpi/usage.hpp"

using namespace spi;
using namespace spi::test;

namespace {
UType u0() { return ut_chan(u_zero(), {}); }
}

TEST_CASE("process encoding") {
  // x<v>.0 sends v together with a fresh continuation
  Process e = enc_proc(P("out x(v).0"));
  REQUIRE(e->kind == PK::Res);
  Name c = e->x;
  Process o = e->a;
  REQUIRE(o->kind == PK::Output);
  CHECK(o->x == nm("x"));
  REQUIRE(o->vals.size() == 2);
  CHECK(o->vals[0].name == nm("v"));
  CHECK(o->vals[1].name == c);
  CHECK(o->a->kind == PK::Nil);

  CHECK(enc_proc(p_nil())->kind == PK::Nil);

  e = enc_proc(P("sel x l.out x(v).0"));
  REQUIRE(e->kind == PK::Res);
  REQUIRE(e->a->kind == PK::Output);
  REQUIRE(e->a->vals.size() == 1);
  CHECK(e->a->vals[0].kind == Value::Kind::Variant);
  CHECK(e->a->vals[0].label == "l");
  CHECK(e->a->vals[0].payload->name == e->x);
  // the continuation of x is the fresh channel
  CHECK(congruent(e, P("nu c{ out x(l(c)).nu d{ out c(v, d).0 } }")));
}

TEST_CASE("input, branch and restriction encodings") {
  CHECK(congruent(enc_proc(P("in x(y).out y(v).0")), P("in x(y, c).nu d{ out y(v, d).0 }")));
  CHECK(congruent(enc_proc(P("bra x { l: 0, r: in x(y).0 }")),
                  P("in x(z).case z { l(c): 0, r(c): in c(y, d).0 }")));
  CHECK(congruent(enc_proc(P(kSingle)), P("nu c:!end.end{ nu d:end{ out c(n, d).0 } | in c(s, e).0 }")));
}

TEST_CASE("type encoding into usages") {
  CHECK(utype_equal(enc_type_u(t_end(), 3, 4), u0()));
  CHECK(utype_equal(enc_type_u(T("!end.end"), 0, 0), ut_chan(u_out(0, 0), {u0(), u0()})));
  CHECK(utype_equal(enc_type_u(T("+{l:end}"), 0, 0), ut_chan(u_out(0, 0), {ut_variant({{"l", u0()}})})));
  // continuations move to (cap+1, ob+1)
  CHECK(utype_equal(enc_type_u(T("?end.?end.end"), 0, 2),
                    ut_chan(u_in(0, 2), {u0(), ut_chan(u_in(3, 1), {u0(), u0()})})));
  // the output continuation is encoded from the dual side
  CHECK(utype_equal(enc_type_u(T("!end.!end.end"), 0, 0),
                    ut_chan(u_out(0, 0), {u0(), ut_chan(u_in(1, 1), {u0(), u0()})})));
}

TEST_CASE("context encodings") {
  CHECK(enc_ctx_u(G("")).empty());
  UsageCtx u = enc_ctx_u(G("n:end"));
  CHECK(utype_equal(u.at(nm("n")), u0()));
  u = enc_ctx_u(G("x:!end.end, y:?end.end"));
  CHECK(usage_equiv(u.at(nm("x"))->usage, u_out(0, 0)));
  CHECK(usage_equiv(u.at(nm("y"))->usage, u_in(0, 0)));
  LLCtx l = enc_ctx_ll(G("x:!end.end, y:?end.end"));
  CHECK(ll_equal(l.at(nm("x")), dual_ll(l.at(nm("y")))));
}

namespace {
// swap every polarity in a usage
Usage flip(const Usage& u) {
  switch (u->kind) {
    case UsageNode::Kind::Zero: return u;
    case UsageNode::Kind::Act:
      return u_act(u->pol == Pol::In ? Pol::Out : Pol::In, u->ob, u->cap, u->a ? flip(u->a) : nullptr);
    case UsageNode::Kind::Par: return u_par(flip(u->a), flip(u->b));
    case UsageNode::Kind::Lift: return u_lift(u->lift, flip(u->a));
  }
  return u;
}
}  // namespace

TEST_CASE("duality commutes with the encodings") {
  Rng rng(21);
  for (int i = 0; i < 300; ++i) {
    SessionType t = random_type(rng, 4);
    CHECK(ll_equal(enc_type_ll(dual(t)), dual_ll(enc_type_ll(t))));
    UType a = enc_type_u(t), b = enc_type_u(dual(t));
    REQUIRE(a->kind == b->kind);
    if (a->kind == UTypeNode::Kind::Chan) {
      CHECK(usage_equiv(b->usage, flip(a->usage)));
      REQUIRE(a->payloads.size() == b->payloads.size());
      for (std::size_t k = 0; k < a->payloads.size(); ++k) CHECK(utype_equal(a->payloads[k], b->payloads[k]));
    }
  }
}
