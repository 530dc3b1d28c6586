#include <doctest.h>

#include "helpers.hpp"
#include "sessionpi/encodings.hpp"
#include "sessionpi/usage.hpp"

using namespace spi;
using namespace spi::test;

namespace {
Level fin(long long n) { return Level::fin(n); }
}

TEST_CASE("levels") {
  CHECK(level_le(fin(2), Level::inf()));
  CHECK(level_max(fin(2), Level::inf()) == Level::inf());
  CHECK(level_min(fin(2), fin(5)) == fin(2));
  CHECK_FALSE(level_le(fin(3), fin(1)));
}

TEST_CASE("capabilities and obligations") {
  CHECK(cap(Pol::In, u_zero()) == Level::inf());
  CHECK(ob(Pol::Out, u_zero()) == Level::inf());
  Usage u = u_par(u_in(0, 0, u_zero()), u_out(2, 1, u_zero()));
  CHECK(ob(Pol::In, u) == fin(0));
  CHECK(ob(Pol::Out, u) == fin(2));
  CHECK(cap(Pol::Out, u) == fin(1));
  CHECK(ob(Pol::Out, u_lift(fin(3), u_out(1, 0))) == fin(3));
  CHECK(ob(Pol::Out, u_lift(fin(0), u_out(1, 0))) == fin(1));
  CHECK(cap(Pol::Out, u_lift(fin(3), u_out(1, 0))) == fin(0));  // lift leaves cap alone
}

TEST_CASE("usage reduction") {
  auto r = usage_reduce(u_par(u_in(0, 0), u_out(0, 0)));
  REQUIRE(r.size() == 1);
  CHECK(usage_equiv(r[0], u_par(u_zero(), u_zero())));
  CHECK(usage_reduce(u_zero()).empty());
  r = usage_reduce(u_par(u_par(u_in(0, 0), u_out(0, 0)), u_out(0, 0)));
  REQUIRE(r.size() == 1);
  CHECK(usage_equiv(r[0], u_out(0, 0)));
  // the continuations survive
  r = usage_reduce(u_par(u_in(0, 0, u_out(1, 1)), u_out(0, 0, u_in(1, 1))));
  REQUIRE(r.size() == 1);
  CHECK(usage_equiv(r[0], u_par(u_out(1, 1), u_in(1, 1))));
}

TEST_CASE("reliability") {
  CHECK(rel(u_zero()));
  CHECK(rel(u_par(u_in(0, 0), u_out(0, 0))));
  CHECK_FALSE(rel(u_par(u_in(1, 0), u_out(0, 0))));
  // a later pair is checked too
  CHECK_FALSE(rel(u_par(u_in(0, 0, u_in(5, 0)), u_out(0, 0, u_out(0, 0)))));
  CHECK(rel(u_par(u_in(0, 0, u_in(1, 1)), u_out(0, 0, u_out(1, 1)))));
}

TEST_CASE("type composition") {
  UType a = ut_chan(u_in(0, 0), {}), b = ut_chan(u_out(0, 0), {});
  auto c = compose_types(a, b);
  REQUIRE(c);
  CHECK(usage_equiv((*c)->usage, u_par(u_in(0, 0), u_out(0, 0))));
  UType v = ut_variant({{"l", ut_chan(u_zero(), {})}});
  auto vv = compose_types(v, v);
  REQUIRE(vv);
  CHECK(utype_equal(*vv, v));
  CHECK_FALSE(compose_types(ut_chan(u_in(0, 0), {a}), ut_chan(u_out(0, 0), {})));
}

TEST_CASE("sequential composition") {
  auto never = [](const Name&, const Name&) { return false; };
  auto always = [](const Name&, const Name&) { return true; };
  UsageCtx g{{nm("x"), ut_chan(u_in(1, 1), {})}};
  UsageCtx r = seq_compose(nm("x"), Pol::Out, fin(0), fin(0), {}, g, never);
  CHECK(usage_equiv(r.at(nm("x"))->usage, u_out(0, 0, u_in(1, 1))));

  r = seq_compose(nm("x"), Pol::Out, fin(0), fin(2), {}, {}, never);
  CHECK(usage_equiv(r.at(nm("x"))->usage, u_out(0, 2)));

  UsageCtx h{{nm("y"), ut_chan(u_in(0, 0), {})}};
  r = seq_compose(nm("x"), Pol::In, fin(0), fin(2), {}, h, never);
  CHECK(usage_equiv(r.at(nm("y"))->usage, u_lift(fin(3), u_in(0, 0))));
  r = seq_compose(nm("x"), Pol::In, fin(0), fin(2), {}, h, always);
  CHECK(usage_equiv(r.at(nm("y"))->usage, u_lift(fin(2), u_in(0, 0))));
  CHECK(ob(Pol::In, r.at(nm("y"))->usage) == fin(2));
}

TEST_CASE("sharing degree of the forwarding pair") {
  SessionCtx g = G("n:end");
  Process e = enc_proc(P(kP2), &g);
  CHECK(check_usage(g, e, 2).ok);
  UsageVerdict one = check_usage(g, e, 1);
  CHECK_FALSE(one.ok);
  CHECK(one.feasible);
  CHECK(one.shared.size() == 2);
  CHECK(min_sharing_degree(g, P(kP2)) == 2);
}

TEST_CASE("stuck process has no level assignment") {
  SessionCtx g = G("n:end");
  Process e = enc_proc(P(kStuck), &g);
  for (long long n : {1LL, 2LL, 4LL, kInfDegree}) {
    UsageVerdict v = check_usage(g, e, n);
    CHECK_FALSE(v.ok);
    CHECK_FALSE(v.feasible);
    CHECK_FALSE(v.cycle.empty());
  }
  CHECK(min_sharing_degree(g, P(kStuck)) == kInfDegree);
}

TEST_CASE("small sharing degrees") {
  CHECK(min_sharing_degree(G("n:end"), P(kSingle)) == 1);
  CHECK(min_sharing_degree(G(""), p_nil()) == 0);
  CHECK(min_sharing_degree(G("n:end"), P(kSwapped)) == 2);
  CHECK(min_sharing_degree(G("n:end"), P(kP2Split)) == 1);
}

TEST_CASE("names with usage 0 and the sharing count") {
  // n is free in both threads but carries no actions
  SessionCtx g = G("a:!end.end, b:!end.end, n:end");
  Process e = enc_proc(P("out a(n).0 | out b(n).0"), &g);
  CHECK(check_usage(g, e, 0).ok);
  UsageOptions strict;
  strict.count_zero_usage = true;
  CHECK_FALSE(check_usage(g, e, 0, strict).ok);
  CHECK(check_usage(g, e, 1, strict).ok);
}
