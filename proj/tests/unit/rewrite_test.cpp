#include <doctest.h>

#include "helpers.hpp"
#include "sessionpi/ll_typing.hpp"
#include "sessionpi/rewrite.hpp"

using namespace spi;
using namespace spi::test;

namespace {

bool has(const ProcEnum& e, const Process& q) {
  for (auto& p : e.items)
    if (congruent(p, q)) return true;
  return false;
}

}  // namespace

TEST_CASE("characteristic processes") {
  ProcEnum e = char_proc(t_end(), nm("x"));
  REQUIRE(e.size() == 1);
  CHECK(congruent(e.canonical(), p_nil()));

  e = char_proc(T("!end.end"), nm("x"));
  REQUIRE(e.size() == 1);
  CHECK(congruent(e.canonical(), P("nu z:end{ out x(z).(0 | 0) }")));

  e = char_proc(T("?end.end"), nm("x"));
  REQUIRE(e.size() == 1);
  CHECK(congruent(e.canonical(), P("in x(z).(0 | 0)")));

  CHECK(char_proc(T("+{l1:end, l2:end}"), nm("x")).size() == 2);
  CHECK(char_proc(T("&{l1:end, l2:end}"), nm("x")).size() == 1);
  // a selection inside the payload of an input multiplies; an output payload
  // is dualized first
  CHECK(char_proc(T("?(!+{a:end, b:end}.end).+{l:end, r:end}"), nm("x")).size() == 2);
  CHECK(char_proc(T("?(?+{a:end, b:end}.end).+{l:end, r:end}"), nm("x")).size() == 4);
}

TEST_CASE("characteristic processes of contexts") {
  CHECK(congruent(char_ctx(G("")).canonical(), p_nil()));
  ProcEnum n = char_ctx(G("n:end"));
  REQUIRE(n.size() == 1);
  CHECK(congruent(n.canonical(), p_nil()));
  CHECK(char_ctx(G("x:+{a:end, b:end}, y:+{a:end, b:end, c:end}")).size() == 6);
}

TEST_CASE("enumeration bound") {
  ProcEnum e = char_proc(T("+{a:+{a:end, b:end}, b:+{a:end, b:end}}"), nm("x"), 3);
  CHECK(e.size() == 3);
  CHECK(e.truncated);
}

TEST_CASE("catalyzers") {
  auto empty = catalyzers(G(""));
  REQUIRE(empty.size() == 1);
  CHECK(empty[0].wraps.empty());
  Process hole = P("out q(n).0");
  CHECK(congruent(plug(empty[0], hole), hole));

  std::vector<std::pair<Name, SessionType>> g{{nm("a1"), T("!end.end")}, {nm("a2"), T("?end.end")}};
  auto cs = catalyzers(g);
  REQUIRE(cs.size() == 1);
  REQUIRE(cs[0].wraps.size() == 2);
  CHECK(cs[0].wraps[0].x == nm("a1"));  // outermost
  CHECK(congruent(plug(cs[0], p_nil()),
                  P("nu a1:!end.end{ nu z:end{ out a1(z).(0 | 0) } | nu a2:?end.end{ in a2(z).(0 | 0) | 0 } }")));
}

TEST_CASE("catalyzers close the sessions of the hole") {
  // hole typed by the duals of a1, a2 plus n
  Process hole = P("in a1(x).nu z:end{ out a2(z).(fwd x z | 0) }");
  std::vector<std::pair<Name, SessionType>> g{{nm("a1"), T("!end.end")}, {nm("a2"), T("?end.end")}};
  LLCtx open = enc_ctx_ll(G("a1:?end.end, a2:!end.end"));
  REQUIRE(check_ll(open, hole).ok);
  for (auto& c : catalyzers(g)) CHECK(check_ll(enc_ctx_ll(G("")), plug(c, hole)).ok);
}

TEST_CASE("first rewriting on small judgments") {
  ProcEnum z = rewrite1(G(""), p_nil());
  REQUIRE(z.size() == 1);
  CHECK(congruent(z.canonical(), p_nil()));

  // bound output: a fresh session sent and used on both sides
  ProcEnum b = rewrite1(G("x:!(!end.end).end, n:end"), P("new(u,v:?end.end){ out x(v).in u(s).0 }"));
  REQUIRE(b.size() == 1);
  CHECK(congruent(b.canonical(), P("nu v:!end.end{ out x(v).(0 | in v(s).0) }")));

  CHECK_THROWS_AS(rewrite1(G(""), P("out x(v).0")), std::invalid_argument);
}

TEST_CASE("rewriting the forwarding pair") {
  ProcEnum r = rewrite1(G("n:end"), P(kP2));
  REQUIRE(r.size() == 2);
  Process left = P(
      "nu a1:!end.end{ nu z:end{ out a1(z).(0 | 0) } | nu a2:?end.end{ in a2(z).(0 | 0) | "
      "in a1(x).nu z:end{ out a2(z).(fwd x z | 0) } } }");
  Process right = P(
      "nu b1:?end.end{ in b1(z).(0 | 0) | nu b2:!end.end{ nu z:end{ out b2(z).(0 | 0) } | "
      "nu u:end{ out b1(u).(fwd n u | in b2(z).0) } } }");
  CHECK(has(r, left));
  CHECK(has(r, right));
  LLCtx n = enc_ctx_ll(G("n:end"));
  for (auto& q : r.items) CHECK(check_ll(n, q).ok);
}

TEST_CASE("parallelization relation") {
  LLCtx d = enc_ctx_ll(G("w:?end.end, v:!end.end"));
  Process q = P("in w(a).0 | nu u:end{ out v(u).(0 | 0) }");
  CHECK(par_related(q, q, d));

  // the assignment of v moves from inside the w component to its own one
  Process q2 = P("nu z:!end.end{ in w(a).0 | nu u:end{ out z(u).(0 | 0) } | in z(y).(0 | 0) } | nu u:end{ out v(u).(0 | 0) }");
  REQUIRE(check_ll(d, q2).ok);
  CHECK(par_related(q, q2, d));

  // same free names, but no split with matching contexts
  LLCtx d3 = enc_ctx_ll(G("w:?end.end, v:!end.end, r:?end.end"));
  Process a = P("in w(a).in r(b).0 | nu u:end{ out v(u).(0 | 0) }");
  Process b = P("in w(a).nu u:end{ out v(u).(0 | 0) } | in r(b).0");
  REQUIRE(check_ll(d3, a).ok);
  REQUIRE(check_ll(d3, b).ok);
  CHECK_FALSE(par_related(a, b, d3));
}

TEST_CASE("operational correspondence") {
  CorrespondenceReport r = check_correspondence(G("n:end"), P(kP2));
  CHECK(r.ok());
  CHECK(r.steps > 0);
  CHECK(r.checks > 0);

  r = check_correspondence(G(""), p_nil());
  CHECK(r.ok());
  CHECK(r.steps == 0);

  r = check_correspondence(G("n:end"), P(kSwapped));
  CHECK(r.ok());
}
