#include <doctest.h>

#include <functional>

#include "helpers.hpp"

using namespace spi;
using namespace spi::test;

TEST_CASE("free names") {
  CHECK(free_names(p_nil()).empty());
  CHECK(free_names(P("out x(n).0")) == std::set<Name>{nm("x"), nm("n")});
  CHECK(free_names(P(kSingle)) == std::set<Name>{nm("n")});
  CHECK(free_names(P("in y(s).out s(v).0")) == std::set<Name>{nm("y"), nm("v")});
}

TEST_CASE("substitution") {
  Process in = P("in y(s).0");
  CHECK(alpha_equal(substitute(in, nm("s"), nm("v")), in));
  CHECK(alpha_equal(substitute(P("out x(z).0"), nm("z"), nm("v")), P("out x(v).0")));

  // capture: the bound s must move out of the way
  Process q = substitute(P("in y(s).out s(v).0"), nm("v"), nm("s"));
  CHECK(free_names(q) == std::set<Name>{nm("y"), nm("s")});
  CHECK(q->binders[0] != nm("s"));

  // both endpoints of a pair collapse onto one name
  Process body = P("out x(n).0 | in y(s).0");
  Name w = fresh_name("w");
  Process merged = substitute(substitute(body, nm("x"), w), nm("y"), w);
  CHECK(free_names(merged) == std::set<Name>{w, nm("n")});
}

TEST_CASE("substitution never captures") {
  Process p = P("in a(b).out b(c).0 | new(x,y:!end.end){ out x(c).0 | in y(d).out a(d).0 }");
  for (const char* from : {"a", "c", "q"})
    for (const char* to : {"b", "d", "x", "c"}) {
      std::set<Name> want = free_names(p);
      bool was = want.erase(nm(from)) > 0;
      if (was) want.insert(nm(to));
      CHECK(free_names(substitute(p, nm(from), nm(to))) == want);
    }
}

TEST_CASE("session duality") {
  CHECK(type_equal(dual(t_end()), t_end()));
  CHECK(type_equal(dual(T("!end.?end.end")), T("?end.!end.end")));
  CHECK(type_equal(dual(T("!(?end.end).end")), T("?(?end.end).end")));  // payload kept
  CHECK(type_equal(dual(T("+{l:end}")), T("&{l:end}")));
  CHECK(type_equal(dual(T("&{a:!end.end, b:end}")), T("+{a:?end.end, b:end}")));
}

TEST_CASE("linear logic duality") {
  CHECK(ll_equal(dual_ll(ll_bullet()), ll_bullet()));
  LLType a = ll_tensor(ll_bullet(), ll_parr(ll_bullet(), ll_bullet()));
  CHECK(ll_equal(dual_ll(a), ll_parr(ll_bullet(), ll_tensor(ll_bullet(), ll_bullet()))));
  LLType w = ll_with({{"l", a}, {"r", ll_bullet()}});
  CHECK(ll_equal(dual_ll(w), ll_plus({{"l", dual_ll(a)}, {"r", ll_bullet()}})));
  CHECK(ll_equal(dual_ll(dual_ll(w)), w));
}

TEST_CASE("alpha canonical form") {
  CHECK(proc_key(alpha_canonical(P("in x(a).0"))) == proc_key(alpha_canonical(P("in x(b).0"))));
  CHECK(proc_key(alpha_canonical(p_nil())) == proc_key(p_nil()));
  Process a = P("new(x,y:!end.end){ new(w,z:!end.end){ out x(n).out w(n).0 | in y(s).in z(t).0 } }");
  Process b = P("new(p,q:!end.end){ new(r,s:!end.end){ out p(n).out r(n).0 | in q(u).in s(v).0 } }");
  CHECK(proc_key(alpha_canonical(a)) == proc_key(alpha_canonical(b)));
  CHECK(alpha_equal(a, b));
  // the two binders are not interchangeable
  Process c = P("new(p,q:!end.end){ new(r,s:!end.end){ out r(n).out p(n).0 | in q(u).in s(v).0 } }");
  CHECK_FALSE(alpha_equal(a, c));
}

TEST_CASE("alpha canonical form is idempotent") {
  for (const char* s : {kStuck, kP2, kVd, "in x(a).in a(b).out b(a).0"}) {
    Process once = alpha_canonical(P(s));
    CHECK(proc_key(alpha_canonical(once)) == proc_key(once));
  }
}

TEST_CASE("binders are pairwise distinct after parsing") {
  Process p = P("in x(a).0 | in y(a).0 | new(a,b:end){0}");
  std::set<Name> seen;
  std::function<void(const Process&)> walk = [&](const Process& q) {
    auto add = [&](const Name& n) { CHECK(seen.insert(n).second); };
    switch (q->kind) {
      case PK::Input: for (auto& b : q->binders) add(b); walk(q->a); break;
      case PK::ResPair: add(q->x); add(q->y); walk(q->a); break;
      case PK::Par: walk(q->a); walk(q->b); break;
      default: break;
    }
  };
  walk(p);
  CHECK(seen.size() == 4);
}
