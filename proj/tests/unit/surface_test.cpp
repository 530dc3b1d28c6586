#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "sessionpi/random.hpp"

using namespace spi;
using namespace spi::test;

TEST_CASE("parse a restricted pair") {
  Process p = P(kSingle);
  REQUIRE(p->kind == PK::ResPair);
  CHECK(p->x.base == "x");
  CHECK(p->y.base == "y");
  CHECK(type_equal(p->annot, t_out(t_end(), t_end())));
  Process body = p->a;
  REQUIRE(body->kind == PK::Par);
  CHECK(body->a->kind == PK::Output);
  CHECK(body->a->x == p->x);  // bound occurrence resolved to the binder
  CHECK(body->a->vals[0].name == nm("n"));
  CHECK(body->b->kind == PK::Input);
  CHECK(body->b->x == p->y);
}

TEST_CASE("parse nil and the stuck process") {
  CHECK(P("0")->kind == PK::Nil);
  Process p = P(kStuck);
  REQUIRE(p->kind == PK::ResPair);
  REQUIRE(p->a->kind == PK::ResPair);
  Process par = p->a->a;
  REQUIRE(par->kind == PK::Par);
  CHECK(par->a->x == p->x);
  CHECK(par->a->a->x == p->a->x);
  CHECK(par->b->x == p->a->y);
  CHECK(par->b->a->x == p->y);
  CHECK(pretty(p) == "new(x, y:!end.end){ new(w, z:!end.end){ out x(n).out w(n).0 | in z(t).in y(s).0 } }");
}

TEST_CASE("parse types") {
  CHECK(T("end")->kind == SessionTypeNode::Kind::End);
  SessionType o = T("!end.end");
  CHECK(o->kind == SessionTypeNode::Kind::Out);
  CHECK(type_equal(o->payload, t_end()));
  CHECK(type_equal(o->cont, t_end()));
  SessionType b = T("&{l1:end, l2:?end.end}");
  REQUIRE(b->kind == SessionTypeNode::Kind::Branch);
  CHECK(b->arms.size() == 2);
  CHECK(type_equal(b->arms.at("l2"), t_in(t_end(), t_end())));
  CHECK(T("?^3 end.end")->pos == 3);
}

TEST_CASE("parse errors") {
  CHECK_THROWS_AS(P("out x(n)"), ParseError);
  CHECK_THROWS_AS(P("new(x,y){0}"), ParseError);  // annotation is mandatory
  CHECK_THROWS_AS(P("bra x { }"), ParseError);
  CHECK_THROWS_AS(T("+{l:end, l:end}"), ParseError);
  CHECK_THROWS_AS(parse_program("process a = 0; process a = 0;"), ParseError);
}

TEST_CASE("dialects reject foreign constructs") {
  CHECK_THROWS_AS(parse_process("fwd x y", Dialect::Session), ParseError);
  CHECK_THROWS_AS(parse_process("new(x,y:end){0}", Dialect::LL), ParseError);
  CHECK_THROWS_AS(parse_process("sel x l.0", Dialect::Poly), ParseError);
  CHECK_NOTHROW(parse_process("nu x:!end.end{ fwd x y }", Dialect::LL));
  CHECK_NOTHROW(parse_process("case l(x) { l(y): 0 }", Dialect::Poly));
}

TEST_CASE("programs with declarations") {
  Program prog = parse_program(R"(
    # a type alias and a context
    type S = !end.end;
    context c = n:end;
    process main = new(x,y:S){ out x(n).0 | in y(s).0 };
  )");
  REQUIRE(prog.processes.size() == 1);
  CHECK(congruent(prog.processes[0].second, P(kSingle)));
  REQUIRE(prog.contexts.size() == 1);
  CHECK(prog.contexts[0].second.count(nm("n")) == 1);
}

TEST_CASE("pretty printing") {
  CHECK(pretty(p_nil()) == "0");
  CHECK(pretty(T("!end.end")) == "!end.end");
  // meta-operators never reach the output
  CHECK(pretty(dual(T("!(?end.end).+{l:end}"))) == "?(?end.end).&{l:end}");
}

TEST_CASE("round trip on random terms") {
  Rng rng(11);
  for (int i = 0; i < 300; ++i) {
    Process p = random_term(rng, 4);
    Process q = parse_process(pretty(p));
    CHECK_MESSAGE(alpha_equal(p, q), pretty(p));
  }
}

TEST_CASE("round trip on types") {
  Rng rng(5);
  for (int i = 0; i < 300; ++i) {
    SessionType t = random_type(rng, 4);
    CHECK(type_equal(parse_type(pretty(t)), t));
  }
}
