#include "sessionpi/encodings.hpp"

#include <stdexcept>

namespace spi {

using SK = SessionTypeNode::Kind;

namespace {

struct Encoder {
  const bool typed;

  Process go(const Process& p, std::map<Name, Name> f, SessionCtx g) {
    auto ren = [&](const Name& n) {
      auto it = f.find(n);
      return it == f.end() ? n : it->second;
    };
    auto type_of = [&](const Name& n) -> SessionType {
      auto it = g.find(n);
      return it == g.end() ? nullptr : it->second;
    };
    switch (p->kind) {
      case PK::Nil: return p;
      case PK::Output: {
        if (p->vals.size() != 1 || !p->vals[0].is_chan()) throw std::invalid_argument("enc: output must carry one name");
        const Name& v = p->vals[0].name;
        SessionType t = type_of(p->x);
        SessionType cont_t = t && t->kind == SK::Out ? t->cont : nullptr;
        Name c = fresh_name("c");
        Name x2 = ren(p->x), v2 = ren(v);
        if (cont_t) {
          g[p->x] = cont_t;
          if (t->payload->kind != SK::End) g.erase(v);
        }
        f[p->x] = c;
        return p_res(c, cont_t, p_out(x2, {Value::chan(v2), Value::chan(c)}, go(p->a, f, g)));
      }
      case PK::Input: {
        SessionType t = type_of(p->x);
        Name c = fresh_name("c");
        Name x2 = ren(p->x);
        if (t && t->kind == SK::In) {
          g[p->x] = t->cont;
          g[p->binders[0]] = t->payload;
        }
        f.erase(p->binders[0]);
        f[p->x] = c;
        return p_in(x2, {p->binders[0], c}, go(p->a, f, g));
      }
      case PK::Select: {
        SessionType t = type_of(p->x);
        SessionType cont_t = t && t->kind == SK::Select && t->arms.count(p->label) ? t->arms.at(p->label) : nullptr;
        Name c = fresh_name("c");
        Name x2 = ren(p->x);
        if (cont_t) g[p->x] = cont_t;
        f[p->x] = c;
        return p_res(c, cont_t, p_out(x2, {Value::variant(p->label, Value::chan(c))}, go(p->a, f, g)));
      }
      case PK::Branch: {
        SessionType t = type_of(p->x);
        Name z = fresh_name("z");
        Name x2 = ren(p->x);
        std::map<Label, CaseArm> arms;
        for (auto& [l, q] : p->arms) {
          Name c = fresh_name("c");
          auto f2 = f;
          auto g2 = g;
          f2[p->x] = c;
          if (t && t->kind == SK::Branch && t->arms.count(l)) g2[p->x] = t->arms.at(l);
          arms[l] = CaseArm{c, go(q, f2, g2)};
        }
        return p_in(x2, {z}, p_case(Value::chan(z), arms));
      }
      case PK::Par: return p_par(go(p->a, f, g), go(p->b, f, g));
      case PK::ResPair: {
        Name c = fresh_name("c");
        f[p->x] = c;
        f[p->y] = c;
        if (p->annot) {
          g[p->x] = p->annot;
          g[p->y] = dual(p->annot);
        }
        return p_res(c, p->annot, go(p->a, f, g));
      }
      default: throw std::invalid_argument("enc: input is not a session process");
    }
  }
};

}  // namespace

Process enc_proc(const Process& p, const std::map<Name, Name>& renaming, const SessionCtx* ctx) {
  Encoder e{ctx != nullptr};
  return e.go(p, renaming, ctx ? *ctx : SessionCtx{});
}

Process enc_proc(const Process& p, const SessionCtx* ctx) { return enc_proc(p, {}, ctx); }

UType enc_type_u(const SessionType& t, long long o, long long k) {
  switch (t->kind) {
    case SK::End: return ut_chan(u_zero(), {});
    case SK::In: return ut_chan(u_in(o, k), {enc_type_u(t->payload, 0, 0), enc_type_u(t->cont, k + 1, o + 1)});
    case SK::Out: return ut_chan(u_out(o, k), {enc_type_u(t->payload, 0, 0), enc_type_u(dual(t->cont), k + 1, o + 1)});
    case SK::Branch: {
      std::map<Label, UType> arms;
      for (auto& [l, s] : t->arms) arms[l] = enc_type_u(s, k + 1, o + 1);
      return ut_chan(u_in(o, k), {ut_variant(arms)});
    }
    case SK::Select: {
      std::map<Label, UType> arms;
      for (auto& [l, s] : t->arms) arms[l] = enc_type_u(dual(s), k + 1, o + 1);
      return ut_chan(u_out(o, k), {ut_variant(arms)});
    }
  }
  return ut_chan(u_zero(), {});
}

UsageCtx enc_ctx_u(const SessionCtx& g, long long o, long long k) {
  UsageCtx u;
  for (auto& [n, t] : g) u[n] = enc_type_u(t, o, k);
  return u;
}

}  // namespace spi
