#include "sessionpi/session_typing.hpp"

#include "sessionpi/surface.hpp"

namespace spi {

namespace {

using SK = SessionTypeNode::Kind;

struct Reject {
  std::string why;
};

bool is_end(const SessionType& t) { return t->kind == SK::End; }

void st(SessionCtx g, const Process& p) {
  auto lookup = [&](const Name& x) -> SessionType {
    auto it = g.find(x);
    if (it == g.end()) throw Reject{"name " + debug_name(x) + " is not in the context"};
    return it->second;
  };
  switch (p->kind) {
    case PK::Nil:
      for (auto& [n, t] : g)
        if (!is_end(t)) throw Reject{"unconsumed linear name " + debug_name(n) + " : " + pretty(t) + " at 0"};
      return;
    case PK::Output: {
      auto t = lookup(p->x);
      if (t->kind != SK::Out) throw Reject{"subject " + debug_name(p->x) + " is not typed with an output type"};
      if (p->vals.size() != 1 || !p->vals[0].is_chan()) throw Reject{"output must carry exactly one name"};
      const Name& v = p->vals[0].name;
      if (v == p->x) throw Reject{"name " + debug_name(v) + " sent on itself"};
      auto tv = lookup(v);
      if (!type_equal(tv, t->payload))
        throw Reject{"payload mismatch on " + debug_name(p->x) + ": expected " + pretty(t->payload) + ", got " +
                     pretty(tv)};
      g[p->x] = t->cont;
      if (!is_end(t->payload)) g.erase(v);
      st(std::move(g), p->a);
      return;
    }
    case PK::Input: {
      auto t = lookup(p->x);
      if (t->kind != SK::In) throw Reject{"subject " + debug_name(p->x) + " is not typed with an input type"};
      if (p->binders.size() != 1) throw Reject{"input must bind exactly one name"};
      g[p->x] = t->cont;
      g[p->binders[0]] = t->payload;
      st(std::move(g), p->a);
      return;
    }
    case PK::Select: {
      auto t = lookup(p->x);
      if (t->kind != SK::Select) throw Reject{"subject " + debug_name(p->x) + " is not typed with a selection type"};
      auto it = t->arms.find(p->label);
      if (it == t->arms.end()) throw Reject{"label " + p->label + " missing from " + pretty(t)};
      g[p->x] = it->second;
      st(std::move(g), p->a);
      return;
    }
    case PK::Branch: {
      auto t = lookup(p->x);
      if (t->kind != SK::Branch) throw Reject{"subject " + debug_name(p->x) + " is not typed with a branching type"};
      std::set<Label> want, have;
      for (auto& [l, s] : t->arms) want.insert(l);
      for (auto& [l, q] : p->arms) have.insert(l);
      if (want != have) throw Reject{"branch arms do not match the labels of " + pretty(t)};
      for (auto& [l, q] : p->arms) {
        SessionCtx g2 = g;
        g2[p->x] = t->arms.at(l);
        st(std::move(g2), q);
      }
      return;
    }
    case PK::Par: {
      auto fl = free_names(p->a), fr = free_names(p->b);
      SessionCtx gl, gr;
      for (auto& [n, t] : g) {
        if (is_end(t)) {
          gl[n] = t;
          gr[n] = t;
          continue;
        }
        bool l = fl.count(n), r = fr.count(n);
        if (l && r) throw Reject{"linear name " + debug_name(n) + " used in both parallel components"};
        (r ? gr : gl)[n] = t;
      }
      st(std::move(gl), p->a);
      st(std::move(gr), p->b);
      return;
    }
    case PK::ResPair: {
      if (!p->annot) throw Reject{"restriction of " + debug_name(p->x) + " lacks a type annotation"};
      g[p->x] = p->annot;
      g[p->y] = dual(p->annot);
      st(std::move(g), p->a);
      return;
    }
    case PK::Res: throw Reject{"single restriction is not part of the session calculus"};
    case PK::Forward: throw Reject{"forwarder is not part of the session calculus"};
    case PK::Case: throw Reject{"case is not part of the session calculus"};
  }
}

}  // namespace

Verdict check_st(const SessionCtx& ctx, const Process& p) {
  auto fv = free_names(p);
  for (auto& n : fv)
    if (!ctx.count(n)) return Verdict::reject("name " + debug_name(n) + " is not in the context");
  try {
    st(ctx, p);
  } catch (const Reject& r) {
    return Verdict::reject(r.why);
  }
  return Verdict::accept();
}

bool uncomposable(const SessionCtx& g) {
  for (auto& [n, t] : g)
    if (!is_end(t)) return false;
  return true;
}

Process narrow_scopes(const Process& p) {
  switch (p->kind) {
    case PK::Nil:
    case PK::Forward: return p;
    case PK::Output: return p_out(p->x, p->vals, narrow_scopes(p->a));
    case PK::Input: return p_in(p->x, p->binders, narrow_scopes(p->a));
    case PK::Select: return p_sel(p->x, p->label, narrow_scopes(p->a));
    case PK::Branch: {
      std::map<Label, Process> arms;
      for (auto& [l, q] : p->arms) arms[l] = narrow_scopes(q);
      return p_bra(p->x, arms);
    }
    case PK::Case: {
      std::map<Label, CaseArm> arms;
      for (auto& [l, arm] : p->cases) arms[l] = CaseArm{arm.binder, narrow_scopes(arm.body)};
      return p_case(p->scrut, arms);
    }
    case PK::Par: return p_par(narrow_scopes(p->a), narrow_scopes(p->b));
    case PK::ResPair:
    case PK::Res: {
      Process body = narrow_scopes(p->a);
      auto wrap = [&](const Process& b) {
        return p->kind == PK::ResPair ? p_respair(p->x, p->y, p->annot, b) : p_res(p->x, p->annot, b);
      };
      auto mentions = [&](const Process& q) {
        auto fv = free_names(q);
        return fv.count(p->x) || (p->kind == PK::ResPair && fv.count(p->y));
      };
      if (body->kind == PK::Par) {
        bool l = mentions(body->a), r = mentions(body->b);
        if (l && !r) return p_par(narrow_scopes(wrap(body->a)), body->b);
        if (r && !l) return p_par(body->a, narrow_scopes(wrap(body->b)));
        return wrap(body);
      }
      if (body->kind == PK::ResPair || body->kind == PK::Res) {
        Process inner = narrow_scopes(wrap(body->a));
        if (inner->kind == PK::Par || proc_key(inner) != proc_key(wrap(body->a))) {
          return body->kind == PK::ResPair ? p_respair(body->x, body->y, body->annot, inner)
                                           : p_res(body->x, body->annot, inner);
        }
        return wrap(body);
      }
      return wrap(body);
    }
  }
  return p;
}

}  // namespace spi
