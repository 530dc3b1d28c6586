#include "sessionpi/ll_typing.hpp"

#include <functional>
#include <numeric>
#include <optional>

#include "sessionpi/semantics.hpp"
#include "sessionpi/surface.hpp"

namespace spi {

using SK = SessionTypeNode::Kind;
using LK = LLTypeNode::Kind;

LLType enc_type_ll(const SessionType& t) {
  switch (t->kind) {
    case SK::End: return ll_bullet();
    case SK::In: return ll_parr(enc_type_ll(t->payload), enc_type_ll(t->cont));
    case SK::Out: return ll_tensor(enc_type_ll(dual(t->payload)), enc_type_ll(t->cont));
    case SK::Branch: {
      std::map<Label, LLType> arms;
      for (auto& [l, s] : t->arms) arms[l] = enc_type_ll(s);
      return ll_with(arms);
    }
    case SK::Select: {
      std::map<Label, LLType> arms;
      for (auto& [l, s] : t->arms) arms[l] = enc_type_ll(s);
      return ll_plus(arms);
    }
  }
  return ll_bullet();
}

LLCtx enc_ctx_ll(const SessionCtx& g) {
  LLCtx d;
  for (auto& [n, t] : g) d[n] = enc_type_ll(t);
  return d;
}

// ---- translation -----------------------------------------------------------------

namespace {

struct Chr {
  // types are tracked when known; missing entries just mean no annotation
  Process go(const Process& p, SessionCtx g) {
    auto type_of = [&](const Name& n) -> SessionType {
      auto it = g.find(n);
      return it == g.end() ? nullptr : it->second;
    };
    switch (p->kind) {
      case PK::Nil: return p;
      case PK::Output: {
        if (p->vals.size() != 1 || !p->vals[0].is_chan()) throw std::invalid_argument("chr: output must carry one name");
        const Name& v = p->vals[0].name;
        SessionType tx = type_of(p->x);
        SessionType payload = tx && tx->kind == SK::Out ? tx->payload : nullptr;
        if (tx && tx->kind == SK::Out) {
          g[p->x] = tx->cont;
          if (payload->kind != SK::End) g.erase(v);
        }
        Name z = fresh_name("z");
        Process cont = go(p->a, g);
        return p_res(z, payload, p_out(p->x, z, p_par(p_fwd(z, v), cont)));
      }
      case PK::Input: {
        SessionType tx = type_of(p->x);
        if (tx && tx->kind == SK::In) {
          g[p->x] = tx->cont;
          g[p->binders[0]] = tx->payload;
        }
        return p_in(p->x, p->binders, go(p->a, g));
      }
      case PK::Select: {
        SessionType tx = type_of(p->x);
        if (tx && tx->kind == SK::Select && tx->arms.count(p->label)) g[p->x] = tx->arms.at(p->label);
        return p_sel(p->x, p->label, go(p->a, g));
      }
      case PK::Branch: {
        SessionType tx = type_of(p->x);
        std::map<Label, Process> arms;
        for (auto& [l, q] : p->arms) {
          SessionCtx g2 = g;
          if (tx && tx->kind == SK::Branch && tx->arms.count(l)) g2[p->x] = tx->arms.at(l);
          arms[l] = go(q, g2);
        }
        return p_bra(p->x, arms);
      }
      case PK::Par: return p_par(go(p->a, g), go(p->b, g));
      case PK::ResPair: {
        const Process& body = p->a;
        if (p->annot) {
          g[p->x] = p->annot;
          g[p->y] = dual(p->annot);
        }
        // (nu xy) s<y>.P  becomes the bound output  s(y').P[y'/x]
        if (body->kind == PK::Output && body->vals.size() == 1 && body->vals[0].is_chan() && body->x != p->x &&
            body->x != p->y && (body->vals[0].name == p->x || body->vals[0].name == p->y)) {
          const Name& sent = body->vals[0].name;
          Name kept = sent == p->x ? p->y : p->x;
          SessionCtx g2 = g;
          SessionType tx = type_of(body->x);
          if (tx && tx->kind == SK::Out) g2[body->x] = tx->cont;
          g2.erase(sent);
          Name w = fresh_name(kept.base);
          Process cont = substitute(go(body->a, g2), kept, w);
          return p_res(w, type_of(kept), p_out(body->x, w, cont));
        }
        Name w = fresh_name(p->x.base);
        Process inner = go(body, g);
        return p_res(w, p->annot, substitute(substitute(inner, p->x, w), p->y, w));
      }
      case PK::Res:
      case PK::Forward:
      case PK::Case: throw std::invalid_argument("chr: input is not a session process");
    }
    return p;
  }
};

}  // namespace

Process chr(const Process& p, const SessionCtx* ctx) {
  Chr c;
  return c.go(narrow_scopes(p), ctx ? *ctx : SessionCtx{});
}

// ---- checking -------------------------------------------------------------------

namespace {

struct LLReject {
  std::string why;
};

bool is_bullet(const LLType& a) { return a->kind == LK::Bullet; }

// Best-effort inference of the type a component gives to x; null if unknown.
LLType infer_use(const Name& x, const Process& p, const LLCtx& d) {
  Block b = flatten(p);
  std::vector<Process> users;
  for (auto& c : b.comps)
    if (occurs_free(x, c)) users.push_back(c);
  if (users.empty()) return ll_bullet();
  if (users.size() > 1) return nullptr;
  const Process& c = users[0];
  switch (c->kind) {
    case PK::Output: {
      if (c->vals.size() != 1 || !c->vals[0].is_chan()) return nullptr;
      const Name& v = c->vals[0].name;
      if (c->x == x) {
        LLType a = infer_use(v, c->a, d);
        LLType bb = infer_use(x, c->a, d);
        return a && bb ? ll_tensor(a, bb) : nullptr;
      }
      if (v == x) {
        auto it = d.find(c->x);
        if (it != d.end() && it->second->kind == LK::Tensor) return it->second->left;
        return nullptr;
      }
      return infer_use(x, c->a, d);
    }
    case PK::Input: {
      if (c->x == x) {
        LLType a = infer_use(c->binders[0], c->a, d);
        LLType bb = infer_use(x, c->a, d);
        return a && bb ? ll_parr(a, bb) : nullptr;
      }
      return infer_use(x, c->a, d);
    }
    case PK::Select:
      if (c->x == x) return nullptr;
      return infer_use(x, c->a, d);
    case PK::Branch: {
      if (c->x == x) {
        std::map<Label, LLType> arms;
        for (auto& [l, q] : c->arms) {
          auto t = infer_use(x, q, d);
          if (!t) return nullptr;
          arms[l] = t;
        }
        return ll_with(arms);
      }
      for (auto& [l, q] : c->arms) {
        auto t = infer_use(x, q, d);
        if (t) return t;
      }
      return nullptr;
    }
    case PK::Forward: {
      Name other = c->x == x ? c->y : c->x;
      auto it = d.find(other);
      return it == d.end() ? nullptr : dual_ll(it->second);
    }
    default: return nullptr;
  }
}

class Checker {
 public:
  explicit Checker(bool want) : want_(want) {}

  Derivation check(const LLCtx& d, const Process& p) {
    Block b = flatten(p);
    for (auto& bd : b.binders)
      if (bd.pair) throw LLReject{"double restriction is not part of the linear calculus"};

    if (b.comps.empty()) {
      for (auto& [n, t] : d)
        if (!is_bullet(t)) throw LLReject{"unconsumed linear name " + debug_name(n) + " : " + pretty(t) + " at 0"};
      for (auto& bd : b.binders)
        if (bd.annot && !is_bullet(enc_type_ll(bd.annot)))
          throw LLReject{"restricted name " + debug_name(bd.x) + " is never used"};
      return node("T-1", d, p, {});
    }
    if (b.comps.size() == 1 && b.binders.empty()) return single(d, b.comps[0], std::nullopt);

    const std::size_t k = b.comps.size();
    std::vector<std::set<Name>> fv(k);
    for (std::size_t i = 0; i < k; ++i) fv[i] = free_names(b.comps[i]);

    std::map<Name, const Binder*> binders;
    for (auto& bd : b.binders) binders[bd.x] = &bd;
    for (std::size_t i = 0; i < k; ++i)
      for (auto& n : fv[i])
        if (!d.count(n) && !binders.count(n)) throw LLReject{"name " + debug_name(n) + " is not in the context"};

    LLCtx bullets;
    std::vector<LLCtx> own(k);
    for (auto& [n, t] : d) {
      if (is_bullet(t)) {
        bullets[n] = t;
        continue;
      }
      std::vector<std::size_t> users;
      for (std::size_t i = 0; i < k; ++i)
        if (fv[i].count(n)) users.push_back(i);
      if (users.empty()) throw LLReject{"unconsumed linear name " + debug_name(n) + " : " + pretty(t)};
      if (users.size() > 1) throw LLReject{"linear name " + debug_name(n) + " shared by parallel components"};
      own[users[0]][n] = t;
    }

    struct Edge {
      Name x;
      std::size_t i, j;
      LLType a;  // type at i when oriented 0
    };
    std::vector<Edge> edges;
    std::vector<std::optional<Name>> bound_obj(k);
    for (auto& bd : b.binders) {
      std::vector<std::size_t> users;
      for (std::size_t i = 0; i < k; ++i)
        if (fv[i].count(bd.x)) users.push_back(i);
      LLType a = bd.annot ? enc_type_ll(bd.annot) : nullptr;
      if (users.size() == 1) {
        const Process& c = b.comps[users[0]];
        bool obj = c->kind == PK::Output && c->x != bd.x && c->vals.size() == 1 && c->vals[0].is_chan() &&
                   c->vals[0].name == bd.x;
        if (obj) {
          bound_obj[users[0]] = bd.x;
          continue;
        }
      }
      if (a && is_bullet(a)) {
        bullets[bd.x] = a;
        continue;
      }
      if (users.empty()) {
        if (a) throw LLReject{"restricted name " + debug_name(bd.x) + " is never used"};
        continue;
      }
      if (users.size() == 1) throw LLReject{"restriction of " + debug_name(bd.x) + " does not form a cut"};
      if (users.size() > 2) throw LLReject{"restricted name " + debug_name(bd.x) + " used by more than two components"};
      if (!a) {
        LLCtx dd = d;
        a = infer_use(bd.x, b.comps[users[0]], dd);
        if (!a) {
          auto o = infer_use(bd.x, b.comps[users[1]], dd);
          if (o) a = dual_ll(o);
        }
        if (!a) throw LLReject{"cut on " + debug_name(bd.x) + " lacks a type annotation"};
      }
      edges.push_back({bd.x, users[0], users[1], a});
    }

    // cut structure must be a forest without parallel edges
    std::vector<std::vector<std::size_t>> inc(k);
    {
      std::set<std::pair<std::size_t, std::size_t>> seen;
      std::vector<std::size_t> parent(k);
      std::iota(parent.begin(), parent.end(), 0);
      std::function<std::size_t(std::size_t)> find = [&](std::size_t v) {
        return parent[v] == v ? v : parent[v] = find(parent[v]);
      };
      for (std::size_t e = 0; e < edges.size(); ++e) {
        auto key = std::minmax(edges[e].i, edges[e].j);
        if (!seen.insert(key).second) throw LLReject{"two sessions shared across one cut"};
        auto ri = find(edges[e].i), rj = find(edges[e].j);
        if (ri == rj) throw LLReject{"cyclic sharing between parallel components"};
        parent[ri] = rj;
        inc[edges[e].i].push_back(e);
        inc[edges[e].j].push_back(e);
      }
    }

    // orientation search, tree by tree
    std::vector<int> orient(edges.size(), -1);
    std::map<std::pair<std::size_t, std::vector<int>>, std::optional<Derivation>> memo;
    std::string last_error;
    auto comp_ctx = [&](std::size_t c, const std::map<std::size_t, int>& bits) {
      LLCtx ctx = own[c];
      for (auto& [n, t] : bullets)
        if (fv[c].count(n) || d.count(n)) ctx[n] = t;
      for (auto& [e, bit] : bits) {
        const Edge& ed = edges[e];
        bool first = (ed.i == c);
        LLType t = (first == (bit == 0)) ? ed.a : dual_ll(ed.a);
        ctx[ed.x] = t;
      }
      return ctx;
    };
    auto try_comp = [&](std::size_t c, const std::map<std::size_t, int>& bits) -> std::optional<Derivation> {
      std::vector<int> key;
      for (auto& [e, bit] : bits) key.push_back(static_cast<int>(e) * 2 + bit);
      auto mk = std::make_pair(c, key);
      auto it = memo.find(mk);
      if (it != memo.end()) return it->second;
      std::optional<Derivation> r;
      try {
        r = single(comp_ctx(c, bits), b.comps[c], bound_obj[c]);
      } catch (const LLReject& rej) {
        last_error = rej.why;
      }
      memo[mk] = r;
      return r;
    };

    std::vector<std::optional<Derivation>> derivs(k);
    std::function<bool(std::size_t, long, int)> solve = [&](std::size_t c, long pe, int pbit) -> bool {
      std::vector<std::size_t> kids;
      for (auto e : inc[c])
        if (static_cast<long>(e) != pe) kids.push_back(e);
      // child feasibility per orientation, computed lazily
      std::map<std::pair<std::size_t, int>, bool> child_ok;
      auto child = [&](std::size_t e, int bit) {
        auto key = std::make_pair(e, bit);
        auto it = child_ok.find(key);
        if (it != child_ok.end()) return it->second;
        std::size_t other = edges[e].i == c ? edges[e].j : edges[e].i;
        bool ok = solve(other, static_cast<long>(e), bit);
        child_ok[key] = ok;
        return ok;
      };
      const std::size_t combos = std::size_t{1} << kids.size();
      for (std::size_t m = 0; m < combos; ++m) {
        std::map<std::size_t, int> bits;
        if (pe >= 0) bits[static_cast<std::size_t>(pe)] = pbit;
        for (std::size_t q = 0; q < kids.size(); ++q) bits[kids[q]] = (m >> q) & 1;
        auto dv = try_comp(c, bits);
        if (!dv) continue;
        bool all = true;
        for (std::size_t q = 0; q < kids.size() && all; ++q) all = child(kids[q], bits[kids[q]]);
        if (!all) continue;
        // re-run children to fix their orientation and derivations
        for (std::size_t q = 0; q < kids.size(); ++q) {
          std::size_t e = kids[q];
          orient[e] = bits[e];
          std::size_t other = edges[e].i == c ? edges[e].j : edges[e].i;
          solve(other, static_cast<long>(e), bits[e]);
        }
        derivs[c] = dv;
        return true;
      }
      return false;
    };

    std::vector<bool> done(k, false);
    std::function<void(std::size_t)> mark = [&](std::size_t c) {
      if (done[c]) return;
      done[c] = true;
      for (auto e : inc[c]) mark(edges[e].i == c ? edges[e].j : edges[e].i);
    };
    for (std::size_t c = 0; c < k; ++c) {
      if (done[c]) continue;
      if (!solve(c, -1, 0))
        throw LLReject{last_error.empty() ? "no typing for component " + pretty(b.comps[c]) : last_error};
      mark(c);
    }
    std::vector<Derivation> prem;
    for (auto& dv : derivs) prem.push_back(*dv);
    return node(edges.empty() ? "T-Mix" : "T-Cut", d, p, std::move(prem));
  }

 private:
  bool want_;

  Derivation node(const std::string& rule, const LLCtx& d, const Process& p, std::vector<Derivation> prem) {
    Derivation dv;
    dv.rule = rule;
    if (want_) {
      dv.conclusion = pretty(d) + " ⊢ " + pretty(p);
      dv.premises = std::move(prem);
    }
    return dv;
  }

  static LLType need(const LLCtx& d, const Name& x) {
    auto it = d.find(x);
    if (it == d.end()) throw LLReject{"name " + debug_name(x) + " is not in the context"};
    return it->second;
  }

  Derivation single(const LLCtx& d, const Process& c, const std::optional<Name>& bound_obj) {
    switch (c->kind) {
      case PK::Nil: return check(d, c);
      case PK::Forward: {
        for (auto& [n, t] : d)
          if (n != c->x && n != c->y && !is_bullet(t))
            throw LLReject{"unconsumed linear name " + debug_name(n) + " at forwarder"};
        auto a = need(d, c->x), bb = need(d, c->y);
        if (!ll_equal(bb, dual_ll(a)))
          throw LLReject{"forwarder endpoints " + debug_name(c->x) + ", " + debug_name(c->y) + " are not dual"};
        return node("T-Id", d, c, {});
      }
      case PK::Output: {
        if (c->vals.size() != 1 || !c->vals[0].is_chan()) throw LLReject{"output must carry one name"};
        const Name& y = c->vals[0].name;
        auto t = need(d, c->x);
        if (!bound_obj || *bound_obj != y)
          throw LLReject{"free output of " + debug_name(y) + " on " + debug_name(c->x) + " (object must be restricted)"};
        if (t->kind != LK::Tensor) throw LLReject{"subject " + debug_name(c->x) + " is not typed with ⊗"};
        LLType a = t->left, bty = t->right;
        bool a_bullet = is_bullet(a);

        Block cb = flatten(c->a);
        const std::size_t k = cb.comps.size();
        std::vector<std::set<Name>> fv(k);
        for (std::size_t i = 0; i < k; ++i) fv[i] = free_names(cb.comps[i]);
        std::vector<std::size_t> uf(k);
        std::iota(uf.begin(), uf.end(), 0);
        std::function<std::size_t(std::size_t)> find = [&](std::size_t v) { return uf[v] == v ? v : uf[v] = find(uf[v]); };
        for (auto& bd : cb.binders) {
          long first = -1;
          for (std::size_t i = 0; i < k; ++i) {
            if (!fv[i].count(bd.x) && !(bd.pair && fv[i].count(bd.y))) continue;
            if (first < 0)
              first = static_cast<long>(i);
            else
              uf[find(i)] = find(static_cast<std::size_t>(first));
          }
        }
        std::map<std::size_t, std::set<Name>> unit_names;
        for (std::size_t i = 0; i < k; ++i) unit_names[find(i)].insert(fv[i].begin(), fv[i].end());
        std::set<std::size_t> zside;
        for (auto& [u, ns] : unit_names) {
          bool hy = ns.count(y), hx = ns.count(c->x);
          if (hy && hx && !a_bullet)
            throw LLReject{"sent name " + debug_name(y) + " and subject " + debug_name(c->x) + " meet in one component"};
          if (hy && !hx) zside.insert(u);
        }
        Block bz, bx;
        std::set<Name> zn, xn;
        for (std::size_t i = 0; i < k; ++i) {
          bool z = zside.count(find(i)) > 0;
          (z ? bz : bx).comps.push_back(cb.comps[i]);
          (z ? zn : xn).insert(fv[i].begin(), fv[i].end());
        }
        for (auto& bd : cb.binders) {
          bool z = zn.count(bd.x) || (bd.pair && zn.count(bd.y));
          (z ? bz : bx).binders.push_back(bd);
        }
        LLCtx dz, dx;
        for (auto& [n, tt] : d) {
          if (n == c->x) continue;
          if (is_bullet(tt)) {
            dz[n] = tt;
            dx[n] = tt;
            continue;
          }
          bool inz = zn.count(n), inx = xn.count(n);
          if (inz && inx) throw LLReject{"linear name " + debug_name(n) + " shared across ⊗"};
          (inz ? dz : dx)[n] = tt;
        }
        dz[y] = a;
        if (a_bullet) dx[y] = a;
        dx[c->x] = bty;
        Derivation l = check(dz, rebuild(bz));
        Derivation r = check(dx, rebuild(bx));
        return node("T-⊗", d, c, {l, r});
      }
      case PK::Input: {
        if (c->binders.size() != 1) throw LLReject{"input must bind one name"};
        auto t = need(d, c->x);
        if (t->kind != LK::Parr) throw LLReject{"subject " + debug_name(c->x) + " is not typed with ⅋"};
        LLCtx d2 = d;
        d2[c->x] = t->right;
        d2[c->binders[0]] = t->left;
        return node("T-⅋", d, c, {check(d2, c->a)});
      }
      case PK::Select: {
        auto t = need(d, c->x);
        if (t->kind != LK::Plus) throw LLReject{"subject " + debug_name(c->x) + " is not typed with ⊕"};
        auto it = t->arms.find(c->label);
        if (it == t->arms.end()) throw LLReject{"label " + c->label + " missing from " + pretty(t)};
        LLCtx d2 = d;
        d2[c->x] = it->second;
        return node("T-⊕", d, c, {check(d2, c->a)});
      }
      case PK::Branch: {
        auto t = need(d, c->x);
        if (t->kind != LK::With) throw LLReject{"subject " + debug_name(c->x) + " is not typed with &"};
        std::set<Label> want, have;
        for (auto& [l, s] : t->arms) want.insert(l);
        for (auto& [l, q] : c->arms) have.insert(l);
        if (want != have) throw LLReject{"branch arms do not match the labels of " + pretty(t)};
        std::vector<Derivation> prem;
        for (auto& [l, q] : c->arms) {
          LLCtx d2 = d;
          d2[c->x] = t->arms.at(l);
          prem.push_back(check(d2, q));
        }
        return node("T-&", d, c, std::move(prem));
      }
      case PK::Case: throw LLReject{"case is not part of the linear calculus"};
      default: return check(d, c);
    }
  }
};

}  // namespace

LLVerdict check_ll(const LLCtx& ctx, const Process& p, bool want_derivation) {
  LLVerdict v;
  try {
    for (auto& n : free_names(p))
      if (!ctx.count(n)) throw LLReject{"name " + debug_name(n) + " is not in the context"};
    Checker c(want_derivation);
    Derivation dv = c.check(ctx, p);
    if (want_derivation) v.derivation = std::make_shared<Derivation>(std::move(dv));
  } catch (const LLReject& r) {
    v.ok = false;
    v.reason = r.why;
  }
  return v;
}

}  // namespace spi
