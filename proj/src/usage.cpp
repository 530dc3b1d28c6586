#include "sessionpi/usage.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <numeric>

#include "sessionpi/encodings.hpp"
#include "sessionpi/semantics.hpp"
#include "sessionpi/session_typing.hpp"

namespace spi {

// ---- levels ----------------------------------------------------------------------

bool level_le(const Level& a, const Level& b) {
  if (b.kind == Level::Kind::Inf) return true;
  if (a.kind == Level::Kind::Inf) return false;
  return a.n <= b.n;
}

Level level_min(const Level& a, const Level& b) { return level_le(a, b) ? a : b; }
Level level_max(const Level& a, const Level& b) { return level_le(a, b) ? b : a; }

std::string to_string(const Level& l) {
  switch (l.kind) {
    case Level::Kind::Finite: return std::to_string(l.n);
    case Level::Kind::Inf: return "inf";
    case Level::Kind::Var: return "t" + std::to_string(l.n);
  }
  return "?";
}

static Level plus(const Level& l, long long d) { return l.kind == Level::Kind::Finite ? Level::fin(l.n + d) : l; }

// ---- usages ----------------------------------------------------------------------

using UK = UsageNode::Kind;

Usage u_zero() {
  static const Usage z = std::make_shared<const UsageNode>();
  return z;
}

Usage u_act(Pol p, Level o, Level k, Usage cont) {
  auto n = std::make_shared<UsageNode>();
  n->kind = UK::Act;
  n->pol = p;
  n->ob = o;
  n->cap = k;
  n->a = cont ? cont : u_zero();
  return n;
}

Usage u_in(long long o, long long k, Usage cont) { return u_act(Pol::In, Level::fin(o), Level::fin(k), std::move(cont)); }
Usage u_out(long long o, long long k, Usage cont) { return u_act(Pol::Out, Level::fin(o), Level::fin(k), std::move(cont)); }

Usage u_par(Usage a, Usage b) {
  auto n = std::make_shared<UsageNode>();
  n->kind = UK::Par;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

Usage u_lift(Level t, Usage a) {
  auto n = std::make_shared<UsageNode>();
  n->kind = UK::Lift;
  n->lift = t;
  n->a = std::move(a);
  return n;
}

Level ob(Pol p, const Usage& u) {
  switch (u->kind) {
    case UK::Zero: return Level::inf();
    case UK::Act: return u->pol == p ? u->ob : Level::inf();
    case UK::Par: return level_min(ob(p, u->a), ob(p, u->b));
    case UK::Lift: return level_max(u->lift, ob(p, u->a));
  }
  return Level::inf();
}

Level cap(Pol p, const Usage& u) {
  switch (u->kind) {
    case UK::Zero: return Level::inf();
    case UK::Act: return u->pol == p ? u->cap : Level::inf();
    case UK::Par: return level_min(cap(p, u->a), cap(p, u->b));
    case UK::Lift: return cap(p, u->a);
  }
  return Level::inf();
}

std::string to_string(const Usage& u) {
  switch (u->kind) {
    case UK::Zero: return "0";
    case UK::Act: {
      std::string s = (u->pol == Pol::In ? "?^" : "!^") + to_string(u->ob) + "_" + to_string(u->cap);
      if (u->a && u->a->kind != UK::Zero) s += ".(" + to_string(u->a) + ")";
      return s;
    }
    case UK::Par: return "(" + to_string(u->a) + " | " + to_string(u->b) + ")";
    case UK::Lift: return "lift^" + to_string(u->lift) + "(" + to_string(u->a) + ")";
  }
  return "?";
}

namespace {

void components(const Usage& u, const Level& lift, std::vector<Usage>& out) {
  switch (u->kind) {
    case UK::Zero: return;
    case UK::Act: out.push_back(u_act(u->pol, level_max(u->ob, lift), u->cap, usage_normal(u->a))); return;
    case UK::Par:
      components(u->a, lift, out);
      components(u->b, lift, out);
      return;
    case UK::Lift: components(u->a, level_max(lift, u->lift), out); return;
  }
}

Usage from_components(std::vector<Usage> cs) {
  std::sort(cs.begin(), cs.end(), [](const Usage& a, const Usage& b) { return to_string(a) < to_string(b); });
  if (cs.empty()) return u_zero();
  Usage acc = cs.back();
  for (std::size_t i = cs.size() - 1; i-- > 0;) acc = u_par(cs[i], acc);
  return acc;
}

}  // namespace

Usage usage_normal(const Usage& u) {
  std::vector<Usage> cs;
  components(u, Level::fin(0), cs);
  return from_components(std::move(cs));
}

bool usage_equiv(const Usage& a, const Usage& b) { return to_string(usage_normal(a)) == to_string(usage_normal(b)); }

std::vector<Usage> usage_reduce(const Usage& u) {
  std::vector<Usage> cs;
  components(u, Level::fin(0), cs);
  std::vector<Usage> out;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    for (std::size_t j = 0; j < cs.size(); ++j) {
      if (cs[i]->pol != Pol::In || cs[j]->pol != Pol::Out) continue;
      std::vector<Usage> rest;
      for (std::size_t k = 0; k < cs.size(); ++k)
        if (k != i && k != j) rest.push_back(cs[k]);
      components(cs[i]->a, Level::fin(0), rest);
      components(cs[j]->a, Level::fin(0), rest);
      Usage r = from_components(rest);
      if (seen.insert(to_string(r)).second) out.push_back(r);
    }
  }
  return out;
}

bool con(const Usage& u) {
  return level_le(ob(Pol::Out, u), cap(Pol::In, u)) && level_le(ob(Pol::In, u), cap(Pol::Out, u));
}

bool rel(const Usage& u) {
  std::deque<Usage> q{usage_normal(u)};
  std::set<std::string> seen{to_string(q.front())};
  while (!q.empty()) {
    Usage cur = q.front();
    q.pop_front();
    if (!con(cur)) return false;
    for (auto& n : usage_reduce(cur))
      if (seen.insert(to_string(n)).second) q.push_back(n);
  }
  return true;
}

// ---- types -------------------------------------------------------------------------

UType ut_chan(Usage u, std::vector<UType> payloads) {
  auto n = std::make_shared<UTypeNode>();
  n->usage = std::move(u);
  n->payloads = std::move(payloads);
  return n;
}

UType ut_variant(std::map<Label, UType> arms) {
  auto n = std::make_shared<UTypeNode>();
  n->kind = UTypeNode::Kind::Variant;
  n->arms = std::move(arms);
  return n;
}

std::string to_string(const UType& t) {
  if (t->kind == UTypeNode::Kind::Variant) {
    std::string s = "variant{";
    bool first = true;
    for (auto& [l, a] : t->arms) {
      s += (first ? "" : ",") + l + ":" + to_string(a);
      first = false;
    }
    return s + "}";
  }
  std::string s = "<" + to_string(t->usage) + ">[";
  for (std::size_t i = 0; i < t->payloads.size(); ++i) s += (i ? "," : "") + to_string(t->payloads[i]);
  return s + "]";
}

bool utype_equal(const UType& a, const UType& b) { return to_string(a) == to_string(b); }

std::optional<UType> compose_types(const UType& a, const UType& b) {
  if (a->kind != b->kind) return std::nullopt;
  if (a->kind == UTypeNode::Kind::Variant) {
    if (!utype_equal(a, b)) return std::nullopt;
    return a;
  }
  if (a->payloads.size() != b->payloads.size()) return std::nullopt;
  for (std::size_t i = 0; i < a->payloads.size(); ++i)
    if (!utype_equal(a->payloads[i], b->payloads[i])) return std::nullopt;
  return ut_chan(u_par(a->usage, b->usage), a->payloads);
}

std::optional<UsageCtx> compose_ctx(const UsageCtx& a, const UsageCtx& b) {
  UsageCtx r = a;
  for (auto& [n, t] : b) {
    auto it = r.find(n);
    if (it == r.end()) {
      r[n] = t;
      continue;
    }
    auto c = compose_types(it->second, t);
    if (!c) return std::nullopt;
    it->second = *c;
  }
  return r;
}

UsageCtx seq_compose(const Name& x, Pol p, Level o, Level k, const std::vector<UType>& payloads, const UsageCtx& g,
                     const std::function<bool(const Name&, const Name&)>& prec) {
  UsageCtx r;
  Usage cont = u_zero();
  if (auto it = g.find(x); it != g.end() && it->second->kind == UTypeNode::Kind::Chan) cont = it->second->usage;
  r[x] = ut_chan(u_act(p, o, k, cont), payloads);
  for (auto& [y, t] : g) {
    if (y == x) continue;
    if (t->kind == UTypeNode::Kind::Variant) {
      r[y] = t;
      continue;
    }
    Level lift = prec(x, y) ? k : plus(k, 1);
    r[y] = ut_chan(u_lift(lift, t->usage), t->payloads);
  }
  return r;
}

// ---- symbolic checking ---------------------------------------------------------------

namespace {

struct UReject {
  std::string why;
};

struct SType;
using STypeP = std::shared_ptr<SType>;

struct SType {
  bool variant = false;
  bool has_act = false;
  Pol pol = Pol::In;
  int ob = -1, cap = -1;
  std::vector<STypeP> payloads;
  std::map<Label, STypeP> arms;
};

struct Act {
  Pol pol;
  int ob, cap;
  std::vector<int> cont;
};

using Ctx = std::map<Name, std::vector<int>>;  // present with no actions = usage 0

struct Constraint {
  int a;
  long long w;
  int b;  // val[a] + w <= val[b]
};

struct System {
  std::vector<std::string> var_desc{"0"};
  std::vector<Constraint> cs;
  std::vector<Act> acts;
  std::map<Name, int> rank;  // 0 free, >0 restriction order, -1 received
  int next_rank = 1;
  long long degree = 0;
  std::set<std::string> worst_shared;
  UsageOptions opt;

  std::map<Name, std::string> shown;
  std::map<std::string, int> per_base;
  std::string disp(const Name& n) {
    if (n.uid == 0) return n.base;
    auto it = shown.find(n);
    if (it != shown.end()) return it->second;
    return shown[n] = n.base + std::to_string(++per_base[n.base]);
  }

  int var(const std::string& d) {
    var_desc.push_back(d);
    return static_cast<int>(var_desc.size()) - 1;
  }
  void le(int a, long long w, int b) { cs.push_back({a, w, b}); }
  void eq(int a, int b, long long off = 0) {  // a = b + off
    le(b, off, a);
    le(a, -off, b);
  }
  void pin(int a, long long c) { eq(a, 0, c); }

  bool prec(const Name& x, const Name& y) const {
    auto rx = rank.find(x), ry = rank.find(y);
    int a = rx == rank.end() ? 0 : rx->second;
    int b = ry == rank.end() ? 0 : ry->second;
    if (a < 0 || b < 0) return false;
    return a > b;
  }

  STypeP senc(const SessionType& t, int o, int k, const std::string& tag) {
    using SK = SessionTypeNode::Kind;
    auto s = std::make_shared<SType>();
    if (t->kind == SK::End) return s;
    s->has_act = true;
    s->ob = o;
    s->cap = k;
    auto cont_pair = [&](const std::string& sub) {
      int o2 = var("ob(" + tag + sub + ")"), k2 = var("cap(" + tag + sub + ")");
      eq(o2, k, 1);
      eq(k2, o, 1);
      return std::make_pair(o2, k2);
    };
    switch (t->kind) {
      case SK::In:
      case SK::Out: {
        s->pol = t->kind == SK::In ? Pol::In : Pol::Out;
        s->payloads.push_back(senc(t->payload, var("ob(" + tag + ".v)"), var("cap(" + tag + ".v)"), tag + ".v"));
        auto [o2, k2] = cont_pair(".k");
        s->payloads.push_back(senc(t->kind == SK::In ? t->cont : dual(t->cont), o2, k2, tag + ".k"));
        break;
      }
      default: {
        s->pol = t->kind == SK::Branch ? Pol::In : Pol::Out;
        auto v = std::make_shared<SType>();
        v->variant = true;
        for (auto& [l, a] : t->arms) {
          auto [o2, k2] = cont_pair("." + l);
          v->arms[l] = senc(t->kind == SK::Branch ? a : dual(a), o2, k2, tag + "." + l);
        }
        s->payloads.push_back(v);
      }
    }
    return s;
  }

  STypeP from_concrete(const UType& t, const std::string& tag) {
    auto s = std::make_shared<SType>();
    if (t->kind == UTypeNode::Kind::Variant) {
      s->variant = true;
      for (auto& [l, a] : t->arms) s->arms[l] = from_concrete(a, tag + "." + l);
      return s;
    }
    Usage u = usage_normal(t->usage);
    if (u->kind == UK::Act && u->a->kind == UK::Zero) {
      s->has_act = true;
      s->pol = u->pol;
      s->ob = var("ob(" + tag + ")");
      s->cap = var("cap(" + tag + ")");
      if (u->ob.kind != Level::Kind::Finite || u->cap.kind != Level::Kind::Finite)
        throw UReject{"declared type of " + tag + " has a non-finite level"};
      pin(s->ob, u->ob.n);
      pin(s->cap, u->cap.n);
    } else if (u->kind != UK::Zero) {
      throw UReject{"declared usage of " + tag + " is not a single action"};
    }
    for (std::size_t i = 0; i < t->payloads.size(); ++i)
      s->payloads.push_back(from_concrete(t->payloads[i], tag + "." + std::to_string(i)));
    return s;
  }

  void unify(const STypeP& a, const STypeP& b, const std::string& where) {
    if (a->variant != b->variant || a->has_act != b->has_act || (a->has_act && a->pol != b->pol) ||
        a->payloads.size() != b->payloads.size())
      throw UReject{"payload type mismatch at " + where};
    if (a->has_act) {
      eq(a->ob, b->ob);
      eq(a->cap, b->cap);
    }
    for (std::size_t i = 0; i < a->payloads.size(); ++i) unify(a->payloads[i], b->payloads[i], where);
    if (a->arms.size() != b->arms.size()) throw UReject{"variant labels differ at " + where};
    for (auto& [l, t] : a->arms) {
      auto it = b->arms.find(l);
      if (it == b->arms.end()) throw UReject{"variant labels differ at " + where};
      unify(t, it->second, where);
    }
  }

  void unify_payloads(const STypeP& a, const STypeP& b, const std::string& where) {
    if (a->variant != b->variant) throw UReject{"payload type mismatch at " + where};
    if (a->variant) {
      unify(a, b, where);
      return;
    }
    if (a->payloads.size() != b->payloads.size()) throw UReject{"payload arity mismatch at " + where};
    for (std::size_t i = 0; i < a->payloads.size(); ++i) unify(a->payloads[i], b->payloads[i], where);
  }

  // synthesized usage against the declared type of a binder or free name
  void match(const std::vector<int>& acts_of, const STypeP& t, const Name& n) {
    if (t->variant || !t->has_act) {
      if (!acts_of.empty()) throw UReject{"name " + disp(n) + " used beyond its type"};
      return;
    }
    if (acts_of.size() != 1) throw UReject{"usage of " + disp(n) + " does not match its type"};
    const Act& a = acts[acts_of[0]];
    if (a.pol != t->pol || !a.cont.empty()) throw UReject{"usage of " + disp(n) + " does not match its type"};
    eq(a.ob, t->ob);
    eq(a.cap, t->cap);
  }

  void contribute(Ctx& g, const Value& v, const STypeP& t, std::map<Name, STypeP>& env) {
    if (!v.is_chan()) {
      if (!t->variant) throw UReject{"variant sent where a channel is expected"};
      auto it = t->arms.find(v.label);
      if (it == t->arms.end()) throw UReject{"label " + v.label + " not in the payload variant"};
      contribute(g, *v.payload, it->second, env);
      return;
    }
    auto e = env.find(v.name);
    if (e == env.end()) throw UReject{"name " + disp(v.name) + " is untyped"};
    unify_payloads(e->second, t, disp(v.name));
    auto& slot = g[v.name];
    if (t->has_act && !t->variant) {
      acts.push_back(Act{t->pol, t->ob, t->cap, {}});
      slot.push_back(static_cast<int>(acts.size()) - 1);
    }
  }

  void lift_all(Ctx& g, const Name& x, int act_cap) {
    for (auto& [y, ids] : g) {
      if (y == x) continue;
      long long d = prec(x, y) ? 0 : 1;
      // the lifted view gets its own level, so a payload type is not raised
      // along with the sender's copy of it
      for (int& id : ids) {
        Act lifted = acts[id];
        lifted.ob = var("up(" + var_desc[static_cast<std::size_t>(acts[id].ob)] + ")");
        le(acts[id].ob, 0, lifted.ob);
        le(act_cap, d, lifted.ob);
        acts.push_back(lifted);
        id = static_cast<int>(acts.size()) - 1;
      }
    }
  }

  void rel_at(const std::vector<int>& u, const Name& c) {
    std::deque<std::vector<int>> q;
    std::set<std::vector<int>> seen;
    auto push = [&](std::vector<int> s) {
      std::sort(s.begin(), s.end());
      if (seen.insert(s).second) q.push_back(std::move(s));
    };
    push(u);
    std::set<std::tuple<int, int>> emitted;
    while (!q.empty()) {
      auto s = q.front();
      q.pop_front();
      for (int a : s) {
        bool matched = false;
        for (int b : s) {
          if (acts[b].pol == acts[a].pol) continue;
          matched = true;
          if (emitted.insert({acts[b].ob, acts[a].cap}).second) le(acts[b].ob, 0, acts[a].cap);
        }
        if (!matched) throw UReject{"action on " + disp(c) + " has no matching co-action"};
      }
      for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = 0; j < s.size(); ++j) {
          if (acts[s[i]].pol != Pol::In || acts[s[j]].pol != Pol::Out) continue;
          std::vector<int> n;
          for (std::size_t k = 0; k < s.size(); ++k)
            if (k != i && k != j) n.push_back(s[k]);
          n.insert(n.end(), acts[s[i]].cont.begin(), acts[s[i]].cont.end());
          n.insert(n.end(), acts[s[j]].cont.begin(), acts[s[j]].cont.end());
          push(n);
          if (seen.size() > 4096) throw UReject{"usage of " + disp(c) + " too large to check"};
        }
    }
  }

  Ctx synth(const Process& p, std::map<Name, STypeP> env) {
    switch (p->kind) {
      case PK::Nil: return {};
      case PK::Output: {
        auto it = env.find(p->x);
        if (it == env.end()) throw UReject{"name " + disp(p->x) + " is untyped"};
        STypeP d = it->second;
        if (d->variant) throw UReject{"variant-typed " + disp(p->x) + " used as a channel"};
        if (d->payloads.size() != p->vals.size()) throw UReject{"arity mismatch on " + disp(p->x)};
        Ctx g = synth(p->a, env);
        Act a{Pol::Out, var("ob(" + disp(p->x) + "!)"), var("cap(" + disp(p->x) + "!)"), g[p->x]};
        g.erase(p->x);
        for (std::size_t i = 0; i < p->vals.size(); ++i) contribute(g, p->vals[i], d->payloads[i], env);
        lift_all(g, p->x, a.cap);
        acts.push_back(a);
        g[p->x] = {static_cast<int>(acts.size()) - 1};
        return g;
      }
      case PK::Input: {
        auto it = env.find(p->x);
        if (it == env.end()) throw UReject{"name " + disp(p->x) + " is untyped"};
        STypeP d = it->second;
        if (d->variant) throw UReject{"variant-typed " + disp(p->x) + " used as a channel"};
        if (d->payloads.size() != p->binders.size()) throw UReject{"arity mismatch on " + disp(p->x)};
        auto env2 = env;
        for (std::size_t i = 0; i < p->binders.size(); ++i) {
          env2[p->binders[i]] = d->payloads[i];
          rank[p->binders[i]] = -1;
        }
        Ctx g = synth(p->a, env2);
        for (std::size_t i = 0; i < p->binders.size(); ++i) {
          auto gi = g.find(p->binders[i]);
          match(gi == g.end() ? std::vector<int>{} : gi->second, d->payloads[i], p->binders[i]);
          g.erase(p->binders[i]);
        }
        Act a{Pol::In, var("ob(" + disp(p->x) + "?)"), var("cap(" + disp(p->x) + "?)"), g[p->x]};
        g.erase(p->x);
        lift_all(g, p->x, a.cap);
        acts.push_back(a);
        g[p->x] = {static_cast<int>(acts.size()) - 1};
        return g;
      }
      case PK::Case: {
        if (!p->scrut.is_chan()) throw UReject{"case on a literal variant"};
        const Name& y = p->scrut.name;
        auto it = env.find(y);
        if (it == env.end()) throw UReject{"name " + disp(y) + " is untyped"};
        STypeP d = it->second;
        if (!d->variant) throw UReject{"case on channel-typed " + disp(y)};
        std::set<Label> want, have;
        for (auto& [l, t] : d->arms) want.insert(l);
        for (auto& [l, arm] : p->cases) have.insert(l);
        if (want != have) throw UReject{"case arms do not match the variant of " + disp(y)};
        std::optional<Ctx> first;
        for (auto& [l, arm] : p->cases) {
          auto env2 = env;
          env2[arm.binder] = d->arms.at(l);
          rank[arm.binder] = -1;
          Ctx g = synth(arm.body, env2);
          auto gi = g.find(arm.binder);
          match(gi == g.end() ? std::vector<int>{} : gi->second, d->arms.at(l), arm.binder);
          g.erase(arm.binder);
          if (!first) {
            first = g;
            continue;
          }
          // an absent name has usage 0, same as a present one with no actions
          for (auto& [n, ids] : g) (*first)[n];
          for (auto& [n, ids] : *first) {
            const std::vector<int>& other = g[n];
            if (other.size() != ids.size()) throw UReject{"case arms use " + disp(n) + " differently"};
            for (std::size_t k = 0; k < ids.size(); ++k) same_act(ids[k], other[k]);
          }
        }
        Ctx g = *first;
        g[y];  // variant-typed: present, no usage
        return g;
      }
      case PK::Par:
      case PK::Res: return block(p, env);
      default: throw UReject{"construct not in the polyadic calculus"};
    }
  }

  void same_act(int a, int b) {
    const Act &x = acts[a], &y = acts[b];
    if (x.pol != y.pol || x.cont.size() != y.cont.size()) throw UReject{"case arms use names differently"};
    eq(x.ob, y.ob);
    eq(x.cap, y.cap);
    for (std::size_t k = 0; k < x.cont.size(); ++k) same_act(x.cont[k], y.cont[k]);
  }

  Ctx block(const Process& p, std::map<Name, STypeP> env) {
    Block b = flatten(p);
    for (auto& bd : b.binders) {
      if (bd.pair) throw UReject{"double restriction in the polyadic calculus"};
      if (!bd.annot) throw UReject{"restriction of " + disp(bd.x) + " lacks an annotation"};
      env[bd.x] = senc(bd.annot, var("ob(" + disp(bd.x) + ")"), var("cap(" + disp(bd.x) + ")"),
                       disp(bd.x));
      rank[bd.x] = next_rank++;
    }
    std::vector<Ctx> gs;
    for (auto& c : b.comps) gs.push_back(synth(c, env));

    // sharing degree: least over association trees of the worst split
    const std::size_t k = gs.size();
    std::vector<std::set<Name>> names(k);
    for (std::size_t i = 0; i < k; ++i) {
      if (opt.count_zero_usage) {
        for (auto& [n, ids] : gs[i]) names[i].insert(n);
        auto fv = free_names(b.comps[i]);
        names[i].insert(fv.begin(), fv.end());
      } else {
        for (auto& [n, ids] : gs[i])
          if (!ids.empty()) names[i].insert(n);
      }
    }
    if (k >= 2) share_degree(names);

    Ctx merged;
    for (auto& g : gs)
      for (auto& [n, ids] : g) {
        auto& slot = merged[n];
        slot.insert(slot.end(), ids.begin(), ids.end());
      }
    for (auto& bd : b.binders) {
      auto it = merged.find(bd.x);
      if (it != merged.end()) {
        rel_at(it->second, bd.x);
        merged.erase(it);
      }
    }
    return merged;
  }

  void share_degree(const std::vector<std::set<Name>>& names) {
    const std::size_t k = names.size();
    if (k > 12) {
      // syntactic right association
      long long worst = 0;
      std::set<Name> rest;
      for (std::size_t i = k; i-- > 1;) {
        rest.insert(names[i].begin(), names[i].end());
        std::set<Name> inter;
        for (auto& n : names[i - 1])
          if (rest.count(n)) inter.insert(n);
        if (static_cast<long long>(inter.size()) > worst) worst = static_cast<long long>(inter.size());
        record(worst, inter);
      }
      return;
    }
    const std::size_t full = (std::size_t{1} << k) - 1;
    std::vector<std::set<Name>> uni(full + 1);
    for (std::size_t m = 1; m <= full; ++m) {
      std::size_t low = m & (~m + 1);
      std::size_t i = static_cast<std::size_t>(__builtin_ctzll(low));
      uni[m] = uni[m ^ low];
      uni[m].insert(names[i].begin(), names[i].end());
    }
    std::vector<long long> best(full + 1, 0);
    std::vector<std::size_t> choice(full + 1, 0);
    for (std::size_t m = 1; m <= full; ++m) {
      if ((m & (m - 1)) == 0) continue;
      long long b = kInfDegree;
      for (std::size_t s = (m - 1) & m; s > 0; s = (s - 1) & m) {
        std::size_t t = m ^ s;
        if (s < t) continue;  // each split once
        long long inter = 0;
        for (auto& n : uni[s])
          if (uni[t].count(n)) ++inter;
        long long v = std::max({inter, best[s], best[t]});
        if (v < b) {
          b = v;
          choice[m] = s;
        }
      }
      best[m] = b;
    }
    // the split that attains the maximum along the chosen tree
    std::function<void(std::size_t)> walk = [&](std::size_t m) {
      if ((m & (m - 1)) == 0) return;
      std::size_t s = choice[m], t = m ^ s;
      std::set<Name> inter;
      for (auto& n : uni[s])
        if (uni[t].count(n)) inter.insert(n);
      record(static_cast<long long>(inter.size()), inter);
      walk(s);
      walk(t);
    };
    walk(full);
  }

  void record(long long v, const std::set<Name>& inter) {
    if (v > degree || (v == degree && worst_shared.empty() && !inter.empty())) {
      degree = std::max(degree, v);
      worst_shared.clear();
      for (auto& n : inter) worst_shared.insert(disp(n));
    }
  }

  // Bellman-Ford on the longest-path formulation; returns a positive cycle
  std::vector<std::string> solve() {
    const std::size_t n = var_desc.size();
    std::vector<long long> dist(n, 0);
    std::vector<int> pred(n, -1);
    for (std::size_t i = 1; i < n; ++i) le(0, 0, static_cast<int>(i));
    int touched = -1;
    for (std::size_t it = 0; it < n + 1; ++it) {
      touched = -1;
      for (auto& c : cs) {
        if (dist[c.a] + c.w > dist[c.b]) {
          dist[c.b] = dist[c.a] + c.w;
          pred[c.b] = c.a;
          touched = c.b;
        }
      }
      if (touched < 0) return {};
    }
    // walk back n steps to land on the cycle
    int v = touched;
    for (std::size_t i = 0; i < n; ++i) v = pred[v];
    std::vector<std::string> cyc;
    int u = v;
    do {
      cyc.push_back(var_desc[u]);
      u = pred[u];
    } while (u != v && cyc.size() <= n);
    std::reverse(cyc.begin(), cyc.end());
    return cyc;
  }
};

UsageVerdict run(System& sys, const std::map<Name, STypeP>& declared, const Process& p, long long n) {
  UsageVerdict v;
  try {
    for (auto& f : free_names(p))
      if (!declared.count(f)) throw UReject{"name " + sys.disp(f) + " is not in the context"};
    Ctx g = sys.synth(p, declared);
    for (auto& [name, t] : declared) {
      auto it = g.find(name);
      sys.match(it == g.end() ? std::vector<int>{} : it->second, t, name);
    }
    auto cyc = sys.solve();
    v.degree = sys.degree;
    v.shared = sys.worst_shared;
    if (!cyc.empty()) {
      v.ok = false;
      v.feasible = false;
      v.cycle = cyc;
      std::string s;
      for (auto& c : cyc) s += c + " < ";
      if (!cyc.empty()) s += cyc.front();
      v.reason = "no level assignment: positive cycle " + s;
      return v;
    }
    if (sys.degree > n) {
      v.ok = false;
      std::string s;
      for (auto& x : sys.worst_shared) s += (s.empty() ? "" : ", ") + x;
      v.reason = "parallel components share " + std::to_string(sys.degree) + " names {" + s + "}, more than " +
                 std::to_string(n);
    }
  } catch (const UReject& r) {
    v.ok = false;
    v.feasible = false;
    v.reason = r.why;
  }
  return v;
}

}  // namespace

UsageVerdict check_usage(const SessionCtx& g, const Process& encoded, long long n, UsageOptions opt) {
  System sys;
  sys.opt = opt;
  std::map<Name, STypeP> declared;
  for (auto& [name, t] : g)
    declared[name] = sys.senc(t, sys.var("ob(" + sys.disp(name) + ")"), sys.var("cap(" + sys.disp(name) + ")"),
                              sys.disp(name));
  return run(sys, declared, encoded, n);
}

UsageVerdict check_usage(const UsageCtx& g, const Process& encoded, long long n, UsageOptions opt) {
  System sys;
  sys.opt = opt;
  std::map<Name, STypeP> declared;
  try {
    for (auto& [name, t] : g) declared[name] = sys.from_concrete(t, sys.disp(name));
  } catch (const UReject& r) {
    UsageVerdict v;
    v.ok = false;
    v.feasible = false;
    v.reason = r.why;
    return v;
  }
  return run(sys, declared, encoded, n);
}

long long min_sharing_degree(const SessionCtx& g, const Process& p, UsageOptions opt) {
  auto st = check_st(g, p);
  if (!st.ok) return kInfDegree;
  auto v = check_usage(g, enc_proc(p, &g), kInfDegree, opt);
  if (!v.feasible) return kInfDegree;
  return v.degree;
}

}  // namespace spi
