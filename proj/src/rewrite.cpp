#include "sessionpi/rewrite.hpp"

#include <functional>
#include <set>
#include <stdexcept>

#include "rewrite_engine.hpp"
#include "sessionpi/ll_typing.hpp"
#include "sessionpi/rewrite_vd.hpp"
#include "sessionpi/semantics.hpp"
#include "sessionpi/session_typing.hpp"
#include "sessionpi/surface.hpp"

namespace spi {

using SK = SessionTypeNode::Kind;

namespace {

// Collects distinct processes up to congruence, stopping at the bound.
struct Collector {
  std::size_t bound;
  ProcEnum out;
  std::set<std::string> keys;

  explicit Collector(std::size_t b) : bound(b) {}
  bool full() const { return out.items.size() >= bound; }
  void add(const Process& p) {
    if (full()) {
      out.truncated = true;
      return;
    }
    if (keys.insert(canonical_key(p)).second) out.items.push_back(p);
  }
};

// Cartesian product over choice lists, first choices first.
void product(const std::vector<std::vector<Process>>& sets, const std::function<void(const std::vector<Process>&)>& f,
             std::size_t bound, bool& truncated) {
  for (auto& s : sets)
    if (s.empty()) return;
  std::vector<std::size_t> idx(sets.size(), 0);
  std::size_t n = 0;
  while (true) {
    if (n++ >= bound) {
      truncated = true;
      return;
    }
    std::vector<Process> pick;
    for (std::size_t i = 0; i < sets.size(); ++i) pick.push_back(sets[i][idx[i]]);
    f(pick);
    std::size_t i = sets.size();
    while (i > 0) {
      --i;
      if (++idx[i] < sets[i].size()) break;
      idx[i] = 0;
      if (i == 0) return;
    }
    if (sets.empty()) return;
  }
}

SessionType lookup(const SessionCtx& g, const Name& x) {
  auto it = g.find(x);
  if (it == g.end()) throw std::invalid_argument("rewrite: " + debug_name(x) + " is not in the context");
  return it->second;
}

bool all_end(const SessionCtx& g) {
  for (auto& [n, t] : g)
    if (t->kind != SK::End) return false;
  return true;
}

}  // namespace

// ---- characteristic processes -------------------------------------------------------

ProcEnum char_proc(const SessionType& t, const Name& x, std::size_t bound) {
  Collector c(bound);
  switch (t->kind) {
    case SK::End: c.add(p_nil()); break;
    case SK::In:
    case SK::Out: {
      Name y = fresh_name("y");
      bool in = t->kind == SK::In;
      SessionType yt = in ? t->payload : dual(t->payload);
      auto py = char_proc(yt, y, bound);
      auto px = char_proc(t->cont, x, bound);
      product({py.items, px.items}, [&](const std::vector<Process>& v) {
        Process body = p_par(v[0], v[1]);
        c.add(in ? p_in(x, y, body) : p_res(y, yt, p_out(x, y, body)));
      }, bound, c.out.truncated);
      c.out.truncated |= py.truncated || px.truncated;
      break;
    }
    case SK::Select:
      for (auto& [l, s] : t->arms) {
        auto q = char_proc(s, x, bound);
        c.out.truncated |= q.truncated;
        for (auto& p : q.items) c.add(p_sel(x, l, p));
      }
      break;
    case SK::Branch: {
      std::vector<Label> labels;
      std::vector<std::vector<Process>> sets;
      for (auto& [l, s] : t->arms) {
        auto q = char_proc(s, x, bound);
        c.out.truncated |= q.truncated;
        labels.push_back(l);
        sets.push_back(q.items);
      }
      product(sets, [&](const std::vector<Process>& v) {
        std::map<Label, Process> arms;
        for (std::size_t i = 0; i < v.size(); ++i) arms[labels[i]] = v[i];
        c.add(p_bra(x, arms));
      }, bound, c.out.truncated);
      break;
    }
  }
  return c.out;
}

ProcEnum char_ctx(const SessionCtx& g, std::size_t bound) {
  Collector c(bound);
  std::vector<std::vector<Process>> sets;
  for (auto& [n, t] : g) {
    auto q = char_proc(t, n, bound);
    c.out.truncated |= q.truncated;
    sets.push_back(q.items);
  }
  if (sets.empty()) {
    c.add(p_nil());
    return c.out;
  }
  product(sets, [&](const std::vector<Process>& v) { c.add(p_par(v)); }, bound, c.out.truncated);
  return c.out;
}

// ---- catalyzers ----------------------------------------------------------------------

Process plug(const Catalyzer& c, const Process& hole) {
  Process acc = hole;
  for (std::size_t i = c.wraps.size(); i-- > 0;) {
    auto& w = c.wraps[i];
    acc = p_res(w.x, w.t, p_par(w.proc, acc));
  }
  return acc;
}

std::vector<Catalyzer> catalyzers(const std::vector<std::pair<Name, SessionType>>& g, std::size_t bound) {
  std::vector<std::vector<Process>> sets;
  for (auto& [n, t] : g) sets.push_back(char_proc(t, n, bound).items);
  std::vector<Catalyzer> out;
  if (g.empty()) return {Catalyzer{}};
  bool trunc = false;
  product(sets, [&](const std::vector<Process>& v) {
    Catalyzer c;
    for (std::size_t i = 0; i < v.size(); ++i) c.wraps.push_back({g[i].first, g[i].second, v[i]});
    out.push_back(std::move(c));
  }, bound, trunc);
  return out;
}

std::vector<Catalyzer> catalyzers(const SessionCtx& g, std::size_t bound) {
  return catalyzers(std::vector<std::pair<Name, SessionType>>(g.begin(), g.end()), bound);
}

// ---- first rewriting -------------------------------------------------------------------

namespace {

struct Engine {
  std::size_t bound;
  bool vd = false;  // refined characteristic processes and catalyzers

  // Splits the components of a block into the part reachable from `anchor`
  // (through shared binders) that avoids `avoid`, and the rest.
  static std::pair<Process, Process> split_units(const Process& p, const Name& anchor, const Name& avoid) {
    Block b = flatten(p);
    const std::size_t k = b.comps.size();
    std::vector<std::set<Name>> fv(k);
    for (std::size_t i = 0; i < k; ++i) fv[i] = free_names(b.comps[i]);
    std::vector<std::size_t> uf(k);
    for (std::size_t i = 0; i < k; ++i) uf[i] = i;
    std::function<std::size_t(std::size_t)> find = [&](std::size_t v) { return uf[v] == v ? v : uf[v] = find(uf[v]); };
    for (auto& bd : b.binders) {
      long first = -1;
      for (std::size_t i = 0; i < k; ++i) {
        if (!fv[i].count(bd.x) && !(bd.pair && fv[i].count(bd.y))) continue;
        if (first < 0)
          first = static_cast<long>(i);
        else
          uf[find(i)] = find(static_cast<std::size_t>(first));
      }
    }
    std::map<std::size_t, std::set<Name>> unit;
    for (std::size_t i = 0; i < k; ++i) unit[find(i)].insert(fv[i].begin(), fv[i].end());
    Block ba, bb;
    std::set<Name> an;
    for (std::size_t i = 0; i < k; ++i) {
      auto& ns = unit[find(i)];
      bool a = ns.count(anchor) > 0;
      if (a && ns.count(avoid)) throw std::invalid_argument("rewrite: bound output continuation mixes the sent session and the subject");
      (a ? ba : bb).comps.push_back(b.comps[i]);
      if (a) an.insert(fv[i].begin(), fv[i].end());
    }
    for (auto& bd : b.binders) {
      bool a = an.count(bd.x) || (bd.pair && an.count(bd.y));
      (a ? ba : bb).binders.push_back(bd);
    }
    return {rebuild(ba), rebuild(bb)};
  }

  // Γ restricted to the names of one side; end entries may go to both, unused
  // end entries go to the side flagged `keep_unused`.
  static std::pair<SessionCtx, SessionCtx> split_ctx(const SessionCtx& g, const std::set<Name>& fl,
                                                     const std::set<Name>& fr, bool unused_left) {
    SessionCtx l, r;
    for (auto& [n, t] : g) {
      bool inl = fl.count(n), inr = fr.count(n);
      if (t->kind == SK::End) {
        if (inl) l[n] = t;
        if (inr) r[n] = t;
        if (!inl && !inr) (unused_left ? l : r)[n] = t;
        continue;
      }
      if (inl && inr) throw std::invalid_argument("rewrite: session " + debug_name(n) + " used on both sides");
      if (!inl && !inr) throw std::invalid_argument("rewrite: session " + debug_name(n) + " is never used");
      (inl ? l : r)[n] = t;
    }
    return {l, r};
  }

  std::vector<Process> go(const SessionCtx& g, const Process& p) {
    Collector c(bound);
    switch (p->kind) {
      case PK::Nil:
        if (!all_end(g)) throw std::invalid_argument("rewrite: 0 with unfinished sessions");
        c.add(p);
        break;
      case PK::Output: {
        SessionType t = lookup(g, p->x);
        if (t->kind != SK::Out || p->vals.size() != 1 || !p->vals[0].is_chan())
          throw std::invalid_argument("rewrite: ill-typed output on " + debug_name(p->x));
        const Name& v = p->vals[0].name;
        SessionCtx g2 = g;
        g2[p->x] = t->cont;
        if (t->payload->kind != SK::End) g2.erase(v);
        Name z = fresh_name("z");
        for (auto& q : go(g2, p->a)) c.add(p_res(z, t->payload, p_out(p->x, z, p_par(p_fwd(v, z), q))));
        break;
      }
      case PK::Input: {
        SessionType t = lookup(g, p->x);
        if (t->kind != SK::In || p->binders.size() != 1) throw std::invalid_argument("rewrite: ill-typed input on " + debug_name(p->x));
        SessionCtx g2 = g;
        g2[p->x] = t->cont;
        g2[p->binders[0]] = t->payload;
        for (auto& q : go(g2, p->a)) c.add(p_in(p->x, p->binders, q));
        break;
      }
      case PK::Select: {
        SessionType t = lookup(g, p->x);
        if (t->kind != SK::Select || !t->arms.count(p->label))
          throw std::invalid_argument("rewrite: ill-typed selection on " + debug_name(p->x));
        SessionCtx g2 = g;
        g2[p->x] = t->arms.at(p->label);
        for (auto& q : go(g2, p->a)) c.add(p_sel(p->x, p->label, q));
        break;
      }
      case PK::Branch: {
        SessionType t = lookup(g, p->x);
        if (t->kind != SK::Branch) throw std::invalid_argument("rewrite: ill-typed branching on " + debug_name(p->x));
        std::vector<Label> labels;
        std::vector<std::vector<Process>> sets;
        for (auto& [l, q] : p->arms) {
          if (!t->arms.count(l)) throw std::invalid_argument("rewrite: label " + l + " not offered");
          SessionCtx g2 = g;
          g2[p->x] = t->arms.at(l);
          labels.push_back(l);
          sets.push_back(go(g2, q));
        }
        product(sets, [&](const std::vector<Process>& v) {
          std::map<Label, Process> arms;
          for (std::size_t i = 0; i < v.size(); ++i) arms[labels[i]] = v[i];
          c.add(p_bra(p->x, arms));
        }, bound, c.out.truncated);
        break;
      }
      case PK::Par:
      case PK::ResPair: return par(g, p);
      default: throw std::invalid_argument("rewrite: input is not a session process");
    }
    return c.out.items;
  }

  std::vector<Process> bound_output(const SessionCtx& g, const Process& r) {
    const Process& o = r->a;
    const Name& sent = o->vals[0].name;
    Name kept = sent == r->x ? r->y : r->x;
    SessionType kept_t = r->annot ? (kept == r->x ? r->annot : dual(r->annot)) : nullptr;
    SessionType t = lookup(g, o->x);
    if (t->kind != SK::Out) throw std::invalid_argument("rewrite: ill-typed output on " + debug_name(o->x));
    if (!kept_t) kept_t = dual(t->payload);
    auto [cz, cx] = split_units(o->a, kept, o->x);
    SessionCtx rest = g;
    rest.erase(o->x);
    auto [g1, g2] = split_ctx(rest, free_names(cz), free_names(cx), false);
    g1[kept] = kept_t;
    g2[o->x] = t->cont;
    auto q1 = go(g1, cz);
    auto q2 = go(g2, cx);
    Collector c(bound);
    product({q1, q2}, [&](const std::vector<Process>& v) {
      c.add(p_res(kept, kept_t, p_out(o->x, kept, p_par(v[0], v[1]))));
    }, bound, c.out.truncated);
    return c.out.items;
  }

  std::vector<Process> par(const SessionCtx& g, const Process& p) {
    struct Pair {
      Name x, y;
      SessionType t;
    };
    std::vector<Pair> pairs;
    Process body = p;
    while (body->kind == PK::ResPair) {
      if (!body->annot) throw std::invalid_argument("rewrite: restriction without annotation");
      const Process& in = body->a;
      bool bout = in->kind == PK::Output && in->vals.size() == 1 && in->vals[0].is_chan() && in->x != body->x &&
                  in->x != body->y && (in->vals[0].name == body->x || in->vals[0].name == body->y);
      if (bout) {
        if (!pairs.empty()) throw std::invalid_argument("rewrite: restriction around a bound output not narrowed");
        return bound_output(g, body);
      }
      pairs.push_back({body->x, body->y, body->annot});
      body = in;
    }
    if (body->kind != PK::Par) throw std::invalid_argument("rewrite: restricted sessions around a non-parallel body");
    Process L = body->a, R = body->b;
    auto fl = free_names(L), fr = free_names(R);

    std::vector<std::pair<Name, SessionType>> left_x, right_y;  // as used inside each side
    for (auto it = pairs.rbegin(); it != pairs.rend(); ++it) {
      bool lx = fl.count(it->x), ly = fl.count(it->y), rx = fr.count(it->x), ry = fr.count(it->y);
      if ((lx || ly) && !(rx || ry)) {
        L = p_respair(it->x, it->y, it->t, L);
        continue;
      }
      if ((rx || ry) && !(lx || ly)) {
        R = p_respair(it->x, it->y, it->t, R);
        continue;
      }
      if (!(lx || ly)) {
        if (it->t->kind != SK::End) throw std::invalid_argument("rewrite: unused restricted session");
        continue;
      }
      if ((lx && ly) || (rx && ry)) throw std::invalid_argument("rewrite: restricted session used twice on one side");
      Name el = lx ? it->x : it->y, er = lx ? it->y : it->x;
      SessionType tl = el == it->x ? it->t : dual(it->t);
      left_x.insert(left_x.begin(), {el, tl});
      right_y.insert(right_y.begin(), {er, dual(tl)});
    }
    fl = free_names(L);
    fr = free_names(R);
    auto [g1, g2] = split_ctx(g, fl, fr, true);

    SessionCtx g1x = g1, g2y = g2;
    std::vector<std::pair<Name, SessionType>> cat1, cat2;
    for (auto& [n, t] : left_x) {
      g1x[n] = t;
      cat1.push_back({n, dual(t)});
    }
    for (auto& [n, t] : right_y) {
      g2y[n] = t;
      cat2.push_back({n, dual(t)});
    }

    // per family: the plugged holes and the characteristic processes of the other side
    std::vector<Process> plugged1, plugged2;
    ProcEnum gs1, gs2;
    auto q1 = go(g1x, L);
    auto q2 = go(g2y, R);
    auto fill = [&](std::vector<Process>& out, const auto& cs, const std::vector<Process>& qs) {
      for (auto& cc : cs)
        for (auto& q : qs) {
          if (out.size() >= bound) return;
          out.push_back(plug(cc, q));
        }
    };
    if (!vd) {
      fill(plugged1, catalyzers(cat1, bound), q1);
      fill(plugged2, catalyzers(cat2, bound), q2);
      gs1 = char_ctx(g1, bound);
      gs2 = char_ctx(g2, bound);
    } else {
      auto s1 = check_std(g1x, L), s2 = check_std(g2y, R);
      if (!s1.verdict.ok) throw std::invalid_argument("rewrite: " + s1.verdict.reason);
      if (!s2.verdict.ok) throw std::invalid_argument("rewrite: " + s2.verdict.reason);
      std::map<Name, Name> l2r, r2l;
      for (std::size_t i = 0; i < left_x.size(); ++i) {
        l2r[left_x[i].first] = right_y[i].first;
        r2l[right_y[i].first] = left_x[i].first;
      }
      // hidden part: triples on the crossing names, renamed to the other side
      auto split = [](const DepCtx& psi, const std::map<Name, Name>& cross, DepCtx& visible, DepCtx& hidden) {
        for (auto t : psi) {
          bool on = cross.count(t.subj) || (!t.input && cross.count(t.obj));
          if (!on) {
            visible.push_back(t);
            continue;
          }
          if (cross.count(t.subj)) t.subj = cross.at(t.subj);
          if (!t.input && cross.count(t.obj)) t.obj = cross.at(t.obj);
          hidden.push_back(t);
        }
      };
      DepCtx psi1, psi2, phi1, phi2;
      split(s1.psi, l2r, psi1, psi2);
      split(s2.psi, r2l, phi1, phi2);
      auto restrict = [](const SessionCtx& ann, const SessionCtx& keys) {
        SessionCtx out;
        for (auto& [n, t] : keys) out[n] = ann.count(n) ? ann.at(n) : t;
        return out;
      };
      std::vector<std::pair<Name, SessionType>> gam1, gam2;
      SessionCtx hole1, hole2;
      for (std::size_t i = 0; i < left_x.size(); ++i) {
        const Name &xl = left_x[i].first, &yr = right_y[i].first;
        gam1.push_back({xl, s2.annotated.at(yr)});
        hole1[xl] = s1.annotated.at(xl);
        gam2.push_back({yr, s1.annotated.at(xl)});
        hole2[yr] = s2.annotated.at(yr);
      }
      fill(plugged1, catalyzers_v(gam1, phi2, hole1, bound), q1);
      fill(plugged2, catalyzers_v(gam2, psi2, hole2, bound), q2);
      gs1 = char_ctx_v(restrict(s1.annotated, g1), psi1, bound);
      gs2 = char_ctx_v(restrict(s2.annotated, g2), phi1, bound);
    }
    Collector c(bound);
    std::vector<Process> fam1, fam2;
    bool t1 = false, t2 = false;
    product({plugged1, gs2.items}, [&](const std::vector<Process>& v) { fam1.push_back(p_par(v[0], v[1])); }, bound, t1);
    product({gs1.items, plugged2}, [&](const std::vector<Process>& v) { fam2.push_back(p_par(v[0], v[1])); }, bound, t2);
    // interleave so both families survive truncation
    for (std::size_t i = 0; i < std::max(fam1.size(), fam2.size()); ++i) {
      if (i < fam1.size()) c.add(fam1[i]);
      if (i < fam2.size()) c.add(fam2[i]);
    }
    return c.out.items;
  }
};

}  // namespace

namespace detail {

ProcEnum run_rewrite(const SessionCtx& g, const Process& p, std::size_t bound, bool vd) {
  auto v = check_st(g, p);
  if (!v.ok) throw std::invalid_argument("rewrite: not session typed: " + v.reason);
  Engine r{bound, vd};
  ProcEnum e;
  e.items = r.go(g, narrow_scopes(p));
  e.truncated = e.items.size() >= bound;
  return e;
}

}  // namespace detail

ProcEnum rewrite1(const SessionCtx& g, const Process& p, std::size_t bound) {
  return detail::run_rewrite(g, p, bound, false);
}

// ---- parallelization relation -----------------------------------------------------------

namespace {

void par_leaves(const Process& p, std::vector<Process>& out) {
  if (p->kind == PK::Par) {
    par_leaves(p->a, out);
    par_leaves(p->b, out);
  } else {
    out.push_back(p);
  }
}

}  // namespace

bool par_related(const Process& a, const Process& b, const LLCtx& d) {
  if (canonical_key(a) == canonical_key(b)) return true;
  std::vector<Process> la, lb;
  par_leaves(a, la);
  par_leaves(b, lb);
  // a single component X is split as X | 0 (members are taken up to ≡)
  if (la.size() == 1) la.push_back(p_nil());
  if (lb.size() == 1) lb.push_back(p_nil());
  if (la.size() > 12 || lb.size() > 12) return false;

  std::set<Name> linear;
  LLCtx bullets;
  for (auto& [n, t] : d) {
    if (t->kind == LLTypeNode::Kind::Bullet)
      bullets[n] = t;
    else
      linear.insert(n);
  }
  struct Side {
    Process p;
    std::set<Name> lin;
  };
  auto sides = [&](const std::vector<Process>& ls, std::size_t mask) {
    std::vector<Process> s1, s2;
    for (std::size_t i = 0; i < ls.size(); ++i) ((mask >> i) & 1 ? s1 : s2).push_back(ls[i]);
    auto mk = [&](const std::vector<Process>& v) {
      Side s{p_par(v), {}};
      for (auto& n : free_names(s.p))
        if (linear.count(n)) s.lin.insert(n);
      return s;
    };
    return std::make_pair(mk(s1), mk(s2));
  };
  auto typed = [&](const Side& s) {
    LLCtx c = bullets;
    for (auto& n : s.lin) c[n] = d.at(n);
    return check_ll(c, s.p).ok;
  };
  std::map<std::size_t, std::optional<bool>> a_ok;
  const std::size_t fa = (std::size_t{1} << la.size()) - 1, fb = (std::size_t{1} << lb.size()) - 1;
  for (std::size_t ma = 1; ma < fa; ma += 2) {  // leaf 0 always on the first side
    auto [a1, a2] = sides(la, ma);
    bool disjoint = true;
    for (auto& n : a1.lin)
      if (a2.lin.count(n)) disjoint = false;
    if (!disjoint) continue;
    std::optional<bool> aok;
    for (std::size_t mb = 1; mb < fb; ++mb) {
      auto [b1, b2] = sides(lb, mb);
      if (b1.lin != a1.lin || b2.lin != a2.lin) continue;
      if (!aok) aok = typed(a1) && typed(a2);
      if (!*aok) break;
      if (typed(b1) && typed(b2)) return true;
    }
  }
  return false;
}

// ---- correspondence -----------------------------------------------------------------------

CorrespondenceReport check_correspondence(const SessionCtx& g, const Process& p, std::size_t bound, Rewriter rw,
                                          std::size_t state_budget) {
  if (!rw) rw = &rewrite1;
  CorrespondenceReport rep;
  StateGraph sg = explore(Calculus::Session, p, state_budget);
  rep.complete = sg.complete;
  LLCtx d = enc_ctx_ll(g);
  std::map<int, ProcEnum> cache;
  auto rewritten = [&](int i) -> const ProcEnum& {
    auto it = cache.find(i);
    if (it != cache.end()) return it->second;
    return cache[i] = rw(g, sg.states[i], bound);
  };
  for (std::size_t i = 0; i < sg.states.size(); ++i) {
    for (int j : sg.succ[i]) {
      ++rep.steps;
      const ProcEnum& from = rewritten(static_cast<int>(i));
      const ProcEnum& to = rewritten(j);
      std::set<std::string> to_keys;
      for (auto& r : to.items) to_keys.insert(canonical_key(r));
      for (auto& q : from.items) {
        ++rep.checks;
        std::vector<Process> cands;
        for (auto& q1 : raw_reduce_ll(q)) {
          std::vector<Process> frontier{q1};
          std::set<std::string> seen;
          while (!frontier.empty() && cands.size() < 256) {
            Process c = frontier.back();
            frontier.pop_back();
            if (!seen.insert(proc_key(c)).second) continue;
            cands.push_back(c);
            for (auto& f : raw_reduce_ll(c, true)) frontier.push_back(f);
          }
        }
        bool found = false;
        for (auto& c : cands)
          if (to_keys.count(canonical_key(c))) {
            found = true;
            break;
          }
        for (std::size_t ci = 0; !found && ci < cands.size(); ++ci)
          for (auto& r : to.items)
            if (par_related(cands[ci], r, d)) {
              found = true;
              break;
            }
        if (!found)
          rep.failures.push_back("no matching step for " + pretty(q) + " along " + pretty(sg.states[i]) + " -> " +
                                 pretty(sg.states[j]));
      }
    }
  }
  return rep;
}

}  // namespace spi
