#include "sessionpi/rewrite_vd.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include "rewrite_engine.hpp"
#include "sessionpi/semantics.hpp"
#include "sessionpi/surface.hpp"

namespace spi {

using SK = SessionTypeNode::Kind;

// ---- dependency contexts -------------------------------------------------------------

std::string to_string(const Triple& t) {
  std::string body = t.subj.base + "," + t.obj.base + "," + std::to_string(t.pos);
  return t.input ? "(" + body + ")" : "<" + body + ">";
}

std::string to_string(const DepCtx& psi) {
  std::string s;
  for (auto& t : psi) s += (s.empty() ? "" : ", ") + to_string(t);
  return s;
}

bool same_triples(const DepCtx& a, const DepCtx& b) {
  auto has = [](const DepCtx& v, const Triple& t) { return std::find(v.begin(), v.end(), t) != v.end(); };
  for (auto& t : a)
    if (!has(b, t)) return false;
  for (auto& t : b)
    if (!has(a, t)) return false;
  return true;
}

DepCtx project(const DepCtx& psi, const Name& x) {
  DepCtx out;
  for (auto& t : psi)
    if (t.subj == x || (!t.input && t.obj == x)) out.push_back(t);
  return out;
}

namespace {

struct Synth {
  SessionCtx ctx;
  DepCtx psi;
};

DepCtx shift(DepCtx psi, int by) {
  for (auto& t : psi) t.pos += by;
  return psi;
}

SessionCtx shift(SessionCtx g, int by) {
  for (auto& [n, t] : g) t = shift_positions(t, by);
  return g;
}

// Positions kept where both agree.
SessionType merge_pos(const SessionType& a, const SessionType& b) {
  if (a->kind != b->kind) return a;
  switch (a->kind) {
    case SK::End: return a;
    case SK::In:
    case SK::Out: {
      auto pos = a->pos == b->pos ? a->pos : std::nullopt;
      auto cont = merge_pos(a->cont, b->cont);
      return a->kind == SK::In ? t_in(a->payload, cont, pos) : t_out(a->payload, cont, pos);
    }
    default: {
      std::map<Label, SessionType> arms;
      for (auto& [l, s] : a->arms) arms[l] = b->arms.count(l) ? merge_pos(s, b->arms.at(l)) : s;
      return a->kind == SK::Branch ? t_branch(arms) : t_select(arms);
    }
  }
}

// Where `given` carries a position, `got` must carry the same one.
bool positions_agree(const SessionType& given, const SessionType& got) {
  if (given->kind != got->kind) return false;
  switch (given->kind) {
    case SK::End: return true;
    case SK::In:
    case SK::Out:
      if (given->pos && given->pos != got->pos) return false;
      return positions_agree(given->cont, got->cont);
    default:
      for (auto& [l, s] : given->arms)
        if (got->arms.count(l) && !positions_agree(s, got->arms.at(l))) return false;
      return true;
  }
}

struct StdReject {
  std::string why;
};

SessionType need(const SessionCtx& g, const Name& x) {
  auto it = g.find(x);
  if (it == g.end()) throw StdReject{debug_name(x) + " is not in the context"};
  return it->second;
}

Synth synth(const SessionCtx& g, const Process& p) {
  switch (p->kind) {
    case PK::Nil: {
      for (auto& [n, t] : g)
        if (t->kind != SK::End) throw StdReject{"0 with unfinished session " + debug_name(n)};
      return {g, {}};
    }
    case PK::Output: {
      SessionType t = need(g, p->x);
      if (t->kind != SK::Out || p->vals.size() != 1 || !p->vals[0].is_chan())
        throw StdReject{"ill-typed output on " + debug_name(p->x)};
      const Name& v = p->vals[0].name;
      SessionCtx g2 = g;
      g2[p->x] = t->cont;
      bool lin = t->payload->kind != SK::End;
      if (lin) g2.erase(v);
      Synth r = synth(g2, p->a);
      Synth out{shift(r.ctx, 1), {}};
      out.ctx[p->x] = t_out(erase_positions(t->payload), shift_positions(r.ctx.at(p->x), 1), 0);
      if (lin) out.ctx[v] = erase_positions(t->payload);
      out.psi.push_back({false, p->x, v, 0, erase_positions(t->payload)});
      for (auto& tr : shift(r.psi, 1)) out.psi.push_back(tr);
      return out;
    }
    case PK::Input: {
      SessionType t = need(g, p->x);
      if (t->kind != SK::In || p->binders.size() != 1) throw StdReject{"ill-typed input on " + debug_name(p->x)};
      const Name& y = p->binders[0];
      SessionCtx g2 = g;
      g2[p->x] = t->cont;
      g2[y] = t->payload;
      Synth r = synth(g2, p->a);
      r.ctx.erase(y);
      Synth out{shift(r.ctx, 1), {}};
      if (g.count(y)) out.ctx[y] = g.at(y);
      out.ctx[p->x] = t_in(erase_positions(t->payload), shift_positions(r.ctx.at(p->x), 1), 0);
      out.psi.push_back({true, p->x, y, 0, erase_positions(t->payload)});
      for (auto& tr : shift(r.psi, 1)) out.psi.push_back(tr);
      return out;
    }
    case PK::Select: {
      SessionType t = need(g, p->x);
      if (t->kind != SK::Select || !t->arms.count(p->label)) throw StdReject{"ill-typed selection on " + debug_name(p->x)};
      SessionCtx g2 = g;
      g2[p->x] = t->arms.at(p->label);
      Synth r = synth(g2, p->a);
      auto arms = t->arms;
      arms[p->label] = r.ctx.at(p->x);
      r.ctx[p->x] = t_select(arms);
      return r;
    }
    case PK::Branch: {
      SessionType t = need(g, p->x);
      if (t->kind != SK::Branch) throw StdReject{"ill-typed branching on " + debug_name(p->x)};
      std::optional<SessionCtx> acc;
      std::map<Label, SessionType> arms;
      DepCtx psi;
      for (auto& [l, q] : p->arms) {
        if (!t->arms.count(l)) throw StdReject{"label " + l + " not offered on " + debug_name(p->x)};
        SessionCtx g2 = g;
        g2[p->x] = t->arms.at(l);
        Synth r = synth(g2, q);
        arms[l] = r.ctx.at(p->x);
        r.ctx.erase(p->x);
        if (!acc) {
          acc = r.ctx;
        } else {
          for (auto& [n, s] : r.ctx)
            if (acc->count(n)) (*acc)[n] = merge_pos(acc->at(n), s);
        }
        for (auto& tr : r.psi)
          if (std::find(psi.begin(), psi.end(), tr) == psi.end()) psi.push_back(tr);
      }
      for (auto& [l, s] : t->arms)
        if (!arms.count(l)) arms[l] = s;
      SessionCtx out = acc ? *acc : SessionCtx{};
      out[p->x] = t_branch(arms);
      return {out, psi};
    }
    case PK::Par: {
      auto fa = free_names(p->a), fb = free_names(p->b);
      SessionCtx ga, gb;
      for (auto& [n, t] : g) {
        if (t->kind == SK::End) {
          ga[n] = t;
          gb[n] = t;
        } else {
          (fa.count(n) ? ga : gb)[n] = t;
        }
      }
      Synth ra = synth(ga, p->a), rb = synth(gb, p->b);
      Synth out{ra.ctx, ra.psi};
      for (auto& [n, t] : rb.ctx)
        if (!out.ctx.count(n) || t->kind != SK::End) out.ctx[n] = t;
      for (auto& tr : rb.psi) out.psi.push_back(tr);
      return out;
    }
    case PK::ResPair: {
      if (!p->annot) throw StdReject{"restriction without annotation"};
      SessionCtx g2 = g;
      g2[p->x] = p->annot;
      g2[p->y] = dual(p->annot);
      Synth r = synth(g2, p->a);
      r.ctx.erase(p->x);
      r.ctx.erase(p->y);
      for (const Name* n : {&p->x, &p->y})
        if (g.count(*n)) r.ctx[*n] = g.at(*n);
      // drop what lies in both projections
      DepCtx kept;
      auto in_proj = [](const Triple& t, const Name& x) { return t.subj == x || (!t.input && t.obj == x); };
      for (auto& tr : r.psi)
        if (!(in_proj(tr, p->x) && in_proj(tr, p->y))) kept.push_back(tr);
      r.psi = kept;
      return r;
    }
    default: throw StdReject{"not a session process"};
  }
}

}  // namespace

StdResult check_std(const SessionCtx& g, const Process& p) {
  StdResult res;
  SessionCtx plain;
  for (auto& [n, t] : g) plain[n] = erase_positions(t);
  res.verdict = check_st(plain, p);
  if (!res.verdict.ok) return res;
  try {
    Synth s = synth(plain, p);
    for (auto& [n, t] : g) {
      if (!s.ctx.count(n)) s.ctx[n] = t;
      if (!positions_agree(t, s.ctx.at(n))) {
        res.verdict = Verdict::reject("annotation position mismatch on " + debug_name(n) + ": declared " + pretty(t) +
                                      ", process has " + pretty(s.ctx.at(n)));
        return res;
      }
    }
    res.psi = s.psi;
    res.annotated = s.ctx;
  } catch (const StdReject& e) {
    res.verdict = Verdict::reject(e.why);
  }
  return res;
}

// ---- value dependencies -----------------------------------------------------------------

std::string to_string(const VDep& d) {
  return d.src.base + "^" + std::to_string(d.src_pos) + " < " + d.dst.base + "^" + std::to_string(d.dst_pos);
}

std::vector<VDep> vdeps(const DepCtx& psi) {
  std::vector<VDep> out;
  for (auto& i : psi) {
    if (!i.input) continue;
    for (auto& o : psi) {
      if (o.input || o.obj != i.obj) continue;
      VDep d{i.subj, i.pos, o.subj, o.pos, i.obj_type};
      if (std::find(out.begin(), out.end(), d) == out.end()) out.push_back(d);
    }
  }
  return out;
}

int DepForest::height(const Name& n) const {
  int h = 0;
  auto it = children.find(n);
  if (it != children.end())
    for (auto& c : it->second) h = std::max(h, 1 + height(c));
  return h;
}

DepForest forest(const SessionCtx& g, const DepCtx& psi) {
  DepForest f;
  for (auto& [n, t] : g) f.nodes.push_back(n);
  std::set<std::string> simple;
  for (auto& d : vdeps(psi)) {
    if (!g.count(d.src) || !g.count(d.dst)) continue;
    std::string key = debug_name(d.src) + "|" + debug_name(d.dst) + "|" + type_key(d.payload);
    if (!simple.insert(key).second)
      throw DepError(DepError::Kind::NonSimple, "more than one dependency " + d.src.base + " < " + d.dst.base +
                                                    " carrying " + pretty(d.payload));
    if (d.src == d.dst) throw DepError(DepError::Kind::Cyclic, "dependency of " + d.src.base + " on itself");
    f.edges.push_back(d);
    auto par = f.parent.find(d.dst);
    if (par != f.parent.end() && par->second != d.src)
      throw DepError(DepError::Kind::MultipleParents,
                     d.dst.base + " depends on both " + par->second.base + " and " + d.src.base);
    if (par == f.parent.end()) {
      f.parent[d.dst] = d.src;
      f.children[d.src].push_back(d.dst);
    }
  }
  // with one parent per node, a cycle is a parent chain that comes back
  for (auto& n : f.nodes) {
    std::set<Name> seen{n};
    for (auto it = f.parent.find(n); it != f.parent.end(); it = f.parent.find(it->second))
      if (!seen.insert(it->second).second)
        throw DepError(DepError::Kind::Cyclic, "dependencies form a cycle through " + it->second.base);
  }
  for (auto& n : f.nodes)
    if (!f.parent.count(n)) f.roots.push_back(n);
  return f;
}

Name bridge_name(const Name& src, const Name& dst) {
  static std::map<std::pair<Name, Name>, Name> reg;
  auto key = std::make_pair(src, dst);
  auto it = reg.find(key);
  if (it != reg.end()) return it->second;
  return reg[key] = fresh_name("c_" + src.base + dst.base);
}

// ---- refined characteristic processes ---------------------------------------------------

namespace {

struct Collect {
  std::size_t bound;
  ProcEnum out;
  std::set<std::string> keys;

  void add(const Process& p) {
    if (out.items.size() >= bound) {
      out.truncated = true;
      return;
    }
    if (keys.insert(canonical_key(p)).second) out.items.push_back(p);
  }
};

void each_pair(const std::vector<Process>& a, const std::vector<Process>& b, std::size_t bound, bool& trunc,
               const std::function<void(const Process&, const Process&)>& f) {
  std::size_t n = 0;
  for (auto& x : a)
    for (auto& y : b) {
      if (n++ >= bound) {
        trunc = true;
        return;
      }
      f(x, y);
    }
}

ProcEnum chr_v(const SessionType& t, const Name& x, const std::vector<VDep>& deps, std::size_t bound) {
  Collect c{bound, {}, {}};
  switch (t->kind) {
    case SK::End: c.add(p_nil()); break;
    case SK::In: {
      std::vector<const VDep*> outs;
      if (t->pos)
        for (auto& d : deps)
          if (d.src == x && d.src_pos == *t->pos) outs.push_back(&d);
      auto q = chr_v(t->cont, x, deps, bound);
      c.out.truncated |= q.truncated;
      if (outs.empty()) {
        Name y = fresh_name("y");
        auto py = chr_v(t->payload, y, deps, bound);
        c.out.truncated |= py.truncated;
        each_pair(py.items, q.items, bound, c.out.truncated,
                  [&](const Process& a, const Process& b) { c.add(p_in(x, y, p_par(a, b))); });
        break;
      }
      // forward the received name to every dependent output, in order
      Name y = fresh_name("y");
      for (auto& body : q.items) {
        Process acc = body;
        for (std::size_t i = outs.size(); i-- > 0;) {
          Name w = fresh_name("w");
          acc = p_res(w, dual(t->payload), p_out(bridge_name(x, outs[i]->dst), w, p_par(p_fwd(y, w), acc)));
        }
        c.add(p_in(x, y, acc));
      }
      break;
    }
    case SK::Out: {
      const VDep* from = nullptr;
      if (t->pos)
        for (auto& d : deps)
          if (d.dst == x && d.dst_pos == *t->pos) from = &d;
      auto q = chr_v(t->cont, x, deps, bound);
      c.out.truncated |= q.truncated;
      if (from) {
        Name y = fresh_name("y"), w = fresh_name("w");
        for (auto& body : q.items)
          c.add(p_in(bridge_name(from->src, x), y, p_res(w, dual(t->payload), p_out(x, w, p_par(p_fwd(y, w), body)))));
        break;
      }
      Name y = fresh_name("y");
      SessionType yt = dual(t->payload);
      auto py = chr_v(yt, y, deps, bound);
      c.out.truncated |= py.truncated;
      each_pair(py.items, q.items, bound, c.out.truncated,
                [&](const Process& a, const Process& b) { c.add(p_res(y, yt, p_out(x, y, p_par(a, b)))); });
      break;
    }
    case SK::Select:
      for (auto& [l, s] : t->arms) {
        auto q = chr_v(s, x, deps, bound);
        c.out.truncated |= q.truncated;
        for (auto& p : q.items) c.add(p_sel(x, l, p));
      }
      break;
    case SK::Branch: {
      std::vector<Label> labels;
      std::vector<std::vector<Process>> sets;
      for (auto& [l, s] : t->arms) {
        auto q = chr_v(s, x, deps, bound);
        c.out.truncated |= q.truncated;
        labels.push_back(l);
        sets.push_back(q.items);
      }
      std::function<void(std::size_t, std::map<Label, Process>&)> rec = [&](std::size_t i,
                                                                             std::map<Label, Process>& acc) {
        if (c.out.items.size() >= bound) {
          c.out.truncated = true;
          return;
        }
        if (i == labels.size()) {
          c.add(p_bra(x, acc));
          return;
        }
        for (auto& p : sets[i]) {
          acc[labels[i]] = p;
          rec(i + 1, acc);
        }
      };
      std::map<Label, Process> acc;
      rec(0, acc);
      break;
    }
  }
  return c.out;
}

// Session type of the bridge src -> dst as seen by src: one output per
// dependency, in the order of src's inputs.
SessionType bridge_type(const std::vector<VDep>& edges, const Name& src, const Name& dst) {
  std::vector<const VDep*> ds;
  for (auto& d : edges)
    if (d.src == src && d.dst == dst) ds.push_back(&d);
  std::sort(ds.begin(), ds.end(), [](const VDep* a, const VDep* b) { return a->src_pos < b->src_pos; });
  SessionType t = t_end();
  for (std::size_t i = ds.size(); i-- > 0;) t = t_out(ds[i]->payload, t);
  return t;
}

}  // namespace

ProcEnum char_proc_v(const SessionType& t, const Name& x, const DepCtx& psi, std::size_t bound) {
  return chr_v(t, x, vdeps(psi), bound);
}

ProcEnum char_ctx_v(const SessionCtx& g, const DepCtx& psi, std::size_t bound) {
  DepForest f = forest(g, psi);
  std::map<Name, ProcEnum> memo;
  std::function<const ProcEnum&(const Name&)> node = [&](const Name& n) -> const ProcEnum& {
    auto it = memo.find(n);
    if (it != memo.end()) return it->second;
    ProcEnum own = chr_v(g.at(n), n, f.edges, bound);
    std::vector<Process> acc = own.items;
    bool trunc = own.truncated;
    auto ch = f.children.find(n);
    if (ch != f.children.end()) {
      for (auto& k : ch->second) {
        const ProcEnum& sub = node(k);
        trunc |= sub.truncated;
        std::vector<Process> next;
        Name c = bridge_name(n, k);
        SessionType ct = bridge_type(f.edges, n, k);
        each_pair(acc, sub.items, bound, trunc,
                  [&](const Process& a, const Process& b) { next.push_back(p_res(c, ct, p_par(a, b))); });
        acc = std::move(next);
      }
    }
    Collect col{bound, {}, {}};
    col.out.truncated = trunc;
    for (auto& p : acc) col.add(p);
    return memo[n] = col.out;
  };
  std::vector<Process> acc{};
  bool trunc = false;
  bool first = true;
  for (auto& r : f.roots) {
    const ProcEnum& e = node(r);
    trunc |= e.truncated;
    if (first) {
      acc = e.items;
      first = false;
      continue;
    }
    std::vector<Process> next;
    each_pair(acc, e.items, bound, trunc, [&](const Process& a, const Process& b) { next.push_back(p_par(a, b)); });
    acc = std::move(next);
  }
  Collect col{bound, {}, {}};
  col.out.truncated = trunc;
  if (first) col.add(p_nil());
  for (auto& p : acc) col.add(p);
  return col.out;
}

// ---- shortening and catalyzers ------------------------------------------------------------

SessionType shorten(const SessionType& t, const std::vector<PrefixRef>& drop) {
  std::vector<bool> used(drop.size(), false);
  std::function<SessionType(const SessionType&)> go = [&](const SessionType& s) -> SessionType {
    switch (s->kind) {
      case SK::End: return s;
      case SK::In:
      case SK::Out: {
        bool in = s->kind == SK::In;
        for (std::size_t i = 0; i < drop.size(); ++i)
          if (s->pos && drop[i].input == in && drop[i].pos == *s->pos) {
            used[i] = true;
            return go(s->cont);
          }
        auto cont = go(s->cont);
        return in ? t_in(s->payload, cont, s->pos) : t_out(s->payload, cont, s->pos);
      }
      default: {
        std::map<Label, SessionType> arms;
        for (auto& [l, a] : s->arms) arms[l] = go(a);
        return s->kind == SK::Branch ? t_branch(arms) : t_select(arms);
      }
    }
  };
  SessionType out = go(t);
  for (std::size_t i = 0; i < drop.size(); ++i)
    if (!used[i])
      throw DepError(DepError::Kind::BadPosition, std::string("no ") + (drop[i].input ? "?" : "!") + "^" +
                                                      std::to_string(drop[i].pos) + " prefix in " + pretty(t));
  return out;
}

Process rename_occurrence(const Process& p, const Name& subj, bool input, int nth, const Name& to) {
  std::function<Process(const Process&, int)> go = [&](const Process& q, int d) -> Process {
    switch (q->kind) {
      case PK::Nil:
      case PK::Forward: return q;
      case PK::Output: {
        if (q->x != subj) return p_out(q->x, q->vals, go(q->a, d));
        bool hit = !input && d == nth;
        return p_out(hit ? to : q->x, q->vals, d >= nth ? q->a : go(q->a, d + 1));
      }
      case PK::Input: {
        bool shadow = std::find(q->binders.begin(), q->binders.end(), subj) != q->binders.end();
        if (q->x != subj) return p_in(q->x, q->binders, shadow ? q->a : go(q->a, d));
        bool hit = input && d == nth;
        return p_in(hit ? to : q->x, q->binders, (d >= nth || shadow) ? q->a : go(q->a, d + 1));
      }
      case PK::Select: return p_sel(q->x, q->label, go(q->a, d));
      case PK::Branch: {
        std::map<Label, Process> arms;
        for (auto& [l, a] : q->arms) arms[l] = go(a, d);
        return p_bra(q->x, arms);
      }
      case PK::Case: {
        std::map<Label, CaseArm> arms;
        for (auto& [l, a] : q->cases) arms[l] = CaseArm{a.binder, a.binder == subj ? a.body : go(a.body, d)};
        return p_case(q->scrut, arms);
      }
      case PK::Par: return p_par(go(q->a, d), go(q->b, d));
      case PK::ResPair:
        if (q->x == subj || q->y == subj) return q;
        return p_respair(q->x, q->y, q->annot, go(q->a, d));
      case PK::Res:
        if (q->x == subj) return q;
        return p_res(q->x, q->annot, go(q->a, d));
    }
    return q;
  };
  return go(p, 0);
}

Process plug(const CatalyzerV& c, const Process& hole) {
  Process h = hole;
  // later occurrences first, so a rename never shifts the count of another
  auto sigma = c.sigma;
  std::stable_sort(sigma.begin(), sigma.end(), [](auto& a, auto& b) { return a.nth > b.nth; });
  for (auto& r : sigma) h = rename_occurrence(h, r.subj, r.input, r.nth, r.to);
  return plug(c.cat, h);
}

namespace {

// Path of choices from the root of a type to the prefix with the given
// polarity and position; labels for arms, "" for continuations.
bool find_path(const SessionType& t, bool input, int pos, std::vector<Label>& path) {
  switch (t->kind) {
    case SK::End: return false;
    case SK::In:
    case SK::Out:
      if ((t->kind == SK::In) == input && t->pos == pos) return true;
      path.push_back("");
      if (find_path(t->cont, input, pos, path)) return true;
      path.pop_back();
      return false;
    default:
      for (auto& [l, s] : t->arms) {
        path.push_back(l);
        if (find_path(s, input, pos, path)) return true;
        path.pop_back();
      }
      return false;
  }
}

SessionType follow(SessionType t, const std::vector<Label>& path) {
  for (auto& step : path) {
    if (!t) return nullptr;
    if (step.empty()) {
      if (t->kind != SK::In && t->kind != SK::Out) return nullptr;
      t = t->cont;
    } else {
      if (t->kind != SK::Branch && t->kind != SK::Select) return nullptr;
      auto it = t->arms.find(step);
      if (it == t->arms.end()) return nullptr;
      t = it->second;
    }
  }
  return t;
}

// Input/output prefixes on x above the hole's prefix dual to (input, pos) of t.
int dual_ordinal(const SessionType& t, bool input, int pos, const SessionType& hole_t, const Name& x) {
  std::vector<Label> path;
  if (!find_path(t, input, pos, path))
    throw DepError(DepError::Kind::BadPosition, std::string("no ") + (input ? "?" : "!") + "^" + std::to_string(pos) +
                                                    " prefix on " + x.base);
  SessionType h = follow(hole_t, path);
  SK want = input ? SK::Out : SK::In;
  if (!h || h->kind != want)
    throw DepError(DepError::Kind::BadPosition, "hole type of " + x.base + " has no dual prefix");
  return static_cast<int>(std::count(path.begin(), path.end(), Label{}));
}

}  // namespace

std::vector<CatalyzerV> catalyzers_v(const std::vector<std::pair<Name, SessionType>>& gamma, const DepCtx& psi,
                                     const SessionCtx& hole, std::size_t bound) {
  SessionCtx gmap(gamma.begin(), gamma.end());
  std::vector<VDep> deps;
  std::set<std::string> simple;
  for (auto& d : vdeps(psi)) {
    if (!gmap.count(d.src) || !gmap.count(d.dst)) continue;
    std::string key = debug_name(d.src) + "|" + debug_name(d.dst) + "|" + type_key(d.payload);
    if (!simple.insert(key).second)
      throw DepError(DepError::Kind::NonSimple, "more than one dependency " + d.src.base + " < " + d.dst.base);
    for (const Name* n : {&d.src, &d.dst})
      if (!hole.count(*n)) throw DepError(DepError::Kind::MissingDual, "no dual assignment for " + n->base);
    deps.push_back(d);
  }

  CatalyzerV base;
  std::vector<Catalyzer::Wrap> fwd;
  std::map<Name, std::vector<PrefixRef>> drops;
  for (auto& d : deps) {
    Name u = fresh_name("u");
    int n1 = dual_ordinal(gmap.at(d.src), true, d.src_pos, hole.at(d.src), d.src);
    int n2 = dual_ordinal(gmap.at(d.dst), false, d.dst_pos, hole.at(d.dst), d.dst);
    base.sigma.push_back({d.src, false, n1, u});
    base.sigma.push_back({d.dst, true, n2, u});
    drops[d.src].push_back({true, d.src_pos});
    drops[d.dst].push_back({false, d.dst_pos});
    // u(y).u<w>.([w<->y] | 0), typed from the forwarder's side
    Name y = fresh_name("y"), w = fresh_name("w");
    SessionType s = d.payload;
    Process f = p_in(u, y, p_res(w, dual(s), p_out(u, w, p_par(p_fwd(w, y), p_nil()))));
    fwd.push_back({u, t_in(s, t_out(s, t_end())), f});
  }

  std::vector<std::pair<Name, SessionType>> shortened;
  std::vector<std::vector<Process>> sets;
  for (auto& [n, t] : gamma) {
    SessionType s = drops.count(n) ? shorten(t, drops.at(n)) : t;
    shortened.push_back({n, s});
    sets.push_back(chr_v(s, n, {}, bound).items);
  }
  std::vector<CatalyzerV> out;
  std::vector<std::size_t> idx(sets.size(), 0);
  for (auto& s : sets)
    if (s.empty()) return out;
  while (out.size() < bound) {
    CatalyzerV c = base;
    for (std::size_t i = 0; i < sets.size(); ++i)
      c.cat.wraps.push_back({shortened[i].first, erase_positions(shortened[i].second), sets[i][idx[i]]});
    for (auto& w : fwd) c.cat.wraps.push_back(w);
    out.push_back(std::move(c));
    std::size_t i = sets.size();
    bool done = true;
    while (i-- > 0) {
      if (++idx[i] < sets[i].size()) {
        done = false;
        break;
      }
      idx[i] = 0;
    }
    if (done) break;
  }
  return out;
}

// ---- refined rewriting ---------------------------------------------------------------------

ProcEnum rewrite2(const SessionCtx& g, const Process& p, std::size_t bound) {
  return detail::run_rewrite(g, p, bound, true);
}

ProcEnum rewrite2(const SessionCtx& g, const DepCtx& psi, const Process& p, std::size_t bound) {
  auto s = check_std(g, p);
  if (!s.verdict.ok) throw std::invalid_argument("rewrite: " + s.verdict.reason);
  if (!same_triples(s.psi, psi)) throw std::invalid_argument("rewrite: dependency context does not match the process");
  return rewrite2(g, p, bound);
}

}  // namespace spi
