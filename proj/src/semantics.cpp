#include "sessionpi/semantics.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <numeric>
#include <unordered_map>

namespace spi {

// ---- flattening ------------------------------------------------------------------

namespace {

void flatten_into(const Process& p, Block& b, std::set<Name>& used) {
  switch (p->kind) {
    case PK::Nil: return;
    case PK::Par:
      flatten_into(p->a, b, used);
      flatten_into(p->b, b, used);
      return;
    case PK::ResPair: {
      Name x = p->x, y = p->y;
      Process body = p->a;
      // keep binders distinct from everything else in the block
      if (used.count(x)) {
        Name nx = fresh_name(x.base);
        body = substitute(body, x, nx);
        x = nx;
      }
      used.insert(x);
      if (used.count(y)) {
        Name ny = fresh_name(y.base);
        body = substitute(body, y, ny);
        y = ny;
      }
      used.insert(y);
      b.binders.push_back(Binder{true, x, y, p->annot});
      flatten_into(body, b, used);
      return;
    }
    case PK::Res: {
      Name x = p->x;
      Process body = p->a;
      if (used.count(x)) {
        Name nx = fresh_name(x.base);
        body = substitute(body, x, nx);
        x = nx;
      }
      used.insert(x);
      b.binders.push_back(Binder{false, x, {}, p->annot});
      flatten_into(body, b, used);
      return;
    }
    default: b.comps.push_back(p);
  }
}

}  // namespace

Block flatten(const Process& p) {
  Block b;
  std::set<Name> used = free_names(p);
  flatten_into(p, b, used);
  return b;
}

Process rebuild(const Block& b) {
  Process body = p_par(b.comps);
  for (std::size_t i = b.binders.size(); i-- > 0;) {
    auto& bd = b.binders[i];
    body = bd.pair ? p_respair(bd.x, bd.y, bd.annot, body) : p_res(bd.x, bd.annot, body);
  }
  return body;
}

// ---- normalization -------------------------------------------------------------------

namespace {

struct CBlock;
using CBlockP = std::shared_ptr<CBlock>;

struct CComp {
  Process orig;  // prefix/forward/case node; children replaced by blocks below
  std::vector<CBlockP> kids;  // cont | arms in label order | case arms in label order
  std::set<Name> fv;
  std::string fvkey;
};

struct CBlock {
  std::vector<Binder> binders;
  std::vector<CComp> comps;
  std::set<Name> fv;
  std::string fvkey;
};

CBlockP build_block(const Process& p);

CComp build_comp(const Process& p) {
  CComp c;
  c.orig = p;
  switch (p->kind) {
    case PK::Output:
    case PK::Input:
    case PK::Select: c.kids.push_back(build_block(p->a)); break;
    case PK::Branch:
      for (auto& [l, q] : p->arms) c.kids.push_back(build_block(q));
      break;
    case PK::Case:
      for (auto& [l, arm] : p->cases) c.kids.push_back(build_block(arm.body));
      break;
    default: break;
  }
  c.fv = free_names(p);
  return c;
}

CBlockP build_block(const Process& p) {
  Block raw = flatten(p);
  auto b = std::make_shared<CBlock>();
  for (auto& q : raw.comps) b->comps.push_back(build_comp(q));
  std::set<Name> used;
  for (auto& c : b->comps) used.insert(c.fv.begin(), c.fv.end());
  for (auto& bd : raw.binders) {
    bool live = used.count(bd.x) || (bd.pair && used.count(bd.y));
    if (live) b->binders.push_back(bd);
  }
  b->fv = used;
  for (auto& bd : b->binders) {
    b->fv.erase(bd.x);
    if (bd.pair) b->fv.erase(bd.y);
  }
  return b;
}

std::string annot_class(const SessionType& t) {
  if (!t) return "-";
  std::string a = type_key(t, true), d = type_key(dual(t), true);
  return std::min(a, d);
}

struct BlockChoice {
  std::string s;
  std::vector<Name> order;  // binder names in label order
  std::vector<int> comp_order;
};

struct Canon {
  using Env = std::map<Name, std::string>;
  std::unordered_map<std::string, std::string> comp_memo;
  std::unordered_map<std::string, BlockChoice> block_memo;

  static std::string lab(const Env& env, const Name& n) {
    auto it = env.find(n);
    if (it != env.end()) return it->second;
    return "f" + debug_name(n);
  }

  static std::string val(const Env& env, const Value& v) {
    if (v.is_chan()) return lab(env, v.name);
    return v.label + "(" + val(env, *v.payload) + ")";
  }

  static std::string memo_key(const void* ptr, const std::set<Name>& fv, const Env& env) {
    std::string k = std::to_string(reinterpret_cast<std::uintptr_t>(ptr)) + "/" + std::to_string(env.size()) + "/";
    for (auto& n : fv) {
      auto it = env.find(n);
      if (it != env.end()) k += it->second + ",";
      else k += "_,";
    }
    return k;
  }

  static std::string new_label(const Env& env) { return "#" + std::to_string(env.size()); }

  std::string comp(const CComp& c, const Env& env) {
    std::string key = memo_key(&c, c.fv, env);
    auto it = comp_memo.find(key);
    if (it != comp_memo.end()) return it->second;
    const Process& p = c.orig;
    std::string s;
    switch (p->kind) {
      case PK::Output:
        s = "o" + lab(env, p->x) + "(";
        for (auto& v : p->vals) s += val(env, v) + ",";
        s += "){" + block(*c.kids[0], env).s + "}";
        break;
      case PK::Input: {
        Env e2 = env;
        s = "i" + lab(env, p->x) + "(";
        for (auto& b : p->binders) {
          std::string l = new_label(e2);
          e2[b] = l;
          s += l + ",";
        }
        s += "){" + block(*c.kids[0], e2).s + "}";
        break;
      }
      case PK::Select: s = "s" + lab(env, p->x) + "." + p->label + "{" + block(*c.kids[0], env).s + "}"; break;
      case PK::Branch: {
        s = "b" + lab(env, p->x) + "{";
        std::size_t i = 0;
        for (auto& [l, q] : p->arms) s += l + ":" + block(*c.kids[i++], env).s + ";";
        s += "}";
        break;
      }
      case PK::Forward: {
        std::string a = lab(env, p->x), b = lab(env, p->y);
        if (b < a) std::swap(a, b);
        s = "f(" + a + "," + b + ")";
        break;
      }
      case PK::Case: {
        s = "c" + val(env, p->scrut) + "{";
        std::size_t i = 0;
        for (auto& [l, arm] : p->cases) {
          Env e2 = env;
          std::string lb = new_label(e2);
          e2[arm.binder] = lb;
          s += l + "(" + lb + "):" + block(*c.kids[i++], e2).s + ";";
        }
        s += "}";
        break;
      }
      default: s = "?";
    }
    comp_memo[key] = s;
    return s;
  }

  std::string binder_decls(const CBlock& b, const Env& env) {
    std::vector<std::string> ds;
    for (auto& bd : b.binders) {
      if (bd.pair) {
        std::string lx = env.at(bd.x), ly = env.at(bd.y);
        std::string t = bd.annot ? type_key(bd.annot, true) : "-";
        if (ly < lx) {
          std::swap(lx, ly);
          t = bd.annot ? type_key(dual(bd.annot), true) : "-";
        }
        ds.push_back("P(" + lx + "," + ly + ":" + t + ")");
      } else {
        ds.push_back("R(" + env.at(bd.x) + ":" + annot_class(bd.annot) + ")");
      }
    }
    std::sort(ds.begin(), ds.end());
    std::string s;
    for (auto& d : ds) s += d;
    return s;
  }

  BlockChoice block(const CBlock& b, const Env& env) {
    std::string key = memo_key(&b, b.fv, env);
    auto it = block_memo.find(key);
    if (it != block_memo.end()) return it->second;

    std::vector<Name> names;
    std::map<Name, std::string> kind;
    for (auto& bd : b.binders) {
      names.push_back(bd.x);
      if (bd.pair) {
        names.push_back(bd.y);
        kind[bd.x] = "p" + (bd.annot ? type_key(bd.annot, true) : "-");
        kind[bd.y] = "p" + (bd.annot ? type_key(dual(bd.annot), true) : "-");
      } else {
        kind[bd.x] = "r" + annot_class(bd.annot);
      }
    }

    BlockChoice best;
    if (names.empty()) {
      std::vector<std::string> cs;
      for (auto& c : b.comps) cs.push_back(comp(c, env));
      best.comp_order.resize(cs.size());
      std::iota(best.comp_order.begin(), best.comp_order.end(), 0);
      std::stable_sort(best.comp_order.begin(), best.comp_order.end(), [&](int i, int j) { return cs[i] < cs[j]; });
      best.s = "[";
      for (int i : best.comp_order) best.s += cs[i] + "|";
      best.s += "]";
      block_memo[key] = best;
      return best;
    }

    // invariant signature of every binder name
    std::map<Name, std::string> sig;
    for (auto& n : names) {
      Env e2 = env;
      for (auto& m : names) e2[m] = "#";
      e2[n] = "@";
      std::vector<std::string> parts;
      for (auto& c : b.comps)
        if (c.fv.count(n)) parts.push_back(comp(c, e2));
      std::sort(parts.begin(), parts.end());
      std::string s = kind[n] + "/";
      for (auto& p : parts) s += p + "&";
      sig[n] = s;
    }
    std::stable_sort(names.begin(), names.end(), [&](const Name& a, const Name& c) { return sig[a] < sig[c]; });

    // groups of equal signature are permuted exhaustively (bounded)
    std::vector<std::pair<std::size_t, std::size_t>> groups;
    for (std::size_t i = 0; i < names.size();) {
      std::size_t j = i;
      while (j < names.size() && sig[names[j]] == sig[names[i]]) ++j;
      groups.emplace_back(i, j);
      i = j;
    }
    std::vector<Name> cur = names;
    for (auto& [s, e] : groups) std::sort(cur.begin() + s, cur.begin() + e);

    const int kMaxCandidates = 5040;
    int tried = 0;
    bool have = false;
    std::function<void(std::size_t)> search = [&](std::size_t g) {
      if (tried >= kMaxCandidates) return;
      if (g == groups.size()) {
        ++tried;
        Env e2 = env;
        std::size_t base = env.size();
        for (std::size_t i = 0; i < cur.size(); ++i) e2[cur[i]] = "#" + std::to_string(base + i);
        // the env must grow by the same amount regardless of labels
        std::vector<std::string> cs;
        for (auto& c : b.comps) cs.push_back(comp(c, e2));
        std::vector<int> order(cs.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return cs[i] < cs[j]; });
        std::string s = binder_decls(b, e2) + "[";
        for (int i : order) s += cs[i] + "|";
        s += "]";
        if (!have || s < best.s) {
          have = true;
          best.s = s;
          best.order = cur;
          best.comp_order = order;
        }
        return;
      }
      auto [s, e] = groups[g];
      std::sort(cur.begin() + s, cur.begin() + e);
      do {
        search(g + 1);
        if (tried >= kMaxCandidates) break;
      } while (std::next_permutation(cur.begin() + s, cur.begin() + e));
      std::sort(cur.begin() + s, cur.begin() + e);
    };
    search(0);
    block_memo[key] = best;
    return best;
  }

  Process rebuild_block(const CBlock& b, const Env& env) {
    BlockChoice ch = block(b, env);
    Env e2 = env;
    std::size_t base = env.size();
    for (std::size_t i = 0; i < ch.order.size(); ++i) e2[ch.order[i]] = "#" + std::to_string(base + i);
    std::vector<Process> comps;
    for (int i : ch.comp_order) comps.push_back(rebuild_comp(b.comps[i], e2));
    Process body = p_par(comps);
    // binders sorted by label, outermost = smallest
    std::vector<std::pair<std::size_t, const Binder*>> bs;
    std::map<Name, std::size_t> rank;
    for (std::size_t i = 0; i < ch.order.size(); ++i) rank[ch.order[i]] = i;
    for (auto& bd : b.binders) {
      std::size_t r = rank[bd.x];
      if (bd.pair) r = std::min(r, rank[bd.y]);
      bs.emplace_back(r, &bd);
    }
    std::sort(bs.begin(), bs.end(), [](auto& l, auto& r) { return l.first < r.first; });
    for (std::size_t i = bs.size(); i-- > 0;) {
      const Binder& bd = *bs[i].second;
      if (bd.pair) {
        if (rank[bd.y] < rank[bd.x])
          body = p_respair(bd.y, bd.x, bd.annot ? dual(bd.annot) : nullptr, body);
        else
          body = p_respair(bd.x, bd.y, bd.annot, body);
      } else {
        SessionType t = bd.annot;
        if (t && type_key(dual(t), true) < type_key(t, true)) t = dual(t);
        body = p_res(bd.x, t, body);
      }
    }
    return body;
  }

  Process rebuild_comp(const CComp& c, const Env& env) {
    const Process& p = c.orig;
    switch (p->kind) {
      case PK::Output: return p_out(p->x, p->vals, rebuild_block(*c.kids[0], env));
      case PK::Input: {
        Env e2 = env;
        for (auto& b : p->binders) e2[b] = new_label(e2);
        return p_in(p->x, p->binders, rebuild_block(*c.kids[0], e2));
      }
      case PK::Select: return p_sel(p->x, p->label, rebuild_block(*c.kids[0], env));
      case PK::Branch: {
        std::map<Label, Process> arms;
        std::size_t i = 0;
        for (auto& [l, q] : p->arms) arms[l] = rebuild_block(*c.kids[i++], env);
        return p_bra(p->x, arms);
      }
      case PK::Forward: {
        std::string a = lab(env, p->x), b = lab(env, p->y);
        return b < a ? p_fwd(p->y, p->x) : p;
      }
      case PK::Case: {
        std::map<Label, CaseArm> arms;
        std::size_t i = 0;
        for (auto& [l, arm] : p->cases) {
          Env e2 = env;
          e2[arm.binder] = new_label(e2);
          arms[l] = CaseArm{arm.binder, rebuild_block(*c.kids[i++], e2)};
        }
        return p_case(p->scrut, arms);
      }
      default: return p;
    }
  }
};

}  // namespace

Process normalize(const Process& p, bool keep_bases) {
  auto b = build_block(p);
  Canon c;
  return alpha_canonical(c.rebuild_block(*b, {}), keep_bases);
}

std::string canonical_key(const Process& p) {
  auto b = build_block(p);
  Canon c;
  return c.block(*b, {}).s;
}

bool congruent(const Process& a, const Process& b) { return canonical_key(a) == canonical_key(b); }

// ---- block reductions -------------------------------------------------------------

namespace {

// Session annotation after one interaction on the bound channel.
SessionType advance_type(const SessionType& t, const std::optional<Label>& l) {
  if (!t) return t;
  using SK = SessionTypeNode::Kind;
  switch (t->kind) {
    case SK::In:
    case SK::Out: return t->cont;
    case SK::Branch:
    case SK::Select:
      if (l && t->arms.count(*l)) return t->arms.at(*l);
      return t;
    case SK::End: return t;
  }
  return t;
}

Process with_comps(const Block& b, std::size_t i, std::size_t j, std::vector<Process> extra,
                   const std::optional<Name>& chan = std::nullopt, const std::optional<Label>& l = std::nullopt) {
  Block nb;
  nb.binders = b.binders;
  if (chan)
    for (auto& bd : nb.binders)
      if (bd.x == *chan || (bd.pair && bd.y == *chan)) bd.annot = advance_type(bd.annot, l);
  for (std::size_t k = 0; k < b.comps.size(); ++k)
    if (k != i && k != j) nb.comps.push_back(b.comps[k]);
  for (auto& e : extra) nb.comps.push_back(e);
  return normalize(rebuild(nb), true);
}

bool pair_bound(const Block& b, const Name& x, const Name& y) {
  for (auto& bd : b.binders)
    if (bd.pair && ((bd.x == x && bd.y == y) || (bd.x == y && bd.y == x))) return true;
  return false;
}

Process subst_binders(const Process& body, const std::vector<Name>& zs, const std::vector<Value>& vs) {
  Process r = body;
  for (std::size_t k = 0; k < zs.size(); ++k) r = substitute_value(r, zs[k], vs[k]);
  return r;
}

}  // namespace

std::vector<Step> reduce_session(const Process& p) {
  std::vector<Step> out;
  Block b = flatten(p);
  for (std::size_t i = 0; i < b.comps.size(); ++i) {
    for (std::size_t j = 0; j < b.comps.size(); ++j) {
      if (i == j) continue;
      auto& ci = b.comps[i];
      auto& cj = b.comps[j];
      if (ci->kind == PK::Output && cj->kind == PK::Input && pair_bound(b, ci->x, cj->x) &&
          ci->vals.size() == cj->binders.size()) {
        out.push_back({with_comps(b, i, j, {ci->a, subst_binders(cj->a, cj->binders, ci->vals)}, ci->x)});
      } else if (ci->kind == PK::Select && cj->kind == PK::Branch && pair_bound(b, ci->x, cj->x)) {
        auto it = cj->arms.find(ci->label);
        if (it != cj->arms.end()) out.push_back({with_comps(b, i, j, {ci->a, it->second}, ci->x, ci->label)});
      }
    }
  }
  return out;
}

std::vector<Step> reduce_ll(const Process& p) {
  std::vector<Step> out;
  Block b = flatten(p);
  for (std::size_t i = 0; i < b.comps.size(); ++i) {
    for (std::size_t j = 0; j < b.comps.size(); ++j) {
      if (i == j) continue;
      auto& ci = b.comps[i];
      auto& cj = b.comps[j];
      if (ci->kind == PK::Output && cj->kind == PK::Input && ci->x == cj->x &&
          ci->vals.size() == cj->binders.size()) {
        out.push_back({with_comps(b, i, j, {ci->a, subst_binders(cj->a, cj->binders, ci->vals)}, ci->x)});
      } else if (ci->kind == PK::Select && cj->kind == PK::Branch && ci->x == cj->x) {
        auto it = cj->arms.find(ci->label);
        if (it != cj->arms.end()) out.push_back({with_comps(b, i, j, {ci->a, it->second}, ci->x, ci->label)});
      }
    }
  }
  // (nu x)([x<->y] | P) -> P[y/x]
  for (std::size_t k = 0; k < b.binders.size(); ++k) {
    if (b.binders[k].pair) continue;
    const Name& x = b.binders[k].x;
    for (std::size_t i = 0; i < b.comps.size(); ++i) {
      auto& c = b.comps[i];
      if (c->kind != PK::Forward || c->x == c->y) continue;
      if (c->x != x && c->y != x) continue;
      Name other = c->x == x ? c->y : c->x;
      Block nb;
      for (std::size_t m = 0; m < b.binders.size(); ++m)
        if (m != k) nb.binders.push_back(b.binders[m]);
      for (std::size_t m = 0; m < b.comps.size(); ++m)
        if (m != i) nb.comps.push_back(substitute(b.comps[m], x, other));
      out.push_back({normalize(rebuild(nb), true), true});
    }
  }
  return out;
}

std::vector<Step> reduce_poly(const Process& p, std::vector<StuckPair>* stuck) {
  std::vector<Step> out;
  Block b = flatten(p);
  auto note = [&](const std::string& why) {
    if (stuck) stuck->push_back({p, why});
  };
  for (std::size_t i = 0; i < b.comps.size(); ++i) {
    auto& ci = b.comps[i];
    if (ci->kind == PK::Case) {
      if (!ci->scrut.is_chan()) {
        auto it = ci->cases.find(ci->scrut.label);
        if (it == ci->cases.end()) {
          note("case on label '" + ci->scrut.label + "' with no matching arm");
          continue;
        }
        try {
          Process body = substitute_value(it->second.body, it->second.binder, *ci->scrut.payload);
          out.push_back({with_comps(b, i, i, {body})});
        } catch (const StuckSubst& e) {
          note(e.what());
        }
      }
      continue;
    }
    for (std::size_t j = 0; j < b.comps.size(); ++j) {
      if (i == j) continue;
      auto& cj = b.comps[j];
      if (ci->kind != PK::Output || cj->kind != PK::Input || ci->x != cj->x) continue;
      if (ci->vals.size() != cj->binders.size()) {
        note("arity mismatch on " + debug_name(ci->x));
        continue;
      }
      try {
        out.push_back({with_comps(b, i, j, {ci->a, subst_binders(cj->a, cj->binders, ci->vals)}, ci->x)});
      } catch (const StuckSubst& e) {
        note(e.what());
      }
    }
  }
  return out;
}

std::vector<Step> reduce(Calculus c, const Process& p, std::vector<StuckPair>* stuck) {
  switch (c) {
    case Calculus::Session: return reduce_session(p);
    case Calculus::LL: return reduce_ll(p);
    case Calculus::Poly: return reduce_poly(p, stuck);
  }
  return {};
}

// ---- in-place reduction -------------------------------------------------------------

namespace {

using Path = std::vector<int>;

struct Leaf {
  Path path;
  Process node;
};

void collect_leaves(const Process& p, Path& path, std::vector<Leaf>& out) {
  if (p->kind == PK::Par) {
    path.push_back(0);
    collect_leaves(p->a, path, out);
    path.back() = 1;
    collect_leaves(p->b, path, out);
    path.pop_back();
  } else if (p->kind == PK::Res || p->kind == PK::ResPair) {
    path.push_back(0);
    collect_leaves(p->a, path, out);
    path.pop_back();
  } else {
    out.push_back({path, p});
  }
}

Process node_at(const Process& p, const Path& path, std::size_t k = 0) {
  if (k == path.size()) return p;
  if (p->kind == PK::Par) return node_at(path[k] == 0 ? p->a : p->b, path, k + 1);
  return node_at(p->a, path, k + 1);
}

Process replace_at(const Process& p, const Path& path, const Process& with, std::size_t k = 0) {
  if (k == path.size()) return with;
  auto n = std::make_shared<ProcNode>(*p);
  if (p->kind == PK::Par && path[k] == 1)
    n->b = replace_at(p->b, path, with, k + 1);
  else
    n->a = replace_at(p->a, path, with, k + 1);
  return n;
}

bool is_prefix_of(const Path& a, const Path& b) {
  return a.size() <= b.size() && std::equal(a.begin(), a.end(), b.begin());
}

Path common_prefix(const Path& a, const Path& b) {
  Path r;
  for (std::size_t i = 0; i < a.size() && i < b.size() && a[i] == b[i]; ++i) r.push_back(a[i]);
  return r;
}

// path of the restriction binding n above `leaf`, if any
std::optional<Path> binder_path(const Process& root, const Path& leaf, const Name& n) {
  std::optional<Path> found;
  Process cur = root;
  Path pref;
  for (std::size_t k = 0; k <= leaf.size(); ++k) {
    if ((cur->kind == PK::Res && cur->x == n) || (cur->kind == PK::ResPair && (cur->x == n || cur->y == n))) found = pref;
    if (k == leaf.size()) break;
    pref.push_back(leaf[k]);
    cur = cur->kind == PK::Par ? (leaf[k] == 0 ? cur->a : cur->b) : cur->a;
  }
  return found;
}

Process advance_at(const Process& r, const Path& leaf, const Name& x, const std::optional<Label>& l) {
  auto bp = binder_path(r, leaf, x);
  if (!bp) return r;
  auto n = std::make_shared<ProcNode>(*node_at(r, *bp));
  n->annot = advance_type(n->annot, l);
  return replace_at(r, *bp, n);
}

}  // namespace

std::vector<Process> raw_reduce_ll(const Process& p, bool forwards_only) {
  std::vector<Process> out;
  std::vector<Leaf> leaves;
  Path path;
  collect_leaves(p, path, leaves);
  if (!forwards_only) {
    for (std::size_t i = 0; i < leaves.size(); ++i) {
      for (std::size_t j = 0; j < leaves.size(); ++j) {
        if (i == j) continue;
        auto& li = leaves[i];
        auto& lj = leaves[j];
        const Process& ci = li.node;
        const Process& cj = lj.node;
        if (ci->kind == PK::Output && cj->kind == PK::Input && ci->x == cj->x && ci->vals.size() == 1 &&
            cj->binders.size() == 1 && ci->vals[0].is_chan()) {
          const Name& y = ci->vals[0].name;
          Process r = replace_at(p, li.path, ci->a);
          r = replace_at(r, lj.path, substitute(cj->a, cj->binders[0], y));
          r = advance_at(r, li.path, ci->x, std::nullopt);
          auto bp = binder_path(p, li.path, y);
          if (bp && !is_prefix_of(*bp, lj.path)) {
            // scope extrusion of the sent name to the common ancestor
            Process res = node_at(r, *bp);
            r = replace_at(r, *bp, res->a);
            Path lca = common_prefix(li.path, lj.path);
            Process at = node_at(r, lca);
            r = replace_at(r, lca, p_res(res->x, res->annot, at));
          }
          out.push_back(r);
        } else if (ci->kind == PK::Select && cj->kind == PK::Branch && ci->x == cj->x) {
          auto it = cj->arms.find(ci->label);
          if (it == cj->arms.end()) continue;
          Process r = replace_at(p, li.path, ci->a);
          r = replace_at(r, lj.path, it->second);
          out.push_back(advance_at(r, li.path, ci->x, ci->label));
        }
      }
    }
  }
  // forwarders: a restriction whose block holds [x<->y]
  for (auto& lf : leaves) {
    const Process& f = lf.node;
    if (f->kind != PK::Forward || f->x == f->y) continue;
    for (const Name& x : {f->x, f->y}) {
      auto bp = binder_path(p, lf.path, x);
      if (!bp) continue;
      Process res = node_at(p, *bp);
      if (res->kind != PK::Res) continue;
      Name other = x == f->x ? f->y : f->x;
      // drop the forwarder leaf: its parent Par is replaced by the sibling
      Process r;
      if (lf.path.size() > bp->size() + 1) {
        Path parent(lf.path.begin(), lf.path.end() - 1);
        Process par = node_at(p, parent);
        r = replace_at(p, parent, lf.path.back() == 0 ? par->b : par->a);
      } else {
        r = replace_at(p, lf.path, p_nil());
      }
      Process body = node_at(r, *bp)->a;
      r = replace_at(r, *bp, substitute(body, x, other));
      out.push_back(r);
    }
  }
  return out;
}

// ---- exploration ---------------------------------------------------------------------

StateGraph explore(Calculus c, const Process& p, std::size_t budget) {
  StateGraph g;
  std::unordered_map<std::string, int> index;
  Process start = normalize(p, true);
  std::string k0 = canonical_key(start);
  index[k0] = 0;
  g.states.push_back(start);
  g.keys.push_back(k0);
  g.succ.emplace_back();
  g.succ_forward.emplace_back();
  std::deque<int> queue{0};
  while (!queue.empty()) {
    int s = queue.front();
    queue.pop_front();
    auto steps = reduce(c, g.states[s], &g.stuck);
    for (auto& st : steps) {
      std::string k = canonical_key(st.target);
      auto it = index.find(k);
      int t;
      if (it == index.end()) {
        if (g.states.size() >= budget) {
          g.complete = false;
          continue;
        }
        t = static_cast<int>(g.states.size());
        index[k] = t;
        g.states.push_back(st.target);
        g.keys.push_back(k);
        g.succ.emplace_back();
        g.succ_forward.emplace_back();
        queue.push_back(t);
      } else {
        t = it->second;
      }
      if (std::find(g.succ[s].begin(), g.succ[s].end(), t) == g.succ[s].end()) {
        g.succ[s].push_back(t);
        g.succ_forward[s].push_back(st.forward);
      }
    }
  }
  return g;
}

bool has_guarded_restricted_prefix(const Process& state) {
  Block b = flatten(state);
  std::set<Name> bound;
  for (auto& bd : b.binders) {
    bound.insert(bd.x);
    if (bd.pair) bound.insert(bd.y);
  }
  for (auto& c : b.comps) {
    if (is_prefix(c) && bound.count(c->x)) return true;
    if (c->kind == PK::Case && !c->scrut.is_chan()) return true;
  }
  return false;
}

Deadlock oracle_deadlock_free(Calculus c, const Process& p, std::size_t budget) {
  Deadlock d;
  StateGraph g = explore(c, p, budget);
  d.complete = g.complete;
  for (std::size_t s = 0; s < g.states.size(); ++s) {
    if (!g.succ[s].empty()) continue;
    if (has_guarded_restricted_prefix(g.states[s])) {
      d.free = false;
      d.witness = g.states[s];
      return d;
    }
  }
  return d;
}

bool is_live(const Process& p) {
  Block b = flatten(p);
  for (auto& c : b.comps)
    if (is_prefix(c)) return true;
  return false;
}

}  // namespace spi
