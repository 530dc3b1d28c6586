#include "sessionpi/ast.hpp"

#include <atomic>
#include <functional>
#include <sstream>

namespace spi {

namespace {
std::atomic<std::uint64_t> g_fresh{1ull << 20};
}

Name fresh_name(const std::string& base) { return Name{base, g_fresh++}; }

std::string debug_name(const Name& n) {
  if (n.uid == 0) return n.base;
  return n.base + "'" + std::to_string(n.uid);
}

Value Value::chan(Name n) {
  Value v;
  v.kind = Kind::Chan;
  v.name = std::move(n);
  return v;
}

Value Value::variant(Label l, Value p) {
  Value v;
  v.kind = Kind::Variant;
  v.label = std::move(l);
  v.payload = std::make_shared<const Value>(std::move(p));
  return v;
}

bool operator==(const Value& a, const Value& b) {
  if (a.kind != b.kind) return false;
  if (a.kind == Value::Kind::Chan) return a.name == b.name;
  return a.label == b.label && *a.payload == *b.payload;
}

void value_names(const Value& v, std::set<Name>& out) {
  if (v.kind == Value::Kind::Chan)
    out.insert(v.name);
  else
    value_names(*v.payload, out);
}

// ---- session types ---------------------------------------------------------

using SK = SessionTypeNode::Kind;

SessionType t_end() {
  static const SessionType e = std::make_shared<const SessionTypeNode>();
  return e;
}

static SessionType mk_msg(SK k, SessionType p, SessionType c, std::optional<int> pos) {
  auto n = std::make_shared<SessionTypeNode>();
  n->kind = k;
  n->payload = std::move(p);
  n->cont = std::move(c);
  n->pos = pos;
  return n;
}

SessionType t_in(SessionType p, SessionType c, std::optional<int> pos) {
  return mk_msg(SK::In, std::move(p), std::move(c), pos);
}
SessionType t_out(SessionType p, SessionType c, std::optional<int> pos) {
  return mk_msg(SK::Out, std::move(p), std::move(c), pos);
}

static SessionType mk_choice(SK k, std::map<Label, SessionType> arms) {
  auto n = std::make_shared<SessionTypeNode>();
  n->kind = k;
  n->arms = std::move(arms);
  return n;
}

SessionType t_branch(std::map<Label, SessionType> arms) { return mk_choice(SK::Branch, std::move(arms)); }
SessionType t_select(std::map<Label, SessionType> arms) { return mk_choice(SK::Select, std::move(arms)); }

SessionType dual(const SessionType& t) {
  switch (t->kind) {
    case SK::End: return t;
    case SK::In: return t_out(t->payload, dual(t->cont), t->pos);
    case SK::Out: return t_in(t->payload, dual(t->cont), t->pos);
    case SK::Branch:
    case SK::Select: {
      std::map<Label, SessionType> arms;
      for (auto& [l, s] : t->arms) arms[l] = dual(s);
      return mk_choice(t->kind == SK::Branch ? SK::Select : SK::Branch, std::move(arms));
    }
  }
  return t;
}

static SessionType map_positions(const SessionType& t, const std::function<std::optional<int>(std::optional<int>)>& f) {
  switch (t->kind) {
    case SK::End: return t;
    case SK::In:
    case SK::Out: return mk_msg(t->kind, erase_positions(t->payload), map_positions(t->cont, f), f(t->pos));
    default: {
      std::map<Label, SessionType> arms;
      for (auto& [l, s] : t->arms) arms[l] = map_positions(s, f);
      return mk_choice(t->kind, std::move(arms));
    }
  }
}

SessionType erase_positions(const SessionType& t) {
  return map_positions(t, [](std::optional<int>) { return std::optional<int>{}; });
}

SessionType shift_positions(const SessionType& t, int by) {
  return map_positions(t, [by](std::optional<int> p) { return p ? std::optional<int>(*p + by) : p; });
}

std::string type_key(const SessionType& t, bool with_pos) {
  switch (t->kind) {
    case SK::End: return "e";
    case SK::In:
    case SK::Out: {
      std::string s = t->kind == SK::In ? "?" : "!";
      if (with_pos && t->pos) s += "^" + std::to_string(*t->pos);
      return s + "(" + type_key(t->payload, with_pos) + ")." + type_key(t->cont, with_pos);
    }
    default: {
      std::string s = t->kind == SK::Branch ? "&{" : "+{";
      for (auto& [l, a] : t->arms) s += l + ":" + type_key(a, with_pos) + ",";
      return s + "}";
    }
  }
}

bool type_equal(const SessionType& a, const SessionType& b, bool with_pos) {
  return type_key(a, with_pos) == type_key(b, with_pos);
}

int type_depth(const SessionType& t) {
  switch (t->kind) {
    case SK::End: return 0;
    case SK::In:
    case SK::Out: return 1 + std::max(type_depth(t->payload), type_depth(t->cont));
    default: {
      int d = 0;
      for (auto& [l, a] : t->arms) d = std::max(d, type_depth(a));
      return 1 + d;
    }
  }
}

// ---- LL ---------------------------------------------------------------------

using LK = LLTypeNode::Kind;

LLType ll_bullet() {
  static const LLType b = std::make_shared<const LLTypeNode>();
  return b;
}

static LLType ll_bin(LK k, LLType a, LLType b) {
  auto n = std::make_shared<LLTypeNode>();
  n->kind = k;
  n->left = std::move(a);
  n->right = std::move(b);
  return n;
}

LLType ll_tensor(LLType a, LLType b) { return ll_bin(LK::Tensor, std::move(a), std::move(b)); }
LLType ll_parr(LLType a, LLType b) { return ll_bin(LK::Parr, std::move(a), std::move(b)); }

static LLType ll_choice(LK k, std::map<Label, LLType> arms) {
  auto n = std::make_shared<LLTypeNode>();
  n->kind = k;
  n->arms = std::move(arms);
  return n;
}

LLType ll_with(std::map<Label, LLType> arms) { return ll_choice(LK::With, std::move(arms)); }
LLType ll_plus(std::map<Label, LLType> arms) { return ll_choice(LK::Plus, std::move(arms)); }

LLType dual_ll(const LLType& a) {
  switch (a->kind) {
    case LK::Bullet: return a;
    case LK::Tensor: return ll_parr(dual_ll(a->left), dual_ll(a->right));
    case LK::Parr: return ll_tensor(dual_ll(a->left), dual_ll(a->right));
    case LK::With:
    case LK::Plus: {
      std::map<Label, LLType> arms;
      for (auto& [l, b] : a->arms) arms[l] = dual_ll(b);
      return ll_choice(a->kind == LK::With ? LK::Plus : LK::With, std::move(arms));
    }
  }
  return a;
}

std::string ll_key(const LLType& a) {
  switch (a->kind) {
    case LK::Bullet: return "*";
    case LK::Tensor: return "(" + ll_key(a->left) + "(x)" + ll_key(a->right) + ")";
    case LK::Parr: return "(" + ll_key(a->left) + "(par)" + ll_key(a->right) + ")";
    default: {
      std::string s = a->kind == LK::With ? "&{" : "+{";
      for (auto& [l, b] : a->arms) s += l + ":" + ll_key(b) + ",";
      return s + "}";
    }
  }
}

bool ll_equal(const LLType& a, const LLType& b) { return ll_key(a) == ll_key(b); }

// ---- process constructors --------------------------------------------------

static std::shared_ptr<ProcNode> mk(PK k) {
  auto n = std::make_shared<ProcNode>();
  n->kind = k;
  return n;
}

Process p_nil() {
  static const Process z = mk(PK::Nil);
  return z;
}

Process p_out(Name x, std::vector<Value> vals, Process cont) {
  auto n = mk(PK::Output);
  n->x = std::move(x);
  n->vals = std::move(vals);
  n->a = std::move(cont);
  return n;
}

Process p_out(Name x, Name v, Process cont) { return p_out(std::move(x), std::vector<Value>{Value::chan(std::move(v))}, std::move(cont)); }

Process p_in(Name x, std::vector<Name> binders, Process cont) {
  auto n = mk(PK::Input);
  n->x = std::move(x);
  n->binders = std::move(binders);
  n->a = std::move(cont);
  return n;
}

Process p_in(Name x, Name z, Process cont) { return p_in(std::move(x), std::vector<Name>{std::move(z)}, std::move(cont)); }

Process p_sel(Name x, Label l, Process cont) {
  auto n = mk(PK::Select);
  n->x = std::move(x);
  n->label = std::move(l);
  n->a = std::move(cont);
  return n;
}

Process p_bra(Name x, std::map<Label, Process> arms) {
  auto n = mk(PK::Branch);
  n->x = std::move(x);
  n->arms = std::move(arms);
  return n;
}

Process p_par(Process a, Process b) {
  auto n = mk(PK::Par);
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

Process p_par(const std::vector<Process>& ps) {
  if (ps.empty()) return p_nil();
  Process acc = ps.back();
  for (std::size_t i = ps.size() - 1; i-- > 0;) acc = p_par(ps[i], acc);
  return acc;
}

Process p_respair(Name x, Name y, SessionType annot, Process body) {
  auto n = mk(PK::ResPair);
  n->x = std::move(x);
  n->y = std::move(y);
  n->annot = std::move(annot);
  n->a = std::move(body);
  return n;
}

Process p_res(Name x, SessionType annot, Process body) {
  auto n = mk(PK::Res);
  n->x = std::move(x);
  n->annot = std::move(annot);
  n->a = std::move(body);
  return n;
}

Process p_res(Name x, Process body) { return p_res(std::move(x), nullptr, std::move(body)); }

Process p_fwd(Name x, Name y) {
  auto n = mk(PK::Forward);
  n->x = std::move(x);
  n->y = std::move(y);
  return n;
}

Process p_case(Value scrut, std::map<Label, CaseArm> arms) {
  auto n = mk(PK::Case);
  n->scrut = std::move(scrut);
  n->cases = std::move(arms);
  return n;
}

Process p_bout(Name x, Name y, Process cont) { return p_res(y, p_out(std::move(x), y, std::move(cont))); }

bool is_prefix(const Process& p) {
  return p->kind == PK::Output || p->kind == PK::Input || p->kind == PK::Select || p->kind == PK::Branch;
}

// ---- free names --------------------------------------------------------------

static void fn_into(const Process& p, std::set<Name>& out) {
  switch (p->kind) {
    case PK::Nil: return;
    case PK::Output:
      out.insert(p->x);
      for (auto& v : p->vals) value_names(v, out);
      fn_into(p->a, out);
      return;
    case PK::Input: {
      out.insert(p->x);
      std::set<Name> inner;
      fn_into(p->a, inner);
      for (auto& z : p->binders) inner.erase(z);
      out.insert(inner.begin(), inner.end());
      return;
    }
    case PK::Select:
      out.insert(p->x);
      fn_into(p->a, out);
      return;
    case PK::Branch:
      out.insert(p->x);
      for (auto& [l, q] : p->arms) fn_into(q, out);
      return;
    case PK::Par:
      fn_into(p->a, out);
      fn_into(p->b, out);
      return;
    case PK::ResPair:
    case PK::Res: {
      std::set<Name> inner;
      fn_into(p->a, inner);
      inner.erase(p->x);
      if (p->kind == PK::ResPair) inner.erase(p->y);
      out.insert(inner.begin(), inner.end());
      return;
    }
    case PK::Forward:
      out.insert(p->x);
      out.insert(p->y);
      return;
    case PK::Case:
      value_names(p->scrut, out);
      for (auto& [l, arm] : p->cases) {
        std::set<Name> inner;
        fn_into(arm.body, inner);
        inner.erase(arm.binder);
        out.insert(inner.begin(), inner.end());
      }
      return;
  }
}

std::set<Name> free_names(const Process& p) {
  std::set<Name> s;
  fn_into(p, s);
  return s;
}

bool occurs_free(const Name& n, const Process& p) { return free_names(p).count(n) > 0; }

static void names_into(const Process& p, std::set<Name>& out) {
  switch (p->kind) {
    case PK::Nil: return;
    case PK::Output:
      out.insert(p->x);
      for (auto& v : p->vals) value_names(v, out);
      break;
    case PK::Input:
      out.insert(p->x);
      out.insert(p->binders.begin(), p->binders.end());
      break;
    case PK::Select:
    case PK::Branch: out.insert(p->x); break;
    case PK::ResPair:
      out.insert(p->x);
      out.insert(p->y);
      break;
    case PK::Res: out.insert(p->x); break;
    case PK::Forward:
      out.insert(p->x);
      out.insert(p->y);
      break;
    case PK::Case:
      value_names(p->scrut, out);
      for (auto& [l, arm] : p->cases) {
        out.insert(arm.binder);
        names_into(arm.body, out);
      }
      break;
    case PK::Par: break;
  }
  if (p->a) names_into(p->a, out);
  if (p->b) names_into(p->b, out);
  for (auto& [l, q] : p->arms) names_into(q, out);
}

std::set<Name> all_names(const Process& p) {
  std::set<Name> s;
  names_into(p, s);
  return s;
}

// ---- substitution ------------------------------------------------------------

namespace {

// Generic capture-avoiding traversal: `m` maps names to values; `avoid` holds
// names that must not be captured (names of the substituted values).
struct Subst {
  std::map<Name, Value> m;
  std::set<Name> avoid;

  Name name_at_subject(const Name& n) const {
    auto it = m.find(n);
    if (it == m.end()) return n;
    if (!it->second.is_chan()) throw StuckSubst("variant value in subject position");
    return it->second.name;
  }

  Value val(const Value& v) const {
    if (v.is_chan()) {
      auto it = m.find(v.name);
      return it == m.end() ? v : it->second;
    }
    return Value::variant(v.label, val(*v.payload));
  }

  // Handles a binder: drops it from the map, renames it when it would capture.
  Subst enter(std::vector<Name>& binders, std::map<Name, Name>& renames, const Process& body) const {
    Subst inner = *this;
    for (auto& b : binders) inner.m.erase(b);
    if (inner.m.empty()) return inner;
    std::set<Name> fv = free_names(body);
    bool live = false;
    for (auto& [k, v] : inner.m)
      if (fv.count(k)) live = true;
    if (!live) {
      inner.m.clear();
      return inner;
    }
    for (auto& b : binders) {
      if (avoid.count(b)) {
        Name nb = fresh_name(b.base);
        renames[b] = nb;
        inner.m[b] = Value::chan(nb);
        b = nb;
      }
    }
    return inner;
  }

  Process apply(const Process& p) const {
    if (m.empty()) return p;
    switch (p->kind) {
      case PK::Nil: return p;
      case PK::Output: {
        std::vector<Value> vs;
        for (auto& v : p->vals) vs.push_back(val(v));
        return p_out(name_at_subject(p->x), vs, apply(p->a));
      }
      case PK::Input: {
        std::vector<Name> bs = p->binders;
        std::map<Name, Name> ren;
        Subst inner = enter(bs, ren, p->a);
        return p_in(name_at_subject(p->x), bs, inner.apply(p->a));
      }
      case PK::Select: return p_sel(name_at_subject(p->x), p->label, apply(p->a));
      case PK::Branch: {
        std::map<Label, Process> arms;
        for (auto& [l, q] : p->arms) arms[l] = apply(q);
        return p_bra(name_at_subject(p->x), arms);
      }
      case PK::Par: return p_par(apply(p->a), apply(p->b));
      case PK::ResPair: {
        std::vector<Name> bs{p->x, p->y};
        std::map<Name, Name> ren;
        Subst inner = enter(bs, ren, p->a);
        return p_respair(bs[0], bs[1], p->annot, inner.apply(p->a));
      }
      case PK::Res: {
        std::vector<Name> bs{p->x};
        std::map<Name, Name> ren;
        Subst inner = enter(bs, ren, p->a);
        return p_res(bs[0], p->annot, inner.apply(p->a));
      }
      case PK::Forward: return p_fwd(name_at_subject(p->x), name_at_subject(p->y));
      case PK::Case: {
        std::map<Label, CaseArm> arms;
        for (auto& [l, arm] : p->cases) {
          std::vector<Name> bs{arm.binder};
          std::map<Name, Name> ren;
          Subst inner = enter(bs, ren, arm.body);
          arms[l] = CaseArm{bs[0], inner.apply(arm.body)};
        }
        return p_case(val(p->scrut), arms);
      }
    }
    return p;
  }
};

}  // namespace

Process substitute(const Process& p, const Name& from, const Name& to) {
  if (from == to) return p;
  Subst s;
  s.m[from] = Value::chan(to);
  s.avoid.insert(to);
  return s.apply(p);
}

Process substitute_many(const Process& p, const std::map<Name, Name>& m) {
  Subst s;
  for (auto& [k, v] : m) {
    if (k == v) continue;
    s.m[k] = Value::chan(v);
    s.avoid.insert(v);
  }
  return s.apply(p);
}

Process substitute_value(const Process& p, const Name& from, const Value& v) {
  Subst s;
  s.m[from] = v;
  value_names(v, s.avoid);
  return s.apply(p);
}

// ---- renaming of binders --------------------------------------------------------

namespace {

struct Renamer {
  std::function<Name(const Name&)> make;
  std::map<Name, Name> env;

  Name look(const Name& n) const {
    auto it = env.find(n);
    return it == env.end() ? n : it->second;
  }
  Value val(const Value& v) const {
    if (v.is_chan()) return Value::chan(look(v.name));
    return Value::variant(v.label, val(*v.payload));
  }

  Process go(const Process& p) {
    switch (p->kind) {
      case PK::Nil: return p;
      case PK::Output: {
        std::vector<Value> vs;
        for (auto& v : p->vals) vs.push_back(val(v));
        Name x = look(p->x);
        return p_out(x, vs, go(p->a));
      }
      case PK::Input: {
        Name x = look(p->x);
        auto saved = env;
        std::vector<Name> bs;
        for (auto& b : p->binders) bs.push_back(env[b] = make(b));
        auto body = go(p->a);
        env = saved;
        return p_in(x, bs, body);
      }
      case PK::Select: {
        Name x = look(p->x);
        return p_sel(x, p->label, go(p->a));
      }
      case PK::Branch: {
        Name x = look(p->x);
        std::map<Label, Process> arms;
        for (auto& [l, q] : p->arms) arms[l] = go(q);
        return p_bra(x, arms);
      }
      case PK::Par: {
        auto l = go(p->a);
        return p_par(l, go(p->b));
      }
      case PK::ResPair: {
        auto saved = env;
        Name x = env[p->x] = make(p->x);
        Name y = env[p->y] = make(p->y);
        auto body = go(p->a);
        env = saved;
        return p_respair(x, y, p->annot, body);
      }
      case PK::Res: {
        auto saved = env;
        Name x = env[p->x] = make(p->x);
        auto body = go(p->a);
        env = saved;
        return p_res(x, p->annot, body);
      }
      case PK::Forward: return p_fwd(look(p->x), look(p->y));
      case PK::Case: {
        Value s = val(p->scrut);
        std::map<Label, CaseArm> arms;
        for (auto& [l, arm] : p->cases) {
          auto saved = env;
          Name b = env[arm.binder] = make(arm.binder);
          arms[l] = CaseArm{b, go(arm.body)};
          env = saved;
        }
        return p_case(s, arms);
      }
    }
    return p;
  }
};

constexpr std::uint64_t kCanonBase = 1ull << 40;

}  // namespace

Process alpha_canonical(const Process& p, bool keep_bases) {
  std::uint64_t next = 0;
  Renamer r;
  r.make = [&](const Name& n) { return Name{keep_bases ? n.base : std::string("v"), kCanonBase + ++next}; };
  return r.go(p);
}

Process rename_apart(const Process& p) {
  Renamer r;
  r.make = [](const Name& n) { return fresh_name(n.base); };
  return r.go(p);
}

// ---- keys ---------------------------------------------------------------------

static void value_key(const Value& v, std::string& s) {
  if (v.is_chan()) {
    s += debug_name(v.name);
  } else {
    s += v.label + "(";
    value_key(*v.payload, s);
    s += ")";
  }
}

static void key_into(const Process& p, std::string& s) {
  switch (p->kind) {
    case PK::Nil: s += "0"; return;
    case PK::Output:
      s += "o " + debug_name(p->x) + "(";
      for (auto& v : p->vals) {
        value_key(v, s);
        s += ",";
      }
      s += ").";
      key_into(p->a, s);
      return;
    case PK::Input:
      s += "i " + debug_name(p->x) + "(";
      for (auto& b : p->binders) s += debug_name(b) + ",";
      s += ").";
      key_into(p->a, s);
      return;
    case PK::Select:
      s += "s " + debug_name(p->x) + " " + p->label + ".";
      key_into(p->a, s);
      return;
    case PK::Branch:
      s += "b " + debug_name(p->x) + "{";
      for (auto& [l, q] : p->arms) {
        s += l + ":";
        key_into(q, s);
        s += ";";
      }
      s += "}";
      return;
    case PK::Par:
      s += "(";
      key_into(p->a, s);
      s += "|";
      key_into(p->b, s);
      s += ")";
      return;
    case PK::ResPair:
      s += "N(" + debug_name(p->x) + "," + debug_name(p->y) + ":" + (p->annot ? type_key(p->annot, true) : "-") + "){";
      key_into(p->a, s);
      s += "}";
      return;
    case PK::Res:
      s += "R(" + debug_name(p->x) + ":" + (p->annot ? type_key(p->annot, true) : "-") + "){";
      key_into(p->a, s);
      s += "}";
      return;
    case PK::Forward: s += "f " + debug_name(p->x) + " " + debug_name(p->y); return;
    case PK::Case:
      s += "c ";
      value_key(p->scrut, s);
      s += "{";
      for (auto& [l, arm] : p->cases) {
        s += l + "(" + debug_name(arm.binder) + "):";
        key_into(arm.body, s);
        s += ";";
      }
      s += "}";
      return;
  }
}

std::string proc_key(const Process& p) {
  std::string s;
  key_into(p, s);
  return s;
}

bool alpha_equal(const Process& a, const Process& b) { return proc_key(alpha_canonical(a)) == proc_key(alpha_canonical(b)); }

std::size_t proc_size(const Process& p) {
  std::size_t n = 1;
  if (p->a) n += proc_size(p->a);
  if (p->b) n += proc_size(p->b);
  for (auto& [l, q] : p->arms) n += proc_size(q);
  for (auto& [l, arm] : p->cases) n += proc_size(arm.body);
  return n;
}

}  // namespace spi
