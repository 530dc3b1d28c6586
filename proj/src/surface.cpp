#include "sessionpi/surface.hpp"

#include <cctype>
#include <functional>
#include <set>
#include <sstream>

namespace spi {

namespace {

struct Tok {
  enum Kind { Ident, Num, Sym, End } kind = End;
  std::string text;
  int line = 1, col = 1;
};

std::vector<Tok> lex(const std::string& s) {
  std::vector<Tok> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto adv = [&](std::size_t n = 1) {
    for (std::size_t k = 0; k < n && i < s.size(); ++k, ++i) {
      if (s[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      adv();
      continue;
    }
    if (c == '#') {
      while (i < s.size() && s[i] != '\n') adv();
      continue;
    }
    Tok t;
    t.line = line;
    t.col = col;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
      t.kind = Tok::Ident;
      t.text = s.substr(i, j - i);
      adv(j - i);
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      t.kind = Tok::Num;
      t.text = s.substr(i, j - i);
      adv(j - i);
    } else if (std::string("(){},.:;|!?^+&=").find(c) != std::string::npos) {
      t.kind = Tok::Sym;
      t.text = std::string(1, c);
      adv();
    } else {
      throw ParseError("line " + std::to_string(line) + ":" + std::to_string(col) + ": unexpected character '" +
                       std::string(1, c) + "'");
    }
    out.push_back(t);
  }
  Tok e;
  e.line = line;
  e.col = col;
  out.push_back(e);
  return out;
}

const std::set<std::string> kKeywords = {"out", "in", "sel", "bra", "new", "nu", "fwd", "case",
                                         "end", "process", "type", "context"};

class Parser {
 public:
  Parser(std::vector<Tok> toks, Dialect d) : toks_(std::move(toks)), dialect_(d) {}

  Program program() {
    Program prog;
    if (peek_ident("process") || peek_ident("type") || peek_ident("context")) {
      std::set<std::string> declared;
      while (!at_end()) {
        std::string kw = ident();
        std::string nm = ident();
        if (!declared.insert(nm).second) fail("duplicate declaration '" + nm + "'");
        expect("=");
        if (kw == "process") {
          prog.processes.emplace_back(nm, process());
        } else if (kw == "type") {
          auto t = type();
          aliases_[nm] = t;
          prog.types.emplace_back(nm, t);
        } else if (kw == "context") {
          prog.contexts.emplace_back(nm, context());
        } else {
          fail("expected declaration keyword, got '" + kw + "'");
        }
        expect(";");
      }
    } else {
      prog.processes.emplace_back("main", process());
      if (peek_sym(";")) next();
      if (!at_end()) fail("trailing input");
    }
    return prog;
  }

  Process process() {
    Process p = prefix_proc();
    std::vector<Process> parts{p};
    while (peek_sym("|")) {
      next();
      parts.push_back(prefix_proc());
    }
    if (parts.size() == 1) return p;
    // left-nested, as written
    Process acc = parts[0];
    for (std::size_t i = 1; i < parts.size(); ++i) acc = p_par(acc, parts[i]);
    return acc;
  }

  SessionType type() {
    if (peek_sym("(")) {
      next();
      auto t = type();
      expect(")");
      return t;
    }
    if (peek_ident("end")) {
      next();
      return t_end();
    }
    if (peek_sym("!") || peek_sym("?")) {
      bool out = next().text == "!";
      std::optional<int> pos;
      if (peek_sym("^")) {
        next();
        pos = std::stoi(expect_kind(Tok::Num).text);
      }
      auto payload = type();
      expect(".");
      auto cont = type();
      return out ? t_out(payload, cont, pos) : t_in(payload, cont, pos);
    }
    if (peek_sym("+") || peek_sym("&")) {
      bool sel = next().text == "+";
      expect("{");
      std::map<Label, SessionType> arms;
      while (!peek_sym("}")) {
        std::string l = ident();
        expect(":");
        if (arms.count(l)) fail("duplicate label '" + l + "'");
        arms[l] = type();
        if (!peek_sym("}")) expect(",");
      }
      next();
      if (arms.empty()) fail("empty choice type");
      return sel ? t_select(arms) : t_branch(arms);
    }
    if (cur().kind == Tok::Ident) {
      auto it = aliases_.find(cur().text);
      if (it == aliases_.end()) fail("unknown type '" + cur().text + "'");
      next();
      return it->second;
    }
    fail("expected a type");
  }

  SessionCtx context() {
    SessionCtx c;
    if (at_end() || peek_sym(";")) return c;
    while (true) {
      Name n{ident(), 0};
      expect(":");
      if (c.count(n)) fail("duplicate context entry '" + n.base + "'");
      c[n] = type();
      if (!peek_sym(",")) break;
      next();
    }
    return c;
  }

  bool at_end() const { return cur().kind == Tok::End; }
  [[noreturn]] void fail(const std::string& m) const {
    throw ParseError("line " + std::to_string(cur().line) + ":" + std::to_string(cur().col) + ": " + m);
  }

 private:
  std::vector<Tok> toks_;
  std::size_t pos_ = 0;
  Dialect dialect_;
  std::map<std::string, SessionType> aliases_;
  std::vector<std::pair<std::string, Name>> scope_;

  const Tok& cur() const { return toks_[pos_]; }
  Tok next() { return toks_[pos_++]; }
  bool peek_sym(const char* s) const { return cur().kind == Tok::Sym && cur().text == s; }
  bool peek_ident(const char* s) const { return cur().kind == Tok::Ident && cur().text == s; }
  void expect(const char* s) {
    if (!peek_sym(s)) fail(std::string("expected '") + s + "'" + (at_end() ? " before end of input" : ", got '" + cur().text + "'"));
    next();
  }
  Tok expect_kind(Tok::Kind k) {
    if (cur().kind != k) fail("unexpected token '" + cur().text + "'");
    return next();
  }
  std::string ident() {
    if (cur().kind != Tok::Ident) fail(at_end() ? "unexpected end of input" : "expected identifier, got '" + cur().text + "'");
    return next().text;
  }
  std::string name_ident() {
    std::string s = ident();
    if (kKeywords.count(s)) fail("keyword '" + s + "' used as a name");
    return s;
  }

  Name use(const std::string& id) const {
    for (auto it = scope_.rbegin(); it != scope_.rend(); ++it)
      if (it->first == id) return it->second;
    return Name{id, 0};
  }
  Name bind(const std::string& id) {
    Name n = fresh_name(id);
    scope_.emplace_back(id, n);
    return n;
  }
  void unbind(std::size_t k) { scope_.resize(scope_.size() - k); }

  void need(bool ok, const char* what) {
    if (!ok) fail(std::string(what) + " is not part of this dialect");
  }

  Value value() {
    std::string id = name_ident();
    if (peek_sym("(")) {
      need(dialect_ == Dialect::Poly || dialect_ == Dialect::Any, "variant value");
      next();
      Value inner = value();
      expect(")");
      return Value::variant(id, inner);
    }
    return Value::chan(use(id));
  }

  Process prefix_proc() {
    const Tok& t = cur();
    if (t.kind == Tok::Num) {
      if (t.text != "0") fail("unexpected number '" + t.text + "'");
      next();
      return p_nil();
    }
    if (peek_sym("(")) {
      next();
      auto p = process();
      expect(")");
      return p;
    }
    if (t.kind != Tok::Ident) fail(at_end() ? "unexpected end of input" : "unexpected token '" + t.text + "'");
    std::string kw = t.text;
    if (kw == "out") {
      next();
      Name x = use(name_ident());
      expect("(");
      std::vector<Value> vals;
      while (!peek_sym(")")) {
        vals.push_back(value());
        if (!peek_sym(")")) expect(",");
      }
      next();
      if (dialect_ == Dialect::Session || dialect_ == Dialect::LL)
        if (vals.size() != 1) fail("output must carry exactly one name in this dialect");
      expect(".");
      return p_out(x, vals, prefix_proc());
    }
    if (kw == "in") {
      next();
      Name x = use(name_ident());
      expect("(");
      std::vector<std::string> ids;
      while (!peek_sym(")")) {
        ids.push_back(name_ident());
        if (!peek_sym(")")) expect(",");
      }
      next();
      if (dialect_ == Dialect::Session || dialect_ == Dialect::LL)
        if (ids.size() != 1) fail("input must bind exactly one name in this dialect");
      expect(".");
      std::vector<Name> bs;
      for (auto& id : ids) bs.push_back(bind(id));
      auto body = prefix_proc();
      unbind(bs.size());
      return p_in(x, bs, body);
    }
    if (kw == "sel") {
      need(dialect_ != Dialect::Poly, "selection");
      next();
      Name x = use(name_ident());
      std::string l = ident();
      expect(".");
      return p_sel(x, l, prefix_proc());
    }
    if (kw == "bra") {
      need(dialect_ != Dialect::Poly, "branching");
      next();
      Name x = use(name_ident());
      expect("{");
      std::map<Label, Process> arms;
      while (!peek_sym("}")) {
        std::string l = ident();
        expect(":");
        if (arms.count(l)) fail("duplicate label '" + l + "'");
        arms[l] = process();
        if (!peek_sym("}")) {
          if (peek_sym(",") || peek_sym(";"))
            next();
          else
            fail("expected ',' or '}' in branch");
        }
      }
      next();
      if (arms.empty()) fail("empty branch");
      return p_bra(x, arms);
    }
    if (kw == "new") {
      need(dialect_ == Dialect::Session || dialect_ == Dialect::Any, "double restriction");
      next();
      expect("(");
      std::string xi = name_ident();
      expect(",");
      std::string yi = name_ident();
      expect(":");
      auto annot = type();
      expect(")");
      if (xi == yi) fail("double restriction binds the same name twice");
      expect("{");
      Name x = bind(xi), y = bind(yi);
      auto body = process();
      unbind(2);
      expect("}");
      return p_respair(x, y, annot, body);
    }
    if (kw == "nu") {
      need(dialect_ != Dialect::Session, "single restriction");
      next();
      std::string xi = name_ident();
      SessionType annot;
      if (peek_sym(":")) {
        next();
        annot = type();
      }
      expect("{");
      Name x = bind(xi);
      auto body = process();
      unbind(1);
      expect("}");
      return p_res(x, annot, body);
    }
    if (kw == "fwd") {
      need(dialect_ == Dialect::LL || dialect_ == Dialect::Any, "forwarder");
      next();
      Name x = use(name_ident());
      Name y = use(name_ident());
      return p_fwd(x, y);
    }
    if (kw == "case") {
      need(dialect_ == Dialect::Poly || dialect_ == Dialect::Any, "case");
      next();
      Value v = value();
      expect("{");
      std::map<Label, CaseArm> arms;
      while (!peek_sym("}")) {
        std::string l = ident();
        expect("(");
        std::string b = name_ident();
        expect(")");
        expect(":");
        if (arms.count(l)) fail("duplicate label '" + l + "'");
        Name bn = bind(b);
        auto body = process();
        unbind(1);
        arms[l] = CaseArm{bn, body};
        if (!peek_sym("}")) {
          if (peek_sym(",") || peek_sym(";"))
            next();
          else
            fail("expected ',' or '}' in case");
        }
      }
      next();
      if (arms.empty()) fail("empty case");
      return p_case(v, arms);
    }
    fail("unexpected token '" + kw + "'");
  }
};

}  // namespace

Program parse_program(const std::string& text, Dialect d) {
  Parser p(lex(text), d);
  return p.program();
}

Process parse_process(const std::string& text, Dialect d) {
  Parser p(lex(text), d);
  auto prog = p.program();
  if (prog.processes.size() != 1) throw ParseError("expected exactly one process");
  return prog.processes.front().second;
}

SessionType parse_type(const std::string& text) {
  Parser p(lex(text), Dialect::Any);
  auto t = p.type();
  if (!p.at_end()) p.fail("trailing input after type");
  return t;
}

SessionCtx parse_context(const std::string& text) {
  Parser p(lex(text), Dialect::Any);
  auto c = p.context();
  if (!p.at_end()) p.fail("trailing input after context");
  return c;
}

void check_dialect(const Process& p, Dialect d) {
  if (d == Dialect::Any) return;
  auto bad = [](const std::string& w) { throw ParseError(w + " is not part of this dialect"); };
  switch (p->kind) {
    case PK::Output:
      if (d != Dialect::Poly && p->vals.size() != 1) bad("polyadic output");
      for (auto& v : p->vals)
        if (!v.is_chan() && d != Dialect::Poly) bad("variant value");
      break;
    case PK::Input:
      if (d != Dialect::Poly && p->binders.size() != 1) bad("polyadic input");
      break;
    case PK::Select:
    case PK::Branch:
      if (d == Dialect::Poly) bad("selection/branching");
      break;
    case PK::ResPair:
      if (d != Dialect::Session) bad("double restriction");
      break;
    case PK::Res:
      if (d == Dialect::Session) bad("single restriction");
      break;
    case PK::Forward:
      if (d != Dialect::LL) bad("forwarder");
      break;
    case PK::Case:
      if (d != Dialect::Poly) bad("case");
      for (auto& [l, arm] : p->cases) check_dialect(arm.body, d);
      break;
    default: break;
  }
  if (p->a) check_dialect(p->a, d);
  if (p->b) check_dialect(p->b, d);
  for (auto& [l, q] : p->arms) check_dialect(q, d);
}

// ---- printing ------------------------------------------------------------------

std::string pretty(const SessionType& t) {
  using K = SessionTypeNode::Kind;
  switch (t->kind) {
    case K::End: return "end";
    case K::In:
    case K::Out: {
      std::string s = t->kind == K::In ? "?" : "!";
      if (t->pos) s += "^" + std::to_string(*t->pos) + " ";
      std::string pl = pretty(t->payload);
      if (t->payload->kind == K::In || t->payload->kind == K::Out) pl = "(" + pl + ")";
      return s + pl + "." + pretty(t->cont);
    }
    default: {
      std::string s = t->kind == K::Branch ? "&{" : "+{";
      bool first = true;
      for (auto& [l, a] : t->arms) {
        if (!first) s += ", ";
        first = false;
        s += l + ":" + pretty(a);
      }
      return s + "}";
    }
  }
}

std::string pretty(const LLType& a) {
  using K = LLTypeNode::Kind;
  auto wrap = [](const LLType& b) {
    std::string s = pretty(b);
    return (b->kind == K::Tensor || b->kind == K::Parr) ? "(" + s + ")" : s;
  };
  switch (a->kind) {
    case K::Bullet: return "•";
    case K::Tensor: return wrap(a->left) + " ⊗ " + wrap(a->right);
    case K::Parr: return wrap(a->left) + " ⅋ " + wrap(a->right);
    default: {
      std::string s = a->kind == K::With ? "&{" : "⊕{";
      bool first = true;
      for (auto& [l, b] : a->arms) {
        if (!first) s += ", ";
        first = false;
        s += l + ":" + pretty(b);
      }
      return s + "}";
    }
  }
}

std::string pretty(const SessionCtx& c) {
  std::string s;
  for (auto& [n, t] : c) {
    if (!s.empty()) s += ", ";
    s += debug_name(n) + ":" + pretty(t);
  }
  return s;
}

std::string pretty(const LLCtx& c) {
  std::string s;
  for (auto& [n, t] : c) {
    if (!s.empty()) s += ", ";
    s += debug_name(n) + ":" + pretty(t);
  }
  return s;
}

namespace {

struct Printer {
  std::map<Name, std::string> disp;

  void assign(const Process& p) {
    std::set<Name> fv = free_names(p);
    std::set<std::string> taken;
    for (auto& n : fv) {
      std::string d = n.uid == 0 ? n.base : n.base + "_" + std::to_string(n.uid);
      disp[n] = d;
      taken.insert(d);
    }
    // binders in traversal order
    std::vector<Name> order;
    std::set<Name> seen(fv.begin(), fv.end());
    std::function<void(const Process&)> walk = [&](const Process& q) {
      auto add = [&](const Name& n) {
        if (seen.insert(n).second) order.push_back(n);
      };
      switch (q->kind) {
        case PK::Input:
          for (auto& b : q->binders) add(b);
          break;
        case PK::ResPair:
          add(q->x);
          add(q->y);
          break;
        case PK::Res: add(q->x); break;
        case PK::Case:
          for (auto& [l, arm] : q->cases) {
            add(arm.binder);
            walk(arm.body);
          }
          break;
        default: break;
      }
      if (q->a) walk(q->a);
      if (q->b) walk(q->b);
      for (auto& [l, r] : q->arms) walk(r);
    };
    walk(p);
    std::map<std::string, int> count;
    for (auto& n : order) count[n.base]++;
    for (auto& n : fv) count[n.base]++;
    for (auto& n : order) {
      std::string d = n.base;
      if (count[n.base] > 1 || taken.count(d) || kKeywords.count(d)) {
        for (int k = 1;; ++k) {
          d = n.base + "_" + std::to_string(k);
          if (!taken.count(d)) break;
        }
      }
      taken.insert(d);
      disp[n] = d;
    }
  }

  std::string nm(const Name& n) const {
    auto it = disp.find(n);
    return it == disp.end() ? debug_name(n) : it->second;
  }

  std::string val(const Value& v) const {
    if (v.is_chan()) return nm(v.name);
    return v.label + "(" + val(*v.payload) + ")";
  }

  // prefix-level rendering; parallel compositions get parenthesised
  std::string atom(const Process& p) const {
    if (p->kind == PK::Par) return "(" + proc(p) + ")";
    return proc(p);
  }

  std::string proc(const Process& p) const {
    switch (p->kind) {
      case PK::Nil: return "0";
      case PK::Output: {
        std::string s = "out " + nm(p->x) + "(";
        for (std::size_t i = 0; i < p->vals.size(); ++i) s += (i ? ", " : "") + val(p->vals[i]);
        return s + ")." + atom(p->a);
      }
      case PK::Input: {
        std::string s = "in " + nm(p->x) + "(";
        for (std::size_t i = 0; i < p->binders.size(); ++i) s += (i ? ", " : "") + nm(p->binders[i]);
        return s + ")." + atom(p->a);
      }
      case PK::Select: return "sel " + nm(p->x) + " " + p->label + "." + atom(p->a);
      case PK::Branch: {
        std::string s = "bra " + nm(p->x) + " {";
        bool first = true;
        for (auto& [l, q] : p->arms) {
          s += (first ? " " : ", ") + l + ": " + proc(q);
          first = false;
        }
        return s + " }";
      }
      case PK::Par: {
        // the right operand is parenthesised when it is itself a parallel
        // composition so that the tree shape survives a round trip
        std::string r = p->b->kind == PK::Par ? "(" + proc(p->b) + ")" : proc(p->b);
        return proc(p->a) + " | " + r;
      }
      case PK::ResPair:
        return "new(" + nm(p->x) + ", " + nm(p->y) + ":" + pretty(p->annot ? p->annot : t_end()) + "){ " + proc(p->a) +
               " }";
      case PK::Res: {
        std::string s = "nu " + nm(p->x);
        if (p->annot) s += ":" + pretty(p->annot);
        return s + "{ " + proc(p->a) + " }";
      }
      case PK::Forward: return "fwd " + nm(p->x) + " " + nm(p->y);
      case PK::Case: {
        std::string s = "case " + val(p->scrut) + " {";
        bool first = true;
        for (auto& [l, arm] : p->cases) {
          s += (first ? " " : ", ") + l + "(" + nm(arm.binder) + "): " + proc(arm.body);
          first = false;
        }
        return s + " }";
      }
    }
    return "?";
  }
};

}  // namespace

std::string pretty(const Process& p) {
  Printer pr;
  pr.assign(p);
  return pr.proc(p);
}

}  // namespace spi
