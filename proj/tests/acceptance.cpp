// Acceptance suite: one PASS/FAIL line per criterion. Argument: corpus directory.
#include <chrono>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sessionpi/classify.hpp"
#include "sessionpi/corpus.hpp"
#include "sessionpi/encodings.hpp"
#include "sessionpi/ll_typing.hpp"
#include "sessionpi/random.hpp"
#include "sessionpi/rewrite.hpp"
#include "sessionpi/rewrite_vd.hpp"
#include "sessionpi/semantics.hpp"
#include "sessionpi/session_typing.hpp"
#include "sessionpi/surface.hpp"
#include "sessionpi/usage.hpp"

using namespace spi;

namespace {

struct Outcome {
  bool ok = true;
  std::size_t failures = 0;
  std::vector<std::string> notes;
  void fail(const std::string& s) {
    ok = false;
    if (++failures <= 3) notes.push_back(s.size() > 240 ? s.substr(0, 240) + "..." : s);
  }
};

Name nm(const std::string& s) { return Name{s, 0}; }
Process P(const std::string& s) { return parse_process(s); }
SessionType T(const std::string& s) { return parse_type(s); }
SessionCtx G(const std::string& s) { return s.empty() ? SessionCtx{} : parse_context(s); }

bool has(const ProcEnum& e, const Process& q) {
  for (auto& p : e.items)
    if (congruent(p, q)) return true;
  return false;
}

std::vector<CorpusEntry> corpus;

const char* kP2 = "new(a1,b1:?end.end){ new(a2,b2:!end.end){ in a1(x).out a2(x).0 | out b1(n).in b2(z).0 } }";
const char* kVdCtx = "a1:?(?end.end).end, a2:!(?end.end).end, b2:?(?end.end).end, b1:!(?end.end).end, n:end";
const char* kVd =
    "new(a0,b0:!end.end){ out a0(n).in a1(u).out a2(u).0 | in b0(v).( in b2(y).in y(x).0 | "
    "new(w,z:?end.end){ out b1(w).out z(n).0 } ) }";

Outcome hierarchy() {
  Outcome o;
  for (int n = 1; n <= 4; ++n) {
    Process w = gen_witness(n);
    if (!in_K(witness_ctx(), w, n + 1)) o.fail("witness " + std::to_string(n) + " rejected at " + std::to_string(n + 1));
    if (in_K(witness_ctx(), w, n)) o.fail("witness " + std::to_string(n) + " accepted at " + std::to_string(n));
  }
  return o;
}

Outcome l_equals_k1() {
  Outcome o;
  std::size_t seen = 0;
  for (auto& e : corpus) {
    if (e.dialect != Dialect::Session || !check_st(e.ctx, e.process).ok) continue;
    ++seen;
    if (in_L(e.ctx, e.process) != in_K(e.ctx, e.process, 1)) o.fail(e.name);
  }
  if (seen < 30) o.fail("only " + std::to_string(seen) + " typed session processes");
  o.notes.insert(o.notes.begin(), std::to_string(seen) + " processes");
  return o;
}

Outcome oracle_soundness() {
  Outcome o;
  for (auto& e : corpus) {
    if (!uncomposable(e.ctx)) continue;
    bool typed = false;
    Calculus c = Calculus::Session;
    if (e.dialect == Dialect::Session) {
      typed = check_st(e.ctx, e.process).ok &&
              (in_L(e.ctx, e.process) || min_sharing_degree(e.ctx, e.process) != kInfDegree);
    } else if (e.dialect == Dialect::LL) {
      c = Calculus::LL;
      typed = check_ll(enc_ctx_ll(e.ctx), e.process).ok;
    } else {
      c = Calculus::Poly;
      typed = check_usage(e.ctx, e.process, kInfDegree).ok;
    }
    if (typed && !oracle_deadlock_free(c, e.process).free) o.fail(e.name + " typed but deadlocked");
  }
  Process stuck = P("new(x,y:!end.end){ new(w,z:!end.end){ out x(n).out w(n).0 | in z(t).in y(s).0 } }");
  SessionCtx g = G("n:end");
  if (in_L(g, stuck)) o.fail("stuck process in L");
  if (min_sharing_degree(g, stuck) != kInfDegree) o.fail("stuck process in some K_n");
  Deadlock d = oracle_deadlock_free(Calculus::Session, stuck);
  if (d.free) o.fail("stuck process reported free");
  else if (!congruent(d.witness, stuck)) o.fail("stuck witness differs: " + pretty(d.witness));
  return o;
}

Outcome dual_reliability() {
  Outcome o;
  Rng rng(45);
  std::size_t cases = 0;
  for (int k = 0; k < 500; ++k) {
    SessionType t = random_type(rng, 4);
    for (int i = 0; i <= 3; ++i)
      for (int j = i; j <= 3; ++j) {
        ++cases;
        Usage u = u_par(enc_type_u(t, i, j)->usage, enc_type_u(dual(t), i, j)->usage);
        if (!rel(u)) o.fail(pretty(t) + " at (" + std::to_string(i) + "," + std::to_string(j) + ")");
      }
  }
  o.notes.insert(o.notes.begin(), std::to_string(cases) + " cases");
  return o;
}

Outcome rewriting_types() {
  Outcome o;
  std::size_t members = 0;
  for (auto& e : corpus) {
    // rewriting is defined on typed members of some K_n
    if (e.dialect != Dialect::Session || !check_st(e.ctx, e.process).ok) continue;
    if (min_sharing_degree(e.ctx, e.process) == kInfDegree) continue;
    LLCtx d = enc_ctx_ll(e.ctx);
    for (bool refined : {false, true}) {
      ProcEnum r;
      try {
        r = refined ? rewrite2(e.ctx, e.process, 256) : rewrite1(e.ctx, e.process, 256);
      } catch (const std::exception& ex) {
        o.fail(e.name + (refined ? " rewrite2: " : " rewrite1: ") + ex.what());
        continue;
      }
      for (auto& q : r.items) {
        ++members;
        if (!check_ll(d, q).ok) o.fail(e.name + (refined ? " rewrite2 member: " : " rewrite1 member: ") + pretty(q));
      }
    }
  }
  Rng rng(54);
  for (int k = 0; k < 200; ++k) {
    SessionType t = random_type(rng, 3);
    Name x = nm("x");
    LLCtx dx{{x, enc_type_ll(t)}};
    for (auto& p : char_proc(t, x).items)
      if (!check_ll(dx, p).ok) o.fail("char_proc " + pretty(t));
    SessionCtx g = random_ctx(rng, 1 + k % 3, 3);
    for (auto& p : char_ctx(g).items)
      if (!check_ll(enc_ctx_ll(g), p).ok) o.fail("char_ctx " + pretty(g));
    // the hole uses the duals of what the catalyzer provides
    SessionCtx dg;
    for (auto& [n, s] : g) dg[n] = dual(s);
    Process hole = char_ctx(dg).canonical();
    for (auto& c : catalyzers(g, 16))
      if (!check_ll(LLCtx{}, plug(c, hole)).ok) o.fail("catalyzer " + pretty(g));
  }
  o.notes.insert(o.notes.begin(), std::to_string(members) + " corpus members");
  return o;
}

Outcome golden_p2() {
  Outcome o;
  ProcEnum r = rewrite1(G("n:end"), P(kP2));
  std::vector<Process> want{
      P("nu a1:!end.end{ nu z:end{ out a1(z).(0 | 0) } | nu a2:?end.end{ in a2(z).(0 | 0) | "
        "in a1(x).nu z:end{ out a2(z).(fwd x z | 0) } } }"),
      P("nu b1:?end.end{ in b1(z).(0 | 0) | nu b2:!end.end{ nu z:end{ out b2(z).(0 | 0) } | "
        "nu u:end{ out b1(u).(fwd n u | in b2(z).0) } } }")};
  if (r.size() != want.size()) o.fail("size " + std::to_string(r.size()));
  for (auto& w : want)
    if (!has(r, w)) o.fail("missing " + pretty(w));
  return o;
}

Outcome correspondence() {
  Outcome o;
  Rewriter r2 = [](const SessionCtx& g, const Process& p, std::size_t b) { return rewrite2(g, p, b); };
  std::size_t procs = 0;
  for (auto& e : corpus) {
    if (e.dialect != Dialect::Session || !check_st(e.ctx, e.process).ok) continue;
    if (min_sharing_degree(e.ctx, e.process) == kInfDegree || reduce_session(e.process).empty()) continue;
    ++procs;
    for (Rewriter rw : {Rewriter(nullptr), r2}) {
      CorrespondenceReport rep = check_correspondence(e.ctx, e.process, 64, rw);
      std::string tag = e.name + (rw ? " (refined)" : "");
      if (!rep.complete) o.fail(tag + ": budget exhausted");
      for (auto& f : rep.failures) o.fail(tag + ": " + f);
    }
  }
  o.notes.insert(o.notes.begin(), std::to_string(procs) + " processes");
  return o;
}

Outcome value_dependencies() {
  Outcome o;
  SessionCtx g = G(kVdCtx);
  StdResult s = check_std(g, P(kVd));
  if (!s.verdict.ok) {
    o.fail("check_std rejects: " + s.verdict.reason);
    return o;
  }
  auto t = [](bool in, const char* a, const char* x, int n) { return Triple{in, nm(a), nm(x), n, nullptr}; };
  std::vector<Triple> want{t(false, "a0", "n", 0), t(true, "a1", "u", 1), t(false, "a2", "u", 2),
                           t(true, "b0", "v", 0),  t(true, "b2", "y", 1), t(true, "y", "x", 2),
                           t(false, "b1", "w", 1), t(false, "z", "n", 2)};
  bool same = s.psi.size() == want.size();
  for (auto& w : want) {
    bool found = false;
    for (auto& x : s.psi)
      found = found || (x.input == w.input && x.subj.base == w.subj.base && x.obj.base == w.obj.base && x.pos == w.pos);
    same = same && found;
  }
  if (!same) o.fail("psi = " + to_string(s.psi));

  auto d = vdeps(s.psi);
  if (d.size() != 1 || !(d[0] == VDep{nm("a1"), 1, nm("a2"), 2, nullptr})) o.fail("vdeps wrong");

  const char* g1 = "in a1(y).nu w:!end.end{ out c(w).(fwd y w | 0) }";
  const char* g2 = "in c(y).nu w:!end.end{ out a2(w).(fwd y w | 0) }";
  std::string q = std::string("nu c:!(?end.end).end{ ") + g1 + " | " + g2 + " } | " +
                  "nu b0:!end.end{ nu r:end{ out b0(r).(0 | 0) } | in b0(v).( in b2(y).in y(x).0 | "
                  "nu s:!end.end{ out b1(s).(nu t:end{ out s(t).(0 | 0) } | 0) } ) }";
  if (!has(rewrite2(g, P(kVd)), P(q))) o.fail("rewrite2 lacks the bridged member");

  // a1 receives m from the environment, a2 must hand the same m back
  SessionCtx pair = G("a1:?^1 (?end.end).end, a2:!^2 (?end.end).end");
  DepCtx psi{{true, nm("a1"), nm("u"), 1, T("?end.end")}, {false, nm("a2"), nm("u"), 2, T("?end.end")}};
  Process bridge = char_ctx_v(pair, psi).canonical();
  Process env = P("out a1(m).0 | in a2(r).out obs(r).0");
  StateGraph sg = explore(Calculus::LL, p_par(bridge, env));
  std::size_t finals = 0, good = 0;
  for (std::size_t i = 0; i < sg.states.size(); ++i) {
    if (!sg.succ[i].empty()) continue;
    ++finals;
    for (auto& c : flatten(sg.states[i]).comps)
      if (c->kind == PK::Output && c->x == nm("obs") && c->vals[0].name == nm("m")) ++good;
  }
  if (!sg.complete || finals == 0 || good != finals) o.fail("value on a1 not emitted on a2");
  return o;
}

Outcome metatheory() {
  Outcome o;
  std::size_t states = 0;
  for (auto& e : corpus) {
    const SessionCtx& g = e.ctx;
    if (e.dialect == Dialect::Session) {
      if (!check_st(g, e.process).ok) continue;
      StateGraph sg = explore(Calculus::Session, e.process);
      if (!sg.complete) o.fail(e.name + ": session state space incomplete");
      long long deg = min_sharing_degree(g, e.process);
      for (auto& s : sg.states) {
        ++states;
        if (!check_st(g, s).ok) o.fail(e.name + ": ST lost at " + pretty(s));
        if (!check_st(g, normalize(s)).ok) o.fail(e.name + ": ST lost under congruence at " + pretty(s));
        if (deg != kInfDegree) {
          Process enc = enc_proc(s, &g);
          if (check_usage(g, enc, deg).ok && !check_usage(g, normalize(enc), deg).ok)
            o.fail(e.name + ": usage lost under normalization at " + pretty(s));
        }
      }
      if (in_L(g, e.process)) {
        LLCtx d = enc_ctx_ll(g);
        StateGraph lg = explore(Calculus::LL, chr(e.process, &g));
        if (!lg.complete) o.fail(e.name + ": LL state space incomplete");
        for (auto& s : lg.states) {
          ++states;
          if (!check_ll(d, s).ok) o.fail(e.name + ": LL lost at " + pretty(s));
        }
      }
    } else if (e.dialect == Dialect::LL) {
      LLCtx d = enc_ctx_ll(g);
      if (!check_ll(d, e.process).ok) continue;
      StateGraph lg = explore(Calculus::LL, e.process);
      for (auto& s : lg.states) {
        ++states;
        if (!check_ll(d, s).ok) o.fail(e.name + ": LL lost at " + pretty(s));
      }
    } else {
      UsageVerdict u = check_usage(g, e.process, kInfDegree);
      if (!u.ok) continue;
      StateGraph pg = explore(Calculus::Poly, e.process);
      for (auto& s : pg.states) {
        ++states;
        if (check_usage(g, s, u.degree).ok && !check_usage(g, normalize(s), u.degree).ok)
          o.fail(e.name + ": usage lost under normalization at " + pretty(s));
      }
    }
  }
  o.notes.insert(o.notes.begin(), std::to_string(states) + " states");
  return o;
}

Outcome round_trip() {
  Outcome o;
  for (auto& e : corpus)
    if (!alpha_equal(parse_process(pretty(e.process), e.dialect), e.process)) o.fail(e.name);
  Rng rng(10);
  for (int k = 0; k < 1000; ++k) {
    Process p = random_term(rng, 4);
    std::string s = pretty(p);
    try {
      if (!alpha_equal(parse_process(s), p)) o.fail(s);
    } catch (const std::exception& ex) {
      o.fail(s + ": " + ex.what());
    }
  }
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance CORPUS_DIR\n";
    return 2;
  }
  corpus = load_corpus(argv[1]);
  std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"hierarchy witnesses", hierarchy},
      {"L equals K1 on the corpus", l_equals_k1},
      {"oracle soundness", oracle_soundness},
      {"reliability of dual encodings", dual_reliability},
      {"rewriting preserves typing", rewriting_types},
      {"golden rewriting of the forwarding pair", golden_p2},
      {"operational correspondence", correspondence},
      {"value dependencies", value_dependencies},
      {"metatheory on reachable states", metatheory},
      {"parse and pretty round trip", round_trip},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& ex) {
      o.fail(std::string("exception: ") + ex.what());
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::ostringstream line;
    line << (o.ok ? "PASS" : "FAIL") << " " << (i + 1) << " " << criteria[i].first;
    line.precision(2);
    line << std::fixed << " (" << secs << "s)";
    if (o.failures) line << "; " << o.failures << " violations";
    for (auto& n : o.notes) line << "; " << n;
    std::cout << line.str() << std::endl;
    if (!o.ok) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
