// sessionctl: command-line front end.
//
//   sessionctl check FILE [--system st|ll|usage] [--n K]
//   sessionctl classify FILE [--max-n K]
//   sessionctl rewrite FILE [--vd] [--all N]
//   sessionctl explore FILE [--budget B] [--dot OUT]
//   sessionctl encode FILE --to poly|ll
//   sessionctl deps FILE
//   sessionctl corpus DIR
//
// Shared: --ctx "x:T, ..", --dialect session|ll|poly, --json.
// Exit: 0 accept/free, 1 reject/deadlocked, 2 usage or input error.
#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "sessionpi/classify.hpp"
#include "sessionpi/corpus.hpp"
#include "sessionpi/encodings.hpp"
#include "sessionpi/rewrite.hpp"
#include "sessionpi/rewrite_vd.hpp"
#include "sessionpi/surface.hpp"

using namespace spi;
using json = nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Opts {
  std::string file;
  std::string ctx;
  bool ctx_given = false;
  std::string dialect;
  bool json = false;
};

struct Input {
  Process p;
  SessionCtx g;
  Dialect d = Dialect::Session;
};

Dialect dialect_of(const std::string& s) {
  if (s == "session") return Dialect::Session;
  if (s == "ll") return Dialect::LL;
  if (s == "poly") return Dialect::Poly;
  throw CLI::ValidationError("--dialect", "expected session, ll or poly");
}

// Context precedence: --ctx, then the sidecar, then the source.
Input load(const Opts& o) {
  Input in;
  std::string text;
  Expectations side;
  if (o.file == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    text = ss.str();
  } else {
    text = read_file(o.file);
    auto sp = std::filesystem::path(o.file).replace_extension(".expect");
    if (std::filesystem::exists(sp)) side = parse_expect(read_file(sp.string()));
  }
  if (!o.dialect.empty()) in.d = dialect_of(o.dialect);
  else if (side.count("dialect")) in.d = dialect_of(side["dialect"]);
  Program prog = parse_program(text, in.d);
  in.p = main_process(prog);
  if (o.ctx_given) in.g = o.ctx.empty() ? SessionCtx{} : parse_context(o.ctx);
  else if (side.count("ctx")) in.g = side["ctx"].empty() ? SessionCtx{} : parse_context(side["ctx"]);
  else in.g = main_context(prog);
  return in;
}

std::string deg(long long d) { return d == kInfDegree ? "inf" : std::to_string(d); }

json envelope(const std::string& cmd, const Opts& o) {
  json j;
  j["tool_version"] = kVersion;
  j["command"] = cmd;
  j["input"] = o.file;
  return j;
}

void emit(const json& j) { std::cout << j.dump(2) << "\n"; }

int cmd_check(const Opts& o, const std::string& system, const std::string& n_text) {
  Input in = load(o);
  long long n = kInfDegree;
  if (n_text != "inf") n = std::stoll(n_text);
  json v;
  bool ok = false;
  std::string reason;
  if (system == "st") {
    if (in.d != Dialect::Session) throw CLI::ValidationError("--system st", "needs a session process");
    Verdict r = check_st(in.g, in.p);
    ok = r.ok;
    reason = r.reason;
  } else if (system == "ll") {
    if (in.d == Dialect::Poly) throw CLI::ValidationError("--system ll", "needs a session or LL process");
    Process q = in.d == Dialect::Session ? chr(in.p, &in.g) : in.p;
    if (in.d == Dialect::Session) {
      Verdict st = check_st(in.g, in.p);
      if (!st.ok) {
        ok = false;
        reason = "not session typed: " + st.reason;
      }
    }
    if (reason.empty()) {
      LLVerdict r = check_ll(enc_ctx_ll(in.g), q);
      ok = r.ok;
      reason = r.reason;
    }
    if (in.d == Dialect::Session) v["translated"] = pretty(q);
  } else if (system == "usage") {
    if (in.d == Dialect::LL) throw CLI::ValidationError("--system usage", "needs a session or polyadic process");
    Process q = in.d == Dialect::Session ? enc_proc(in.p, &in.g) : in.p;
    UsageVerdict r;
    if (in.d == Dialect::Session && !check_st(in.g, in.p).ok)
      r = UsageVerdict{false, "not session typed: " + check_st(in.g, in.p).reason, true, {}, 0, {}};
    else
      r = check_usage(in.g, q, n);
    ok = r.ok;
    reason = r.reason;
    v["n"] = deg(n);
    v["degree"] = r.degree;
    v["shared"] = r.shared;
    v["cycle"] = r.cycle;
  } else {
    throw CLI::ValidationError("--system", "expected st, ll or usage");
  }
  v["system"] = system;
  v["verdict"] = ok ? "accept" : "reject";
  v["reason"] = reason;
  if (o.json) {
    json j = envelope("check", o);
    j["verdicts"] = v;
    emit(j);
  } else {
    std::cout << (ok ? "accept" : "reject");
    if (!ok) std::cout << ": " << reason;
    std::cout << "\n";
  }
  return ok ? 0 : 1;
}

int cmd_classify(const Opts& o, const std::string& max_n_text) {
  Input in = load(o);
  if (in.d != Dialect::Session) throw CLI::ValidationError("classify", "needs a session process");
  long long max_n = max_n_text.empty() ? -1 : std::stoll(max_n_text);
  AnalysisReport r = report(in.g, in.p, max_n);
  json v;
  v["st"] = r.st.ok ? "accept" : "reject";
  if (!r.st.ok) v["st_reason"] = r.st.reason;
  v["in_L"] = r.in_L;
  if (!r.ll.ok) v["ll_reason"] = r.ll.reason;
  json k = json::object();
  for (auto& [n, u] : r.usage) k[std::to_string(n)] = u.ok;
  v["in_K"] = k;
  v["min_degree"] = deg(r.min_degree);
  v["uncomposable"] = r.uncomposable;
  v["oracle"] = r.oracle.free ? "free" : "deadlocked";
  if (!r.oracle.free && r.oracle.witness) v["witness"] = pretty(r.oracle.witness);
  if (o.json) {
    json j = envelope("classify", o);
    j["verdicts"] = v;
    emit(j);
  } else {
    std::cout << "st: " << (r.st.ok ? "accept" : "reject: " + r.st.reason) << "\n";
    std::cout << "L: " << (r.in_L ? "yes" : "no") << "\n";
    for (auto& [n, u] : r.usage) std::cout << "K" << n << ": " << (u.ok ? "yes" : "no") << "\n";
    std::cout << "min degree: " << deg(r.min_degree) << "\n";
    std::cout << "uncomposable: " << (r.uncomposable ? "yes" : "no") << "\n";
    std::cout << "oracle: " << (r.oracle.free ? "free" : "deadlocked") << "\n";
  }
  return r.st.ok ? 0 : 1;
}

int cmd_rewrite(const Opts& o, bool vd, std::size_t all) {
  Input in = load(o);
  if (in.d != Dialect::Session) throw CLI::ValidationError("rewrite", "needs a session process");
  std::size_t bound = all == 0 ? kDefaultBound : all;
  ProcEnum e;
  try {
    e = vd ? rewrite2(in.g, in.p, bound) : rewrite1(in.g, in.p, bound);
  } catch (const std::invalid_argument& ex) {
    if (o.json) {
      json j = envelope("rewrite", o);
      j["verdicts"] = {{"verdict", "reject"}, {"reason", ex.what()}};
      emit(j);
    } else {
      std::cout << "reject: " << ex.what() << "\n";
    }
    return 1;
  }
  std::vector<std::string> shown;
  std::size_t k = all == 0 ? 1 : std::min(all, e.size());
  for (std::size_t i = 0; i < k; ++i) shown.push_back(pretty(e.items[i]));
  if (o.json) {
    json j = envelope("rewrite", o);
    j["verdicts"] = {{"verdict", "accept"},   {"procedure", vd ? "value-dependency" : "plain"},
                     {"members", shown},      {"count", e.size()},
                     {"truncated", e.truncated}};
    emit(j);
  } else {
    for (auto& s : shown) std::cout << s << "\n";
    if (all != 0 && e.truncated) std::cout << "# truncated at " << bound << "\n";
  }
  return 0;
}

void write_dot(const StateGraph& sg, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  auto esc = [](std::string s) {
    std::string r;
    for (char ch : s) r += ch == '"' ? std::string("\\\"") : std::string(1, ch);
    return r;
  };
  f << "digraph states {\n  node [shape=box, fontname=monospace];\n";
  for (std::size_t i = 0; i < sg.states.size(); ++i)
    f << "  s" << i << " [label=\"" << esc(pretty(sg.states[i])) << "\"];\n";
  for (std::size_t i = 0; i < sg.succ.size(); ++i)
    for (std::size_t k = 0; k < sg.succ[i].size(); ++k)
      f << "  s" << i << " -> s" << sg.succ[i][k] << (sg.succ_forward[i][k] ? " [style=dashed]" : "") << ";\n";
  f << "}\n";
}

int cmd_explore(const Opts& o, std::size_t budget, const std::string& dot) {
  Input in = load(o);
  Calculus c = in.d == Dialect::Session ? Calculus::Session : in.d == Dialect::LL ? Calculus::LL : Calculus::Poly;
  StateGraph sg = explore(c, in.p, budget);
  Deadlock d = oracle_deadlock_free(c, in.p, budget);
  if (!dot.empty()) write_dot(sg, dot);
  std::size_t edges = 0;
  for (auto& s : sg.succ) edges += s.size();
  if (o.json) {
    json j = envelope("explore", o);
    json states = json::array(), es = json::array();
    for (auto& s : sg.states) states.push_back(pretty(s));
    for (std::size_t i = 0; i < sg.succ.size(); ++i)
      for (int t : sg.succ[i]) es.push_back({i, t});
    json v{{"states", states}, {"edges", es}, {"complete", sg.complete},
           {"verdict", d.free ? "free" : "deadlocked"}};
    if (!d.free && d.witness) v["witness"] = pretty(d.witness);
    j["verdicts"] = v;
    emit(j);
  } else {
    std::cout << "states: " << sg.states.size() << "\ntransitions: " << edges << "\n";
    if (!sg.complete) std::cout << "budget exhausted\n";
    std::cout << "verdict: " << (d.free ? "free" : "deadlocked") << "\n";
    if (!d.free && d.witness) std::cout << "stuck: " << pretty(d.witness) << "\n";
  }
  return d.free ? 0 : 1;
}

int cmd_encode(const Opts& o, const std::string& to) {
  Input in = load(o);
  if (in.d != Dialect::Session) throw CLI::ValidationError("encode", "needs a session process");
  Process q;
  if (to == "poly") q = enc_proc(in.p, &in.g);
  else if (to == "ll") q = chr(in.p, &in.g);
  else throw CLI::ValidationError("--to", "expected poly or ll");
  if (o.json) {
    json j = envelope("encode", o);
    j["verdicts"] = {{"target", to}, {"process", pretty(q)}};
    emit(j);
  } else {
    std::cout << pretty(q) << "\n";
  }
  return 0;
}

int cmd_deps(const Opts& o) {
  Input in = load(o);
  if (in.d != Dialect::Session) throw CLI::ValidationError("deps", "needs a session process");
  StdResult r = check_std(in.g, in.p);
  json v;
  v["verdict"] = r.verdict.ok ? "accept" : "reject";
  if (!r.verdict.ok) {
    v["reason"] = r.verdict.reason;
  } else {
    std::vector<std::string> psi, vs;
    for (auto& t : r.psi) psi.push_back(to_string(t));
    for (auto& d : vdeps(r.psi)) vs.push_back(to_string(d));
    v["psi"] = psi;
    v["dependencies"] = vs;
    try {
      DepForest f = forest(r.annotated, r.psi);
      std::vector<std::string> roots;
      for (auto& n : f.roots) roots.push_back(debug_name(n));
      json ch = json::object();
      for (auto& [p, cs] : f.children) {
        std::vector<std::string> names;
        for (auto& c : cs) names.push_back(debug_name(c));
        ch[debug_name(p)] = names;
      }
      v["forest"] = {{"roots", roots}, {"children", ch}};
    } catch (const DepError& e) {
      v["forest_error"] = e.what();
    }
  }
  if (o.json) {
    json j = envelope("deps", o);
    j["verdicts"] = v;
    emit(j);
  } else if (!r.verdict.ok) {
    std::cout << "reject: " << r.verdict.reason << "\n";
  } else {
    std::cout << "psi: " << to_string(r.psi) << "\n";
    std::cout << "dependencies:";
    for (auto& d : vdeps(r.psi)) std::cout << " " << to_string(d);
    std::cout << "\n";
    if (v.contains("forest_error")) std::cout << "forest: " << v["forest_error"].get<std::string>() << "\n";
  }
  return r.verdict.ok ? 0 : 1;
}

int cmd_corpus(const Opts& o) {
  if (!std::filesystem::is_directory(o.file)) throw CLI::ValidationError("corpus", o.file + " is not a directory");
  auto entries = load_corpus(o.file);
  int bad = 0;
  json rows = json::array();
  if (!o.json) std::printf("%-24s %-7s %-5s %-5s %-6s %-10s %s\n", "file", "st", "L", "K1", "deg", "oracle", "result");
  for (auto& e : entries) {
    EntryResult r = run_entry(e);
    bool pass = r.mismatches.empty();
    bad += !pass;
    auto get = [&](const char* k) { return r.actual.count(k) ? r.actual.at(k) : std::string("-"); };
    if (o.json) {
      rows.push_back({{"file", e.name}, {"actual", r.actual}, {"mismatches", r.mismatches}, {"pass", pass}});
    } else {
      std::printf("%-24s %-7s %-5s %-5s %-6s %-10s %s\n", e.name.c_str(), get("st").c_str(), get("in_L").c_str(),
                  get("k1").c_str(), get("min_degree").c_str(), get("oracle").c_str(), pass ? "pass" : "FAIL");
      for (auto& m : r.mismatches) std::printf("    %s\n", m.c_str());
    }
  }
  if (o.json) {
    json j = envelope("corpus", o);
    j["verdicts"] = {{"files", rows}, {"failed", bad}, {"total", entries.size()}};
    emit(j);
  } else {
    std::printf("%zu files, %d failed\n", entries.size(), bad);
  }
  return bad == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Session process analyses: typing, classification, rewriting."};
  app.require_subcommand(1);
  Opts o;
  auto shared = [&](CLI::App* sub, bool file = true) {
    if (file) sub->add_option("file", o.file, "source file, or - for stdin")->required();
    sub->add_option("--ctx", o.ctx, "typing context, e.g. \"n:end, x:!end.end\"");
    sub->add_option("--dialect", o.dialect, "session, ll or poly")->check(CLI::IsMember({"session", "ll", "poly"}));
    sub->add_flag("--json", o.json, "machine-readable output");
  };

  std::string system = "st", n_text = "inf", max_n, to;
  bool vd = false;
  std::size_t all = 0, budget = 100000;

  auto* check = app.add_subcommand("check", "type check a process");
  shared(check);
  check->add_option("--system", system, "st, ll or usage")->check(CLI::IsMember({"st", "ll", "usage"}));
  check->add_option("--n", n_text, "sharing degree for --system usage (default inf)");

  auto* classify = app.add_subcommand("classify", "membership in L and K_n, oracle verdict");
  shared(classify);
  classify->add_option("--max-n", max_n, "largest degree to report");

  auto* rewrite = app.add_subcommand("rewrite", "rewrite into the linear-logic class");
  shared(rewrite);
  rewrite->add_flag("--vd", vd, "preserve value dependencies");
  rewrite->add_option("--all", all, "print up to N members");

  auto* expl = app.add_subcommand("explore", "reachable states and deadlock oracle");
  shared(expl);
  expl->add_option("--budget", budget, "state budget");
  std::string dot;
  expl->add_option("--dot", dot, "write the state graph in GraphViz format");

  auto* encode = app.add_subcommand("encode", "translate a session process");
  shared(encode);
  encode->add_option("--to", to, "poly or ll")->required()->check(CLI::IsMember({"poly", "ll"}));

  auto* deps = app.add_subcommand("deps", "value dependencies of a session process");
  shared(deps);

  auto* corpus = app.add_subcommand("corpus", "run a directory of annotated examples");
  corpus->add_option("dir", o.file, "directory of .spi files with .expect sidecars")->required();
  corpus->add_flag("--json", o.json, "machine-readable output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  for (auto* sub : {check, classify, rewrite, expl, encode, deps})
    if (sub->parsed() && sub->count("--ctx")) o.ctx_given = true;

  try {
    if (check->parsed()) return cmd_check(o, system, n_text);
    if (classify->parsed()) return cmd_classify(o, max_n);
    if (rewrite->parsed()) return cmd_rewrite(o, vd, all);
    if (expl->parsed()) return cmd_explore(o, budget, dot);
    if (encode->parsed()) return cmd_encode(o, to);
    if (deps->parsed()) return cmd_deps(o);
    if (corpus->parsed()) return cmd_corpus(o);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
