#include "sessionpi/corpus.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "sessionpi/classify.hpp"
#include "sessionpi/encodings.hpp"
#include "sessionpi/rewrite.hpp"
#include "sessionpi/rewrite_vd.hpp"

namespace spi {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string yes(bool b) { return b ? "true" : "false"; }
std::string acc(bool b) { return b ? "accept" : "reject"; }

std::string degree_text(long long d) { return d == kInfDegree ? "inf" : std::to_string(d); }

}  // namespace

Expectations parse_expect(const std::string& text) {
  Expectations out;
  std::istringstream in(text);
  std::string line;
  int no = 0;
  while (std::getline(in, line)) {
    ++no;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto eq = t.find('=');
    if (eq == std::string::npos) throw ParseError("line " + std::to_string(no) + ": expected key = value");
    std::string k = trim(t.substr(0, eq)), v = trim(t.substr(eq + 1));
    if (k.empty()) throw ParseError("line " + std::to_string(no) + ": empty key");
    if (v.size() >= 2 && v.front() == '"' && v.back() == '"') v = v.substr(1, v.size() - 2);
    if (!out.emplace(k, v).second) throw ParseError("line " + std::to_string(no) + ": repeated key " + k);
  }
  return out;
}

Process main_process(const Program& prog) {
  if (prog.processes.empty()) throw ParseError("no process in source");
  for (auto& [n, p] : prog.processes)
    if (n == "main") return p;
  return prog.processes.front().second;
}

SessionCtx main_context(const Program& prog) {
  for (auto& [n, c] : prog.contexts)
    if (n == "main") return c;
  return prog.contexts.empty() ? SessionCtx{} : prog.contexts.front().second;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

CorpusEntry load_entry(const std::string& spi_path) {
  CorpusEntry e;
  e.path = spi_path;
  e.name = fs::path(spi_path).stem().string();
  fs::path side = fs::path(spi_path).replace_extension(".expect");
  if (fs::exists(side)) e.expect = parse_expect(read_file(side.string()));
  if (auto it = e.expect.find("dialect"); it != e.expect.end()) {
    if (it->second == "session") e.dialect = Dialect::Session;
    else if (it->second == "ll") e.dialect = Dialect::LL;
    else if (it->second == "poly") e.dialect = Dialect::Poly;
    else throw ParseError(side.string() + ": unknown dialect " + it->second);
  }
  Program prog = parse_program(read_file(spi_path), e.dialect);
  e.process = main_process(prog);
  if (auto it = e.expect.find("ctx"); it != e.expect.end())
    e.ctx = trim(it->second).empty() ? SessionCtx{} : parse_context(it->second);
  else
    e.ctx = main_context(prog);
  return e;
}

std::vector<CorpusEntry> load_corpus(const std::string& dir) {
  std::vector<std::string> files;
  for (auto& de : fs::directory_iterator(dir))
    if (de.is_regular_file() && de.path().extension() == ".spi") files.push_back(de.path().string());
  std::sort(files.begin(), files.end());
  std::vector<CorpusEntry> out;
  for (auto& f : files) out.push_back(load_entry(f));
  return out;
}

EntryResult run_entry(const CorpusEntry& e) {
  EntryResult r;
  auto want = [&](const std::string& k) { return e.expect.count(k) > 0; };
  const SessionCtx& g = e.ctx;
  const Process& p = e.process;

  if (e.dialect == Dialect::Session) {
    Verdict st = check_st(g, p);
    r.actual["st"] = acc(st.ok);
    r.actual["oracle"] = oracle_deadlock_free(Calculus::Session, p).free ? "free" : "deadlocked";
    r.actual["uncomposable"] = yes(uncomposable(g));
    if (st.ok) {
      bool ll = check_ll(enc_ctx_ll(g), chr(p, &g)).ok;
      r.actual["ll"] = acc(ll);
      r.actual["in_L"] = yes(ll);
      r.actual["k1"] = yes(in_K(g, p, 1));
      r.actual["min_degree"] = degree_text(min_sharing_degree(g, p));
    } else {
      r.actual["ll"] = "reject";
      r.actual["in_L"] = "false";
      r.actual["k1"] = "false";
      r.actual["min_degree"] = "inf";
    }
    auto count = [&](const std::function<ProcEnum()>& f) -> std::string {
      try {
        return std::to_string(f().size());
      } catch (const std::exception&) {
        return "error";
      }
    };
    if (want("rewrite1")) r.actual["rewrite1"] = count([&] { return rewrite1(g, p); });
    if (want("rewrite2")) r.actual["rewrite2"] = count([&] { return rewrite2(g, p); });
  } else if (e.dialect == Dialect::LL) {
    r.actual["ll"] = acc(check_ll(enc_ctx_ll(g), p).ok);
    r.actual["oracle"] = oracle_deadlock_free(Calculus::LL, p).free ? "free" : "deadlocked";
  } else {
    UsageVerdict u = check_usage(g, p, kInfDegree);
    r.actual["usage"] = acc(u.ok);
    r.actual["min_degree"] = u.ok ? degree_text(u.degree) : "inf";
    r.actual["oracle"] = oracle_deadlock_free(Calculus::Poly, p).free ? "free" : "deadlocked";
  }

  for (auto& [k, v] : e.expect) {
    if (k == "ctx" || k == "dialect" || k == "note") continue;
    auto it = r.actual.find(k);
    if (it == r.actual.end())
      r.mismatches.push_back(k + ": unknown key");
    else if (it->second != v)
      r.mismatches.push_back(k + ": expected " + v + ", got " + it->second);
  }
  return r;
}

}  // namespace spi
