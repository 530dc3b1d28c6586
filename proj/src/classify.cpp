#include "sessionpi/classify.hpp"

#include "sessionpi/encodings.hpp"

namespace spi {

bool in_L(const SessionCtx& g, const Process& p) {
  if (!check_st(g, p).ok) return false;
  return check_ll(enc_ctx_ll(g), chr(p, &g)).ok;
}

bool in_K(const SessionCtx& g, const Process& p, long long n) {
  if (!check_st(g, p).ok) return false;
  return check_usage(g, enc_proc(p, &g), n).ok;
}

SessionCtx witness_ctx() { return {{Name{"n", 0}, t_end()}}; }

Process gen_witness(int n) {
  const int m = n + 1;
  std::vector<Name> a, b;
  for (int i = 1; i <= m; ++i) {
    a.push_back(fresh_name("a" + std::to_string(i)));
    b.push_back(fresh_name("b" + std::to_string(i)));
  }
  // a-side alternates input/output, forwarding the last received name
  std::function<Process(int, std::optional<Name>)> left = [&](int i, std::optional<Name> last) -> Process {
    if (i > m) return p_nil();
    if (i % 2 == 1) {
      Name x = fresh_name(i == 1 ? "x" : "x" + std::to_string(i));
      return p_in(a[i - 1], x, left(i + 1, x));
    }
    return p_out(a[i - 1], *last, left(i + 1, last));
  };
  std::function<Process(int)> right = [&](int i) -> Process {
    if (i > m) return p_nil();
    if (i % 2 == 1) return p_out(b[i - 1], Name{"n", 0}, right(i + 1));
    return p_in(b[i - 1], fresh_name("z"), right(i + 1));
  };
  Process body = p_par(left(1, std::nullopt), right(1));
  for (int i = m; i >= 1; --i) {
    SessionType t = i % 2 == 1 ? t_in(t_end(), t_end()) : t_out(t_end(), t_end());
    body = p_respair(a[i - 1], b[i - 1], t, body);
  }
  return body;
}

long long default_max_n(const SessionCtx& g, const Process& p) {
  long long k = 0;
  for (auto& [n, t] : g)
    if (t->kind != SessionTypeNode::Kind::End) ++k;
  std::function<void(const Process&)> walk = [&](const Process& q) {
    if (q->kind == PK::ResPair) ++k;
    if (q->a) walk(q->a);
    if (q->b) walk(q->b);
    for (auto& [l, r] : q->arms) walk(r);
    for (auto& [l, c] : q->cases) walk(c.body);
  };
  walk(p);
  return std::max<long long>(k, 1);
}

AnalysisReport report(const SessionCtx& g, const Process& p, long long max_n) {
  AnalysisReport r;
  if (max_n < 0) max_n = default_max_n(g, p);
  r.st = check_st(g, p);
  r.uncomposable = uncomposable(g);
  r.oracle = oracle_deadlock_free(Calculus::Session, p);
  if (!r.st.ok) {
    r.ll = {false, "not session typed: " + r.st.reason, nullptr};
    for (long long n = 0; n <= max_n; ++n) r.usage[n] = UsageVerdict{false, r.ll.reason, false, {}, 0, {}};
    return r;
  }
  r.ll = check_ll(enc_ctx_ll(g), chr(p, &g), true);
  r.in_L = r.ll.ok;
  Process e = enc_proc(p, &g);
  // one constraint solve gives the degree; verdicts per n follow from it
  UsageVerdict base = check_usage(g, e, kInfDegree);
  r.min_degree = base.feasible ? base.degree : kInfDegree;
  for (long long n = 0; n <= max_n; ++n) r.usage[n] = check_usage(g, e, n);
  return r;
}

}  // namespace spi
