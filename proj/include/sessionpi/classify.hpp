// Membership in the typed classes L and K_n, minimal sharing degree, and the
// hierarchy witnesses.
#pragma once

#include <map>

#include "sessionpi/ll_typing.hpp"
#include "sessionpi/semantics.hpp"
#include "sessionpi/session_typing.hpp"
#include "sessionpi/usage.hpp"

namespace spi {

bool in_L(const SessionCtx& g, const Process& p);
bool in_K(const SessionCtx& g, const Process& p, long long n);

// P_{n+1} when n+1 is even, Q_{n+1} otherwise; typed under n:end.
Process gen_witness(int n);
SessionCtx witness_ctx();

struct AnalysisReport {
  Verdict st;
  LLVerdict ll;  // of chr(P)
  std::map<long long, UsageVerdict> usage;  // n = 0..max_n
  long long min_degree = kInfDegree;
  bool in_L = false;
  bool uncomposable = false;
  Deadlock oracle;
};

// Free plus restricted session pairs; larger degrees cannot change a verdict.
long long default_max_n(const SessionCtx& g, const Process& p);

AnalysisReport report(const SessionCtx& g, const Process& p, long long max_n = -1);

}  // namespace spi
