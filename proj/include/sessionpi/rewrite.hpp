// Rewriting session processes into the linear-logic class: characteristic
// processes, catalyzers, the first rewriting procedure, the parallelization
// relation and an operational-correspondence harness.
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "sessionpi/ast.hpp"

namespace spi {

constexpr std::size_t kDefaultBound = 256;

// Bounded, deterministic enumeration; items() are distinct up to congruence.
struct ProcEnum {
  std::vector<Process> items;
  bool truncated = false;

  std::size_t size() const { return items.size(); }
  bool empty() const { return items.empty(); }
  const Process& canonical() const { return items.front(); }
};

ProcEnum char_proc(const SessionType& t, const Name& x, std::size_t bound = kDefaultBound);
ProcEnum char_ctx(const SessionCtx& g, std::size_t bound = kDefaultBound);

// (nu x_n)( ... (nu x_1)([.] | P_1) ... | P_n)
struct Catalyzer {
  struct Wrap {
    Name x;
    SessionType t;  // type provided by the wrapper's process
    Process proc;
  };
  std::vector<Wrap> wraps;  // outermost first
};
Process plug(const Catalyzer& c, const Process& hole);
// The first entry becomes the outermost wrapper.
std::vector<Catalyzer> catalyzers(const std::vector<std::pair<Name, SessionType>>& g,
                                  std::size_t bound = kDefaultBound);
std::vector<Catalyzer> catalyzers(const SessionCtx& g, std::size_t bound = kDefaultBound);

// Throws std::invalid_argument when the judgment is not derivable or the
// term is outside the shapes the procedure covers.
ProcEnum rewrite1(const SessionCtx& g, const Process& p, std::size_t bound = kDefaultBound);

// P ≐ Q over literal top-level parallel splits.
bool par_related(const Process& a, const Process& b, const LLCtx& d);

struct CorrespondenceReport {
  std::size_t steps = 0;   // session reductions examined
  std::size_t checks = 0;  // (step, rewritten member) pairs
  std::vector<std::string> failures;
  bool complete = true;
  bool ok() const { return failures.empty() && complete; }
};

// For each P -> P' reachable from p and each Q in the rewriting of P, look for
// Q -> Q1 (then optional forwarder steps) landing in the rewriting of P' or
// ≐-related to one of its members.
using Rewriter = ProcEnum (*)(const SessionCtx&, const Process&, std::size_t);
CorrespondenceReport check_correspondence(const SessionCtx& g, const Process& p, std::size_t bound = 64,
                                          Rewriter rw = nullptr, std::size_t state_budget = 2000);

}  // namespace spi
