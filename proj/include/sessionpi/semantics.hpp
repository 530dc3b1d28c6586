// Structural congruence, reduction relations and state-space exploration.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sessionpi/ast.hpp"

namespace spi {

enum class Calculus { Session, LL, Poly };

// Canonical representative of the congruence class. Binders come out with
// canonical uids; keep_bases keeps their readable bases.
Process normalize(const Process& p, bool keep_bases = false);
// Equal keys iff the processes are structurally congruent.
std::string canonical_key(const Process& p);
bool congruent(const Process& a, const Process& b);

// A flattened parallel block: binders floated to the top, no Nil components.
struct Binder {
  bool pair = false;
  Name x, y;
  SessionType annot;
};
struct Block {
  std::vector<Binder> binders;
  std::vector<Process> comps;
};
Block flatten(const Process& p);
Process rebuild(const Block& b);

struct Step {
  Process target;
  bool forward = false;  // R-Fwd step (LL only)
};

struct StuckPair {
  Process state;
  std::string reason;
};

std::vector<Step> reduce_session(const Process& p);
std::vector<Step> reduce_ll(const Process& p);
std::vector<Step> reduce_poly(const Process& p, std::vector<StuckPair>* stuck = nullptr);
std::vector<Step> reduce(Calculus c, const Process& p, std::vector<StuckPair>* stuck = nullptr);

// In-place LL reduction that keeps the syntactic shape of untouched parts.
std::vector<Process> raw_reduce_ll(const Process& p, bool forwards_only = false);

struct StateGraph {
  std::vector<Process> states;  // normalized, readable bases
  std::vector<std::string> keys;
  std::vector<std::vector<int>> succ;
  std::vector<std::vector<bool>> succ_forward;
  std::vector<StuckPair> stuck;
  bool complete = true;  // false when the budget ran out
};

StateGraph explore(Calculus c, const Process& p, std::size_t budget = 100000);

struct Deadlock {
  bool free = true;
  Process witness;  // an irreducible state with a guarded restricted prefix
  bool complete = true;
};

// Top-level prefix whose subject is restricted in the same block.
bool has_guarded_restricted_prefix(const Process& state);
Deadlock oracle_deadlock_free(Calculus c, const Process& p, std::size_t budget = 100000);
bool is_live(const Process& p);

}  // namespace spi
