// Value dependencies: the position-annotated session type system, the
// dependency set and its forest, bridging characteristic processes,
// dependency-isolating catalyzers and the refined rewriting.
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "sessionpi/ast.hpp"
#include "sessionpi/rewrite.hpp"
#include "sessionpi/session_typing.hpp"

namespace spi {

// (subj, obj, pos) for inputs, <subj, obj, pos> for outputs.
struct Triple {
  bool input = false;
  Name subj, obj;
  int pos = 0;
  SessionType obj_type;  // type of the object, positions erased

  bool operator==(const Triple& o) const {
    return input == o.input && subj == o.subj && obj == o.obj && pos == o.pos;
  }
};
using DepCtx = std::vector<Triple>;

std::string to_string(const Triple& t);
std::string to_string(const DepCtx& psi);
// Same triples, order ignored.
bool same_triples(const DepCtx& a, const DepCtx& b);
// All triples in which x occurs free: input or output subject, output object.
DepCtx project(const DepCtx& psi, const Name& x);

struct StdResult {
  Verdict verdict;
  DepCtx psi;
  SessionCtx annotated;  // free names with spine positions filled in
};

// Positions count input and output prefixes only; selection and branching
// leave both Γ and Ψ unshifted. Positions already present in `g` must agree
// with the synthesized ones.
StdResult check_std(const SessionCtx& g, const Process& p);

// src^src_pos ≺ dst^dst_pos : payload
struct VDep {
  Name src;
  int src_pos = 0;
  Name dst;
  int dst_pos = 0;
  SessionType payload;

  bool operator==(const VDep& o) const {
    return src == o.src && src_pos == o.src_pos && dst == o.dst && dst_pos == o.dst_pos;
  }
};
std::string to_string(const VDep& d);

std::vector<VDep> vdeps(const DepCtx& psi);

struct DepError : std::invalid_argument {
  enum class Kind { NonSimple, Cyclic, MultipleParents, MissingDual, BadPosition };
  Kind kind;
  DepError(Kind k, const std::string& what) : std::invalid_argument(what), kind(k) {}
};

struct DepForest {
  std::vector<Name> nodes;  // context order
  std::vector<Name> roots;
  std::map<Name, std::vector<Name>> children;  // first-dependency order
  std::map<Name, Name> parent;
  std::vector<VDep> edges;  // dependencies between context entries

  int height(const Name& n) const;
};

// Only dependencies with both ends in `g` take part. Throws DepError.
DepForest forest(const SessionCtx& g, const DepCtx& psi);

// Name of the bridging session for src ≺ dst; stable within a run.
Name bridge_name(const Name& src, const Name& dst);

ProcEnum char_proc_v(const SessionType& t, const Name& x, const DepCtx& psi, std::size_t bound = kDefaultBound);
ProcEnum char_ctx_v(const SessionCtx& g, const DepCtx& psi, std::size_t bound = kDefaultBound);

// A removed prefix: polarity plus annotated position.
struct PrefixRef {
  bool input = false;
  int pos = 0;
};
// Throws DepError(BadPosition) when a listed prefix does not occur.
SessionType shorten(const SessionType& t, const std::vector<PrefixRef>& drop);

// A catalyzer plus the occurrence substitutions applied to the hole.
struct CatalyzerV {
  struct Rename {
    Name subj;
    bool input = false;
    int nth = 0;  // input/output prefixes on subj above the occurrence
    Name to;
  };
  std::vector<Rename> sigma;
  Catalyzer cat;  // outer wrappers first, then one wrapper per forwarder
};
// Renames the subject of every prefix on `subj` with the given polarity that
// has `nth` input/output prefixes on `subj` above it. Counting per subject
// keeps the occurrence stable under rewriting, which moves prefixes between
// components but keeps their order on each session.
Process rename_occurrence(const Process& p, const Name& subj, bool input, int nth, const Name& to);
Process plug(const CatalyzerV& c, const Process& hole);

// gamma: the sessions the catalyzer implements, annotated as in the process
// the dependencies come from. hole: the hole's types for the same names,
// annotated as in the hole. The first entry of gamma is the outermost wrapper.
std::vector<CatalyzerV> catalyzers_v(const std::vector<std::pair<Name, SessionType>>& gamma, const DepCtx& psi,
                                     const SessionCtx& hole, std::size_t bound = kDefaultBound);

// Refined rewriting. The second form also checks the given Ψ against the
// synthesized one. Both throw std::invalid_argument like rewrite1.
ProcEnum rewrite2(const SessionCtx& g, const Process& p, std::size_t bound = kDefaultBound);
ProcEnum rewrite2(const SessionCtx& g, const DepCtx& psi, const Process& p, std::size_t bound = kDefaultBound);

}  // namespace spi
