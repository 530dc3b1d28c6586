// Usage types with obligation/capability levels, and the sharing-degree
// type system on polyadic processes.
#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sessionpi/ast.hpp"

namespace spi {

struct Level {
  enum class Kind { Finite, Inf, Var };
  Kind kind = Kind::Finite;
  long long n = 0;  // Finite value or Var id

  static Level fin(long long v) { return {Kind::Finite, v}; }
  static Level inf() { return {Kind::Inf, 0}; }
  static Level var(long long id) { return {Kind::Var, id}; }
  bool operator==(const Level&) const = default;
};
bool level_le(const Level& a, const Level& b);  // Finite/Inf only
Level level_min(const Level& a, const Level& b);
Level level_max(const Level& a, const Level& b);
std::string to_string(const Level& l);

enum class Pol { In, Out };

struct UsageNode;
using Usage = std::shared_ptr<const UsageNode>;

struct UsageNode {
  enum class Kind { Zero, Act, Par, Lift };
  Kind kind = Kind::Zero;
  Pol pol = Pol::In;  // Act
  Level ob, cap;      // Act
  Usage a, b;         // continuation | Par operands | lifted usage
  Level lift;         // Lift
};

Usage u_zero();
Usage u_act(Pol p, Level ob, Level cap, Usage cont = nullptr);
Usage u_in(long long ob, long long cap, Usage cont = nullptr);
Usage u_out(long long ob, long long cap, Usage cont = nullptr);
Usage u_par(Usage a, Usage b);
Usage u_lift(Level t, Usage a);

Level ob(Pol p, const Usage& u);
Level cap(Pol p, const Usage& u);
// Lifts pushed onto actions, parallel flattened, zeros dropped, sorted.
Usage usage_normal(const Usage& u);
bool usage_equiv(const Usage& a, const Usage& b);
std::vector<Usage> usage_reduce(const Usage& u);
bool con(const Usage& u);
bool rel(const Usage& u);
std::string to_string(const Usage& u);

struct UTypeNode;
using UType = std::shared_ptr<const UTypeNode>;

struct UTypeNode {
  enum class Kind { Chan, Variant };
  Kind kind = Kind::Chan;
  Usage usage;
  std::vector<UType> payloads;
  std::map<Label, UType> arms;
};

UType ut_chan(Usage u, std::vector<UType> payloads);
UType ut_variant(std::map<Label, UType> arms);
bool utype_equal(const UType& a, const UType& b);
std::string to_string(const UType& t);

using UsageCtx = std::map<Name, UType>;

// Parallel composition of types; nullopt when undefined.
std::optional<UType> compose_types(const UType& a, const UType& b);
std::optional<UsageCtx> compose_ctx(const UsageCtx& a, const UsageCtx& b);
// x:<act>[payloads] ;< G. `prec(x, y)` decides whether x was created after y.
UsageCtx seq_compose(const Name& x, Pol p, Level o, Level k, const std::vector<UType>& payloads, const UsageCtx& g,
                     const std::function<bool(const Name&, const Name&)>& prec);

// ---- checking ----------------------------------------------------------------

struct UsageVerdict {
  bool ok = true;
  std::string reason;
  bool feasible = true;
  std::vector<std::string> cycle;  // positive cycle among level constraints
  long long degree = 0;  // minimal sharing degree of the parallel structure
  std::set<std::string> shared;  // names shared at the worst split
};

struct UsageOptions {
  bool count_zero_usage = false;  // let names with usage 0 count as shared
};

// The process must be polyadic with annotated restrictions. Free names get the
// encoding of their session type at existentially chosen levels.
UsageVerdict check_usage(const SessionCtx& g, const Process& encoded, long long n, UsageOptions opt = {});
// Same, with concrete declared types for the free names.
UsageVerdict check_usage(const UsageCtx& g, const Process& encoded, long long n, UsageOptions opt = {});

constexpr long long kInfDegree = std::numeric_limits<long long>::max();

// Least n such that the encoding of a session process is typable with
// parallel sharing at most n; kInfDegree when no level assignment exists.
long long min_sharing_degree(const SessionCtx& g, const Process& session_proc, UsageOptions opt = {});

}  // namespace spi
