// Core syntax shared by all three calculi: names, values, processes and types.
#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace spi {

struct Name {
  std::string base;
  std::uint64_t uid = 0;  // 0 for free names written by the user

  auto operator<=>(const Name&) const = default;
  bool operator==(const Name&) const = default;
};

// Globally fresh name; uid never clashes with parser-assigned uids.
Name fresh_name(const std::string& base);
std::string debug_name(const Name& n);

using Label = std::string;

struct Value {
  enum class Kind { Chan, Variant };
  Kind kind = Kind::Chan;
  Name name;  // Chan
  Label label;  // Variant
  std::shared_ptr<const Value> payload;  // Variant

  static Value chan(Name n);
  static Value variant(Label l, Value v);
  bool is_chan() const { return kind == Kind::Chan; }
};
bool operator==(const Value& a, const Value& b);
void value_names(const Value& v, std::set<Name>& out);

// ---- session types -------------------------------------------------------

struct SessionTypeNode;
using SessionType = std::shared_ptr<const SessionTypeNode>;

struct SessionTypeNode {
  enum class Kind { End, In, Out, Branch, Select };
  Kind kind = Kind::End;
  SessionType payload;  // In/Out
  SessionType cont;     // In/Out
  std::map<Label, SessionType> arms;  // Branch/Select
  std::optional<int> pos;  // annotated position, In/Out only
};

SessionType t_end();
SessionType t_in(SessionType payload, SessionType cont, std::optional<int> pos = {});
SessionType t_out(SessionType payload, SessionType cont, std::optional<int> pos = {});
SessionType t_branch(std::map<Label, SessionType> arms);
SessionType t_select(std::map<Label, SessionType> arms);

SessionType dual(const SessionType& t);
SessionType erase_positions(const SessionType& t);
SessionType shift_positions(const SessionType& t, int by);
bool type_equal(const SessionType& a, const SessionType& b, bool with_pos = false);
std::string type_key(const SessionType& t, bool with_pos = false);
int type_depth(const SessionType& t);

// ---- linear logic propositions --------------------------------------------

struct LLTypeNode;
using LLType = std::shared_ptr<const LLTypeNode>;

struct LLTypeNode {
  enum class Kind { Bullet, Tensor, Parr, With, Plus };
  Kind kind = Kind::Bullet;
  LLType left, right;  // Tensor/Parr
  std::map<Label, LLType> arms;  // With/Plus
};

LLType ll_bullet();
LLType ll_tensor(LLType a, LLType b);
LLType ll_parr(LLType a, LLType b);
LLType ll_with(std::map<Label, LLType> arms);
LLType ll_plus(std::map<Label, LLType> arms);
LLType dual_ll(const LLType& a);
bool ll_equal(const LLType& a, const LLType& b);
std::string ll_key(const LLType& a);

// ---- processes -----------------------------------------------------------

struct ProcNode;
using Process = std::shared_ptr<const ProcNode>;

enum class PK { Nil, Output, Input, Select, Branch, Par, ResPair, Res, Forward, Case };

struct CaseArm {
  Name binder;
  Process body;
};

struct ProcNode {
  PK kind = PK::Nil;
  Name x;  // subject; first binder of ResPair/Res; left end of Forward
  Name y;  // second binder of ResPair; right end of Forward
  std::vector<Value> vals;     // Output
  std::vector<Name> binders;   // Input
  Label label;                 // Select
  std::map<Label, Process> arms;       // Branch
  Value scrut;                         // Case
  std::map<Label, CaseArm> cases;      // Case
  Process a, b;  // continuation, or left/right of Par, or body of restrictions
  SessionType annot;  // optional annotation on ResPair/Res
};

Process p_nil();
Process p_out(Name x, std::vector<Value> vals, Process cont);
Process p_out(Name x, Name v, Process cont);
Process p_in(Name x, std::vector<Name> binders, Process cont);
Process p_in(Name x, Name z, Process cont);
Process p_sel(Name x, Label l, Process cont);
Process p_bra(Name x, std::map<Label, Process> arms);
Process p_par(Process a, Process b);
Process p_par(const std::vector<Process>& ps);  // right-nested; 0 when empty
Process p_respair(Name x, Name y, SessionType annot, Process body);
Process p_res(Name x, SessionType annot, Process body);
Process p_res(Name x, Process body);
Process p_fwd(Name x, Name y);
Process p_case(Value scrut, std::map<Label, CaseArm> arms);
// x(y).P with y fresh and restricted: (nu y) x<y>.P
Process p_bout(Name x, Name y, Process cont);

bool is_prefix(const Process& p);

std::set<Name> free_names(const Process& p);
bool occurs_free(const Name& n, const Process& p);
std::set<Name> all_names(const Process& p);

// Capture-avoiding substitution.
Process substitute(const Process& p, const Name& from, const Name& to);
Process substitute_many(const Process& p, const std::map<Name, Name>& m);

// Substitution of a value for a name. Throws StuckSubst when a variant would
// land in a subject or forwarder position.
struct StuckSubst : std::runtime_error {
  using std::runtime_error::runtime_error;
};
Process substitute_value(const Process& p, const Name& from, const Value& v);

// Bound names renamed by traversal order. keep_bases keeps the readable base.
Process alpha_canonical(const Process& p, bool keep_bases = false);
// Every binder renamed to a globally fresh name.
Process rename_apart(const Process& p);

// Exact structural key (names included verbatim).
std::string proc_key(const Process& p);
bool alpha_equal(const Process& a, const Process& b);
std::size_t proc_size(const Process& p);

// ---- contexts -------------------------------------------------------------

using SessionCtx = std::map<Name, SessionType>;
using LLCtx = std::map<Name, LLType>;

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace spi
