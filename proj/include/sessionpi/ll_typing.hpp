// Linear-logic typing of processes with forwarders, and the translation that
// replaces free outputs by bound outputs plus forwarders.
#pragma once

#include <memory>
#include <string>
#include <vector>

#include "sessionpi/ast.hpp"
#include "sessionpi/session_typing.hpp"

namespace spi {

LLType enc_type_ll(const SessionType& t);
LLCtx enc_ctx_ll(const SessionCtx& g);

// Free outputs become bound outputs linked by a forwarder; double
// restrictions collapse to single ones. With a context, fresh restrictions
// get session-type annotations.
Process chr(const Process& p, const SessionCtx* ctx = nullptr);

struct Derivation {
  std::string rule;
  std::string conclusion;
  std::vector<Derivation> premises;
};

struct LLVerdict {
  bool ok = true;
  std::string reason;
  std::shared_ptr<Derivation> derivation;  // set on success when requested
};

LLVerdict check_ll(const LLCtx& ctx, const Process& p, bool want_derivation = false);

}  // namespace spi
