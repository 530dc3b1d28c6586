// Continuation-passing encoding of session processes into the polyadic
// calculus, and the matching translation of types.
#pragma once

#include "sessionpi/ast.hpp"
#include "sessionpi/usage.hpp"

namespace spi {

// With a context, continuation restrictions carry the session type of the
// continuation as annotation; the usage checker needs them.
Process enc_proc(const Process& p, const SessionCtx* ctx = nullptr);
Process enc_proc(const Process& p, const std::map<Name, Name>& renaming, const SessionCtx* ctx);

UType enc_type_u(const SessionType& t, long long ob = 0, long long cap = 0);
UsageCtx enc_ctx_u(const SessionCtx& g, long long ob = 0, long long cap = 0);

}  // namespace spi
