// Type checking for the session calculus.
#pragma once

#include <string>

#include "sessionpi/ast.hpp"

namespace spi {

struct Verdict {
  bool ok = true;
  std::string reason;

  static Verdict accept() { return {}; }
  static Verdict reject(std::string why) { return {false, std::move(why)}; }
};

Verdict check_st(const SessionCtx& ctx, const Process& p);

// No pending session: every entry is typed `end` (such entries can be
// dropped by strengthening).
bool uncomposable(const SessionCtx& g);

// Pushes restrictions inward as far as congruence allows.
Process narrow_scopes(const Process& p);

}  // namespace spi
