// Shared driver of both rewriting procedures.
#pragma once

#include "sessionpi/rewrite.hpp"

namespace spi::detail {

ProcEnum run_rewrite(const SessionCtx& g, const Process& p, std::size_t bound, bool vd);

}  // namespace spi::detail
