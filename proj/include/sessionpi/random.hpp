// Seeded generators for types, contexts and terms.
#pragma once

#include <cstdint>
#include <random>

#include "sessionpi/ast.hpp"

namespace spi {

using Rng = std::mt19937_64;

// Session type with at most `depth` nested constructors on any path.
SessionType random_type(Rng& rng, int depth);
// Entries named x0, x1, ...
SessionCtx random_ctx(Rng& rng, int size, int depth);

// Any syntactically valid term over all three dialects; not typed.
Process random_term(Rng& rng, int depth);

// A closed, session-typed process: k sessions, each implemented on both
// ends by two sequential threads that interleave their actions at random.
// Payloads are `end`, carried by the free name n.
Process random_session_process(Rng& rng, int sessions, int depth);

}  // namespace spi
