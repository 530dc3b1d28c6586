// Shorthands shared by the unit tests.
#pragma once

#include <string>

#include "sessionpi/ast.hpp"
#include "sessionpi/semantics.hpp"
#include "sessionpi/surface.hpp"

namespace spi::test {

inline Name nm(const std::string& s) { return Name{s, 0}; }
inline Process P(const std::string& s) { return parse_process(s); }
inline SessionType T(const std::string& s) { return parse_type(s); }
inline SessionCtx G(const std::string& s) { return s.empty() ? SessionCtx{} : parse_context(s); }

inline const char* kStuck = "new(x,y:!end.end){ new(w,z:!end.end){ out x(n).out w(n).0 | in z(t).in y(s).0 } }";
inline const char* kSwapped = "new(x,y:!end.end){ new(w,z:!end.end){ out x(n).out w(n).0 | in y(s).in z(t).0 } }";
inline const char* kP2 = "new(a1,b1:?end.end){ new(a2,b2:!end.end){ in a1(x).out a2(x).0 | out b1(n).in b2(z).0 } }";
inline const char* kP2Split =
    "new(a2,b2:!end.end){ new(a1,b1:?end.end){ in a1(x).out a2(x).0 | out b1(n).0 } | in b2(z).0 }";
inline const char* kSingle = "new(x,y:!end.end){ out x(n).0 | in y(s).0 }";

// Free dependency example: a2 sends what a1 received.
inline const char* kVdCtx =
    "a1:?(?end.end).end, a2:!(?end.end).end, b2:?(?end.end).end, b1:!(?end.end).end, n:end";
inline const char* kVd =
    "new(a0,b0:!end.end){ out a0(n).in a1(u).out a2(u).0 | in b0(v).( in b2(y).in y(x).0 | "
    "new(w,z:?end.end){ out b1(w).out z(n).0 } ) }";

inline bool same(const Process& a, const Process& b) { return congruent(a, b); }

}  // namespace spi::test
