// Concrete syntax: lexer, parser and pretty printer.
//
//   P ::= 0 | out x(v,..).P | in x(y,..).P | sel x l.P | bra x { l: P, .. }
//       | P | P | new(x,y:T){P} | nu x{P} | nu x:T{P} | fwd x y
//       | case v { l(y): P, .. } | (P)
//   v ::= x | l(v)
//   T ::= end | !T.T | ?T.T | !^n T.T | ?^n T.T | +{l:T,..} | &{l:T,..} | (T) | Alias
//
// A file is a sequence of `process N = P;`, `type N = T;`, `context N = x:T, ..;`
// declarations, or a single bare process. `#` starts a comment.
#pragma once

#include <string>
#include <vector>

#include "sessionpi/ast.hpp"

namespace spi {

enum class Dialect { Session, LL, Poly, Any };

struct Program {
  std::vector<std::pair<std::string, Process>> processes;
  std::vector<std::pair<std::string, SessionType>> types;
  std::vector<std::pair<std::string, SessionCtx>> contexts;
};

Program parse_program(const std::string& text, Dialect d = Dialect::Any);
Process parse_process(const std::string& text, Dialect d = Dialect::Any);
SessionType parse_type(const std::string& text);
SessionCtx parse_context(const std::string& text);

// Checks that only constructs of the dialect occur; throws ParseError.
void check_dialect(const Process& p, Dialect d);

std::string pretty(const Process& p);
std::string pretty(const SessionType& t);
std::string pretty(const LLType& a);
std::string pretty(const SessionCtx& c);
std::string pretty(const LLCtx& c);

}  // namespace spi
