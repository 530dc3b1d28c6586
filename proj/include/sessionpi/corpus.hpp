// Annotated example files: a .spi source plus a .expect sidecar of
// `key = value` lines with the verdicts the tools should reach.
#pragma once

#include <map>
#include <string>
#include <vector>

#include "sessionpi/ast.hpp"
#include "sessionpi/surface.hpp"

namespace spi {

using Expectations = std::map<std::string, std::string>;

// Blank lines and `#` comments are skipped; values may be double-quoted.
// Throws ParseError on a line without `=` or a repeated key.
Expectations parse_expect(const std::string& text);

// The bare process of a file, else the one named `main`, else the first.
Process main_process(const Program& prog);
// Context of a file: the one named `main`, else the first, else empty.
SessionCtx main_context(const Program& prog);

std::string read_file(const std::string& path);

struct CorpusEntry {
  std::string name;  // file stem
  std::string path;
  Dialect dialect = Dialect::Session;
  Process process;
  SessionCtx ctx;  // `ctx` key of the sidecar, else from the source
  Expectations expect;
};

CorpusEntry load_entry(const std::string& spi_path);
// All .spi files of a directory, sorted by name.
std::vector<CorpusEntry> load_corpus(const std::string& dir);

struct EntryResult {
  Expectations actual;                  // every key the runner knows about
  std::vector<std::string> mismatches;  // "key: expected X, got Y"
};

// Keys: st, ll, in_L, k1, min_degree, oracle, uncomposable, rewrite1, rewrite2.
// Only keys present in the sidecar are compared (plus dialect-independent
// sanity keys when the sidecar names them).
EntryResult run_entry(const CorpusEntry& e);

}  // namespace spi
