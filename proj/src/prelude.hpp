#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "parse.hpp"
#include "typing.hpp"

namespace lacuna {

// A library definition, type-checked against its declared signature at load
// time. `scheme_arg` is the zero-based parameter position enumerated over
// in-scope variables during generation, or -1 for ordinary functions.
struct PreludeFn {
  std::string name;
  Scheme scheme;
  std::vector<std::string> params;
  TermPtr body;
  int scheme_arg = -1;
  bool recursive = false;
};

struct Prelude {
  std::vector<DataDecl> datatypes;
  std::vector<PreludeFn> fns;
  TypeEnv env;  // datatypes + every definition's scheme

  const PreludeFn* find(const std::string& name) const;
  CtorArities ctor_arities() const;
};

// A `USE` entry resolved against the library: the definition plus the
// (possibly annotation-specialized) scheme the search should instantiate.
struct ResolvedUse {
  const PreludeFn* fn;
  Scheme scheme;
};

class PreludeError : public TypeError {
 public:
  using TypeError::TypeError;
};

// Parses and type-checks a library file. Definitions may refer to themselves
// and to earlier definitions; each body is checked against its signature with
// the signature's type variables held rigid.
Prelude load_prelude(const std::string& source);

// Resolves one USE name, validating any annotation as an instance of the
// definition's general scheme. Throws PreludeError for unknown names or
// annotations that do not specialize the scheme.
ResolvedUse resolve_use(const Prelude& p, const UseEntry& use);

// Parses a denylist file: one pattern per line, `--` comments and blank
// lines skipped.
std::vector<TermPtr> load_denylist(const std::string& text,
                                   const CtorArities& ctors);

const std::string& default_prelude_source();
const std::string& default_denylist_source();
const Prelude& default_prelude();
const std::vector<TermPtr>& default_denylist();

}  // namespace lacuna
