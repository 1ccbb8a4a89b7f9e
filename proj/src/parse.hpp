#pragma once

#include <map>
#include <string>

#include "ast.hpp"

namespace lacuna {

struct ParseError : std::runtime_error {
  ParseError(int line, int col, const std::string& msg);
  int line;
  int col;
};

// Constructor name -> argument count, used to build saturated Ctor nodes
// while parsing. builtin_ctor_arities() covers Bool, Nat, List, Maybe, Tree;
// data declarations inside a file extend the map for the rest of that file.
using CtorArities = std::map<std::string, int>;
CtorArities builtin_ctor_arities();

Program parse_program(const std::string& source);
Program parse_program(const std::string& source, const CtorArities& ctors);

// A stand-alone term, e.g. a CLI expression. Holes written `_` get fresh ids
// after the explicitly numbered ones; a numbered hole may appear only once.
TermPtr parse_term(const std::string& source, const CtorArities& ctors);

// Like parse_term, but a numbered hole may repeat: denylist patterns use a
// repeated _N to require structurally equal subterms.
TermPtr parse_pattern(const std::string& source, const CtorArities& ctors);

TypePtr parse_type(const std::string& source);

// The prelude is a multi-definition file: data declarations plus signed
// definitions, where `@scheme recursive-arg=N` ahead of a signature flags a
// recursion scheme and names its structurally recursive argument position.
struct PreludeDef {
  std::string name;
  TypePtr sig;
  std::vector<std::string> params;
  TermPtr body;
  int scheme_arg = -1;  // -1: not a recursion scheme
};

struct PreludeFile {
  std::vector<DataDecl> datatypes;
  std::vector<PreludeDef> defs;
};

PreludeFile parse_prelude(const std::string& source);

}  // namespace lacuna
