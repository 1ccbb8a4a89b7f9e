#pragma once

#include <map>
#include <string>
#include <vector>

#include "ast.hpp"

namespace lacuna {

// ---------------------------------------------------------------------------
// Rank-1 Hindley–Milner over the term language. Unification metavariables are
// Type::Var nodes named "?N"; rigid variables (plain lowercase names) only
// unify with themselves.
// ---------------------------------------------------------------------------

struct TypeError : std::runtime_error {
  explicit TypeError(const std::string& msg) : std::runtime_error(msg) {}
};

struct OccursCheck : TypeError {
  explicit OccursCheck(const std::string& msg) : TypeError(msg) {}
};

struct UnknownVariable : TypeError {
  explicit UnknownVariable(const std::string& name)
      : TypeError("unknown variable '" + name + "'"), name(name) {}
  std::string name;
};

// A closed candidate still carrying free metavariables is dead generality; the
// synthesizer rejects it rather than defaulting the metavariable.
struct AmbiguousType : TypeError {
  explicit AmbiguousType(const std::string& msg) : TypeError(msg) {}
};

struct Scheme {
  std::vector<std::string> vars;  // universally quantified rigid variables
  TypePtr body;
};

struct Subst {
  std::map<std::string, TypePtr> map;

  // Follows bindings at the head only: the result is not a metavariable bound
  // in this substitution, but may contain bound metavariables deeper in.
  TypePtr resolve(TypePtr t) const;
  // Full application: the result contains no bound metavariables.
  TypePtr apply(const TypePtr& t) const;
};

enum class UnifyOutcome { Ok, Mismatch, Occurs };

UnifyOutcome unify(Subst& s, const TypePtr& a, const TypePtr& b);

// Ok → true; Mismatch/Occurs → false with s possibly partially extended, so
// callers screening candidates must pass a scratch copy.
bool try_unify(Subst& s, const TypePtr& a, const TypePtr& b);

// Per-hole typing context: the goal type and every binder in scope at the
// hole, outermost first (innermost last). depth counts enclosing binding
// constructs. Goal and env are fully substituted when handed out.
struct HoleCtx {
  int id = -1;
  TypePtr goal;
  std::vector<std::pair<std::string, TypePtr>> env;
  int depth = 0;
};

// Datatype declarations plus the global (prelude) bindings visible to a
// program. Built by the prelude loader and extended by a file's own
// declarations.
struct TypeEnv {
  std::map<std::string, Scheme> globals;
  std::map<std::string, DataDecl> datatypes;
  // constructor name -> (datatype name, declared argument types)
  std::map<std::string, std::pair<std::string, std::vector<TypePtr>>> ctors;

  void add_datatype(const DataDecl& d);
  const DataDecl* datatype_of_ctor(const std::string& ctor) const;
};

struct InferResult {
  std::map<int, HoleCtx> holes;
  Subst subst;
  int next_meta = 0;  // first unused metavariable index
  // Metavariables in this range instantiate the signature's rigid variables
  // once per assert. An example like `f [] <== Nothing` rightly leaves its
  // instance open, so these say nothing about the candidate term's own type.
  int assert_metas_begin = 0;
  int assert_metas_end = 0;
};

TypePtr fresh_meta(int& next_meta);
TypePtr instantiate(const Scheme& s, int& next_meta);

// Checks the program's sketch against its signature and its asserts against
// the signature's argument/result types; returns one context per hole.
InferResult infer(const TypeEnv& env, const Program& p);

// Checks a filling against one hole's context. Returns contexts for the
// filling's holes (env extended by binders the filling introduces); solved
// metavariables accumulate into `subst`, which the caller must then re-apply
// to any other contexts it holds.
std::map<int, HoleCtx> check_filling_type(const HoleCtx& ctx, const TermPtr& hf,
                                          const TypeEnv& env, Subst& subst,
                                          int& next_meta);

// True when t contains no metavariable unresolved under s.
bool fully_resolved(const Subst& s, const TypePtr& t);

}  // namespace lacuna
