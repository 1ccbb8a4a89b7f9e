#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace lacuna {

// ---------------------------------------------------------------------------
// Types. Metavariables are Var nodes whose name starts with '?'; every other
// Var is a rigid (universally quantified) type variable.
// ---------------------------------------------------------------------------

struct Type;
using TypePtr = std::shared_ptr<const Type>;

struct Type {
  struct Var {
    std::string name;
  };
  struct Arrow {
    TypePtr from;
    TypePtr to;
  };
  struct Data {
    std::string name;
    std::vector<TypePtr> args;
  };

  std::variant<Var, Arrow, Data> node;
};

TypePtr tvar(std::string name);
TypePtr tarrow(TypePtr from, TypePtr to);
TypePtr tdata(std::string name, std::vector<TypePtr> args = {});

bool is_meta(const std::string& name);
bool type_equal(const TypePtr& a, const TypePtr& b);

const Type::Var* as_var(const TypePtr& t);
const Type::Arrow* as_arrow(const TypePtr& t);
const Type::Data* as_data(const TypePtr& t);

// Splits a1 -> a2 -> ... -> r into ([a1, a2, ...], r).
std::pair<std::vector<TypePtr>, TypePtr> peel_arrows(const TypePtr& t);

// ---------------------------------------------------------------------------
// Terms. Ctor nodes are saturated; Case branches cover the scrutinee's
// constructors in declaration order (enforced when a program is type checked,
// not by construction).
// ---------------------------------------------------------------------------

struct Term;
using TermPtr = std::shared_ptr<const Term>;

struct CaseBranch {
  std::string ctor;
  std::vector<std::string> binders;
  TermPtr body;
};

struct Term {
  struct Var {
    std::string name;
  };
  struct Lam {
    std::string binder;
    TermPtr body;
  };
  struct App {
    TermPtr fn;
    TermPtr arg;
  };
  struct Ctor {
    std::string name;
    std::vector<TermPtr> args;
  };
  struct Case {
    TermPtr scrutinee;
    std::vector<CaseBranch> branches;
  };
  struct Hole {
    int id;
  };

  std::variant<Var, Lam, App, Ctor, Case, Hole> node;
};

TermPtr mk_var(std::string name);
TermPtr mk_lam(std::string binder, TermPtr body);
TermPtr mk_app(TermPtr fn, TermPtr arg);
TermPtr mk_apps(TermPtr fn, const std::vector<TermPtr>& args);
TermPtr mk_ctor(std::string name, std::vector<TermPtr> args = {});
TermPtr mk_case(TermPtr scrutinee, std::vector<CaseBranch> branches);
TermPtr mk_hole(int id);

const Term::Var* term_as_var(const TermPtr& t);
const Term::Lam* term_as_lam(const TermPtr& t);
const Term::App* term_as_app(const TermPtr& t);
const Term::Ctor* term_as_ctor(const TermPtr& t);
const Term::Case* term_as_case(const TermPtr& t);
const Term::Hole* term_as_hole(const TermPtr& t);

bool term_equal(const TermPtr& a, const TermPtr& b);

// Hole ids in left-to-right source order (each id appears at most once in a
// well-formed term).
std::vector<int> holes(const TermPtr& t);

struct UnknownHole : std::runtime_error {
  explicit UnknownHole(int id);
  int id;
};

struct HoleIdClash : std::runtime_error {
  explicit HoleIdClash(int id);
  int id;
};

// Replaces hole `id` with `replacement`. The replacement's own holes must be
// fresh with respect to the rest of `t`.
TermPtr fill(const TermPtr& t, int id, const TermPtr& replacement);

// Applies f to every subterm of t, outermost first.
void for_each_subterm(const TermPtr& t, const std::function<void(const TermPtr&)>& f);

// ---------------------------------------------------------------------------
// Example values: constructor trees, finite function tables, and a top
// "don't care" that matches anything.
// ---------------------------------------------------------------------------

struct ExampleValue;
using ExPtr = std::shared_ptr<const ExampleValue>;

struct ExampleValue {
  struct Ctor {
    std::string name;
    std::vector<ExPtr> args;
  };
  struct Fun {
    std::vector<std::pair<ExPtr, ExPtr>> table;
  };
  struct Top {};

  std::variant<Ctor, Fun, Top> node;
};

ExPtr ex_ctor(std::string name, std::vector<ExPtr> args = {});
ExPtr ex_fun(std::vector<std::pair<ExPtr, ExPtr>> table);
ExPtr ex_top();

const ExampleValue::Ctor* ex_as_ctor(const ExPtr& e);
const ExampleValue::Fun* ex_as_fun(const ExPtr& e);
bool ex_is_top(const ExPtr& e);

bool ex_equal(const ExPtr& a, const ExPtr& b);

// Structural meet: fails (nullopt) when the two values conflict, e.g. distinct
// constructors, or function tables that disagree on an input.
std::optional<ExPtr> ex_meet(const ExPtr& a, const ExPtr& b);

// ---------------------------------------------------------------------------
// Programs.
// ---------------------------------------------------------------------------

struct CtorDecl {
  std::string name;
  std::vector<TypePtr> args;
};

struct DataDecl {
  std::string name;
  std::vector<std::string> params;
  std::vector<CtorDecl> ctors;
};

struct UseEntry {
  std::string name;
  TypePtr annotation;  // null unless the pragma pins a specialized variant
};

struct Assert {
  std::string fn;
  std::vector<ExPtr> args;
  ExPtr expected;
};

struct Program {
  std::vector<UseEntry> uses;
  std::vector<DataDecl> datatypes;
  std::string sig_name;   // empty when the file had no signature
  TypePtr sig_type;       // null when the file had no signature
  std::vector<std::string> params;
  TermPtr body;           // null when the file had no definition
  std::vector<Assert> asserts;

  // The definition as a single term: \params... -> body.
  TermPtr sketch() const;
};

}  // namespace lacuna
