#pragma once

#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "eval.hpp"

namespace lacuna {

// A demand on one hole: under these captured bindings, whatever fills the
// hole must evaluate to something matching `expected`.
struct World {
  std::map<std::string, ResultPtr> env;
  ExPtr expected;
};

// Innermost binding wins when the chain shadows a name.
std::map<std::string, ResultPtr> env_to_map(const EnvPtr& env);

bool world_env_equal(const World& a, const World& b);
bool world_env_ground(const World& w);

// ---------------------------------------------------------------------------
// Constraint formulas over hole demands.
// ---------------------------------------------------------------------------

enum class IndetReason { Diverged, TooLarge };

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
  struct Atom {
    int hole;
    World world;
  };
  struct And {
    std::vector<FormulaPtr> parts;
  };
  struct Or {
    std::vector<FormulaPtr> parts;
  };
  struct True {};
  struct False {};
  // A constraint that exists but could not be computed within budget; it never
  // justifies pruning.
  struct Indet {
    IndetReason reason;
  };

  std::variant<Atom, And, Or, True, False, Indet> node;
  int size = 0;  // number of Atoms in the whole formula
};

struct PropagationCaps {
  int max_atoms = 10000;     // formula size cap, applied as formulas are built
  int max_disjuncts = 4096;  // width cap for disjunctive normal form
};

FormulaPtr f_true();
FormulaPtr f_false();
FormulaPtr f_indet(IndetReason reason);
FormulaPtr f_atom(int hole, World world);
// Three-valued connectives: a False child settles a conjunction and a True
// child settles a disjunction even when a sibling is Indet; any other Indet
// child makes the whole formula Indet, so Indet never hides below a
// connective. Oversized results collapse to Indet(TooLarge).
FormulaPtr f_and(std::vector<FormulaPtr> parts, const PropagationCaps& caps);
FormulaPtr f_or(std::vector<FormulaPtr> parts, const PropagationCaps& caps);

const Formula::Atom* f_as_atom(const FormulaPtr& f);
const Formula::And* f_as_and(const FormulaPtr& f);
const Formula::Or* f_as_or(const FormulaPtr& f);
const Formula::Indet* f_as_indet(const FormulaPtr& f);
bool f_is_true(const FormulaPtr& f);
bool f_is_false(const FormulaPtr& f);

inline int formula_size(const FormulaPtr& f) { return f->size; }

// Disjunctive normal form: each disjunct is a conjunction of atoms. True is
// one empty disjunct, False is none.
struct Dnf {
  bool too_large = false;
  std::vector<std::vector<Formula::Atom>> disjuncts;
};

Dnf to_dnf(const FormulaPtr& f, const PropagationCaps& caps);

// ---------------------------------------------------------------------------
// Outcomes.
// ---------------------------------------------------------------------------

// One way to satisfy a candidate: every World of every hole must be met.
using HoleWorlds = std::map<int, std::vector<World>>;

struct PropagationOutcome {
  enum class Kind { Consistent, Inconsistent, Indeterminate };
  Kind kind;
  std::vector<HoleWorlds> assignments;         // Consistent: at least one
  IndetReason reason = IndetReason::Diverged;  // Indeterminate only
};

PropagationOutcome outcome_consistent(std::vector<HoleWorlds> assignments);
PropagationOutcome outcome_inconsistent();
PropagationOutcome outcome_indeterminate(IndetReason reason);

// ---------------------------------------------------------------------------
// Operations.
// ---------------------------------------------------------------------------

// Pushes an expected value backwards through a partial result. Stuck-case
// branch bodies are evaluated with `st`, so fuel and steps are shared with
// the forward evaluation that produced `r`. Budget exhaustion surfaces as
// Indet(Diverged), never as an exception.
FormulaPtr uneval(EvalState& st, const ResultPtr& r, const ExPtr& ex,
                  const PropagationCaps& caps);

PropagationOutcome merge(const FormulaPtr& f, const PropagationCaps& caps);

// Evaluates `candidate` applied to each assert's inputs, unevaluates against
// the expected outputs, conjoins the formulas, and merges. Each assert gets a
// fresh budget.
PropagationOutcome propagate(const Prelude& prelude, const TermPtr& candidate,
                             const std::vector<Assert>& asserts,
                             const EvalBudget& budget,
                             const PropagationCaps& caps);

// Whether `fillings` meets the demand `w` places on `hole`: the hole's
// filling, evaluated under w's bindings (themselves resumed with `fillings`),
// must satisfy w.expected. NotGround when holes remain or budget runs out.
Sat world_satisfied(EvalState& st, const World& w, int hole,
                    const std::map<int, TermPtr>& fillings);

// Yes only when every World of every hole in `hw` is met.
Sat assignment_satisfied(EvalState& st, const HoleWorlds& hw,
                         const std::map<int, TermPtr>& fillings);

std::string pretty_world(const World& w);
std::string pretty_formula(const FormulaPtr& f);
std::string pretty_outcome(const PropagationOutcome& o);

}  // namespace lacuna
