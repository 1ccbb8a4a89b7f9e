#pragma once

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "ast.hpp"
#include "prelude.hpp"

namespace lacuna {

// ---------------------------------------------------------------------------
// Live evaluation: terms with holes evaluate as far as their determinate
// parts allow. Indeterminate spots (holes, applications and case scrutinees
// headed by holes) are carried in the result instead of failing, so expected
// outputs can later be pushed back through them.
// ---------------------------------------------------------------------------

struct Result;
using ResultPtr = std::shared_ptr<const Result>;

struct EnvNode;
using EnvPtr = std::shared_ptr<const EnvNode>;

// Persistent environment: lookup walks the chain, innermost binding first.
struct EnvNode {
  std::string name;
  ResultPtr value;
  EnvPtr next;
};

EnvPtr env_bind(const EnvPtr& env, std::string name, ResultPtr value);
ResultPtr env_lookup(const EnvPtr& env, const std::string& name);

struct Result {
  // A fully applied constructor; arguments are results, not values, so a
  // constructor may carry indeterminate pieces.
  struct Ctor {
    std::string name;
    std::vector<ResultPtr> args;
  };
  // A lambda closed over its environment.
  struct Closure {
    EnvPtr env;
    std::string param;
    TermPtr body;
  };
  // A hole, closed over the environment it was reached in.
  struct Hole {
    EnvPtr env;
    int id;
  };
  // An application whose head is indeterminate; never built with a closure
  // or saturated library function at the head.
  struct App {
    ResultPtr fn;
    ResultPtr arg;
  };
  // A pattern match stuck on an indeterminate scrutinee. Branch bodies stay
  // as unevaluated terms closed over env.
  struct Case {
    ResultPtr scrutinee;
    std::vector<CaseBranch> branches;
    EnvPtr env;
  };
  // A partially applied library function.
  struct Prelude {
    std::string name;
    std::vector<ResultPtr> args;
  };
  // A function known only by an input/output table, as written in asserts.
  // Applying it outside the table gives Any.
  struct ExFun {
    std::vector<std::pair<ExPtr, ExPtr>> table;
  };
  // An unconstrained value: satisfies every example. Produced by applying an
  // ExFun outside its table.
  struct Any {};

  std::variant<Ctor, Closure, Hole, App, Case, Prelude, ExFun, Any> node;
};

ResultPtr rctor(std::string name, std::vector<ResultPtr> args);
ResultPtr rclosure(EnvPtr env, std::string param, TermPtr body);
ResultPtr rhole(EnvPtr env, int id);
ResultPtr rapp(ResultPtr fn, ResultPtr arg);
ResultPtr rcase(ResultPtr scrutinee, std::vector<CaseBranch> branches,
                EnvPtr env);
ResultPtr rprelude(std::string name, std::vector<ResultPtr> args);
ResultPtr rexfun(std::vector<std::pair<ExPtr, ExPtr>> table);
ResultPtr rany();

const Result::Ctor* result_as_ctor(const ResultPtr& r);
const Result::Closure* result_as_closure(const ResultPtr& r);
const Result::Hole* result_as_hole(const ResultPtr& r);
const Result::App* result_as_app(const ResultPtr& r);
const Result::Case* result_as_case(const ResultPtr& r);
const Result::Prelude* result_as_prelude(const ResultPtr& r);
const Result::ExFun* result_as_exfun(const ResultPtr& r);
bool result_is_any(const ResultPtr& r);

bool result_equal(const ResultPtr& a, const ResultPtr& b);

// True when the result denotes exactly one value: no holes, stuck spots, or
// Any anywhere, including closure bodies and the environments they need.
bool is_ground(const ResultPtr& r);

// Ground constructor trees and tables convert to example values; closures and
// anything indeterminate do not.
std::optional<ExPtr> result_to_example(const ResultPtr& r);
ResultPtr example_to_result(const ExPtr& e);

struct EvalBudget {
  int step_limit = 100000;
  int recursion_fuel = 32;  // unrollings of each recursive library function
};

class EvalExhausted : public std::runtime_error {
 public:
  enum class Reason { Steps, Fuel };
  explicit EvalExhausted(Reason r)
      : std::runtime_error(r == Reason::Steps ? "step limit exhausted"
                                              : "recursion fuel exhausted"),
        reason(r) {}
  Reason reason;
};

// Ill-formed evaluation (unbound variable, applying data); type-checked
// programs never reach these.
class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One evaluation's budget accounting, shared by every eval/apply/resume call
// made with it. Exhaustion throws EvalExhausted and means "unknown", never
// "wrong".
struct EvalState {
  explicit EvalState(const Prelude& prelude, EvalBudget budget = {})
      : prelude(prelude), budget(budget) {}
  const Prelude& prelude;
  EvalBudget budget;
  int steps_used = 0;
  std::map<std::string, int> unrolls_left;  // per recursive library function
};

ResultPtr eval(EvalState& st, const EnvPtr& env, const TermPtr& t);
ResultPtr apply_result(EvalState& st, const ResultPtr& f, const ResultPtr& a);

// Replaces holes by their fillings, without the well-formedness checks of
// fill(): holes absent from the map stay, fillings are not re-entered.
TermPtr subst_holes(const TermPtr& t, const std::map<int, TermPtr>& fillings);

// Pushes fillings through an already-computed result, reducing anything the
// fillings unblock: resume(eval(t), f) agrees with eval(fill(t, f)).
ResultPtr resume(EvalState& st, const ResultPtr& r,
                 const std::map<int, TermPtr>& fillings);

enum class Sat { Yes, No, NotGround };

// Does this result match the example? NotGround when an indeterminate piece
// stands where the example demands a value. Function examples are checked by
// applying the result to each table input.
Sat satisfies(EvalState& st, const ResultPtr& r, const ExPtr& ex);

// Holes whose value the asserts are waiting on — appearing as a stuck
// scrutinee's head or at the head of a stuck application in some assert's
// live evaluation — in first-encountered order, followed by the candidate's
// remaining holes in id order.
std::vector<int> blocking_holes(const Prelude& prelude, const TermPtr& sketch,
                                const std::vector<Assert>& asserts,
                                const EvalBudget& budget);

std::string pretty_result(const ResultPtr& r);

}  // namespace lacuna
