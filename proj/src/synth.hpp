#pragma once

#include <chrono>
#include <map>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "ast.hpp"
#include "eval.hpp"
#include "prelude.hpp"
#include "typing.hpp"
#include "uneval.hpp"

namespace lacuna {

// ---------------------------------------------------------------------------
// Weight-ordered enumerative search over hole fillings, pruned (in EP mode)
// by pushing the asserts' outputs backward through partial evaluations.
// ---------------------------------------------------------------------------

// Search order: each application-spine argument costs 1, a pattern match
// costs 1 plus twice its scrutinee, a call to a recursion scheme costs 1
// extra; variables, constructor heads, lambdas and holes are free.
int weigh(const Prelude& prelude, const TermPtr& t);

struct SynthesisConfig {
  int timeout_ms = 5000;
  EvalBudget budget{};
  PropagationCaps caps{};
  bool ep = true;  // propagate examples through partial candidates
  // Patterns rejected as redundant; null means the built-in list.
  const std::vector<TermPtr>* denylist = nullptr;
  std::size_t max_queue = 1u << 18;  // beyond this, worst candidates drop
};

// True unless some subterm matches a denylist pattern, where pattern holes
// are wildcards (repeated ids must match equal subterms) and binders match
// up to renaming.
bool normal_form_ok(const TermPtr& t, const std::vector<TermPtr>& denylist);

// Structural redex check: no applied lambda, no pattern match on a
// constructor or lambda. Holes are opaque, so this is decidable per term.
bool beta_eta_ok(const TermPtr& t);

// Match discipline: no case whose scrutinee is itself a case (the commuting
// conversion pushes it into the branches), and no case re-scrutinizing a
// variable an enclosing case already matched while it stays unshadowed —
// inside that branch the variable's shape is known and the match reduces.
bool match_discipline_ok(const TermPtr& t);

// A queued partial program. `constraints` is the latest propagation verdict;
// after an Indeterminate verdict `guess` stays set and closed descendants
// rest entirely on direct verification.
struct Candidate {
  TermPtr term;  // full sketch: \params... -> body
  std::map<int, HoleCtx> holes;
  Subst subst;
  int next_meta = 0;
  int next_hole = 0;
  PropagationOutcome constraints;
  bool guess = false;
  int weight = 0;
  long long seqno = 0;
  std::vector<std::pair<int, TermPtr>> steps;  // fill order, for display
};

struct SynthesisStats {
  long long popped = 0;     // expansion-rule invocations
  long long enqueued = 0;
  long long pruned = 0;     // fillings refuted by propagation
  long long denylisted = 0;
  long long redexes = 0;    // fillings rejected by the structural form check
  long long rematches = 0;  // fillings rejected by the match discipline
  long long ill_typed = 0;
  long long duplicates = 0;  // canonical-key collisions (0 = unique paths)
  long long guesses = 0;     // children pushed under an indeterminate verdict
  long long verify_failures = 0;
  bool weights_monotone = true;  // popped weights never decreased
  bool queue_overflow = false;
  double elapsed_ms = 0.0;
};

struct Solution {
  // Every filling in the order it was applied; later entries may plug holes
  // introduced by earlier ones.
  std::vector<std::pair<int, TermPtr>> steps;
  // The sketch's own holes mapped to their fully composed, closed fillings.
  std::map<int, TermPtr> fillings;
  TermPtr term;  // the closed program
  int weight = 0;
};

struct SynthesisResult {
  enum class Kind { Solved, Timeout, NoSolution };
  Kind kind = Kind::NoSolution;
  Solution solution;  // meaningful only when Solved
  SynthesisStats stats;
};

// Generation context shared by every hole of one problem: the USE-resolved
// library slice and the datatypes eligible for constructors/eliminators.
struct GenEnv {
  const Prelude* prelude = nullptr;
  const TypeEnv* types = nullptr;
  std::vector<ResolvedUse> uses;
  std::vector<std::string> datatypes;  // reachability order
};

// Everything that could fill the hole, in emission order: in-scope variables
// and library functions fully applied to fresh holes (arrow-typed argument
// positions wrapped in lambdas), constructors, and one eliminator per
// datatype with a fresh scrutinee hole. Recursion schemes take an in-scope
// variable, never a hole, at their designated argument. Fresh hole ids count
// up from `next_hole`, restarting there for each alternative.
std::vector<TermPtr> gen_fillings(const HoleCtx& ctx, const GenEnv& g,
                                  const Subst& subst, int next_hole);

// A term key invariant under hole renumbering; two candidates collide iff
// they are the same program modulo the order holes were allocated in.
std::string canonical_key(const TermPtr& t);

// The search engine, exposed piecewise so tests can drive single steps.
class Synthesizer {
 public:
  Synthesizer(const Program& p, const Prelude& prelude, SynthesisConfig cfg);

  // The initial candidate: the sketch itself, constraint-checked in EP mode.
  Candidate init();
  // One EXPAND step: children of `c` surviving form, type, and (in EP mode)
  // propagation checks. Does not touch the queue.
  std::vector<Candidate> expand(const Candidate& c);
  // Blocking holes first, then remaining holes by id.
  int select_hole(const Candidate& c) const;

  SynthesisResult run();

  const GenEnv& gen_env() const { return genv_; }
  const TypeEnv& types() const { return types_; }

 private:
  bool verified(const TermPtr& closed) const;
  PropagationOutcome propagate_term(const TermPtr& t) const;
  bool expired() const;
  std::pair<int, int> assert_metas_{0, 0};  // metas owned by the examples

  const Program& program_;
  const Prelude& prelude_;
  SynthesisConfig cfg_;
  TypeEnv types_;
  GenEnv genv_;
  const std::vector<TermPtr>* denylist_;
  std::vector<int> sketch_holes_;
  long long next_seq_ = 0;
  SynthesisStats stats_;
  std::chrono::steady_clock::time_point deadline_;
};

// Full search. Throws TypeError/PreludeError for ill-formed problems and
// std::invalid_argument for vacuous ones (no asserts, or every assert's
// expectation a top-level don't-care).
SynthesisResult synthesize(const Program& p, const Prelude& prelude,
                           const SynthesisConfig& cfg = {});

}  // namespace lacuna
