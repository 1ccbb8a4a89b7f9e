#include "uneval.hpp"

#include <algorithm>
#include <optional>
#include <sstream>
#include <utility>

#include "prelude.hpp"
#include "pretty.hpp"

namespace lacuna {

namespace {

FormulaPtr mk(Formula f) { return std::make_shared<const Formula>(std::move(f)); }

}  // namespace

FormulaPtr f_true() {
  static const FormulaPtr t = mk(Formula{Formula::True{}, 0});
  return t;
}

FormulaPtr f_false() {
  static const FormulaPtr f = mk(Formula{Formula::False{}, 0});
  return f;
}

FormulaPtr f_indet(IndetReason reason) {
  return mk(Formula{Formula::Indet{reason}, 0});
}

FormulaPtr f_atom(int hole, World world) {
  return mk(Formula{Formula::Atom{hole, std::move(world)}, 1});
}

const Formula::Atom* f_as_atom(const FormulaPtr& f) {
  return std::get_if<Formula::Atom>(&f->node);
}
const Formula::And* f_as_and(const FormulaPtr& f) {
  return std::get_if<Formula::And>(&f->node);
}
const Formula::Or* f_as_or(const FormulaPtr& f) {
  return std::get_if<Formula::Or>(&f->node);
}
const Formula::Indet* f_as_indet(const FormulaPtr& f) {
  return std::get_if<Formula::Indet>(&f->node);
}
bool f_is_true(const FormulaPtr& f) {
  return std::holds_alternative<Formula::True>(f->node);
}
bool f_is_false(const FormulaPtr& f) {
  return std::holds_alternative<Formula::False>(f->node);
}

FormulaPtr f_and(std::vector<FormulaPtr> parts, const PropagationCaps& caps) {
  std::vector<FormulaPtr> flat;
  std::optional<IndetReason> indet;
  for (FormulaPtr& p : parts) {
    if (f_is_false(p)) return f_false();
    if (f_is_true(p)) continue;
    if (const auto* in = f_as_indet(p)) {
      if (!indet) indet = in->reason;
      continue;
    }
    if (const auto* a = f_as_and(p)) {  // children are already flat
      flat.insert(flat.end(), a->parts.begin(), a->parts.end());
      continue;
    }
    flat.push_back(std::move(p));
  }
  if (indet) return f_indet(*indet);
  if (flat.empty()) return f_true();
  if (flat.size() == 1) return flat[0];
  int atoms = 0;
  for (const FormulaPtr& p : flat) atoms += p->size;
  if (atoms > caps.max_atoms) return f_indet(IndetReason::TooLarge);
  return mk(Formula{Formula::And{std::move(flat)}, atoms});
}

FormulaPtr f_or(std::vector<FormulaPtr> parts, const PropagationCaps& caps) {
  std::vector<FormulaPtr> flat;
  std::optional<IndetReason> indet;
  for (FormulaPtr& p : parts) {
    if (f_is_true(p)) return f_true();
    if (f_is_false(p)) continue;
    if (const auto* in = f_as_indet(p)) {
      if (!indet) indet = in->reason;
      continue;
    }
    if (const auto* o = f_as_or(p)) {
      flat.insert(flat.end(), o->parts.begin(), o->parts.end());
      continue;
    }
    flat.push_back(std::move(p));
  }
  if (indet) return f_indet(*indet);
  if (flat.empty()) return f_false();
  if (flat.size() == 1) return flat[0];
  int atoms = 0;
  for (const FormulaPtr& p : flat) atoms += p->size;
  if (atoms > caps.max_atoms) return f_indet(IndetReason::TooLarge);
  return mk(Formula{Formula::Or{std::move(flat)}, atoms});
}

Dnf to_dnf(const FormulaPtr& f, const PropagationCaps& caps) {
  Dnf out;
  if (f_is_false(f)) return out;
  if (f_is_true(f)) {
    out.disjuncts.push_back({});
    return out;
  }
  if (const auto* a = f_as_atom(f)) {
    out.disjuncts.push_back({*a});
    return out;
  }
  if (const auto* o = f_as_or(f)) {
    for (const FormulaPtr& p : o->parts) {
      Dnf sub = to_dnf(p, caps);
      if (sub.too_large) return sub;
      for (auto& d : sub.disjuncts) {
        out.disjuncts.push_back(std::move(d));
        if (static_cast<int>(out.disjuncts.size()) > caps.max_disjuncts) {
          out.disjuncts.clear();
          out.too_large = true;
          return out;
        }
      }
    }
    return out;
  }
  if (const auto* a = f_as_and(f)) {
    out.disjuncts.push_back({});
    for (const FormulaPtr& p : a->parts) {
      Dnf sub = to_dnf(p, caps);
      if (sub.too_large) return sub;
      std::vector<std::vector<Formula::Atom>> next;
      for (const auto& left : out.disjuncts) {
        for (const auto& right : sub.disjuncts) {
          next.push_back(left);
          auto& d = next.back();
          d.insert(d.end(), right.begin(), right.end());
          if (static_cast<int>(next.size()) > caps.max_disjuncts) {
            out.disjuncts.clear();
            out.too_large = true;
            return out;
          }
        }
      }
      out.disjuncts = std::move(next);
    }
    return out;
  }
  // Indet: the connectives float it to the top, so callers check before
  // converting; answer "too large" rather than invent disjuncts.
  out.too_large = true;
  return out;
}

// ---------------------------------------------------------------------------
// Worlds.
// ---------------------------------------------------------------------------

std::map<std::string, ResultPtr> env_to_map(const EnvPtr& env) {
  std::map<std::string, ResultPtr> out;
  for (const EnvNode* n = env.get(); n; n = n->next.get())
    out.try_emplace(n->name, n->value);
  return out;
}

bool world_env_equal(const World& a, const World& b) {
  if (a.env.size() != b.env.size()) return false;
  auto it = b.env.begin();
  for (const auto& [name, value] : a.env) {
    if (name != it->first || !result_equal(value, it->second)) return false;
    ++it;
  }
  return true;
}

bool world_env_ground(const World& w) {
  for (const auto& [name, value] : w.env)
    if (!is_ground(value)) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Unevaluation.
// ---------------------------------------------------------------------------

namespace {

// Pattern binders of stuck-case branches are stood in for by projection
// holes (negative ids, empty environments). A projection never outlives the
// branch that introduced it: its atoms are folded into a constructor-shape
// demand on the scrutinee before the branch formula is returned, so only
// real holes reach callers.
struct Unevaluator {
  EvalState& st;
  const PropagationCaps& caps;
  int next_proj = -1;

  FormulaPtr go(const ResultPtr& r, const ExPtr& ex) {
    if (ex_is_top(ex)) return f_true();
    if (result_is_any(r)) return f_true();
    if (const auto* h = result_as_hole(r))
      return f_atom(h->id, World{env_to_map(h->env), ex});
    if (const auto* c = result_as_ctor(r)) {
      const auto* want = ex_as_ctor(ex);
      if (!want || c->name != want->name || c->args.size() != want->args.size())
        return f_false();
      std::vector<FormulaPtr> parts;
      parts.reserve(c->args.size());
      for (size_t i = 0; i < c->args.size(); ++i)
        parts.push_back(go(c->args[i], want->args[i]));
      return f_and(std::move(parts), caps);
    }
    if (result_as_app(r)) return stuck_app(r, ex);
    if (const auto* c = result_as_case(r)) return stuck_case(*c, ex);
    // Function values: closures, partial library applications, tables.
    if (const auto* want = ex_as_fun(ex)) return table_rows(r, *want);
    return f_false();
  }

  // A spine of pending arguments on a hole becomes a one-row nested function
  // table: the hole must map those arguments to `ex`.
  FormulaPtr stuck_app(const ResultPtr& r, const ExPtr& ex) {
    std::vector<ResultPtr> args;  // outermost (last-applied) first
    ResultPtr head = r;
    while (const auto* a = result_as_app(head)) {
      args.push_back(a->arg);
      head = a->fn;
    }
    const auto* h = result_as_hole(head);
    if (!h) return f_indet(IndetReason::Diverged);
    ExPtr want = ex;
    for (const ResultPtr& arg : args) {
      std::optional<ExPtr> in = result_to_example(arg);
      if (!in) return f_indet(IndetReason::Diverged);
      want = ex_fun({{*in, want}});
    }
    return f_atom(h->id, World{env_to_map(h->env), std::move(want)});
  }

  FormulaPtr stuck_case(const Result::Case& c, const ExPtr& ex) {
    std::vector<FormulaPtr> branches;
    branches.reserve(c.branches.size());
    for (const CaseBranch& b : c.branches) {
      std::vector<int> projs;
      EnvPtr env = c.env;
      for (const std::string& name : b.binders) {
        projs.push_back(next_proj);
        env = env_bind(env, name, rhole(nullptr, next_proj--));
      }
      ResultPtr body;
      try {
        body = eval(st, env, b.body);
      } catch (const EvalExhausted&) {
        branches.push_back(f_indet(IndetReason::Diverged));
        continue;
      }
      branches.push_back(fold_branch(c.scrutinee, b, projs, go(body, ex)));
    }
    return f_or(std::move(branches), caps);
  }

  // Turns a branch-body formula into: scrutinee matches this branch's
  // constructor, with each field pinned down by whatever the body demanded of
  // the corresponding projection. Projections of enclosing branches are not
  // ours to fold; they pass through as residual atoms.
  FormulaPtr fold_branch(const ResultPtr& scrutinee, const CaseBranch& b,
                         const std::vector<int>& projs, const FormulaPtr& bf) {
    if (f_as_indet(bf)) return bf;
    Dnf d = to_dnf(bf, caps);
    if (d.too_large) return f_indet(IndetReason::TooLarge);
    std::vector<FormulaPtr> out;
    for (const auto& disjunct : d.disjuncts) {
      std::vector<ExPtr> fields(projs.size(), ex_top());
      std::vector<FormulaPtr> residual;
      bool dead = false;
      for (const Formula::Atom& atom : disjunct) {
        auto it = std::find(projs.begin(), projs.end(), atom.hole);
        if (it == projs.end()) {
          residual.push_back(f_atom(atom.hole, atom.world));
          continue;
        }
        size_t i = static_cast<size_t>(it - projs.begin());
        std::optional<ExPtr> met = ex_meet(fields[i], atom.world.expected);
        if (!met) {
          dead = true;  // the branch body demands two different field values
          break;
        }
        fields[i] = *met;
      }
      if (dead) continue;
      std::vector<FormulaPtr> parts;
      parts.push_back(go(scrutinee, ex_ctor(b.ctor, std::move(fields))));
      parts.insert(parts.end(), residual.begin(), residual.end());
      out.push_back(f_and(std::move(parts), caps));
    }
    return f_or(std::move(out), caps);
  }

  // A function value against a table: apply it to each table input and push
  // the row's output through the result.
  FormulaPtr table_rows(const ResultPtr& fn, const ExampleValue::Fun& want) {
    std::vector<FormulaPtr> parts;
    parts.reserve(want.table.size());
    for (const auto& [in, out] : want.table) {
      try {
        parts.push_back(go(apply_result(st, fn, example_to_result(in)), out));
      } catch (const EvalExhausted&) {
        parts.push_back(f_indet(IndetReason::Diverged));
      }
    }
    return f_and(std::move(parts), caps);
  }
};

}  // namespace

FormulaPtr uneval(EvalState& st, const ResultPtr& r, const ExPtr& ex,
                  const PropagationCaps& caps) {
  Unevaluator u{st, caps};
  try {
    return u.go(r, ex);
  } catch (const EvalExhausted&) {
    return f_indet(IndetReason::Diverged);
  }
}

// ---------------------------------------------------------------------------
// Merging.
// ---------------------------------------------------------------------------

PropagationOutcome outcome_consistent(std::vector<HoleWorlds> assignments) {
  return {PropagationOutcome::Kind::Consistent, std::move(assignments),
          IndetReason::Diverged};
}
PropagationOutcome outcome_inconsistent() {
  return {PropagationOutcome::Kind::Inconsistent, {}, IndetReason::Diverged};
}
PropagationOutcome outcome_indeterminate(IndetReason reason) {
  return {PropagationOutcome::Kind::Indeterminate, {}, reason};
}

PropagationOutcome merge(const FormulaPtr& f, const PropagationCaps& caps) {
  if (const auto* in = f_as_indet(f)) return outcome_indeterminate(in->reason);
  Dnf d = to_dnf(f, caps);
  if (d.too_large) return outcome_indeterminate(IndetReason::TooLarge);
  std::vector<HoleWorlds> live;
  for (const auto& disjunct : d.disjuncts) {
    HoleWorlds hw;
    bool dead = false;
    for (const Formula::Atom& atom : disjunct) {
      if (ex_is_top(atom.world.expected)) continue;  // demands nothing
      std::vector<World>& worlds = hw[atom.hole];
      bool placed = false;
      for (World& w : worlds) {
        if (!world_env_equal(w, atom.world)) continue;
        if (ex_equal(w.expected, atom.world.expected)) {
          placed = true;  // repeated demand
          break;
        }
        // Two demands under the same ground bindings must agree on one
        // value. Non-ground bindings stay side by side: equal spellings may
        // still denote different values once their holes are filled.
        if (!world_env_ground(w)) continue;
        std::optional<ExPtr> met = ex_meet(w.expected, atom.world.expected);
        if (!met) {
          dead = true;
        } else {
          w.expected = *met;
          placed = true;
        }
        break;
      }
      if (dead) break;
      if (!placed) worlds.push_back(atom.world);
    }
    if (!dead) live.push_back(std::move(hw));
  }
  if (live.empty()) return outcome_inconsistent();
  return outcome_consistent(std::move(live));
}

// ---------------------------------------------------------------------------
// Whole-candidate propagation.
// ---------------------------------------------------------------------------

PropagationOutcome propagate(const Prelude& prelude, const TermPtr& candidate,
                             const std::vector<Assert>& asserts,
                             const EvalBudget& budget,
                             const PropagationCaps& caps) {
  std::vector<FormulaPtr> per_assert;
  per_assert.reserve(asserts.size());
  for (const Assert& a : asserts) {
    EvalState st(prelude, budget);
    FormulaPtr f;
    try {
      ResultPtr r = eval(st, nullptr, candidate);
      for (const ExPtr& arg : a.args)
        r = apply_result(st, r, example_to_result(arg));
      f = uneval(st, r, a.expected, caps);
    } catch (const EvalExhausted&) {
      f = f_indet(IndetReason::Diverged);
    }
    per_assert.push_back(std::move(f));
  }
  return merge(f_and(std::move(per_assert), caps), caps);
}

// ---------------------------------------------------------------------------
// Checking fillings against worlds.
// ---------------------------------------------------------------------------

Sat world_satisfied(EvalState& st, const World& w, int hole,
                    const std::map<int, TermPtr>& fillings) {
  auto it = fillings.find(hole);
  if (it == fillings.end()) return Sat::NotGround;
  EnvPtr env;
  for (auto rit = w.env.rbegin(); rit != w.env.rend(); ++rit)
    env = env_bind(env, rit->first, resume(st, rit->second, fillings));
  ResultPtr r = eval(st, env, subst_holes(it->second, fillings));
  return satisfies(st, r, w.expected);
}

Sat assignment_satisfied(EvalState& st, const HoleWorlds& hw,
                         const std::map<int, TermPtr>& fillings) {
  bool unknown = false;
  for (const auto& [hole, worlds] : hw) {
    for (const World& w : worlds) {
      Sat s;
      try {
        s = world_satisfied(st, w, hole, fillings);
      } catch (const EvalExhausted&) {
        s = Sat::NotGround;
      }
      if (s == Sat::No) return Sat::No;
      if (s == Sat::NotGround) unknown = true;
    }
  }
  return unknown ? Sat::NotGround : Sat::Yes;
}

// ---------------------------------------------------------------------------
// Printing.
// ---------------------------------------------------------------------------

std::string pretty_world(const World& w) {
  std::ostringstream out;
  out << "{";
  bool first = true;
  for (const auto& [name, value] : w.env) {
    if (!first) out << ", ";
    first = false;
    out << name << "=" << pretty_result(value);
  }
  out << "} |= " << pretty(w.expected);
  return out.str();
}

std::string pretty_formula(const FormulaPtr& f) {
  if (f_is_true(f)) return "T";
  if (f_is_false(f)) return "F";
  if (const auto* in = f_as_indet(f))
    return in->reason == IndetReason::Diverged ? "?diverged" : "?too-large";
  if (const auto* a = f_as_atom(f)) {
    std::ostringstream out;
    out << "_" << a->hole << " " << pretty_world(a->world);
    return out.str();
  }
  const char* sep = f_as_and(f) ? " /\\ " : " \\/ ";
  const auto& parts = f_as_and(f) ? f_as_and(f)->parts : f_as_or(f)->parts;
  std::ostringstream out;
  out << "(";
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) out << sep;
    out << pretty_formula(parts[i]);
  }
  out << ")";
  return out.str();
}

std::string pretty_outcome(const PropagationOutcome& o) {
  switch (o.kind) {
    case PropagationOutcome::Kind::Inconsistent:
      return "inconsistent";
    case PropagationOutcome::Kind::Indeterminate:
      return o.reason == IndetReason::Diverged ? "indeterminate (diverged)"
                                               : "indeterminate (too large)";
    case PropagationOutcome::Kind::Consistent:
      break;
  }
  std::ostringstream out;
  out << "consistent, " << o.assignments.size() << " way(s):";
  for (const HoleWorlds& hw : o.assignments) {
    out << "\n ";
    if (hw.empty()) out << " (no demands)";
    for (const auto& [hole, worlds] : hw) {
      for (const World& w : worlds)
        out << " _" << hole << " " << pretty_world(w) << ";";
    }
  }
  return out.str();
}

}  // namespace lacuna
