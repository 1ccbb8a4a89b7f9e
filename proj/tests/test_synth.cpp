#include <doctest.h>

#include <set>
#include <string>
#include <vector>

#include "eval.hpp"
#include "parse.hpp"
#include "prelude.hpp"
#include "pretty.hpp"
#include "synth.hpp"
#include "typing.hpp"

using namespace lacuna;

namespace {

const Prelude& P() { return default_prelude(); }

TermPtr pt(const std::string& src) {
  return parse_term(src, P().ctor_arities());
}

Program prog(const std::string& src) {
  return parse_program(src, P().ctor_arities());
}

int w(const std::string& src) { return weigh(P(), pt(src)); }

GenEnv genv(const std::vector<std::string>& uses,
            const std::vector<std::string>& datatypes) {
  GenEnv g;
  g.prelude = &P();
  g.types = &P().env;
  for (const std::string& u : uses)
    g.uses.push_back(resolve_use(P(), UseEntry{u, nullptr}));
  g.datatypes = datatypes;
  return g;
}

bool contains_term(const std::vector<TermPtr>& ts, const TermPtr& t) {
  for (const TermPtr& x : ts)
    if (term_equal(x, t)) return true;
  return false;
}

// Evaluates a closed program on ground arguments and compares.
bool behaves(const TermPtr& closed, const std::vector<ExPtr>& args,
             const ExPtr& expected) {
  EvalState st(P());
  ResultPtr r = eval(st, nullptr, closed);
  for (const ExPtr& a : args) r = apply_result(st, r, example_to_result(a));
  return satisfies(st, r, expected) == Sat::Yes;
}

ExPtr en(int n) {
  ExPtr e = ex_ctor("Zero");
  for (int i = 0; i < n; ++i) e = ex_ctor("Succ", {e});
  return e;
}

ExPtr el(const std::vector<int>& ns) {
  ExPtr e = ex_ctor("Nil");
  for (auto it = ns.rbegin(); it != ns.rend(); ++it)
    e = ex_ctor("Cons", {en(*it), e});
  return e;
}

}  // namespace

TEST_CASE("weights price applications, matches, and scheme calls") {
  CHECK(weigh(P(), mk_hole(0)) == 0);
  CHECK(w("xs") == 0);
  CHECK(w("\\x -> x") == 0);
  CHECK(w("Succ n") == 1);
  CHECK(w("map (\\x -> Succ x) xs") == 3);
  CHECK(w("interleave xs xs") == 2);
  // Scheme calls carry one extra unit at the head.
  CHECK(w("foldr _0 _1 xs") == 4);
  CHECK(w("foldr (\\x r -> x : x : r) [] xs") == 8);
  // Matches cost one plus their doubled scrutinee.
  CHECK(w("case xs of {[] -> 0; y:ys -> y}") == 1);
  CHECK(w("case sum xs of {Zero -> 0; Succ m -> m}") == 3);
  CHECK(w("case n of {Zero -> case n of {Zero -> n; Succ m -> m}; Succ o -> n}") ==
        2);
  // A match inside a scrutinee doubles once more.
  CHECK(w("case (case n of {Zero -> n; Succ m -> m}) of {Zero -> n; Succ o -> o}") ==
        3);
  CHECK(w("foldr (\\x r -> x : (case r of {[] -> r; y:ys -> case eq x y of "
          "{False -> r; True -> ys}})) [] xs") == 12);
}

TEST_CASE("filling generation reaches the published refinement shapes") {
  // A list-shaped goal with map available: map over a lambda-wrapped hole.
  {
    HoleCtx ctx;
    ctx.goal = tdata("List", {tvar("b")});
    ctx.env = {{"xs", tdata("List", {tvar("a")})}};
    auto out = gen_fillings(ctx, genv({"map"}, {"List", "Nat"}), Subst{}, 1);
    CHECK(contains_term(out, pt("map (\\x -> _1) _2")));
    // xs :: List a cannot meet List b while both stay rigid.
    CHECK(!contains_term(out, pt("xs")));
  }
  // The fold's final argument comes from scope, never from a fresh hole.
  {
    HoleCtx ctx;
    ctx.goal = tdata("List", {tvar("a")});
    ctx.env = {{"xs", tdata("List", {tvar("a")})}};
    auto out = gen_fillings(ctx, genv({"foldr"}, {"List", "Nat"}), Subst{}, 1);
    CHECK(contains_term(out, pt("foldr (\\x r -> _1) _2 xs")));
    for (const TermPtr& t : out) {
      std::vector<TermPtr> args;
      TermPtr head = t;
      while (auto* a = term_as_app(head)) {
        args.push_back(a->arg);
        head = a->fn;
      }
      auto* v = term_as_var(head);
      if (v && v->name == "foldr") {
        REQUIRE(args.size() == 3);
        CHECK(term_as_var(args[0]) != nullptr);  // spine args are reversed
      }
    }
  }
  // A numeric goal: the variable itself, both constructors, and a match
  // whose scrutinee is a fresh hole (one more fill reaches `case n of ...`).
  {
    HoleCtx ctx;
    ctx.goal = tdata("Nat");
    ctx.env = {{"n", tdata("Nat")}};
    auto out = gen_fillings(ctx, genv({}, {"Nat"}), Subst{}, 1);
    CHECK(contains_term(out, pt("n")));
    CHECK(contains_term(out, pt("Zero")));
    CHECK(contains_term(out, pt("Succ _1")));
    TermPtr elim = pt("case _1 of {Zero -> _2; Succ m -> _3}");
    CHECK(contains_term(out, elim));
    CHECK(term_equal(fill(elim, 1, pt("n")),
                     pt("case n of {Zero -> _2; Succ m -> _3}")));
  }
  // An arrow-typed hole has exactly one filling: its lambda expansion.
  {
    HoleCtx ctx;
    ctx.goal = tarrow(tdata("Nat"), tdata("Nat"));
    ctx.env = {};
    auto out = gen_fillings(ctx, genv({}, {"Nat"}), Subst{}, 1);
    REQUIRE(out.size() == 1);
    CHECK(term_equal(out[0], pt("\\x -> _1")));
  }
  // Emission is deterministic.
  {
    HoleCtx ctx;
    ctx.goal = tdata("List", {tdata("Nat")});
    ctx.env = {{"xs", tdata("List", {tdata("Nat")})}};
    GenEnv g = genv({"foldr", "map", "eq"}, {"List", "Nat", "Bool"});
    auto a = gen_fillings(ctx, g, Subst{}, 5);
    auto b = gen_fillings(ctx, g, Subst{}, 5);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
      CHECK(term_equal(a[i], b[i]));
  }
}

TEST_CASE("generated binders step around names already in scope") {
  HoleCtx ctx;
  ctx.goal = tdata("List", {tvar("a")});
  ctx.env = {{"xs", tdata("List", {tvar("a")})},
             {"x", tvar("a")},
             {"r", tdata("List", {tvar("a")})}};
  auto out = gen_fillings(ctx, genv({"foldr"}, {"List", "Nat"}), Subst{}, 1);
  // Both list-typed variables serve as the fold's subject; the lambda takes
  // the first two free supply names, skipping the captured x and r.
  CHECK(contains_term(out, pt("foldr (\\y z -> _1) _2 xs")));
  CHECK(contains_term(out, pt("foldr (\\y z -> _1) _2 r")));
  // The list eliminator's y/ys convention also steps aside when taken.
  HoleCtx ctx2;
  ctx2.goal = tdata("Nat");
  ctx2.env = {{"y", tdata("Nat")}, {"ys", tdata("List", {tdata("Nat")})}};
  auto out2 = gen_fillings(ctx2, genv({}, {"List", "Nat"}), Subst{}, 1);
  CHECK(contains_term(out2, pt("case _1 of {[] -> _2; z:zs -> _3}")));
}

TEST_CASE("redex shapes never pass the structural form check") {
  CHECK(beta_eta_ok(pt("map (\\x -> Succ x) xs")));
  CHECK(beta_eta_ok(pt("case xs of {[] -> 0; y:ys -> y}")));
  CHECK(!beta_eta_ok(mk_app(mk_lam("x", mk_var("x")), mk_ctor("Zero"))));
  CHECK(!beta_eta_ok(pt("case Zero of {Zero -> 0; Succ m -> m}")));
  CHECK(!beta_eta_ok(
      mk_case(mk_lam("x", mk_var("x")),
              {CaseBranch{"Zero", {}, mk_ctor("Zero")},
               CaseBranch{"Succ", {"m"}, mk_var("m")}})));
}

TEST_CASE("match discipline bars degenerate scrutinees") {
  // Case-of-case commutes into the branches, so it is never kept.
  CHECK(!match_discipline_ok(
      pt("case (case xs of {[] -> xs; y:ys -> ys}) of {[] -> xs; y:ys -> "
         "ys}")));
  // Re-matching a variable inside its own match reduces statically.
  CHECK(!match_discipline_ok(
      pt("case xs of {[] -> []; y:ys -> case xs of {[] -> []; z:zs -> zs}}")));
  // Matching a pattern-bound piece only ever overfits the examples.
  CHECK(!match_discipline_ok(
      pt("case xs of {[] -> []; y:ys -> case y of {Zero -> ys; Succ m -> "
         "xs}}")));
  CHECK(!match_discipline_ok(
      pt("case xs of {[] -> []; y:ys -> case ys of {[] -> []; z:zs -> zs}}")));
  // A lambda rebinding the name lifts both restrictions.
  CHECK(match_discipline_ok(
      pt("case xs of {[] -> []; y:ys -> map (\\y -> case y of {Zero -> 0; "
         "Succ m -> m}) xs}")));
  // Call results and independent arguments stay fair game.
  CHECK(match_discipline_ok(
      pt("case r of {[] -> r; y:ys -> case eq x y of {False -> r; True -> "
         "ys}}")));
  CHECK(match_discipline_ok(
      pt("case xs of {[] -> []; y:ys -> case n of {Zero -> []; Succ m -> "
         "xs}}")));
}

TEST_CASE("the denylist rejects redundant shapes up to renaming and holes") {
  const auto& deny = default_denylist();
  CHECK(!normal_form_ok(pt("foldr (\\x r -> plus x r) 0 []"), deny));
  CHECK(!normal_form_ok(pt("map (\\y -> y) xs"), deny));
  CHECK(normal_form_ok(pt("map (\\y -> Succ y) xs"), deny));
  // Repeated pattern holes demand equal subterms.
  CHECK(!normal_form_ok(pt("eq m m"), deny));
  CHECK(normal_form_ok(pt("eq m o"), deny));
  // Matching applies at any depth.
  CHECK(!normal_form_ok(pt("Succ (plus 0 m)"), deny));
  CHECK(!normal_form_ok(pt("map (\\x -> not (not x)) xs"), deny));
  CHECK(!normal_form_ok(pt("reverse (reverse xs)"), deny));
  // A fold that drops its element is its own base; cons-rebuilding is the
  // identity; a match with equal branches never needed to look.
  CHECK(!normal_form_ok(pt("foldr (\\x r -> r) [] xs"), deny));
  CHECK(!normal_form_ok(pt("foldr (\\x r -> x : r) [] xs"), deny));
  CHECK(normal_form_ok(pt("foldr (\\x r -> x : r) ys xs"), deny));
  CHECK(!normal_form_ok(pt("case xs of {[] -> ys; z:zs -> ys}"), deny));
  CHECK(normal_form_ok(pt("case xs of {[] -> ys; z:zs -> zs}"), deny));
}

TEST_CASE("candidate keys ignore hole numbering but not shape") {
  CHECK(canonical_key(pt("map (\\x -> _5) _9")) ==
        canonical_key(pt("map (\\x -> _0) _1")));
  CHECK(canonical_key(pt("plus _3 _7")) == canonical_key(pt("plus _0 _1")));
  CHECK(canonical_key(pt("map _0 _1")) !=
        canonical_key(pt("map (\\x -> _0) _1")));
  CHECK(canonical_key(pt("plus _0 xs")) != canonical_key(pt("plus xs _0")));
}

TEST_CASE("the doubling benchmark synthesizes the fold everyone expects") {
  Program p = prog(
      "{-# USE foldr #-}\n"
      "dupli :: List Nat -> List Nat\n"
      "dupli xs = _0\n"
      "assert dupli [] <== []\n"
      "assert dupli [0] <== [0,0]\n"
      "assert dupli [0,1] <== [0,0,1,1]\n");
  SynthesisResult r = synthesize(p, P());
  REQUIRE(r.kind == SynthesisResult::Kind::Solved);
  CHECK(term_equal(r.solution.fillings.at(0),
                   pt("foldr (\\x r -> x : x : r) [] xs")));
  CHECK(r.solution.weight == 8);
  CHECK(r.stats.duplicates == 0);
  CHECK(r.stats.weights_monotone);
  CHECK(r.stats.pruned > 0);

  SynthesisResult again = synthesize(p, P());
  CHECK(again.stats.popped == r.stats.popped);
  CHECK(again.stats.enqueued == r.stats.enqueued);
  CHECK(term_equal(again.solution.term, r.solution.term));
}

TEST_CASE("a different library slice reaches the interleaving solution") {
  Program p = prog(
      "{-# USE interleave #-}\n"
      "dupli :: List Nat -> List Nat\n"
      "dupli xs = _0\n"
      "assert dupli [] <== []\n"
      "assert dupli [0] <== [0,0]\n"
      "assert dupli [0,1] <== [0,0,1,1]\n");
  SynthesisResult r = synthesize(p, P());
  REQUIRE(r.kind == SynthesisResult::Kind::Solved);
  CHECK(term_equal(r.solution.fillings.at(0), pt("interleave xs xs")));
  CHECK(r.solution.weight == 2);
}

TEST_CASE("holes fill along a single evaluation-guided path") {
  Program p = prog(
      "{-# USE map #-}\n"
      "inc :: List Nat -> List Nat\n"
      "inc xs = _0\n"
      "assert inc [] <== []\n"
      "assert inc [0,1,2] <== [1,2,3]\n");
  SynthesisResult r = synthesize(p, P());
  REQUIRE(r.kind == SynthesisResult::Kind::Solved);
  CHECK(term_equal(r.solution.fillings.at(0), pt("map (\\x -> Succ x) xs")));
  // The map's list argument blocks evaluation, so it fills before the
  // lambda's body even though it was created after it.
  REQUIRE(r.solution.steps.size() == 4);
  CHECK(r.solution.steps[0].first == 0);
  CHECK(term_equal(r.solution.steps[0].second, pt("map (\\x -> _1) _2")));
  CHECK(r.solution.steps[1].first == 2);
  CHECK(term_equal(r.solution.steps[1].second, pt("xs")));
  CHECK(r.solution.steps[2].first == 1);
  CHECK(term_equal(r.solution.steps[2].second, pt("Succ _3")));
  CHECK(r.solution.steps[3].first == 3);
  CHECK(term_equal(r.solution.steps[3].second, pt("x")));
  CHECK(r.stats.duplicates == 0);
}

TEST_CASE("an indeterminate verdict downgrades to guessing, not refusal") {
  Program p = prog(
      "{-# USE sum, map #-}\n"
      "count :: List Bool -> Nat\n"
      "count xs = _0\n"
      "assert count [] <== 0\n"
      "assert count [False] <== 0\n"
      "assert count [True] <== 1\n"
      "assert count [True, False, True] <== 2\n");
  SynthesisResult r = synthesize(p, P());
  REQUIRE(r.kind == SynthesisResult::Kind::Solved);
  // Recursing on the unknown list defies finite constraints, so the search
  // must have passed through at least one guess-mode candidate.
  CHECK(r.stats.guesses > 0);
  CHECK(behaves(r.solution.term, {el({})}, en(0)));
  CHECK(behaves(r.solution.term,
                {ex_ctor("Cons", {ex_ctor("True"),
                                  ex_ctor("Cons", {ex_ctor("True"),
                                                   ex_ctor("Nil")})})},
                en(2)));
  SynthesisResult again = synthesize(p, P());
  CHECK(again.stats.popped == r.stats.popped);
}

TEST_CASE("disabling propagation still solves by checking closed programs") {
  const std::string src =
      "{-# USE map #-}\n"
      "inc :: List Nat -> List Nat\n"
      "inc xs = _0\n"
      "assert inc [] <== []\n"
      "assert inc [1,2] <== [2,3]\n";
  Program p = prog(src);
  SynthesisConfig ep, noep;
  noep.ep = false;
  SynthesisResult r1 = synthesize(p, P(), ep);
  SynthesisResult r2 = synthesize(p, P(), noep);
  REQUIRE(r1.kind == SynthesisResult::Kind::Solved);
  REQUIRE(r2.kind == SynthesisResult::Kind::Solved);
  CHECK(r2.stats.pruned == 0);
  CHECK(r2.stats.guesses == 0);
  // Without pruning the search works strictly harder.
  CHECK(r2.stats.popped >= r1.stats.popped);
  for (const auto& res : {r1, r2}) {
    CHECK(behaves(res.solution.term, {el({0, 4})}, el({1, 5})));
  }
}

TEST_CASE("a search that cannot finish reports a timeout") {
  Program p = prog(
      "{-# USE foldr, eq #-}\n"
      "compress :: List Nat -> List Nat\n"
      "compress xs = _0\n"
      "assert compress [] <== []\n"
      "assert compress [0] <== [0]\n"
      "assert compress [0,0] <== [0]\n"
      "assert compress [1,0,0] <== [1,0]\n"
      "assert compress [0,1,1] <== [0,1]\n"
      "assert compress [1,1,2,2] <== [1,2]\n");
  SynthesisConfig cfg;
  cfg.timeout_ms = 300;
  SynthesisResult r = synthesize(p, P(), cfg);
  CHECK(r.kind == SynthesisResult::Kind::Timeout);
}

TEST_CASE("a sketch rescues the search that times out from a bare hole") {
  Program p = prog(
      "{-# USE foldr, eq #-}\n"
      "compress :: List Nat -> List Nat\n"
      "compress xs = foldr (\\x r -> _0) _1 xs\n"
      "assert compress [] <== []\n"
      "assert compress [0] <== [0]\n"
      "assert compress [0,0] <== [0]\n"
      "assert compress [1,0,0] <== [1,0]\n"
      "assert compress [0,1,1] <== [0,1]\n"
      "assert compress [1,1,2,2] <== [1,2]\n");
  SynthesisResult r = synthesize(p, P());
  REQUIRE(r.kind == SynthesisResult::Kind::Solved);
  CHECK(behaves(r.solution.term, {el({2, 2, 2})}, el({2})));
  CHECK(behaves(r.solution.term, {el({0, 1, 1, 0})}, el({0, 1, 0})));
  CHECK(term_equal(
      r.solution.fillings.at(0),
      pt("x : (case r of {[] -> r; y:ys -> case eq x y of {False -> r; True "
         "-> ys}})")));
  CHECK(term_equal(r.solution.fillings.at(1), pt("[]")));
  CHECK(r.solution.weight == 12);
}

TEST_CASE("a polymorphic signature guides the fold to a maybe accumulator") {
  Program p = prog(
      "{-# USE foldr #-}\n"
      "last :: List a -> Maybe a\n"
      "last xs = _0\n"
      "assert last [] <== Nothing\n"
      "assert last [1] <== Just 1\n"
      "assert last [0,1,2] <== Just 2\n");
  SynthesisResult r = synthesize(p, P());
  REQUIRE(r.kind == SynthesisResult::Kind::Solved);
  CHECK(term_equal(
      r.solution.fillings.at(0),
      pt("foldr (\\x r -> case r of {Nothing -> Just x; Just y -> r}) Nothing "
         "xs")));
  CHECK(behaves(r.solution.term, {el({4, 5})}, ex_ctor("Just", {en(5)})));
}

TEST_CASE("expansion preserves the queue's own bookkeeping") {
  Program p = prog(
      "{-# USE foldr #-}\n"
      "dupli :: List Nat -> List Nat\n"
      "dupli xs = _0\n"
      "assert dupli [] <== []\n"
      "assert dupli [0] <== [0,0]\n");
  Synthesizer syn(p, P(), SynthesisConfig{});
  Candidate c0 = syn.init();
  CHECK(c0.weight == 0);
  CHECK(c0.holes.count(0) == 1);
  std::vector<Candidate> kids = syn.expand(c0);
  REQUIRE(!kids.empty());
  long long prev_seq = c0.seqno;
  for (const Candidate& k : kids) {
    CHECK(k.constraints.kind != PropagationOutcome::Kind::Inconsistent);
    CHECK(k.weight == weigh(P(), k.term));
    CHECK(k.seqno > prev_seq);
    prev_seq = k.seqno;
    REQUIRE(k.steps.size() == 1);
    CHECK(k.steps[0].first == 0);
  }
}

TEST_CASE("a sketch that already conflicts is refused without search") {
  Program p = prog(
      "{-# USE map #-}\n"
      "dupli :: List Nat -> List Nat\n"
      "dupli xs = map (\\x -> _0) xs\n"
      "assert dupli [0] <== [0,0]\n");
  SynthesisResult r = synthesize(p, P());
  CHECK(r.kind == SynthesisResult::Kind::NoSolution);
  CHECK(r.stats.popped == 0);
}

TEST_CASE("problems with nothing to check are rejected up front") {
  Program none = prog(
      "f :: Nat -> Nat\n"
      "f n = _0\n");
  CHECK_THROWS_AS(synthesize(none, P()), std::invalid_argument);
  Program tops = prog(
      "f :: Nat -> Nat\n"
      "f n = _0\n"
      "assert f 0 <== _\n");
  CHECK_THROWS_AS(synthesize(tops, P()), std::invalid_argument);
}

TEST_CASE("generation stays inside the problem's own datatypes") {
  Program p = prog(
      "{-# USE plus #-}\n"
      "add1 :: Nat -> Nat\n"
      "add1 n = _0\n"
      "assert add1 0 <== 1\n"
      "assert add1 2 <== 3\n");
  Synthesizer syn(p, P(), SynthesisConfig{});
  CHECK(syn.gen_env().datatypes == std::vector<std::string>{"Nat"});
  SynthesisResult r = synthesize(p, P());
  REQUIRE(r.kind == SynthesisResult::Kind::Solved);
  CHECK(term_equal(r.solution.fillings.at(0), pt("Succ n")));
}
