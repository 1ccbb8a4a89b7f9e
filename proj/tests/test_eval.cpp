#include <doctest.h>

#include <functional>
#include <random>

#include "eval.hpp"
#include "parse.hpp"
#include "prelude.hpp"
#include "pretty.hpp"

using namespace lacuna;

namespace {

const Prelude& P() { return default_prelude(); }

TermPtr pt(const std::string& src) {
  return parse_term(src, P().ctor_arities());
}

ResultPtr ev(const std::string& src, EvalBudget b = {}) {
  EvalState st(P(), b);
  return eval(st, nullptr, pt(src));
}

ExPtr exN(int n) {
  ExPtr e = ex_ctor("Zero");
  for (int i = 0; i < n; ++i) e = ex_ctor("Succ", {e});
  return e;
}

ExPtr exList(const std::vector<ExPtr>& elems) {
  ExPtr e = ex_ctor("Nil");
  for (auto it = elems.rbegin(); it != elems.rend(); ++it)
    e = ex_ctor("Cons", {*it, e});
  return e;
}

ExPtr exNats(const std::vector<int>& ns) {
  std::vector<ExPtr> es;
  for (int n : ns) es.push_back(exN(n));
  return exList(es);
}

// ---------------------------------------------------------------------------
// Reference interpreter: eager, substitution-based, over closed terms only.
// Library calls are inlined as lambda wrappers. Deliberately shares nothing
// with the live evaluator. Test binders never shadow library names, so plain
// substitution is capture-avoiding here.
// ---------------------------------------------------------------------------

struct RefEval {
  const Prelude& p;
  int steps = 0;

  TermPtr subst(const TermPtr& t, const std::string& name, const TermPtr& v) {
    if (auto* var = term_as_var(t)) return var->name == name ? v : t;
    if (auto* l = term_as_lam(t)) {
      if (l->binder == name) return t;
      return mk_lam(l->binder, subst(l->body, name, v));
    }
    if (auto* a = term_as_app(t))
      return mk_app(subst(a->fn, name, v), subst(a->arg, name, v));
    if (auto* c = term_as_ctor(t)) {
      std::vector<TermPtr> args;
      for (const TermPtr& x : c->args) args.push_back(subst(x, name, v));
      return mk_ctor(c->name, std::move(args));
    }
    if (auto* c = term_as_case(t)) {
      std::vector<CaseBranch> bs;
      for (const CaseBranch& b : c->branches) {
        bool shadowed = std::find(b.binders.begin(), b.binders.end(), name) !=
                        b.binders.end();
        bs.push_back(
            {b.ctor, b.binders, shadowed ? b.body : subst(b.body, name, v)});
      }
      return mk_case(subst(c->scrutinee, name, v), std::move(bs));
    }
    return t;
  }

  TermPtr value(const TermPtr& t) {
    if (++steps > 2000000) throw std::runtime_error("reference diverged");
    if (auto* v = term_as_var(t)) {
      const PreludeFn* def = p.find(v->name);
      if (!def) throw std::runtime_error("unbound " + v->name);
      TermPtr body = def->body;
      for (auto it = def->params.rbegin(); it != def->params.rend(); ++it)
        body = mk_lam(*it, body);
      return value(body);
    }
    if (term_as_lam(t)) return t;
    if (auto* a = term_as_app(t)) {
      TermPtr f = value(a->fn);
      TermPtr x = value(a->arg);
      auto* l = term_as_lam(f);
      if (!l) throw std::runtime_error("applying a non-function");
      return value(subst(l->body, l->binder, x));
    }
    if (auto* c = term_as_ctor(t)) {
      std::vector<TermPtr> args;
      for (const TermPtr& x : c->args) args.push_back(value(x));
      return mk_ctor(c->name, std::move(args));
    }
    auto* c = term_as_case(t);
    if (!c) throw std::runtime_error("holes are not closed terms");
    TermPtr s = value(c->scrutinee);
    auto* sc = term_as_ctor(s);
    if (!sc) throw std::runtime_error("case on a non-constructor");
    for (const CaseBranch& b : c->branches) {
      if (b.ctor != sc->name) continue;
      TermPtr body = b.body;
      for (size_t i = 0; i < b.binders.size(); ++i)
        body = subst(body, b.binders[i], sc->args[i]);
      return value(body);
    }
    throw std::runtime_error("no branch for " + sc->name);
  }
};

ExPtr term_value_to_example(const TermPtr& t) {
  auto* c = term_as_ctor(t);
  REQUIRE(c != nullptr);
  std::vector<ExPtr> args;
  for (const TermPtr& a : c->args) args.push_back(term_value_to_example(a));
  return ex_ctor(c->name, std::move(args));
}

void check_against_reference(const std::string& src) {
  CAPTURE(src);
  TermPtr t = pt(src);
  RefEval ref{P()};
  ExPtr expect = term_value_to_example(ref.value(t));
  EvalState st(P(), {1000000, 1000});
  auto got = result_to_example(eval(st, nullptr, t));
  REQUIRE(got.has_value());
  CHECK(ex_equal(*got, expect));
}

}  // namespace

TEST_CASE("ground programs agree with a naive reference interpreter") {
  for (const char* src : {
           "plus 2 3",
           "double 4",
           "not True",
           "or False True",
           "and True False",
           "even 7",
           "eq 3 3",
           "neq 3 3",
           "leq 2 5",
           "leq 5 2",
           "max 3 5",
           "map (\\x -> Succ x) [0,1,2]",
           "map double [1,2]",
           "filter even [1,2,3,4]",
           "foldr (\\x r -> x:x:r) [] [1,2]",
           "foldl (\\b y -> y:b) [] [0,1,2]",
           "foldTree (\\l x r -> plus l (plus x r)) 0 "
           "(Node (Node Leaf 1 Leaf) 2 (Node Leaf 3 Leaf))",
           "append [0,1] [2]",
           "concat [[0],[1,2],[]]",
           "sum [1,2,3]",
           "maximum [3,1,2]",
           "elem 2 [1,2]",
           "elem 5 [1,2]",
           "insert 2 [1,3]",
           "last [1,2,3]",
           "last []",
           "reverse [0,1,2]",
           "interleave [0,2,4] [1,3]",
           "(\\x -> plus x x) 3",
           "if even 2 then [1] else []",
           "case [9,8] of {[] -> 0; y:ys -> y}",
       })
    check_against_reference(src);
}

TEST_CASE("random ground programs agree with the reference interpreter") {
  std::mt19937 rng(20260822);
  auto pick = [&](int n) { return static_cast<int>(rng() % n); };

  std::function<std::string(int)> genN, genL;
  genN = [&](int d) -> std::string {
    if (d <= 0) return std::to_string(pick(4));
    switch (pick(6)) {
      case 0: return "plus (" + genN(d - 1) + ") (" + genN(d - 1) + ")";
      case 1: return "double (" + genN(d - 1) + ")";
      case 2: return "sum (" + genL(d - 1) + ")";
      case 3: return "maximum (" + genL(d - 1) + ")";
      case 4: return "max (" + genN(d - 1) + ") (" + genN(d - 1) + ")";
      default: return std::to_string(pick(4));
    }
  };
  genL = [&](int d) -> std::string {
    if (d <= 0) {
      switch (pick(3)) {
        case 0: return "[]";
        case 1: return "[" + std::to_string(pick(3)) + "]";
        default:
          return "[" + std::to_string(pick(3)) + "," +
                 std::to_string(pick(3)) + "]";
      }
    }
    switch (pick(7)) {
      case 0: return "map (\\x -> Succ x) (" + genL(d - 1) + ")";
      case 1: return "append (" + genL(d - 1) + ") (" + genL(d - 1) + ")";
      case 2: return "reverse (" + genL(d - 1) + ")";
      case 3: return "filter even (" + genL(d - 1) + ")";
      case 4: return "insert (" + genN(d - 1) + ") (" + genL(d - 1) + ")";
      case 5: return "interleave (" + genL(d - 1) + ") (" + genL(d - 1) + ")";
      default: return "foldr (\\x r -> x:r) (" + genL(d - 1) + ") (" +
                      genL(d - 1) + ")";
    }
  };

  for (int i = 0; i < 200; ++i)
    check_against_reference(pick(2) ? genN(3) : genL(3));
}

TEST_CASE("holes flow through evaluation instead of failing it") {
  SUBCASE("an applied hole leaves stuck applications in each element") {
    ResultPtr r = ev("map _0 [0,1,2]");
    int elems = 0;
    const Result* cur = r.get();
    while (auto* c = std::get_if<Result::Ctor>(&cur->node)) {
      if (c->name == "Nil") break;
      REQUIRE(c->name == "Cons");
      auto* app = result_as_app(c->args[0]);
      REQUIRE(app != nullptr);
      auto* h = result_as_hole(app->fn);
      REQUIRE(h != nullptr);
      CHECK(h->id == 0);
      CHECK(result_as_ctor(app->arg) != nullptr);
      ++elems;
      cur = c->args[1].get();
    }
    CHECK(elems == 3);
  }

  SUBCASE("a recursion over a hole sticks at its pattern match") {
    ResultPtr r = ev("sum _0");
    auto* c = result_as_case(r);
    REQUIRE(c != nullptr);
    auto* h = result_as_hole(c->scrutinee);
    REQUIRE(h != nullptr);
    CHECK(h->id == 0);
    CHECK(c->branches.size() == 2);
  }

  SUBCASE("case branches stay unevaluated while the scrutinee is stuck") {
    // The diverging branch body is never entered, so evaluation terminates.
    ResultPtr r = ev("case _0 of {[] -> 0; y:ys -> sum (append ys ys)}");
    REQUIRE(result_as_case(r) != nullptr);
  }

  SUBCASE("a stuck argument still binds under call-by-value") {
    ResultPtr r = ev("(\\x -> 7) (sum _0)");
    auto got = result_to_example(r);
    REQUIRE(got.has_value());
    CHECK(ex_equal(*got, exN(7)));
  }

  SUBCASE("a hole value is its environment closure") {
    EvalState st(P());
    ResultPtr r = eval(st, nullptr, pt("(\\x -> _5) 3"));
    auto* h = result_as_hole(r);
    REQUIRE(h != nullptr);
    CHECK(h->id == 5);
    ResultPtr x = env_lookup(h->env, "x");
    REQUIRE(x != nullptr);
    CHECK(ex_equal(*result_to_example(x), exN(3)));
  }
}

TEST_CASE("function tables behave as partial functions") {
  EvalState st(P());
  ResultPtr table = rexfun({{exN(0), exN(1)}, {exN(2), exN(3)}});

  ResultPtr in_table = apply_result(st, table, example_to_result(exN(2)));
  CHECK(ex_equal(*result_to_example(in_table), exN(3)));

  ResultPtr outside = apply_result(st, table, example_to_result(exN(9)));
  CHECK(result_is_any(outside));

  // Any soaks up further scrutiny and application.
  CHECK(result_is_any(apply_result(st, outside, example_to_result(exN(0)))));
  EnvPtr env = env_bind(nullptr, "v", outside);
  CHECK(result_is_any(
      eval(st, env, pt("case v of {Zero -> 1; Succ m -> 0}"))));

  // Tables map through list functions like any other function value.
  EnvPtr env2 = env_bind(nullptr, "f", table);
  ResultPtr mapped = eval(st, env2, pt("map f [0,2]"));
  CHECK(ex_equal(*result_to_example(mapped), exNats({1, 3})));
}

TEST_CASE("evaluation budgets abort as unknown, not as failure") {
  SUBCASE("step limit") {
    try {
      ev("sum [1,2,3]", {20, 32});
      FAIL("expected exhaustion");
    } catch (const EvalExhausted& e) {
      CHECK(e.reason == EvalExhausted::Reason::Steps);
    }
  }

  SUBCASE("recursion fuel counts unrollings of each library function") {
    std::string forty = "[";
    for (int i = 0; i < 40; ++i) forty += (i ? ",0" : "0");
    forty += "]";
    try {
      ev("length'", {});  // unbound: EvalError, not exhaustion
      FAIL("expected an error");
    } catch (const EvalError&) {
    }
    try {
      ev("sum " + forty, {100000, 32});
      FAIL("expected exhaustion");
    } catch (const EvalExhausted& e) {
      CHECK(e.reason == EvalExhausted::Reason::Fuel);
    }
    // With enough fuel the same term is fine.
    CHECK(ex_equal(*result_to_example(ev("sum " + forty, {100000, 64})),
                   exN(0)));
  }

  SUBCASE("a larger budget never changes a successful result") {
    std::mt19937 rng(7);
    const char* pool[] = {
        "plus 2 2",           "sum [1,2]",       "reverse [0,1,2]",
        "map double [1,2]",   "insert 1 [0,2]",  "maximum [2,5,1]",
        "filter even [1,2]",  "elem 3 [1,2,3]",  "concat [[0],[1]]",
    };
    for (int i = 0; i < 60; ++i) {
      const char* src = pool[rng() % (sizeof(pool) / sizeof(pool[0]))];
      int steps = 30 + static_cast<int>(rng() % 300);
      int fuel = 1 + static_cast<int>(rng() % 6);
      ResultPtr small;
      try {
        small = ev(src, {steps, fuel});
      } catch (const EvalExhausted&) {
        continue;
      }
      ResultPtr big = ev(src, {steps * 2, fuel * 2});
      CAPTURE(src);
      CHECK(result_equal(small, big));
    }
  }
}

namespace {

// No application in a result may keep a head that could still reduce.
void check_no_determinate_redex(const ResultPtr& r) {
  if (auto* c = result_as_ctor(r)) {
    for (const ResultPtr& a : c->args) check_no_determinate_redex(a);
    return;
  }
  if (auto* a = result_as_app(r)) {
    CHECK((result_as_hole(a->fn) || result_as_app(a->fn) ||
           result_as_case(a->fn) || result_as_exfun(a->fn)));
    check_no_determinate_redex(a->fn);
    check_no_determinate_redex(a->arg);
    return;
  }
  if (auto* c = result_as_case(r)) {
    CHECK(result_as_ctor(c->scrutinee) == nullptr);
    check_no_determinate_redex(c->scrutinee);
    return;
  }
}

struct SketchCase {
  std::string term;
  std::map<int, std::vector<std::string>> options;  // hole id -> fillings
};

const std::vector<SketchCase>& sketch_pool() {
  static const std::vector<SketchCase> pool = {
      {"foldr (\\x r -> _0) _1 [1,2]",
       {{0, {"x:x:r", "plus x r", "r", "x:r", "[]"}}, {1, {"[]", "[0]"}}}},
      {"map _0 [0,1,2]",
       {{0, {"\\x -> Succ x", "\\x -> double x", "\\x -> 0", "\\x -> x"}}}},
      {"map (\\x -> _0) [0,1]", {{0, {"Succ x", "0", "double x", "x"}}}},
      {"sum _0", {{0, {"[]", "[1,2]", "[0,3,1]"}}}},
      {"plus _0 2", {{0, {"0", "3"}}}},
      {"case _0 of {[] -> 0; y:ys -> plus y (sum ys)}",
       {{0, {"[]", "[2,1]"}}}},
      {"insert _0 _1", {{0, {"1", "2"}}, {1, {"[0,3]", "[]"}}}},
      {"if even _0 then _1 else _2",
       {{0, {"2", "3"}}, {1, {"[1]", "[]"}}, {2, {"[9]"}}}},
      {"filter _0 [1,2,3]", {{0, {"even", "\\x -> leq x 1"}}}},
      {"append _0 (map double _1)",
       {{0, {"[]", "[5]"}}, {1, {"[1]", "[]"}}}},
      {"foldTree (\\l x r -> _0) _1 (Node Leaf 2 Leaf)",
       {{0, {"plus l (plus x r)", "x", "l"}}, {1, {"0", "1"}}}},
      {"max (maximum _0) _1", {{0, {"[1,4]", "[]"}}, {1, {"2"}}}},
  };
  return pool;
}

}  // namespace

TEST_CASE("filling first and resuming later reach the same result") {
  std::mt19937 rng(20260823);
  auto pick = [&](size_t n) { return rng() % n; };
  int checked = 0;

  for (int i = 0; i < 520; ++i) {
    const SketchCase& sc = sketch_pool()[pick(sketch_pool().size())];
    TermPtr t = pt(sc.term);

    // Fill a random subset of the holes (possibly none, possibly all).
    std::map<int, TermPtr> fillings;
    for (const auto& [id, opts] : sc.options)
      if (pick(3) != 0) fillings.emplace(id, pt(opts[pick(opts.size())]));

    CAPTURE(sc.term);
    TermPtr direct_term = subst_holes(t, fillings);

    EvalState st1(P());
    ResultPtr direct = eval(st1, nullptr, direct_term);

    EvalState st2(P());
    ResultPtr before = eval(st2, nullptr, t);
    EvalState st3(P());
    ResultPtr resumed = resume(st3, before, fillings);

    CHECK(result_equal(direct, resumed));
    check_no_determinate_redex(direct);
    check_no_determinate_redex(resumed);
    ++checked;
  }
  CHECK(checked == 520);
}

TEST_CASE("resuming with no fillings is the identity") {
  for (const char* src : {"sum _0", "map _0 [0,1]", "plus _0 _1"}) {
    EvalState st(P());
    ResultPtr r = eval(st, nullptr, pt(src));
    CHECK(resume(st, r, {}).get() == r.get());
  }
}

namespace {

Program blocking_problem(const std::string& body_src,
                         const std::string& asserts_src) {
  std::string src =
      "f :: List Nat -> List Nat\n"
      "f xs = " + body_src + "\n"
      "\n" + asserts_src;
  return parse_program(src, P().ctor_arities());
}

}  // namespace

TEST_CASE("asserts rank the holes their evaluation is stuck on first") {
  SUBCASE("a scrutinized hole blocks; a mapper hole does not") {
    Program p = blocking_problem("map (\\x -> _1) _2",
                                 "assert f [0] <== [0]\n");
    CHECK(blocking_holes(P(), p.sketch(), p.asserts, {}) ==
          std::vector<int>{2, 1});
  }

  SUBCASE("a hole under a recursion blocks at its pattern match") {
    Program p = blocking_problem("sum _1", "assert f [0] <== [0]\n");
    CHECK(blocking_holes(P(), p.sketch(), p.asserts, {}) ==
          std::vector<int>{1});
  }

  SUBCASE("with nothing stuck, holes order by id") {
    Program p = blocking_problem("foldr (\\x r -> _0) _1 xs",
                                 "assert f [0] <== [0,0]\n");
    CHECK(blocking_holes(P(), p.sketch(), p.asserts, {}) ==
          std::vector<int>{0, 1});
  }

  SUBCASE("exhausted asserts contribute nothing") {
    Program p = blocking_problem("map (\\x -> _1) _2",
                                 "assert f [0] <== [0]\n");
    CHECK(blocking_holes(P(), p.sketch(), p.asserts, {5, 1}) ==
          std::vector<int>{1, 2});
  }
}

TEST_CASE("results either satisfy an example, refute it, or cannot tell yet") {
  EvalState st(P());
  auto sat = [&](const std::string& src, const ExPtr& ex) {
    return satisfies(st, ev(src), ex);
  };

  CHECK(sat("[1,2]", exNats({1, 2})) == Sat::Yes);
  CHECK(sat("[1,2]", exNats({1, 3})) == Sat::No);
  CHECK(sat("[1,2]", ex_top()) == Sat::Yes);
  CHECK(sat("[1,2]", exList({exN(1), ex_top()})) == Sat::Yes);

  // A hole in element position cannot settle a value, but a constructor
  // clash refutes regardless of holes.
  CHECK(sat("map _0 [0]", exNats({5})) == Sat::NotGround);
  CHECK(sat("map _0 [0]", exList({})) == Sat::No);
  CHECK(sat("sum _0", exN(3)) == Sat::NotGround);

  // Function examples check by application.
  CHECK(sat("\\x -> Succ x", ex_fun({{exN(0), exN(1)}})) == Sat::Yes);
  CHECK(sat("\\x -> Succ x", ex_fun({{exN(0), exN(2)}})) == Sat::No);
  CHECK(sat("plus 1", ex_fun({{exN(1), exN(2)}})) == Sat::Yes);
  CHECK(sat("\\x -> _0", ex_fun({{exN(0), exN(1)}})) == Sat::NotGround);

  EvalState st2(P());
  ResultPtr table = rexfun({{exN(0), exN(1)}});
  CHECK(satisfies(st2, table, ex_fun({{exN(0), exN(1)}})) == Sat::Yes);
  CHECK(satisfies(st2, table, ex_fun({{exN(0), exN(2)}})) == Sat::No);
  // Beyond its table a partial function is unconstrained.
  CHECK(satisfies(st2, table, ex_fun({{exN(7), exN(0)}})) == Sat::Yes);
}

TEST_CASE("groundness and example conversion track indeterminacy") {
  CHECK(is_ground(ev("[1,2]")));
  CHECK(is_ground(ev("\\x -> plus x 1")));
  CHECK(!is_ground(ev("map _0 [0]")));
  CHECK(!is_ground(ev("sum _0")));
  CHECK(!is_ground(ev("\\x -> _0")));
  CHECK(!is_ground(rany()));
  CHECK(is_ground(rexfun({{exN(0), exN(1)}})));

  // A closure is ground only if the environment it needs is.
  EvalState st(P());
  ResultPtr stuckenv = eval(st, nullptr, pt("(\\y -> \\x -> plus x y) _0"));
  CHECK(!is_ground(stuckenv));
  ResultPtr groundenv = eval(st, nullptr, pt("(\\y -> \\x -> plus x y) 3"));
  CHECK(is_ground(groundenv));

  CHECK(!result_to_example(ev("\\x -> x")).has_value());
  CHECK(!result_to_example(ev("plus 1")).has_value());
  ExPtr round = exNats({2, 0});
  CHECK(ex_equal(*result_to_example(example_to_result(round)), round));
  CHECK(result_is_any(example_to_result(ex_top())));
}

TEST_CASE("stuck results print compactly for diagnostics") {
  CHECK(pretty_result(ev("sum [1,2]")) == "3");
  CHECK(pretty_result(ev("reverse [1,0]")) == "[0,1]");
  CHECK(pretty_result(ev("sum _0")) == "<stuck case on _0>");
  CHECK(pretty_result(ev("\\x -> x")) == "<fun>");
  CHECK(pretty_result(rany()) == "_");
}
