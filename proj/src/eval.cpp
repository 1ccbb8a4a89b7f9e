#include "eval.hpp"

#include <algorithm>
#include <set>

#include "pretty.hpp"

namespace lacuna {

namespace {

ResultPtr wrap(Result&& r) { return std::make_shared<const Result>(std::move(r)); }

void charge(EvalState& st) {
  if (++st.steps_used > st.budget.step_limit)
    throw EvalExhausted(EvalExhausted::Reason::Steps);
}

}  // namespace

EnvPtr env_bind(const EnvPtr& env, std::string name, ResultPtr value) {
  return std::make_shared<const EnvNode>(
      EnvNode{std::move(name), std::move(value), env});
}

ResultPtr env_lookup(const EnvPtr& env, const std::string& name) {
  for (const EnvNode* n = env.get(); n; n = n->next.get())
    if (n->name == name) return n->value;
  return nullptr;
}

ResultPtr rctor(std::string name, std::vector<ResultPtr> args) {
  return wrap({Result::Ctor{std::move(name), std::move(args)}});
}
ResultPtr rclosure(EnvPtr env, std::string param, TermPtr body) {
  return wrap({Result::Closure{std::move(env), std::move(param), std::move(body)}});
}
ResultPtr rhole(EnvPtr env, int id) {
  return wrap({Result::Hole{std::move(env), id}});
}
ResultPtr rapp(ResultPtr fn, ResultPtr arg) {
  return wrap({Result::App{std::move(fn), std::move(arg)}});
}
ResultPtr rcase(ResultPtr scrutinee, std::vector<CaseBranch> branches,
                EnvPtr env) {
  return wrap({Result::Case{std::move(scrutinee), std::move(branches),
                            std::move(env)}});
}
ResultPtr rprelude(std::string name, std::vector<ResultPtr> args) {
  return wrap({Result::Prelude{std::move(name), std::move(args)}});
}
ResultPtr rexfun(std::vector<std::pair<ExPtr, ExPtr>> table) {
  return wrap({Result::ExFun{std::move(table)}});
}
ResultPtr rany() {
  static const ResultPtr a = wrap({Result::Any{}});
  return a;
}

const Result::Ctor* result_as_ctor(const ResultPtr& r) {
  return std::get_if<Result::Ctor>(&r->node);
}
const Result::Closure* result_as_closure(const ResultPtr& r) {
  return std::get_if<Result::Closure>(&r->node);
}
const Result::Hole* result_as_hole(const ResultPtr& r) {
  return std::get_if<Result::Hole>(&r->node);
}
const Result::App* result_as_app(const ResultPtr& r) {
  return std::get_if<Result::App>(&r->node);
}
const Result::Case* result_as_case(const ResultPtr& r) {
  return std::get_if<Result::Case>(&r->node);
}
const Result::Prelude* result_as_prelude(const ResultPtr& r) {
  return std::get_if<Result::Prelude>(&r->node);
}
const Result::ExFun* result_as_exfun(const ResultPtr& r) {
  return std::get_if<Result::ExFun>(&r->node);
}
bool result_is_any(const ResultPtr& r) {
  return std::holds_alternative<Result::Any>(r->node);
}

namespace {

bool env_equal(const EnvPtr& a, const EnvPtr& b) {
  const EnvNode* x = a.get();
  const EnvNode* y = b.get();
  for (; x && y; x = x->next.get(), y = y->next.get()) {
    if (x == y) return true;
    if (x->name != y->name || !result_equal(x->value, y->value)) return false;
  }
  return !x && !y;
}

bool branches_equal(const std::vector<CaseBranch>& a,
                    const std::vector<CaseBranch>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].ctor != b[i].ctor || a[i].binders != b[i].binders ||
        !term_equal(a[i].body, b[i].body))
      return false;
  }
  return true;
}

}  // namespace

bool result_equal(const ResultPtr& a, const ResultPtr& b) {
  if (a.get() == b.get()) return true;
  if (a->node.index() != b->node.index()) return false;
  if (auto* c = result_as_ctor(a)) {
    auto* d = result_as_ctor(b);
    if (c->name != d->name || c->args.size() != d->args.size()) return false;
    for (size_t i = 0; i < c->args.size(); ++i)
      if (!result_equal(c->args[i], d->args[i])) return false;
    return true;
  }
  if (auto* c = result_as_closure(a)) {
    auto* d = result_as_closure(b);
    return c->param == d->param && term_equal(c->body, d->body) &&
           env_equal(c->env, d->env);
  }
  if (auto* h = result_as_hole(a)) {
    auto* i = result_as_hole(b);
    return h->id == i->id && env_equal(h->env, i->env);
  }
  if (auto* x = result_as_app(a)) {
    auto* y = result_as_app(b);
    return result_equal(x->fn, y->fn) && result_equal(x->arg, y->arg);
  }
  if (auto* x = result_as_case(a)) {
    auto* y = result_as_case(b);
    return result_equal(x->scrutinee, y->scrutinee) &&
           branches_equal(x->branches, y->branches) && env_equal(x->env, y->env);
  }
  if (auto* x = result_as_prelude(a)) {
    auto* y = result_as_prelude(b);
    if (x->name != y->name || x->args.size() != y->args.size()) return false;
    for (size_t i = 0; i < x->args.size(); ++i)
      if (!result_equal(x->args[i], y->args[i])) return false;
    return true;
  }
  if (auto* x = result_as_exfun(a)) {
    auto* y = result_as_exfun(b);
    if (x->table.size() != y->table.size()) return false;
    for (size_t i = 0; i < x->table.size(); ++i)
      if (!ex_equal(x->table[i].first, y->table[i].first) ||
          !ex_equal(x->table[i].second, y->table[i].second))
        return false;
    return true;
  }
  return true;  // Any
}

namespace {

void free_vars(const TermPtr& t, std::set<std::string>& bound,
               std::set<std::string>& out) {
  if (auto* v = term_as_var(t)) {
    if (!bound.count(v->name)) out.insert(v->name);
    return;
  }
  if (auto* l = term_as_lam(t)) {
    bool fresh = bound.insert(l->binder).second;
    free_vars(l->body, bound, out);
    if (fresh) bound.erase(l->binder);
    return;
  }
  if (auto* a = term_as_app(t)) {
    free_vars(a->fn, bound, out);
    free_vars(a->arg, bound, out);
    return;
  }
  if (auto* c = term_as_ctor(t)) {
    for (const TermPtr& arg : c->args) free_vars(arg, bound, out);
    return;
  }
  if (auto* c = term_as_case(t)) {
    free_vars(c->scrutinee, bound, out);
    for (const CaseBranch& b : c->branches) {
      std::vector<std::string> fresh;
      for (const std::string& n : b.binders)
        if (bound.insert(n).second) fresh.push_back(n);
      free_vars(b.body, bound, out);
      for (const std::string& n : fresh) bound.erase(n);
    }
    return;
  }
}

bool closure_ground(const EnvPtr& env, const std::string& param,
                    const TermPtr& body) {
  if (!holes(body).empty()) return false;
  std::set<std::string> bound{param}, free;
  free_vars(body, bound, free);
  for (const std::string& n : free) {
    // Names missing from the chain are library globals.
    if (ResultPtr v = env_lookup(env, n); v && !is_ground(v)) return false;
  }
  return true;
}

}  // namespace

bool is_ground(const ResultPtr& r) {
  if (auto* c = result_as_ctor(r)) {
    for (const ResultPtr& a : c->args)
      if (!is_ground(a)) return false;
    return true;
  }
  if (auto* c = result_as_closure(r))
    return closure_ground(c->env, c->param, c->body);
  if (auto* p = result_as_prelude(r)) {
    for (const ResultPtr& a : p->args)
      if (!is_ground(a)) return false;
    return true;
  }
  if (result_as_exfun(r)) return true;
  return false;  // Hole, App, Case, Any
}

std::optional<ExPtr> result_to_example(const ResultPtr& r) {
  if (auto* c = result_as_ctor(r)) {
    std::vector<ExPtr> args;
    for (const ResultPtr& a : c->args) {
      auto e = result_to_example(a);
      if (!e) return std::nullopt;
      args.push_back(*e);
    }
    return ex_ctor(c->name, std::move(args));
  }
  if (auto* f = result_as_exfun(r)) return ex_fun(f->table);
  return std::nullopt;
}

ResultPtr example_to_result(const ExPtr& e) {
  if (auto* c = ex_as_ctor(e)) {
    std::vector<ResultPtr> args;
    for (const ExPtr& a : c->args) args.push_back(example_to_result(a));
    return rctor(c->name, std::move(args));
  }
  if (auto* f = ex_as_fun(e)) return rexfun(f->table);
  return rany();  // Top: any value at all
}

namespace {

ResultPtr eval_case(EvalState& st, const ResultPtr& s,
                    const std::vector<CaseBranch>& branches, const EnvPtr& env);

ResultPtr unroll(EvalState& st, const PreludeFn& def,
                 const std::vector<ResultPtr>& args) {
  if (def.recursive) {
    auto [it, fresh] =
        st.unrolls_left.try_emplace(def.name, st.budget.recursion_fuel);
    (void)fresh;
    if (it->second <= 0) throw EvalExhausted(EvalExhausted::Reason::Fuel);
    --it->second;
  }
  EnvPtr env;
  for (size_t i = 0; i < def.params.size(); ++i)
    env = env_bind(env, def.params[i], args[i]);
  return eval(st, env, def.body);
}

}  // namespace

ResultPtr apply_result(EvalState& st, const ResultPtr& f, const ResultPtr& a) {
  charge(st);
  if (auto* c = result_as_closure(f))
    return eval(st, env_bind(c->env, c->param, a), c->body);
  if (auto* p = result_as_prelude(f)) {
    const PreludeFn* def = st.prelude.find(p->name);
    if (!def) throw EvalError("unknown library function '" + p->name + "'");
    std::vector<ResultPtr> args = p->args;
    args.push_back(a);
    if (args.size() == def->params.size()) return unroll(st, *def, args);
    return rprelude(p->name, std::move(args));
  }
  if (auto* x = result_as_exfun(f)) {
    if (auto ea = result_to_example(a)) {
      for (const auto& [in, out] : x->table)
        if (ex_equal(in, *ea)) return example_to_result(out);
      return rany();  // outside the table: unconstrained
    }
    return rapp(f, a);  // can't look up an indeterminate argument yet
  }
  if (result_is_any(f)) return rany();
  if (result_as_ctor(f))
    throw EvalError("cannot apply a constructor value");
  return rapp(f, a);  // Hole, App, Case: indeterminate head
}

namespace {

ResultPtr eval_case(EvalState& st, const ResultPtr& s,
                    const std::vector<CaseBranch>& branches, const EnvPtr& env) {
  if (auto* c = result_as_ctor(s)) {
    for (const CaseBranch& b : branches) {
      if (b.ctor != c->name) continue;
      if (b.binders.size() != c->args.size())
        throw EvalError("pattern arity mismatch on " + b.ctor);
      EnvPtr env2 = env;
      for (size_t i = 0; i < b.binders.size(); ++i)
        env2 = env_bind(env2, b.binders[i], c->args[i]);
      return eval(st, env2, b.body);
    }
    throw EvalError("no case branch matches " + c->name);
  }
  if (result_is_any(s)) return rany();
  // Indeterminate scrutinee: stay stuck, branches unevaluated.
  return rcase(s, branches, env);
}

}  // namespace

ResultPtr eval(EvalState& st, const EnvPtr& env, const TermPtr& t) {
  charge(st);
  if (auto* v = term_as_var(t)) {
    if (ResultPtr r = env_lookup(env, v->name)) return r;
    if (const PreludeFn* def = st.prelude.find(v->name)) {
      if (def->params.empty()) return unroll(st, *def, {});
      return rprelude(v->name, {});
    }
    throw EvalError("unbound variable '" + v->name + "'");
  }
  if (auto* l = term_as_lam(t)) return rclosure(env, l->binder, l->body);
  if (auto* h = term_as_hole(t)) return rhole(env, h->id);
  if (auto* a = term_as_app(t)) {
    ResultPtr f = eval(st, env, a->fn);
    ResultPtr x = eval(st, env, a->arg);
    return apply_result(st, f, x);
  }
  if (auto* c = term_as_ctor(t)) {
    std::vector<ResultPtr> args;
    args.reserve(c->args.size());
    for (const TermPtr& arg : c->args) args.push_back(eval(st, env, arg));
    return rctor(c->name, std::move(args));
  }
  auto* c = term_as_case(t);
  ResultPtr s = eval(st, env, c->scrutinee);
  return eval_case(st, s, c->branches, env);
}

TermPtr subst_holes(const TermPtr& t, const std::map<int, TermPtr>& fillings) {
  if (auto* h = term_as_hole(t)) {
    auto it = fillings.find(h->id);
    return it == fillings.end() ? t : it->second;
  }
  if (auto* l = term_as_lam(t)) {
    TermPtr body = subst_holes(l->body, fillings);
    return body == l->body ? t : mk_lam(l->binder, body);
  }
  if (auto* a = term_as_app(t)) {
    TermPtr fn = subst_holes(a->fn, fillings);
    TermPtr arg = subst_holes(a->arg, fillings);
    return fn == a->fn && arg == a->arg ? t : mk_app(fn, arg);
  }
  if (auto* c = term_as_ctor(t)) {
    std::vector<TermPtr> args;
    bool changed = false;
    for (const TermPtr& arg : c->args) {
      args.push_back(subst_holes(arg, fillings));
      changed = changed || args.back() != arg;
    }
    return changed ? mk_ctor(c->name, std::move(args)) : t;
  }
  if (auto* c = term_as_case(t)) {
    TermPtr s = subst_holes(c->scrutinee, fillings);
    std::vector<CaseBranch> branches;
    bool changed = s != c->scrutinee;
    for (const CaseBranch& b : c->branches) {
      TermPtr body = subst_holes(b.body, fillings);
      changed = changed || body != b.body;
      branches.push_back({b.ctor, b.binders, body});
    }
    return changed ? mk_case(s, std::move(branches)) : t;
  }
  return t;  // Var
}

namespace {

struct Resumer {
  EvalState& st;
  const std::map<int, TermPtr>& fillings;
  std::map<const Result*, ResultPtr> rmemo;
  std::map<const EnvNode*, EnvPtr> ememo;

  EnvPtr env(const EnvPtr& e) {
    if (!e) return nullptr;
    auto it = ememo.find(e.get());
    if (it != ememo.end()) return it->second;
    EnvPtr rest = env(e->next);
    ResultPtr v = res(e->value);
    EnvPtr out =
        (rest == e->next && v == e->value) ? e : env_bind(rest, e->name, v);
    ememo.emplace(e.get(), out);
    return out;
  }

  ResultPtr res(const ResultPtr& r) {
    auto it = rmemo.find(r.get());
    if (it != rmemo.end()) return it->second;
    ResultPtr out = step(r);
    rmemo.emplace(r.get(), out);
    return out;
  }

  ResultPtr step(const ResultPtr& r) {
    if (auto* c = result_as_ctor(r)) {
      std::vector<ResultPtr> args;
      bool changed = false;
      for (const ResultPtr& a : c->args) {
        args.push_back(res(a));
        changed = changed || args.back() != a;
      }
      return changed ? rctor(c->name, std::move(args)) : r;
    }
    if (auto* c = result_as_closure(r)) {
      EnvPtr e = env(c->env);
      TermPtr body = subst_holes(c->body, fillings);
      return e == c->env && body == c->body ? r : rclosure(e, c->param, body);
    }
    if (auto* h = result_as_hole(r)) {
      EnvPtr e = env(h->env);
      auto it = fillings.find(h->id);
      if (it == fillings.end()) return e == h->env ? r : rhole(e, h->id);
      return eval(st, e, it->second);
    }
    if (auto* a = result_as_app(r)) {
      ResultPtr f = res(a->fn);
      ResultPtr x = res(a->arg);
      if (f == a->fn && x == a->arg) return r;
      return apply_result(st, f, x);
    }
    if (auto* c = result_as_case(r)) {
      ResultPtr s = res(c->scrutinee);
      EnvPtr e = env(c->env);
      std::vector<CaseBranch> branches;
      bool changed = s != c->scrutinee || e != c->env;
      for (const CaseBranch& b : c->branches) {
        TermPtr body = subst_holes(b.body, fillings);
        changed = changed || body != b.body;
        branches.push_back({b.ctor, b.binders, body});
      }
      if (!changed) return r;
      return eval_case(st, s, std::move(branches), e);
    }
    if (auto* p = result_as_prelude(r)) {
      std::vector<ResultPtr> args;
      bool changed = false;
      for (const ResultPtr& a : p->args) {
        args.push_back(res(a));
        changed = changed || args.back() != a;
      }
      return changed ? rprelude(p->name, std::move(args)) : r;
    }
    return r;  // ExFun, Any
  }
};

}  // namespace

ResultPtr resume(EvalState& st, const ResultPtr& r,
                 const std::map<int, TermPtr>& fillings) {
  Resumer rs{st, fillings, {}, {}};
  return rs.res(r);
}

Sat satisfies(EvalState& st, const ResultPtr& r, const ExPtr& ex) {
  if (ex_is_top(ex)) return Sat::Yes;
  if (result_is_any(r)) return Sat::Yes;
  if (auto* c = ex_as_ctor(ex)) {
    if (auto* rc = result_as_ctor(r)) {
      if (rc->name != c->name) return Sat::No;
      if (rc->args.size() != c->args.size()) return Sat::No;
      Sat acc = Sat::Yes;
      for (size_t i = 0; i < rc->args.size(); ++i) {
        Sat s = satisfies(st, rc->args[i], c->args[i]);
        if (s == Sat::No) return Sat::No;
        if (s == Sat::NotGround) acc = Sat::NotGround;
      }
      return acc;
    }
    if (result_as_closure(r) || result_as_prelude(r) || result_as_exfun(r))
      return Sat::No;  // a function value is no constructor
    return Sat::NotGround;
  }
  // Function example: apply and compare row by row.
  auto* f = ex_as_fun(ex);
  if (result_as_ctor(r)) return Sat::No;
  if (result_as_hole(r) || result_as_app(r) || result_as_case(r))
    return Sat::NotGround;
  Sat acc = Sat::Yes;
  for (const auto& [in, out] : f->table) {
    Sat s = satisfies(st, apply_result(st, r, example_to_result(in)), out);
    if (s == Sat::No) return Sat::No;
    if (s == Sat::NotGround) acc = Sat::NotGround;
  }
  return acc;
}

namespace {

void record_head(const ResultPtr& r, std::vector<int>& order,
                 std::set<int>& seen) {
  const Result* cur = r.get();
  while (auto* a = std::get_if<Result::App>(&cur->node)) cur = a->fn.get();
  if (auto* h = std::get_if<Result::Hole>(&cur->node)) {
    if (seen.insert(h->id).second) order.push_back(h->id);
  }
}

void walk_blocking(const ResultPtr& r, std::vector<int>& order,
                   std::set<int>& seen) {
  if (auto* c = result_as_ctor(r)) {
    for (const ResultPtr& a : c->args) walk_blocking(a, order, seen);
    return;
  }
  if (auto* a = result_as_app(r)) {
    record_head(r, order, seen);
    walk_blocking(a->fn, order, seen);
    walk_blocking(a->arg, order, seen);
    return;
  }
  if (auto* c = result_as_case(r)) {
    record_head(c->scrutinee, order, seen);
    walk_blocking(c->scrutinee, order, seen);
    return;
  }
  // Closure environments are capture, not demand; nothing there blocks.
}

}  // namespace

std::vector<int> blocking_holes(const Prelude& prelude, const TermPtr& sketch,
                                const std::vector<Assert>& asserts,
                                const EvalBudget& budget) {
  std::vector<int> order;
  std::set<int> seen;
  for (const Assert& a : asserts) {
    EvalState st(prelude, budget);
    try {
      ResultPtr r = eval(st, nullptr, sketch);
      for (const ExPtr& arg : a.args)
        r = apply_result(st, r, example_to_result(arg));
      walk_blocking(r, order, seen);
    } catch (const EvalExhausted&) {
      continue;  // unknown, contributes nothing
    }
  }
  auto blocked = static_cast<std::ptrdiff_t>(order.size());
  for (int id : holes(sketch))
    if (seen.insert(id).second) order.push_back(id);
  std::sort(order.begin() + blocked, order.end());
  return order;
}

std::string pretty_result(const ResultPtr& r) {
  if (auto* c = result_as_ctor(r)) {
    if (auto ex = result_to_example(r)) return pretty(*ex);
    std::string out = c->name;
    for (const ResultPtr& a : c->args) {
      std::string s = pretty_result(a);
      if (s.find(' ') != std::string::npos) s = "(" + s + ")";
      out += " " + s;
    }
    return out;
  }
  if (result_as_closure(r)) return "<fun>";
  if (auto* h = result_as_hole(r)) return "_" + std::to_string(h->id);
  if (auto* a = result_as_app(r))
    return pretty_result(a->fn) + " " + pretty_result(a->arg);
  if (auto* c = result_as_case(r))
    return "<stuck case on " + pretty_result(c->scrutinee) + ">";
  if (auto* p = result_as_prelude(r)) {
    std::string out = p->name;
    for (const ResultPtr& a : p->args) out += " " + pretty_result(a);
    return out;
  }
  if (auto* f = result_as_exfun(r)) return pretty(ex_fun(f->table));
  return "_";  // Any
}

}  // namespace lacuna
