#include "ast.hpp"

#include <algorithm>

namespace lacuna {

TypePtr tvar(std::string name) {
  return std::make_shared<Type>(Type{Type::Var{std::move(name)}});
}

TypePtr tarrow(TypePtr from, TypePtr to) {
  return std::make_shared<Type>(Type{Type::Arrow{std::move(from), std::move(to)}});
}

TypePtr tdata(std::string name, std::vector<TypePtr> args) {
  return std::make_shared<Type>(Type{Type::Data{std::move(name), std::move(args)}});
}

bool is_meta(const std::string& name) {
  return !name.empty() && name[0] == '?';
}

const Type::Var* as_var(const TypePtr& t) {
  return std::get_if<Type::Var>(&t->node);
}
const Type::Arrow* as_arrow(const TypePtr& t) {
  return std::get_if<Type::Arrow>(&t->node);
}
const Type::Data* as_data(const TypePtr& t) {
  return std::get_if<Type::Data>(&t->node);
}

bool type_equal(const TypePtr& a, const TypePtr& b) {
  if (a.get() == b.get()) return true;
  if (a->node.index() != b->node.index()) return false;
  if (auto* v = as_var(a)) return v->name == as_var(b)->name;
  if (auto* ar = as_arrow(a)) {
    auto* br = as_arrow(b);
    return type_equal(ar->from, br->from) && type_equal(ar->to, br->to);
  }
  auto* ad = as_data(a);
  auto* bd = as_data(b);
  if (ad->name != bd->name || ad->args.size() != bd->args.size()) return false;
  for (size_t i = 0; i < ad->args.size(); ++i)
    if (!type_equal(ad->args[i], bd->args[i])) return false;
  return true;
}

std::pair<std::vector<TypePtr>, TypePtr> peel_arrows(const TypePtr& t) {
  std::vector<TypePtr> args;
  TypePtr cur = t;
  while (auto* ar = as_arrow(cur)) {
    args.push_back(ar->from);
    cur = ar->to;
  }
  return {args, cur};
}

TermPtr mk_var(std::string name) {
  return std::make_shared<Term>(Term{Term::Var{std::move(name)}});
}
TermPtr mk_lam(std::string binder, TermPtr body) {
  return std::make_shared<Term>(Term{Term::Lam{std::move(binder), std::move(body)}});
}
TermPtr mk_app(TermPtr fn, TermPtr arg) {
  return std::make_shared<Term>(Term{Term::App{std::move(fn), std::move(arg)}});
}
TermPtr mk_apps(TermPtr fn, const std::vector<TermPtr>& args) {
  TermPtr cur = std::move(fn);
  for (const auto& a : args) cur = mk_app(cur, a);
  return cur;
}
TermPtr mk_ctor(std::string name, std::vector<TermPtr> args) {
  return std::make_shared<Term>(Term{Term::Ctor{std::move(name), std::move(args)}});
}
TermPtr mk_case(TermPtr scrutinee, std::vector<CaseBranch> branches) {
  return std::make_shared<Term>(Term{Term::Case{std::move(scrutinee), std::move(branches)}});
}
TermPtr mk_hole(int id) {
  return std::make_shared<Term>(Term{Term::Hole{id}});
}

const Term::Var* term_as_var(const TermPtr& t) { return std::get_if<Term::Var>(&t->node); }
const Term::Lam* term_as_lam(const TermPtr& t) { return std::get_if<Term::Lam>(&t->node); }
const Term::App* term_as_app(const TermPtr& t) { return std::get_if<Term::App>(&t->node); }
const Term::Ctor* term_as_ctor(const TermPtr& t) { return std::get_if<Term::Ctor>(&t->node); }
const Term::Case* term_as_case(const TermPtr& t) { return std::get_if<Term::Case>(&t->node); }
const Term::Hole* term_as_hole(const TermPtr& t) { return std::get_if<Term::Hole>(&t->node); }

bool term_equal(const TermPtr& a, const TermPtr& b) {
  if (a.get() == b.get()) return true;
  if (a->node.index() != b->node.index()) return false;
  if (auto* v = term_as_var(a)) return v->name == term_as_var(b)->name;
  if (auto* l = term_as_lam(a)) {
    auto* m = term_as_lam(b);
    return l->binder == m->binder && term_equal(l->body, m->body);
  }
  if (auto* ap = term_as_app(a)) {
    auto* bp = term_as_app(b);
    return term_equal(ap->fn, bp->fn) && term_equal(ap->arg, bp->arg);
  }
  if (auto* c = term_as_ctor(a)) {
    auto* d = term_as_ctor(b);
    if (c->name != d->name || c->args.size() != d->args.size()) return false;
    for (size_t i = 0; i < c->args.size(); ++i)
      if (!term_equal(c->args[i], d->args[i])) return false;
    return true;
  }
  if (auto* c = term_as_case(a)) {
    auto* d = term_as_case(b);
    if (!term_equal(c->scrutinee, d->scrutinee)) return false;
    if (c->branches.size() != d->branches.size()) return false;
    for (size_t i = 0; i < c->branches.size(); ++i) {
      const auto& x = c->branches[i];
      const auto& y = d->branches[i];
      if (x.ctor != y.ctor || x.binders != y.binders || !term_equal(x.body, y.body))
        return false;
    }
    return true;
  }
  return term_as_hole(a)->id == term_as_hole(b)->id;
}

namespace {

void collect_holes(const TermPtr& t, std::vector<int>& out) {
  if (auto* h = term_as_hole(t)) {
    out.push_back(h->id);
  } else if (auto* l = term_as_lam(t)) {
    collect_holes(l->body, out);
  } else if (auto* a = term_as_app(t)) {
    collect_holes(a->fn, out);
    collect_holes(a->arg, out);
  } else if (auto* c = term_as_ctor(t)) {
    for (const auto& arg : c->args) collect_holes(arg, out);
  } else if (auto* cs = term_as_case(t)) {
    collect_holes(cs->scrutinee, out);
    for (const auto& b : cs->branches) collect_holes(b.body, out);
  }
}

TermPtr fill_rec(const TermPtr& t, int id, const TermPtr& replacement, bool& found) {
  if (auto* h = term_as_hole(t)) {
    if (h->id == id) {
      found = true;
      return replacement;
    }
    return t;
  }
  if (auto* l = term_as_lam(t)) {
    auto body = fill_rec(l->body, id, replacement, found);
    return body == l->body ? t : mk_lam(l->binder, body);
  }
  if (auto* a = term_as_app(t)) {
    auto fn = fill_rec(a->fn, id, replacement, found);
    auto arg = fill_rec(a->arg, id, replacement, found);
    return (fn == a->fn && arg == a->arg) ? t : mk_app(fn, arg);
  }
  if (auto* c = term_as_ctor(t)) {
    bool changed = false;
    std::vector<TermPtr> args;
    args.reserve(c->args.size());
    for (const auto& arg : c->args) {
      auto na = fill_rec(arg, id, replacement, found);
      changed |= na != arg;
      args.push_back(na);
    }
    return changed ? mk_ctor(c->name, std::move(args)) : t;
  }
  if (auto* cs = term_as_case(t)) {
    bool changed = false;
    auto scrut = fill_rec(cs->scrutinee, id, replacement, found);
    changed |= scrut != cs->scrutinee;
    std::vector<CaseBranch> branches;
    branches.reserve(cs->branches.size());
    for (const auto& b : cs->branches) {
      auto body = fill_rec(b.body, id, replacement, found);
      changed |= body != b.body;
      branches.push_back({b.ctor, b.binders, body});
    }
    return changed ? mk_case(scrut, std::move(branches)) : t;
  }
  return t;
}

}  // namespace

std::vector<int> holes(const TermPtr& t) {
  std::vector<int> out;
  collect_holes(t, out);
  return out;
}

UnknownHole::UnknownHole(int id)
    : std::runtime_error("unknown hole _" + std::to_string(id)), id(id) {}

HoleIdClash::HoleIdClash(int id)
    : std::runtime_error("hole id _" + std::to_string(id) + " is not fresh"), id(id) {}

TermPtr fill(const TermPtr& t, int id, const TermPtr& replacement) {
  auto existing = holes(t);
  if (std::find(existing.begin(), existing.end(), id) == existing.end())
    throw UnknownHole(id);
  for (int rh : holes(replacement)) {
    if (std::find(existing.begin(), existing.end(), rh) != existing.end())
      throw HoleIdClash(rh);
  }
  bool found = false;
  return fill_rec(t, id, replacement, found);
}

void for_each_subterm(const TermPtr& t, const std::function<void(const TermPtr&)>& f) {
  f(t);
  if (auto* l = term_as_lam(t)) {
    for_each_subterm(l->body, f);
  } else if (auto* a = term_as_app(t)) {
    for_each_subterm(a->fn, f);
    for_each_subterm(a->arg, f);
  } else if (auto* c = term_as_ctor(t)) {
    for (const auto& arg : c->args) for_each_subterm(arg, f);
  } else if (auto* cs = term_as_case(t)) {
    for_each_subterm(cs->scrutinee, f);
    for (const auto& b : cs->branches) for_each_subterm(b.body, f);
  }
}

ExPtr ex_ctor(std::string name, std::vector<ExPtr> args) {
  return std::make_shared<ExampleValue>(
      ExampleValue{ExampleValue::Ctor{std::move(name), std::move(args)}});
}
ExPtr ex_fun(std::vector<std::pair<ExPtr, ExPtr>> table) {
  return std::make_shared<ExampleValue>(ExampleValue{ExampleValue::Fun{std::move(table)}});
}
ExPtr ex_top() {
  static const ExPtr top = std::make_shared<ExampleValue>(ExampleValue{ExampleValue::Top{}});
  return top;
}

const ExampleValue::Ctor* ex_as_ctor(const ExPtr& e) {
  return std::get_if<ExampleValue::Ctor>(&e->node);
}
const ExampleValue::Fun* ex_as_fun(const ExPtr& e) {
  return std::get_if<ExampleValue::Fun>(&e->node);
}
bool ex_is_top(const ExPtr& e) {
  return std::holds_alternative<ExampleValue::Top>(e->node);
}

bool ex_equal(const ExPtr& a, const ExPtr& b) {
  if (a.get() == b.get()) return true;
  if (a->node.index() != b->node.index()) return false;
  if (auto* c = ex_as_ctor(a)) {
    auto* d = ex_as_ctor(b);
    if (c->name != d->name || c->args.size() != d->args.size()) return false;
    for (size_t i = 0; i < c->args.size(); ++i)
      if (!ex_equal(c->args[i], d->args[i])) return false;
    return true;
  }
  if (auto* f = ex_as_fun(a)) {
    auto* g = ex_as_fun(b);
    if (f->table.size() != g->table.size()) return false;
    for (size_t i = 0; i < f->table.size(); ++i) {
      if (!ex_equal(f->table[i].first, g->table[i].first)) return false;
      if (!ex_equal(f->table[i].second, g->table[i].second)) return false;
    }
    return true;
  }
  return true;  // both Top
}

std::optional<ExPtr> ex_meet(const ExPtr& a, const ExPtr& b) {
  if (ex_is_top(a)) return b;
  if (ex_is_top(b)) return a;
  if (auto* c = ex_as_ctor(a)) {
    auto* d = ex_as_ctor(b);
    if (!d || c->name != d->name || c->args.size() != d->args.size()) return std::nullopt;
    std::vector<ExPtr> args;
    args.reserve(c->args.size());
    for (size_t i = 0; i < c->args.size(); ++i) {
      auto m = ex_meet(c->args[i], d->args[i]);
      if (!m) return std::nullopt;
      args.push_back(*m);
    }
    return ex_ctor(c->name, std::move(args));
  }
  auto* f = ex_as_fun(a);
  auto* g = ex_as_fun(b);
  if (!f || !g) return std::nullopt;
  // Union of the two tables; inputs present in both must have a meet of
  // outputs, which is also the functionality check for example functions.
  std::vector<std::pair<ExPtr, ExPtr>> table = f->table;
  for (const auto& [in, out] : g->table) {
    bool merged = false;
    for (auto& row : table) {
      if (ex_equal(row.first, in)) {
        auto m = ex_meet(row.second, out);
        if (!m) return std::nullopt;
        row.second = *m;
        merged = true;
        break;
      }
    }
    if (!merged) table.emplace_back(in, out);
  }
  return ex_fun(std::move(table));
}

TermPtr Program::sketch() const {
  TermPtr t = body;
  for (auto it = params.rbegin(); it != params.rend(); ++it) t = mk_lam(*it, t);
  return t;
}

}  // namespace lacuna
