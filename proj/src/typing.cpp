#include "typing.hpp"

#include <algorithm>
#include <set>

#include "pretty.hpp"

namespace lacuna {

TypePtr Subst::resolve(TypePtr t) const {
  while (auto* v = as_var(t)) {
    if (!is_meta(v->name)) break;
    auto it = map.find(v->name);
    if (it == map.end()) break;
    t = it->second;
  }
  return t;
}

TypePtr Subst::apply(const TypePtr& t) const {
  TypePtr r = resolve(t);
  if (as_var(r)) return r;
  if (auto* ar = as_arrow(r)) {
    TypePtr from = apply(ar->from);
    TypePtr to = apply(ar->to);
    return (from == ar->from && to == ar->to) ? r : tarrow(from, to);
  }
  auto* d = as_data(r);
  bool changed = false;
  std::vector<TypePtr> args;
  args.reserve(d->args.size());
  for (const auto& a : d->args) {
    auto na = apply(a);
    changed |= na != a;
    args.push_back(na);
  }
  return changed ? tdata(d->name, std::move(args)) : r;
}

namespace {

bool occurs(const Subst& s, const std::string& meta, const TypePtr& t) {
  TypePtr r = s.resolve(t);
  if (auto* v = as_var(r)) return v->name == meta;
  if (auto* ar = as_arrow(r)) return occurs(s, meta, ar->from) || occurs(s, meta, ar->to);
  auto* d = as_data(r);
  return std::any_of(d->args.begin(), d->args.end(),
                     [&](const TypePtr& a) { return occurs(s, meta, a); });
}

// Replaces rigid variables per `inst`, e.g. a datatype's parameters by the
// actual type arguments. Metavariables pass through untouched.
TypePtr subst_rigid(const TypePtr& t, const std::map<std::string, TypePtr>& inst) {
  if (auto* v = as_var(t)) {
    if (!is_meta(v->name)) {
      auto it = inst.find(v->name);
      if (it != inst.end()) return it->second;
    }
    return t;
  }
  if (auto* ar = as_arrow(t)) {
    auto from = subst_rigid(ar->from, inst);
    auto to = subst_rigid(ar->to, inst);
    return (from == ar->from && to == ar->to) ? t : tarrow(from, to);
  }
  auto* d = as_data(t);
  bool changed = false;
  std::vector<TypePtr> args;
  args.reserve(d->args.size());
  for (const auto& a : d->args) {
    auto na = subst_rigid(a, inst);
    changed |= na != a;
    args.push_back(na);
  }
  return changed ? tdata(d->name, std::move(args)) : t;
}

}  // namespace

UnifyOutcome unify(Subst& s, const TypePtr& a0, const TypePtr& b0) {
  TypePtr a = s.resolve(a0);
  TypePtr b = s.resolve(b0);
  auto* va = as_var(a);
  auto* vb = as_var(b);
  if (va && vb && va->name == vb->name) return UnifyOutcome::Ok;
  if (va && is_meta(va->name)) {
    if (occurs(s, va->name, b)) return UnifyOutcome::Occurs;
    s.map[va->name] = b;
    return UnifyOutcome::Ok;
  }
  if (vb && is_meta(vb->name)) {
    if (occurs(s, vb->name, a)) return UnifyOutcome::Occurs;
    s.map[vb->name] = a;
    return UnifyOutcome::Ok;
  }
  if (va || vb) return UnifyOutcome::Mismatch;
  auto* aa = as_arrow(a);
  auto* ba = as_arrow(b);
  if (aa && ba) {
    auto r = unify(s, aa->from, ba->from);
    return r == UnifyOutcome::Ok ? unify(s, aa->to, ba->to) : r;
  }
  auto* ad = as_data(a);
  auto* bd = as_data(b);
  if (ad && bd) {
    if (ad->name != bd->name || ad->args.size() != bd->args.size())
      return UnifyOutcome::Mismatch;
    for (size_t i = 0; i < ad->args.size(); ++i) {
      auto r = unify(s, ad->args[i], bd->args[i]);
      if (r != UnifyOutcome::Ok) return r;
    }
    return UnifyOutcome::Ok;
  }
  return UnifyOutcome::Mismatch;
}

bool try_unify(Subst& s, const TypePtr& a, const TypePtr& b) {
  return unify(s, a, b) == UnifyOutcome::Ok;
}

void TypeEnv::add_datatype(const DataDecl& d) {
  if (datatypes.count(d.name))
    throw TypeError("datatype '" + d.name + "' is already declared");
  for (const auto& c : d.ctors) {
    if (ctors.count(c.name))
      throw TypeError("constructor '" + c.name + "' is already declared");
  }
  datatypes[d.name] = d;
  for (const auto& c : d.ctors) ctors[c.name] = {d.name, c.args};
}

const DataDecl* TypeEnv::datatype_of_ctor(const std::string& ctor) const {
  auto it = ctors.find(ctor);
  if (it == ctors.end()) return nullptr;
  return &datatypes.at(it->second.first);
}

TypePtr fresh_meta(int& next_meta) { return tvar("?" + std::to_string(next_meta++)); }

TypePtr instantiate(const Scheme& sch, int& next_meta) {
  if (sch.vars.empty()) return sch.body;
  std::map<std::string, TypePtr> inst;
  for (const auto& v : sch.vars) inst[v] = fresh_meta(next_meta);
  return subst_rigid(sch.body, inst);
}

namespace {

struct Checker {
  const TypeEnv& env;
  Subst& s;
  int& next_meta;
  std::map<int, HoleCtx>& out;
  std::vector<std::pair<std::string, TypePtr>> scope = {};
  int depth = 0;

  void unify_exp(const TypePtr& expected, const TypePtr& actual, const std::string& where) {
    switch (unify(s, expected, actual)) {
      case UnifyOutcome::Ok:
        return;
      case UnifyOutcome::Mismatch:
        throw TypeError("type mismatch" + (where.empty() ? "" : " in " + where) +
                        ": expected " + pretty(s.apply(expected)) + ", got " +
                        pretty(s.apply(actual)));
      case UnifyOutcome::Occurs:
        throw OccursCheck("cannot construct the infinite type " +
                          pretty(s.apply(expected)) + " ~ " + pretty(s.apply(actual)));
    }
  }

  void record_hole(int id, const TypePtr& goal) {
    if (out.count(id))
      throw TypeError("hole _" + std::to_string(id) + " appears more than once");
    out[id] = HoleCtx{id, goal, scope, depth};
  }

  void check(const TermPtr& t, const TypePtr& expected) {
    if (auto* l = term_as_lam(t)) {
      TypePtr r = s.resolve(expected);
      if (auto* v = as_var(r); v && is_meta(v->name)) {
        TypePtr from = fresh_meta(next_meta);
        TypePtr to = fresh_meta(next_meta);
        unify_exp(r, tarrow(from, to), "lambda");
        r = tarrow(from, to);
      }
      auto* ar = as_arrow(r);
      if (!ar)
        throw TypeError("a lambda cannot have type " + pretty(s.apply(expected)));
      scope.emplace_back(l->binder, ar->from);
      ++depth;
      check(l->body, ar->to);
      --depth;
      scope.pop_back();
      return;
    }
    if (auto* h = term_as_hole(t)) {
      record_hole(h->id, expected);
      return;
    }
    if (auto* c = term_as_case(t)) {
      check_case(*c, expected);
      return;
    }
    unify_exp(expected, infer_term(t), "");
  }

  TypePtr infer_term(const TermPtr& t) {
    if (auto* v = term_as_var(t)) {
      for (auto it = scope.rbegin(); it != scope.rend(); ++it)
        if (it->first == v->name) return it->second;
      auto g = env.globals.find(v->name);
      if (g != env.globals.end()) return instantiate(g->second, next_meta);
      throw UnknownVariable(v->name);
    }
    if (auto* a = term_as_app(t)) {
      TypePtr tf = infer_term(a->fn);
      TypePtr r = s.resolve(tf);
      if (auto* v = as_var(r); v && is_meta(v->name)) {
        TypePtr from = fresh_meta(next_meta);
        TypePtr to = fresh_meta(next_meta);
        unify_exp(r, tarrow(from, to), "application");
        r = tarrow(from, to);
      }
      auto* ar = as_arrow(r);
      if (!ar)
        throw TypeError("cannot apply a value of type " + pretty(s.apply(tf)));
      check(a->arg, ar->from);
      return ar->to;
    }
    if (auto* c = term_as_ctor(t)) {
      auto it = env.ctors.find(c->name);
      if (it == env.ctors.end())
        throw TypeError("unknown constructor '" + c->name + "'");
      const auto& [dtname, argdecls] = it->second;
      const DataDecl& decl = env.datatypes.at(dtname);
      if (c->args.size() != argdecls.size())
        throw TypeError("constructor '" + c->name + "' expects " +
                        std::to_string(argdecls.size()) + " arguments");
      std::map<std::string, TypePtr> inst;
      std::vector<TypePtr> dargs;
      for (const auto& pvar : decl.params) {
        inst[pvar] = fresh_meta(next_meta);
        dargs.push_back(inst[pvar]);
      }
      for (size_t i = 0; i < c->args.size(); ++i)
        check(c->args[i], subst_rigid(argdecls[i], inst));
      return tdata(dtname, std::move(dargs));
    }
    if (auto* l = term_as_lam(t)) {
      TypePtr from = fresh_meta(next_meta);
      scope.emplace_back(l->binder, from);
      ++depth;
      TypePtr to = infer_term(l->body);
      --depth;
      scope.pop_back();
      return tarrow(from, to);
    }
    if (term_as_case(t)) {
      TypePtr r = fresh_meta(next_meta);
      check_case(*term_as_case(t), r);
      return r;
    }
    auto* h = term_as_hole(t);
    TypePtr g = fresh_meta(next_meta);
    record_hole(h->id, g);
    return g;
  }

  void check_case(const Term::Case& cs, const TypePtr& expected) {
    TypePtr st = infer_term(cs.scrutinee);
    TypePtr rs = s.resolve(st);
    const DataDecl* decl = nullptr;
    std::vector<TypePtr> dargs;
    if (auto* d = as_data(rs)) {
      auto it = env.datatypes.find(d->name);
      if (it == env.datatypes.end())
        throw TypeError("unknown datatype '" + d->name + "'");
      decl = &it->second;
      dargs = d->args;
    } else if (auto* v = as_var(rs); v && is_meta(v->name)) {
      if (cs.branches.empty()) throw TypeError("case expression has no branches");
      decl = env.datatype_of_ctor(cs.branches[0].ctor);
      if (!decl)
        throw TypeError("unknown constructor '" + cs.branches[0].ctor +
                        "' in case pattern");
      for (size_t i = 0; i < decl->params.size(); ++i)
        dargs.push_back(fresh_meta(next_meta));
      unify_exp(rs, tdata(decl->name, dargs), "case scrutinee");
    } else {
      throw TypeError("case scrutinee has type " + pretty(s.apply(st)) +
                      ", which is not a datatype");
    }
    if (decl->params.size() != dargs.size())
      throw TypeError("datatype '" + decl->name + "' applied to " +
                      std::to_string(dargs.size()) + " arguments");
    if (cs.branches.size() != decl->ctors.size())
      throw TypeError("case over " + decl->name + " must cover all " +
                      std::to_string(decl->ctors.size()) + " constructors");
    std::map<std::string, TypePtr> inst;
    for (size_t i = 0; i < decl->params.size(); ++i) inst[decl->params[i]] = dargs[i];
    for (size_t i = 0; i < cs.branches.size(); ++i) {
      const CaseBranch& b = cs.branches[i];
      const CtorDecl& c = decl->ctors[i];
      if (b.ctor != c.name)
        throw TypeError("case branches must follow the declaration order of " +
                        decl->name + "; expected " + c.name + ", got " + b.ctor);
      if (b.binders.size() != c.args.size())
        throw TypeError("pattern for " + c.name + " binds " +
                        std::to_string(b.binders.size()) + " names, needs " +
                        std::to_string(c.args.size()));
      for (size_t j = 0; j < b.binders.size(); ++j)
        scope.emplace_back(b.binders[j], subst_rigid(c.args[j], inst));
      ++depth;
      check(b.body, expected);
      --depth;
      scope.resize(scope.size() - b.binders.size());
    }
  }

  void check_example(const ExPtr& e, const TypePtr& ty, const std::string& where) {
    if (ex_is_top(e)) return;
    TypePtr rt = s.resolve(ty);
    if (auto* c = ex_as_ctor(e)) {
      auto it = env.ctors.find(c->name);
      if (it == env.ctors.end())
        throw TypeError(where + ": unknown constructor '" + c->name + "'");
      // A metavariable position takes the value's datatype; rigid positions
      // would make the assert claim more generality than the value has.
      if (auto* v = as_var(rt); v && is_meta(v->name)) {
        const DataDecl& dd = env.datatypes.at(it->second.first);
        std::vector<TypePtr> dargs;
        for (size_t i = 0; i < dd.params.size(); ++i)
          dargs.push_back(fresh_meta(next_meta));
        unify_exp(tdata(dd.name, dargs), rt, where);
        rt = tdata(dd.name, std::move(dargs));
      }
      auto* d = as_data(rt);
      if (!d || d->name != it->second.first)
        throw TypeError(where + ": value " + pretty(e) + " cannot have type " +
                        pretty(s.apply(rt)));
      const DataDecl& decl = env.datatypes.at(d->name);
      if (decl.params.size() != d->args.size())
        throw TypeError(where + ": datatype '" + d->name + "' applied to " +
                        std::to_string(d->args.size()) + " arguments");
      std::map<std::string, TypePtr> inst;
      for (size_t i = 0; i < decl.params.size(); ++i)
        inst[decl.params[i]] = d->args[i];
      const auto& argdecls = it->second.second;
      for (size_t i = 0; i < c->args.size(); ++i)
        check_example(c->args[i], subst_rigid(argdecls[i], inst), where);
      return;
    }
    if (auto* v = as_var(rt); v && is_meta(v->name)) {
      TypePtr arr = tarrow(fresh_meta(next_meta), fresh_meta(next_meta));
      unify_exp(arr, rt, where);
      rt = arr;
    }
    auto* ar = as_arrow(rt);
    if (!ar)
      throw TypeError(where + ": value " + pretty(e) + " cannot have type " +
                      pretty(s.apply(rt)));
    for (const auto& [in, outv] : ex_as_fun(e)->table) {
      check_example(in, ar->from, where);
      check_example(outv, ar->to, where);
    }
  }
};

void finalize(const Subst& s, std::map<int, HoleCtx>& holes) {
  for (auto& [id, ctx] : holes) {
    ctx.goal = s.apply(ctx.goal);
    for (auto& [name, ty] : ctx.env) ty = s.apply(ty);
  }
}

}  // namespace

InferResult infer(const TypeEnv& env, const Program& p) {
  if (!p.sig_type) throw TypeError("the file declares no signature");
  if (!p.body) throw TypeError("the file declares no definition");
  InferResult r;
  Checker c{env, r.subst, r.next_meta, r.holes};
  c.check(p.sketch(), p.sig_type);
  auto [sig_args, sig_ret] = peel_arrows(p.sig_type);
  // Each assert exercises one instance of the signature, so its rigid
  // variables open into per-assert metavariables the values then fix.
  std::vector<std::string> rigids;
  {
    std::set<std::string> seen;
    auto collect = [&](auto&& self, const TypePtr& t) -> void {
      if (auto* v = as_var(t)) {
        if (!is_meta(v->name) && seen.insert(v->name).second)
          rigids.push_back(v->name);
      } else if (auto* ar = as_arrow(t)) {
        self(self, ar->from);
        self(self, ar->to);
      } else if (auto* d = as_data(t)) {
        for (const TypePtr& x : d->args) self(self, x);
      }
    };
    collect(collect, p.sig_type);
  }
  r.assert_metas_begin = r.next_meta;
  for (const Assert& a : p.asserts) {
    const std::string where = "assert on '" + a.fn + "'";
    if (a.fn != p.sig_name)
      throw TypeError(where + ": the file defines '" + p.sig_name + "'");
    // Asserts must saturate the signature; the expected value sits at the
    // return type.
    if (a.args.size() != sig_args.size())
      throw TypeError(where + ": " + std::to_string(sig_args.size()) +
                      " arguments required, got " +
                      std::to_string(a.args.size()));
    std::map<std::string, TypePtr> inst;
    for (const std::string& rv : rigids) inst[rv] = fresh_meta(r.next_meta);
    for (size_t i = 0; i < a.args.size(); ++i)
      c.check_example(a.args[i], subst_rigid(sig_args[i], inst), where);
    c.check_example(a.expected, subst_rigid(sig_ret, inst), where);
  }
  r.assert_metas_end = r.next_meta;
  finalize(r.subst, r.holes);
  return r;
}

std::map<int, HoleCtx> check_filling_type(const HoleCtx& ctx, const TermPtr& hf,
                                          const TypeEnv& env, Subst& subst,
                                          int& next_meta) {
  std::map<int, HoleCtx> out;
  Checker c{env, subst, next_meta, out};
  c.scope = ctx.env;
  c.depth = ctx.depth;
  c.check(hf, ctx.goal);
  finalize(subst, out);
  return out;
}

bool fully_resolved(const Subst& s, const TypePtr& t) {
  TypePtr r = s.apply(t);
  bool ok = true;
  std::function<void(const TypePtr&)> walk = [&](const TypePtr& ty) {
    if (auto* v = as_var(ty)) {
      if (is_meta(v->name)) ok = false;
      return;
    }
    if (auto* ar = as_arrow(ty)) {
      walk(ar->from);
      walk(ar->to);
      return;
    }
    for (const auto& a : as_data(ty)->args) walk(a);
  };
  walk(r);
  return ok;
}

}  // namespace lacuna
