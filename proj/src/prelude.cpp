#include "prelude.hpp"

#include <algorithm>

#include "pretty.hpp"

namespace lacuna {

namespace {

const char kPreludeSource[] =
#include "prelude_scy.inc"
    ;

const char kDenylistSource[] =
#include "denylist_txt.inc"
    ;

void collect_rigid_vars(const TypePtr& t, std::vector<std::string>& out) {
  if (auto* v = as_var(t)) {
    if (!is_meta(v->name) &&
        std::find(out.begin(), out.end(), v->name) == out.end())
      out.push_back(v->name);
    return;
  }
  if (auto* ar = as_arrow(t)) {
    collect_rigid_vars(ar->from, out);
    collect_rigid_vars(ar->to, out);
    return;
  }
  for (const TypePtr& a : as_data(t)->args) collect_rigid_vars(a, out);
}

bool occurs_free(const TermPtr& t, const std::string& name) {
  if (auto* v = term_as_var(t)) return v->name == name;
  if (auto* l = term_as_lam(t))
    return l->binder != name && occurs_free(l->body, name);
  if (auto* a = term_as_app(t))
    return occurs_free(a->fn, name) || occurs_free(a->arg, name);
  if (auto* c = term_as_ctor(t)) {
    for (const TermPtr& arg : c->args)
      if (occurs_free(arg, name)) return true;
    return false;
  }
  if (auto* c = term_as_case(t)) {
    if (occurs_free(c->scrutinee, name)) return true;
    for (const CaseBranch& b : c->branches) {
      if (std::find(b.binders.begin(), b.binders.end(), name) !=
          b.binders.end())
        continue;
      if (occurs_free(b.body, name)) return true;
    }
    return false;
  }
  return false;
}

}  // namespace

const PreludeFn* Prelude::find(const std::string& name) const {
  for (const PreludeFn& f : fns)
    if (f.name == name) return &f;
  return nullptr;
}

CtorArities Prelude::ctor_arities() const {
  CtorArities out;
  for (const DataDecl& d : datatypes)
    for (const CtorDecl& c : d.ctors) out[c.name] = c.args.size();
  return out;
}

Prelude load_prelude(const std::string& source) {
  PreludeFile file = parse_prelude(source);
  Prelude p;
  p.datatypes = file.datatypes;
  for (const DataDecl& d : file.datatypes) p.env.add_datatype(d);

  for (const PreludeDef& def : file.defs) {
    if (p.env.globals.count(def.name))
      throw PreludeError("duplicate definition of '" + def.name + "'");

    Scheme scheme;
    collect_rigid_vars(def.sig, scheme.vars);
    scheme.body = def.sig;

    auto [arg_types, ret] = peel_arrows(def.sig);
    (void)ret;
    if (def.params.size() > arg_types.size())
      throw PreludeError("definition of '" + def.name +
                         "' takes more parameters than its signature");
    if (def.scheme_arg >= 0) {
      if (def.scheme_arg >= static_cast<int>(def.params.size()))
        throw PreludeError("recursive-arg out of range for '" + def.name +
                           "'");
      if (!as_data(arg_types[def.scheme_arg]))
        throw PreludeError("recursive-arg of '" + def.name +
                           "' is not a datatype parameter");
    }

    // Register before checking the body so self-recursion resolves; the
    // signature's type variables stay rigid inside the definition.
    p.env.globals.emplace(def.name, scheme);

    TermPtr closed = def.body;
    for (auto it = def.params.rbegin(); it != def.params.rend(); ++it)
      closed = mk_lam(*it, closed);
    try {
      Subst s;
      int next_meta = 0;
      HoleCtx top;
      top.goal = def.sig;
      check_filling_type(top, closed, p.env, s, next_meta);
    } catch (const TypeError& e) {
      throw PreludeError("definition of '" + def.name + "': " + e.what());
    }

    PreludeFn fn;
    fn.name = def.name;
    fn.scheme = std::move(scheme);
    fn.params = def.params;
    fn.body = def.body;
    fn.scheme_arg = def.scheme_arg;
    fn.recursive = occurs_free(def.body, def.name);
    p.fns.push_back(std::move(fn));
  }
  return p;
}

ResolvedUse resolve_use(const Prelude& p, const UseEntry& use) {
  const PreludeFn* fn = p.find(use.name);
  if (!fn) throw PreludeError("USE names unknown function '" + use.name + "'");
  if (!use.annotation) return {fn, fn->scheme};

  Subst s;
  int next_meta = 0;
  TypePtr inst = instantiate(fn->scheme, next_meta);
  if (unify(s, inst, use.annotation) != UnifyOutcome::Ok)
    throw PreludeError("USE annotation for '" + use.name +
                       "' does not specialize " + pretty(fn->scheme.body) +
                       ": " + pretty(use.annotation));
  Scheme spec;
  collect_rigid_vars(use.annotation, spec.vars);
  spec.body = use.annotation;
  return {fn, spec};
}

std::vector<TermPtr> load_denylist(const std::string& text,
                                   const CtorArities& ctors) {
  std::vector<TermPtr> out;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(pos, end - pos);
    pos = end + (end < text.size() ? 1 : 0);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (line.rfind("--", 0) == 0) continue;
    out.push_back(parse_pattern(line, ctors));
  }
  return out;
}

const std::string& default_prelude_source() {
  static const std::string src = kPreludeSource;
  return src;
}

const std::string& default_denylist_source() {
  static const std::string src = kDenylistSource;
  return src;
}

const Prelude& default_prelude() {
  static const Prelude p = load_prelude(default_prelude_source());
  return p;
}

const std::vector<TermPtr>& default_denylist() {
  static const std::vector<TermPtr> d =
      load_denylist(default_denylist_source(), default_prelude().ctor_arities());
  return d;
}

}  // namespace lacuna
