#include "synth.hpp"

#include <algorithm>
#include <chrono>
#include <climits>
#include <stdexcept>

namespace lacuna {

// ---------------------------------------------------------------------------
// Weights.
// ---------------------------------------------------------------------------

namespace {

// Head position of an application spine; scheme calls are priced at the
// spine head so partial applications of a scheme never pay twice.
int weigh_rec(const Prelude& p, const TermPtr& t);

int weigh_spine(const Prelude& p, const TermPtr& t) {
  std::vector<TermPtr> args;
  TermPtr head = t;
  while (auto* a = term_as_app(head)) {
    args.push_back(a->arg);
    head = a->fn;
  }
  int w = static_cast<int>(args.size());
  if (auto* v = term_as_var(head)) {
    const PreludeFn* fn = p.find(v->name);
    if (fn && fn->scheme_arg >= 0) w += 1;
  } else {
    w += weigh_rec(p, head);
  }
  for (const TermPtr& a : args) w += weigh_rec(p, a);
  return w;
}

int weigh_rec(const Prelude& p, const TermPtr& t) {
  if (term_as_var(t) || term_as_hole(t)) return 0;
  if (auto* l = term_as_lam(t)) return weigh_rec(p, l->body);
  if (auto* c = term_as_ctor(t)) {
    int w = static_cast<int>(c->args.size());
    for (const TermPtr& a : c->args) w += weigh_rec(p, a);
    return w;
  }
  if (auto* cs = term_as_case(t)) {
    int w = 1 + 2 * weigh_rec(p, cs->scrutinee);
    for (const CaseBranch& b : cs->branches) w += weigh_rec(p, b.body);
    return w;
  }
  return weigh_spine(p, t);
}

}  // namespace

int weigh(const Prelude& prelude, const TermPtr& t) {
  return weigh_rec(prelude, t);
}

// ---------------------------------------------------------------------------
// Normal-form filtering.
// ---------------------------------------------------------------------------

namespace {

// Pattern-against-term matching: pattern holes are wildcards (equal ids must
// bind structurally equal subterms), pattern binders correspond to term
// binders one-to-one, and free pattern variables match only the same free
// name.
struct PatternMatch {
  std::map<std::string, std::string> p2t, t2p;
  std::map<int, TermPtr> bound;

  bool match(const TermPtr& pat, const TermPtr& t) {
    if (auto* h = term_as_hole(pat)) {
      auto it = bound.find(h->id);
      if (it != bound.end()) return term_equal(it->second, t);
      bound.emplace(h->id, t);
      return true;
    }
    if (auto* v = term_as_var(pat)) {
      auto* w = term_as_var(t);
      if (!w) return false;
      auto it = p2t.find(v->name);
      if (it != p2t.end()) return w->name == it->second;
      return w->name == v->name && !t2p.count(w->name);
    }
    if (auto* l = term_as_lam(pat)) {
      auto* m = term_as_lam(t);
      return m && in_scope(l->binder, m->binder, [&] {
        return match(l->body, m->body);
      });
    }
    if (auto* a = term_as_app(pat)) {
      auto* b = term_as_app(t);
      return b && match(a->fn, b->fn) && match(a->arg, b->arg);
    }
    if (auto* c = term_as_ctor(pat)) {
      auto* d = term_as_ctor(t);
      if (!d || c->name != d->name || c->args.size() != d->args.size())
        return false;
      for (std::size_t i = 0; i < c->args.size(); ++i)
        if (!match(c->args[i], d->args[i])) return false;
      return true;
    }
    auto* c = term_as_case(pat);
    auto* d = term_as_case(t);
    if (!d || c->branches.size() != d->branches.size()) return false;
    if (!match(c->scrutinee, d->scrutinee)) return false;
    for (std::size_t i = 0; i < c->branches.size(); ++i) {
      const CaseBranch& pb = c->branches[i];
      const CaseBranch& tb = d->branches[i];
      if (pb.ctor != tb.ctor || pb.binders.size() != tb.binders.size())
        return false;
      if (!match_branch(pb, tb, 0)) return false;
    }
    return true;
  }

 private:
  template <typename F>
  bool in_scope(const std::string& pb, const std::string& tb, F body) {
    auto savep = p2t.find(pb) != p2t.end()
                     ? std::optional<std::string>(p2t[pb])
                     : std::nullopt;
    auto savet = t2p.find(tb) != t2p.end()
                     ? std::optional<std::string>(t2p[tb])
                     : std::nullopt;
    p2t[pb] = tb;
    t2p[tb] = pb;
    bool ok = body();
    if (savep) p2t[pb] = *savep; else p2t.erase(pb);
    if (savet) t2p[tb] = *savet; else t2p.erase(tb);
    return ok;
  }

  bool match_branch(const CaseBranch& pb, const CaseBranch& tb,
                    std::size_t i) {
    if (i == pb.binders.size()) return match(pb.body, tb.body);
    return in_scope(pb.binders[i], tb.binders[i],
                    [&] { return match_branch(pb, tb, i + 1); });
  }
};

bool matches_anywhere(const TermPtr& pat, const TermPtr& t) {
  bool hit = false;
  for_each_subterm(t, [&](const TermPtr& s) {
    if (hit) return;
    PatternMatch m;
    if (m.match(pat, s)) hit = true;
  });
  return hit;
}

}  // namespace

bool normal_form_ok(const TermPtr& t, const std::vector<TermPtr>& denylist) {
  for (const TermPtr& pat : denylist)
    if (matches_anywhere(pat, t)) return false;
  return true;
}

bool beta_eta_ok(const TermPtr& t) {
  bool ok = true;
  for_each_subterm(t, [&](const TermPtr& s) {
    if (auto* a = term_as_app(s)) {
      if (term_as_lam(a->fn)) ok = false;
    } else if (auto* c = term_as_case(s)) {
      if (term_as_ctor(c->scrutinee) || term_as_lam(c->scrutinee)) ok = false;
    }
  });
  return ok;
}

namespace {

struct MatchDiscipline {
  // Variables matched by an enclosing case and not yet shadowed.
  std::set<std::string> live;
  // Variables bound by enclosing case patterns: already the pieces of an
  // analysis, so matching them again only ever overfits the examples.
  std::set<std::string> piece;

  bool ok(const TermPtr& t) {
    if (auto* l = term_as_lam(t)) {
      bool in_live = live.count(l->binder) > 0;
      bool in_piece = piece.count(l->binder) > 0;
      live.erase(l->binder);
      piece.erase(l->binder);
      bool r = ok(l->body);
      if (in_live) live.insert(l->binder);
      if (in_piece) piece.insert(l->binder);
      return r;
    }
    if (auto* a = term_as_app(t)) return ok(a->fn) && ok(a->arg);
    if (auto* c = term_as_ctor(t)) {
      for (const TermPtr& x : c->args)
        if (!ok(x)) return false;
      return true;
    }
    if (auto* cs = term_as_case(t)) {
      if (term_as_case(cs->scrutinee)) return false;
      const Term::Var* sv = term_as_var(cs->scrutinee);
      if (sv && (live.count(sv->name) || piece.count(sv->name))) return false;
      if (!ok(cs->scrutinee)) return false;
      MatchDiscipline saved = *this;
      for (const CaseBranch& b : cs->branches) {
        *this = saved;
        if (sv) live.insert(sv->name);
        for (const std::string& bind : b.binders) {
          live.erase(bind);
          piece.insert(bind);
        }
        if (!ok(b.body)) return false;
      }
      *this = saved;
      return true;
    }
    return true;  // Var, Hole
  }
};

}  // namespace

bool match_discipline_ok(const TermPtr& t) {
  MatchDiscipline d;
  return d.ok(t);
}

// ---------------------------------------------------------------------------
// Filling generation.
// ---------------------------------------------------------------------------

namespace {

const char* const kLamSupply[] = {"x", "r", "y", "z", "u",
                                  "v", "m", "o", "p", "q"};
const char* const kElemSupply[] = {"y", "z", "u", "v", "w"};
const char* const kNatSupply[] = {"m", "o", "p", "q"};
const char* const kLeftSupply[] = {"l", "k", "j"};
const char* const kRightSupply[] = {"r", "s", "t"};

template <std::size_t N>
std::string fresh_name(const char* const (&supply)[N],
                       const std::set<std::string>& used) {
  for (const char* s : supply)
    if (!used.count(s)) return s;
  for (int i = 1;; ++i) {
    std::string n = supply[0] + std::to_string(i);
    if (!used.count(n)) return n;
  }
}

// Rigid datatype parameters replaced by the given types.
TypePtr subst_params(const TypePtr& t,
                     const std::map<std::string, TypePtr>& m) {
  if (auto* v = as_var(t)) {
    auto it = m.find(v->name);
    return it != m.end() ? it->second : t;
  }
  if (auto* a = as_arrow(t))
    return tarrow(subst_params(a->from, m), subst_params(a->to, m));
  auto* d = as_data(t);
  std::vector<TypePtr> args;
  args.reserve(d->args.size());
  for (const TypePtr& a : d->args) args.push_back(subst_params(a, m));
  return tdata(d->name, std::move(args));
}

struct Generator {
  const HoleCtx& ctx;
  const GenEnv& g;
  const Subst& base;
  int base_hole;
  // Scratch metavariables live only inside generation; they start far above
  // anything the search itself allocates so the two never collide.
  int scratch_meta = 1 << 20;
  std::set<std::string> scope;
  std::vector<TermPtr> out;

  Generator(const HoleCtx& ctx, const GenEnv& g, const Subst& base,
            int base_hole)
      : ctx(ctx), g(g), base(base), base_hole(base_hole) {
    for (const auto& [n, _] : ctx.env) scope.insert(n);
  }

  // Innermost binding of each name wins; emission keeps env order.
  std::vector<std::pair<std::string, TypePtr>> visible() const {
    std::vector<std::pair<std::string, TypePtr>> vs;
    for (std::size_t i = 0; i < ctx.env.size(); ++i) {
      bool shadowed = false;
      for (std::size_t j = i + 1; j < ctx.env.size(); ++j)
        if (ctx.env[j].first == ctx.env[i].first) shadowed = true;
      if (!shadowed) vs.push_back(ctx.env[i]);
    }
    return vs;
  }

  // A fresh hole for one argument position, wrapped in lambdas when the
  // position's type shows arrows.
  TermPtr arg_term(const TypePtr& ty, const Subst& s, int& h) {
    auto [args, _] = peel_arrows(s.apply(ty));
    std::vector<std::string> binders;
    std::set<std::string> used = scope;
    for (std::size_t i = 0; i < args.size(); ++i) {
      std::string b = fresh_name(kLamSupply, used);
      used.insert(b);
      binders.push_back(b);
    }
    TermPtr t = mk_hole(h++);
    for (auto it = binders.rbegin(); it != binders.rend(); ++it)
      t = mk_lam(*it, t);
    return t;
  }

  void emit_head(const TermPtr& head, const TypePtr& ty, int scheme_arg) {
    TypePtr goal = base.apply(ctx.goal);
    auto [args, res] = peel_arrows(base.apply(ty));
    if (scheme_arg >= 0) {
      if (scheme_arg >= static_cast<int>(args.size())) return;
      Subst s0 = base;
      if (!try_unify(s0, res, goal)) return;
      for (const auto& [vn, vt] : visible()) {
        Subst s = s0;
        if (!try_unify(s, vt, args[scheme_arg])) continue;
        int h = base_hole;
        std::vector<TermPtr> as;
        for (std::size_t i = 0; i < args.size(); ++i)
          as.push_back(static_cast<int>(i) == scheme_arg
                           ? mk_var(vn)
                           : arg_term(args[i], s, h));
        out.push_back(mk_apps(head, as));
      }
      return;
    }
    Subst s = base;
    if (!try_unify(s, res, goal)) return;
    if (args.empty()) {
      out.push_back(head);
      return;
    }
    int h = base_hole;
    std::vector<TermPtr> as;
    for (const TypePtr& a : args) as.push_back(arg_term(a, s, h));
    out.push_back(mk_apps(head, as));
  }

  void emit_ctors(const DataDecl& d) {
    TypePtr goal = base.apply(ctx.goal);
    for (const CtorDecl& c : d.ctors) {
      std::map<std::string, TypePtr> inst;
      std::vector<TypePtr> params;
      for (const std::string& p : d.params) {
        TypePtr m = fresh_meta(scratch_meta);
        inst[p] = m;
        params.push_back(m);
      }
      Subst s = base;
      if (!try_unify(s, tdata(d.name, params), goal)) continue;
      int h = base_hole;
      std::vector<TermPtr> as;
      for (const TypePtr& a : c.args)
        as.push_back(arg_term(subst_params(a, inst), s, h));
      out.push_back(mk_ctor(c.name, std::move(as)));
    }
  }

  void emit_eliminator(const DataDecl& d) {
    if (d.ctors.empty()) return;
    int h = base_hole;
    TermPtr scrutinee = mk_hole(h++);
    std::vector<CaseBranch> branches;
    for (const CtorDecl& c : d.ctors) {
      std::vector<std::string> binders;
      std::set<std::string> used = scope;
      if (d.name == "List" && c.args.size() == 2) {
        // The y / ys convention: element name whose 's' form is also free.
        std::string e;
        for (const char* cand : kElemSupply) {
          std::string es = std::string(cand) + "s";
          if (!used.count(cand) && !used.count(es)) {
            e = cand;
            break;
          }
        }
        if (e.empty()) {
          for (int i = 1;; ++i) {
            std::string cand = "y" + std::to_string(i);
            if (!used.count(cand) && !used.count(cand + "s")) {
              e = cand;
              break;
            }
          }
        }
        binders = {e, e + "s"};
      } else {
        int recursive_seen = 0;
        for (const TypePtr& a : c.args) {
          auto* ad = as_data(a);
          bool recursive = ad && ad->name == d.name;
          std::string b;
          if (recursive && d.name == "Nat") {
            b = fresh_name(kNatSupply, used);
          } else if (recursive) {
            b = recursive_seen == 0 ? fresh_name(kLeftSupply, used)
                                    : fresh_name(kRightSupply, used);
            ++recursive_seen;
          } else {
            b = fresh_name(kElemSupply, used);
          }
          used.insert(b);
          binders.push_back(b);
        }
      }
      branches.push_back(CaseBranch{c.name, std::move(binders), mk_hole(h++)});
    }
    out.push_back(mk_case(scrutinee, std::move(branches)));
  }

  std::vector<TermPtr> run() {
    TypePtr goal = base.apply(ctx.goal);
    if (as_arrow(goal)) {
      // The only filling for an arrow-typed hole is its expansion; anything
      // else would leave the position short of its lambdas.
      int h = base_hole;
      out.push_back(arg_term(goal, base, h));
      return out;
    }
    for (const auto& [vn, vt] : visible()) emit_head(mk_var(vn), vt, -1);
    for (const std::string& dn : g.datatypes) {
      auto it = g.types->datatypes.find(dn);
      if (it != g.types->datatypes.end()) emit_ctors(it->second);
    }
    for (const ResolvedUse& u : g.uses) {
      int m = scratch_meta;
      emit_head(mk_var(u.fn->name), instantiate(u.scheme, m), u.fn->scheme_arg);
      scratch_meta = m + 64;  // headroom; emitted terms carry no types
    }
    for (const std::string& dn : g.datatypes) {
      auto it = g.types->datatypes.find(dn);
      if (it != g.types->datatypes.end()) emit_eliminator(it->second);
    }
    return out;
  }
};

}  // namespace

std::vector<TermPtr> gen_fillings(const HoleCtx& ctx, const GenEnv& g,
                                  const Subst& subst, int next_hole) {
  return Generator(ctx, g, subst, next_hole).run();
}

// ---------------------------------------------------------------------------
// Canonical keys.
// ---------------------------------------------------------------------------

namespace {

void key_rec(const TermPtr& t, std::map<int, int>& renum, std::string& s) {
  if (auto* v = term_as_var(t)) {
    s += 'v';
    s += v->name;
    s += ';';
  } else if (auto* l = term_as_lam(t)) {
    s += 'L';
    s += l->binder;
    s += '.';
    key_rec(l->body, renum, s);
  } else if (auto* a = term_as_app(t)) {
    s += '(';
    key_rec(a->fn, renum, s);
    key_rec(a->arg, renum, s);
    s += ')';
  } else if (auto* c = term_as_ctor(t)) {
    s += 'C';
    s += c->name;
    s += '[';
    for (const TermPtr& x : c->args) key_rec(x, renum, s);
    s += ']';
  } else if (auto* cs = term_as_case(t)) {
    s += 'M';
    key_rec(cs->scrutinee, renum, s);
    for (const CaseBranch& b : cs->branches) {
      s += '|';
      s += b.ctor;
      for (const std::string& x : b.binders) {
        s += ' ';
        s += x;
      }
      s += "->";
      key_rec(b.body, renum, s);
    }
    s += ';';
  } else {
    auto* h = term_as_hole(t);
    auto [it, fresh] = renum.emplace(h->id, static_cast<int>(renum.size()));
    s += '_';
    s += std::to_string(it->second);
    s += ';';
  }
}

}  // namespace

std::string canonical_key(const TermPtr& t) {
  std::map<int, int> renum;
  std::string s;
  key_rec(t, renum, s);
  return s;
}

// ---------------------------------------------------------------------------
// The search.
// ---------------------------------------------------------------------------

namespace {

// Datatypes mentioned by the signature, the USE'd schemes, and local
// declarations, closed under constructor argument types. First-seen order
// keeps generation deterministic.
std::vector<std::string> reachable_datatypes(const Program& p,
                                             const std::vector<ResolvedUse>& uses,
                                             const TypeEnv& types) {
  std::vector<std::string> order;
  std::set<std::string> seen;
  std::vector<TypePtr> frontier;
  auto add_type = [&](auto&& self, const TypePtr& t) -> void {
    if (!t) return;
    if (auto* a = as_arrow(t)) {
      self(self, a->from);
      self(self, a->to);
    } else if (auto* d = as_data(t)) {
      if (seen.insert(d->name).second) order.push_back(d->name);
      for (const TypePtr& x : d->args) self(self, x);
    }
  };
  add_type(add_type, p.sig_type);
  for (const ResolvedUse& u : uses) add_type(add_type, u.scheme.body);
  for (const DataDecl& d : p.datatypes)
    if (seen.insert(d.name).second) order.push_back(d.name);
  // Close over constructor fields (e.g. a signature's Tree reaches List via
  // no constructor, but Maybe in `last`'s scheme reaches its payload).
  for (std::size_t i = 0; i < order.size(); ++i) {
    auto it = types.datatypes.find(order[i]);
    if (it == types.datatypes.end()) continue;
    for (const CtorDecl& c : it->second.ctors)
      for (const TypePtr& a : c.args) add_type(add_type, a);
  }
  return order;
}

}  // namespace

Synthesizer::Synthesizer(const Program& p, const Prelude& prelude,
                         SynthesisConfig cfg)
    : program_(p), prelude_(prelude), cfg_(std::move(cfg)) {
  // Until run() arms the clock, expansion is unbounded.
  deadline_ = std::chrono::steady_clock::time_point::max();
  types_ = prelude.env;
  for (const DataDecl& d : p.datatypes) types_.add_datatype(d);
  for (const UseEntry& u : p.uses)
    genv_.uses.push_back(resolve_use(prelude, u));
  genv_.prelude = &prelude_;
  genv_.types = &types_;
  genv_.datatypes = reachable_datatypes(p, genv_.uses, types_);
  denylist_ = cfg_.denylist ? cfg_.denylist : &default_denylist();
}

Candidate Synthesizer::init() {
  if (program_.asserts.empty())
    throw std::invalid_argument("no asserts: nothing constrains the holes");
  bool concrete = false;
  for (const Assert& a : program_.asserts)
    if (!ex_is_top(a.expected)) concrete = true;
  if (!concrete)
    throw std::invalid_argument(
        "every assert expects a don't-care; the problem is vacuous");

  InferResult ir = infer(types_, program_);
  assert_metas_ = {ir.assert_metas_begin, ir.assert_metas_end};
  Candidate c;
  c.term = program_.sketch();
  c.holes = ir.holes;
  c.subst = ir.subst;
  c.next_meta = ir.next_meta;
  sketch_holes_ = holes(c.term);
  int hi = -1;
  for (int h : sketch_holes_) hi = std::max(hi, h);
  c.next_hole = hi + 1;
  c.weight = weigh(prelude_, c.term);
  c.seqno = next_seq_++;
  if (cfg_.ep) {
    c.constraints = propagate_term(c.term);
    if (c.constraints.kind == PropagationOutcome::Kind::Indeterminate)
      c.guess = true;
  }
  return c;
}

int Synthesizer::select_hole(const Candidate& c) const {
  for (int h : blocking_holes(prelude_, c.term, program_.asserts, cfg_.budget))
    if (c.holes.count(h)) return h;
  // Unreachable for well-formed candidates; fall back to the lowest id.
  return c.holes.begin()->first;
}

PropagationOutcome Synthesizer::propagate_term(const TermPtr& t) const {
  return propagate(prelude_, t, program_.asserts, cfg_.budget, cfg_.caps);
}

bool Synthesizer::verified(const TermPtr& closed) const {
  for (const Assert& a : program_.asserts) {
    try {
      EvalState st(prelude_, cfg_.budget);
      ResultPtr r = eval(st, nullptr, closed);
      for (const ExPtr& arg : a.args)
        r = apply_result(st, r, example_to_result(arg));
      if (satisfies(st, r, a.expected) != Sat::Yes) return false;
    } catch (const EvalExhausted&) {
      return false;
    } catch (const EvalError&) {
      return false;
    }
  }
  return true;
}

std::vector<Candidate> Synthesizer::expand(const Candidate& c) {
  std::vector<Candidate> out;
  int h = select_hole(c);
  const HoleCtx& hc = c.holes.at(h);
  bool first = true;
  for (const TermPtr& hf : gen_fillings(hc, genv_, c.subst, c.next_hole)) {
    if (!first && expired()) break;
    first = false;
    TermPtr child = fill(c.term, h, hf);
    if (!beta_eta_ok(child)) {
      ++stats_.redexes;
      continue;
    }
    // A violation already present in the parent was written by the user;
    // only fillings that introduce one are rejected.
    if (!match_discipline_ok(child) && match_discipline_ok(c.term)) {
      ++stats_.rematches;
      continue;
    }
    if (!normal_form_ok(child, *denylist_)) {
      ++stats_.denylisted;
      continue;
    }
    Candidate k;
    k.term = child;
    k.subst = c.subst;
    k.next_meta = c.next_meta;
    try {
      std::map<int, HoleCtx> fresh =
          check_filling_type(hc, hf, types_, k.subst, k.next_meta);
      k.holes = c.holes;
      k.holes.erase(h);
      for (auto& [id, ctx] : fresh) k.holes.emplace(id, std::move(ctx));
    } catch (const TypeError&) {
      ++stats_.ill_typed;
      continue;
    }
    for (auto& [id, ctx] : k.holes) {
      ctx.goal = k.subst.apply(ctx.goal);
      for (auto& [n, ty] : ctx.env) ty = k.subst.apply(ty);
    }
    if (k.holes.empty()) {
      // A closed term still carrying an unresolved metavariable is dead
      // generality (e.g. the element type of a list nothing inspects).
      // Per-assert signature instances are exempt: an example may rightly
      // leave the element type open.
      bool ambiguous = false;
      for (int i = 0; i < k.next_meta && !ambiguous; ++i) {
        if (i >= assert_metas_.first && i < assert_metas_.second) continue;
        if (!fully_resolved(k.subst, tvar("?" + std::to_string(i))))
          ambiguous = true;
      }
      if (ambiguous) {
        ++stats_.ill_typed;
        continue;
      }
    }
    std::vector<int> introduced = holes(hf);
    k.next_hole = c.next_hole + static_cast<int>(introduced.size());
    k.guess = c.guess;
    if (cfg_.ep) {
      PropagationOutcome o = propagate_term(child);
      if (o.kind == PropagationOutcome::Kind::Inconsistent) {
        ++stats_.pruned;
        continue;
      }
      if (o.kind == PropagationOutcome::Kind::Indeterminate) {
        k.guess = true;
        ++stats_.guesses;
      }
      k.constraints = std::move(o);
    }
    k.weight = weigh(prelude_, child);
    k.seqno = next_seq_++;
    k.steps = c.steps;
    k.steps.emplace_back(h, hf);
    out.push_back(std::move(k));
  }
  return out;
}

bool Synthesizer::expired() const {
  return std::chrono::steady_clock::now() >= deadline_;
}

SynthesisResult Synthesizer::run() {
  auto t0 = std::chrono::steady_clock::now();
  deadline_ = t0 + std::chrono::milliseconds(cfg_.timeout_ms);
  stats_ = SynthesisStats{};
  next_seq_ = 0;

  SynthesisResult res;
  Candidate c0 = init();

  std::map<std::pair<int, long long>, Candidate> queue;
  std::unordered_set<std::string> visited;
  if (!(cfg_.ep &&
        c0.constraints.kind == PropagationOutcome::Kind::Inconsistent)) {
    visited.insert(canonical_key(c0.term));
    queue.emplace(std::make_pair(c0.weight, c0.seqno), std::move(c0));
    ++stats_.enqueued;
  }

  int last_weight = INT_MIN;
  while (!queue.empty()) {
    if (expired()) {
      res.kind = SynthesisResult::Kind::Timeout;
      break;
    }
    auto it = queue.begin();
    Candidate c = std::move(it->second);
    queue.erase(it);
    ++stats_.popped;
    if (c.weight < last_weight) stats_.weights_monotone = false;
    last_weight = c.weight;

    if (c.holes.empty()) {
      if (verified(c.term)) {
        res.kind = SynthesisResult::Kind::Solved;
        res.solution.term = c.term;
        res.solution.weight = c.weight;
        res.solution.steps = c.steps;
        std::map<int, TermPtr> all;
        for (const auto& [h, f] : c.steps) all[h] = f;
        for (int h0 : sketch_holes_) {
          TermPtr t = all.at(h0);
          while (!holes(t).empty()) t = subst_holes(t, all);
          res.solution.fillings[h0] = t;
        }
        break;
      }
      ++stats_.verify_failures;
      continue;
    }

    for (Candidate& k : expand(c)) {
      if (!visited.insert(canonical_key(k.term)).second) {
        ++stats_.duplicates;
        continue;
      }
      // The verdict's worlds are never read again — children re-propagate
      // from scratch — so only the kind is worth queue memory.
      k.constraints.assignments.clear();
      k.constraints.assignments.shrink_to_fit();
      queue.emplace(std::make_pair(k.weight, k.seqno), std::move(k));
      ++stats_.enqueued;
      if (queue.size() > cfg_.max_queue) {
        queue.erase(std::prev(queue.end()));
        stats_.queue_overflow = true;
      }
    }
  }

  stats_.elapsed_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                t0)
          .count();
  res.stats = stats_;
  return res;
}

SynthesisResult synthesize(const Program& p, const Prelude& prelude,
                           const SynthesisConfig& cfg) {
  return Synthesizer(p, prelude, cfg).run();
}

}  // namespace lacuna
