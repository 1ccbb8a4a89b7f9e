#include "parse.hpp"

#include <cctype>
#include <set>

namespace lacuna {

ParseError::ParseError(int line, int col, const std::string& msg)
    : std::runtime_error("parse error at " + std::to_string(line) + ":" +
                         std::to_string(col) + ": " + msg),
      line(line),
      col(col) {}

namespace {

enum class Tok {
  LName,
  UName,
  Number,
  Hole,      // _ or _N (text keeps the digits, empty for bare _)
  PragmaOpen,
  PragmaClose,
  LBrace,
  RBrace,
  LParen,
  RParen,
  LBracket,
  RBracket,
  Backslash,
  Arrow,
  Implies,   // <==
  DoubleColon,
  Colon,
  Equals,
  EqEq,
  PlusPlus,
  Comma,
  Semi,
  Pipe,
  At,
  End,
};

struct Token {
  Tok kind;
  std::string text;
  int line;
  int col;
};

bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
}

std::vector<Token> lex(const std::string& src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  size_t i = 0;
  auto push = [&](Tok k, std::string text, int l, int c) {
    out.push_back({k, std::move(text), l, c});
  };
  while (i < src.size()) {
    char c = src[i];
    int l = line, co = col;
    auto advance = [&](size_t n) {
      for (size_t k = 0; k < n; ++k) {
        if (src[i] == '\n') {
          ++line;
          col = 1;
        } else {
          ++col;
        }
        ++i;
      }
    };
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      advance(1);
      continue;
    }
    if (c == '-' && i + 1 < src.size() && src[i + 1] == '>') {
      push(Tok::Arrow, "->", l, co);
      advance(2);
      continue;
    }
    if (c == '-' && i + 1 < src.size() && src[i + 1] == '-') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    if (src.compare(i, 3, "{-#") == 0) {
      push(Tok::PragmaOpen, "{-#", l, co);
      advance(3);
      continue;
    }
    if (src.compare(i, 3, "#-}") == 0) {
      push(Tok::PragmaClose, "#-}", l, co);
      advance(3);
      continue;
    }
    if (src.compare(i, 3, "<==") == 0) {
      push(Tok::Implies, "<==", l, co);
      advance(3);
      continue;
    }
    if (src.compare(i, 2, "::") == 0) {
      push(Tok::DoubleColon, "::", l, co);
      advance(2);
      continue;
    }
    if (src.compare(i, 2, "==") == 0) {
      push(Tok::EqEq, "==", l, co);
      advance(2);
      continue;
    }
    if (src.compare(i, 2, "++") == 0) {
      push(Tok::PlusPlus, "++", l, co);
      advance(2);
      continue;
    }
    if (c == '_') {
      size_t j = i + 1;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      if (j < src.size() && (std::isalpha(static_cast<unsigned char>(src[j])) || src[j] == '_'))
        throw ParseError(l, co, "identifiers may not start with '_'");
      push(Tok::Hole, src.substr(i + 1, j - i - 1), l, co);
      advance(j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      push(Tok::Number, src.substr(i, j - i), l, co);
      advance(j - i);
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      size_t j = i;
      // A '-' continues an identifier when a letter follows, so annotation
      // words like recursive-arg lex whole; `--` still opens a comment.
      while (j < src.size() &&
             (ident_char(src[j]) ||
              (src[j] == '-' && j + 1 < src.size() &&
               std::isalpha(static_cast<unsigned char>(src[j + 1])))))
        ++j;
      std::string word = src.substr(i, j - i);
      push(std::isupper(static_cast<unsigned char>(c)) ? Tok::UName : Tok::LName,
           word, l, co);
      advance(j - i);
      continue;
    }
    switch (c) {
      case '{': push(Tok::LBrace, "{", l, co); advance(1); continue;
      case '}': push(Tok::RBrace, "}", l, co); advance(1); continue;
      case '(': push(Tok::LParen, "(", l, co); advance(1); continue;
      case ')': push(Tok::RParen, ")", l, co); advance(1); continue;
      case '[': push(Tok::LBracket, "[", l, co); advance(1); continue;
      case ']': push(Tok::RBracket, "]", l, co); advance(1); continue;
      case '\\': push(Tok::Backslash, "\\", l, co); advance(1); continue;
      case ':': push(Tok::Colon, ":", l, co); advance(1); continue;
      case '=': push(Tok::Equals, "=", l, co); advance(1); continue;
      case ',': push(Tok::Comma, ",", l, co); advance(1); continue;
      case ';': push(Tok::Semi, ";", l, co); advance(1); continue;
      case '|': push(Tok::Pipe, "|", l, co); advance(1); continue;
      case '@': push(Tok::At, "@", l, co); advance(1); continue;
      default:
        throw ParseError(l, co, std::string("unexpected character '") + c + "'");
    }
  }
  out.push_back({Tok::End, "", line, col});
  return out;
}

const std::set<std::string> kKeywords = {"data", "case", "of", "if",
                                         "then", "else", "assert"};

// The grammar is layout-free except for one rule: a token in column 1 always
// starts a new top-level item, which is what ends definition bodies.
class Parser {
 public:
  Parser(std::vector<Token> toks, CtorArities ctors, bool holes_may_repeat = false)
      : toks_(std::move(toks)),
        ctors_(std::move(ctors)),
        holes_may_repeat_(holes_may_repeat) {}

  Program program() {
    Program p;
    while (!at(Tok::End)) {
      if (at(Tok::PragmaOpen)) {
        pragma(p);
      } else if (at(Tok::At)) {
        throw err("@scheme annotations belong in the prelude, not problem files");
      } else if (at_keyword("data")) {
        p.datatypes.push_back(datadecl());
      } else if (at_keyword("assert")) {
        p.asserts.push_back(assert_item());
      } else if (at(Tok::LName)) {
        sig_or_def(p);
      } else {
        throw err("expected a pragma, data declaration, signature, definition, or assert");
      }
    }
    return p;
  }

  PreludeFile prelude() {
    PreludeFile f;
    int pending_scheme = -1;
    std::string pending_sig_name;
    TypePtr pending_sig;
    while (!at(Tok::End)) {
      if (at_keyword("data")) {
        f.datatypes.push_back(datadecl());
      } else if (at(Tok::At)) {
        pending_scheme = scheme_annotation();
      } else if (at(Tok::LName) && peek().kind == Tok::DoubleColon) {
        if (pending_sig)
          throw err("signature for '" + pending_sig_name + "' has no definition");
        pending_sig_name = lname();
        take();  // ::
        pending_sig = type();
      } else if (at(Tok::LName)) {
        Token name_tok = cur();
        std::string name = lname();
        if (!pending_sig || name != pending_sig_name)
          throw ParseError(name_tok.line, name_tok.col,
                           "definition of '" + name + "' has no signature");
        PreludeDef d;
        d.name = name;
        d.sig = pending_sig;
        while (at(Tok::LName) && cur().col != 1) d.params.push_back(lname());
        expect(Tok::Equals, "=");
        d.body = term();
        d.scheme_arg = pending_scheme;
        if (!holes(d.body).empty())
          throw ParseError(name_tok.line, name_tok.col,
                           "prelude definition '" + name + "' contains holes");
        pending_scheme = -1;
        pending_sig.reset();
        pending_sig_name.clear();
        f.defs.push_back(std::move(d));
      } else {
        throw err("expected a data declaration, signature, or definition");
      }
    }
    if (pending_sig)
      throw err("signature for '" + pending_sig_name + "' has no definition");
    return f;
  }

  TermPtr stand_alone_term() {
    TermPtr t = term();
    expect(Tok::End, "end of input");
    return t;
  }

  TypePtr stand_alone_type() {
    TypePtr t = type();
    expect(Tok::End, "end of input");
    return t;
  }

 private:
  std::vector<Token> toks_;
  size_t pos_ = 0;
  CtorArities ctors_;
  bool holes_may_repeat_ = false;
  std::set<int> used_hole_ids_;
  int next_auto_hole_ = 0;

  const Token& cur() const { return toks_[pos_]; }
  const Token& peek(size_t n = 1) const {
    return toks_[std::min(pos_ + n, toks_.size() - 1)];
  }
  bool at(Tok k) const { return cur().kind == k; }
  bool at_keyword(const std::string& w) const {
    return cur().kind == Tok::LName && cur().text == w;
  }
  Token take() { return toks_[pos_++]; }
  ParseError err(const std::string& msg) const {
    return ParseError(cur().line, cur().col, msg);
  }
  Token expect(Tok k, const std::string& what) {
    if (!at(k)) throw err("expected " + what);
    return take();
  }
  std::string lname() {
    if (!at(Tok::LName) || kKeywords.count(cur().text))
      throw err("expected a name");
    return take().text;
  }

  void pragma(Program& p) {
    take();  // {-#
    if (!(at(Tok::UName) && cur().text == "USE"))
      throw err("unknown pragma; expected USE");
    take();
    for (;;) {
      UseEntry e;
      if (at(Tok::LParen)) {
        take();
        if (at(Tok::PlusPlus)) {
          take();
          e.name = "append";
        } else if (at(Tok::EqEq)) {
          take();
          e.name = "eq";
        } else {
          throw err("expected an operator name");
        }
        expect(Tok::RParen, ")");
      } else {
        e.name = lname();
      }
      if (at(Tok::DoubleColon)) {
        take();
        e.annotation = type();
      }
      p.uses.push_back(std::move(e));
      if (at(Tok::Comma)) {
        take();
        continue;
      }
      break;
    }
    expect(Tok::PragmaClose, "#-}");
  }

  int scheme_annotation() {
    take();  // @
    Token kw = expect(Tok::LName, "'scheme'");
    if (kw.text != "scheme")
      throw ParseError(kw.line, kw.col, "unknown annotation '@" + kw.text + "'");
    Token arg = expect(Tok::LName, "'recursive-arg'");
    if (arg.text != "recursive-arg")
      throw ParseError(arg.line, arg.col, "expected 'recursive-arg'");
    expect(Tok::Equals, "=");
    Token num = expect(Tok::Number, "argument index");
    return std::stoi(num.text);
  }

  DataDecl datadecl() {
    take();  // data
    DataDecl d;
    d.name = expect(Tok::UName, "datatype name").text;
    while (at(Tok::LName) && cur().col != 1) d.params.push_back(lname());
    expect(Tok::Equals, "=");
    for (;;) {
      CtorDecl c;
      c.name = expect(Tok::UName, "constructor name").text;
      while ((at(Tok::UName) || at(Tok::LName) || at(Tok::LParen)) && cur().col != 1)
        c.args.push_back(atype(d.params, /*atomic=*/true));
      if (ctors_.count(c.name))
        throw err("constructor '" + c.name + "' is already declared");
      ctors_[c.name] = static_cast<int>(c.args.size());
      d.ctors.push_back(std::move(c));
      if (at(Tok::Pipe)) {
        take();
        continue;
      }
      break;
    }
    return d;
  }

  void sig_or_def(Program& p) {
    if (peek().kind == Tok::DoubleColon) {
      std::string name = lname();
      take();  // ::
      if (!p.sig_name.empty())
        throw err("a problem file holds a single signature; '" + p.sig_name +
                  "' is already declared");
      p.sig_name = name;
      p.sig_type = type();
      return;
    }
    std::string name = lname();
    if (p.body) throw err("a problem file holds a single definition");
    if (p.sig_name.empty() || name != p.sig_name)
      throw err("definition of '" + name + "' has no matching signature");
    while (at(Tok::LName) && cur().col != 1) p.params.push_back(lname());
    expect(Tok::Equals, "=");
    p.body = term();
  }

  Assert assert_item() {
    take();  // assert
    Assert a;
    a.fn = lname();
    while (!at(Tok::Implies)) {
      if (at(Tok::End) || cur().col == 1) throw err("expected '<=='");
      a.args.push_back(avalue_atom());
    }
    expect(Tok::Implies, "<==");
    a.expected = avalue();
    return a;
  }

  // -- types ----------------------------------------------------------------

  TypePtr type() {
    TypePtr lhs = btype();
    if (at(Tok::Arrow)) {
      take();
      return tarrow(lhs, type());
    }
    return lhs;
  }

  TypePtr btype() {
    if (at(Tok::UName)) {
      std::string name = take().text;
      std::vector<TypePtr> args;
      while ((at(Tok::UName) || at(Tok::LName) || at(Tok::LParen)) && cur().col != 1)
        args.push_back(atype({}, /*atomic=*/true));
      return tdata(std::move(name), std::move(args));
    }
    return atype({}, /*atomic=*/false);
  }

  TypePtr atype(const std::vector<std::string>& bound, bool atomic) {
    (void)atomic;
    if (at(Tok::UName)) return tdata(take().text, {});
    if (at(Tok::LName)) {
      std::string n = lname();
      if (!bound.empty() &&
          std::find(bound.begin(), bound.end(), n) == bound.end())
        throw err("type variable '" + n + "' is not bound by the declaration");
      return tvar(n);
    }
    if (at(Tok::LParen)) {
      take();
      TypePtr t = type();
      expect(Tok::RParen, ")");
      return t;
    }
    throw err("expected a type");
  }

  // -- terms ----------------------------------------------------------------

  TermPtr term() {
    if (at(Tok::Backslash)) {
      take();
      std::vector<std::string> binders;
      binders.push_back(lname());
      while (at(Tok::LName)) binders.push_back(lname());
      expect(Tok::Arrow, "->");
      TermPtr body = term();
      for (auto it = binders.rbegin(); it != binders.rend(); ++it)
        body = mk_lam(*it, body);
      return body;
    }
    if (at_keyword("case")) {
      take();
      TermPtr scrut = term();
      Token of = expect(Tok::LName, "'of'");
      if (of.text != "of") throw ParseError(of.line, of.col, "expected 'of'");
      expect(Tok::LBrace, "{");
      std::vector<CaseBranch> branches;
      for (;;) {
        branches.push_back(branch());
        if (at(Tok::Semi)) {
          take();
          continue;
        }
        break;
      }
      expect(Tok::RBrace, "}");
      return mk_case(scrut, std::move(branches));
    }
    if (at_keyword("if")) {
      take();
      TermPtr c = term();
      Token t1 = expect(Tok::LName, "'then'");
      if (t1.text != "then") throw ParseError(t1.line, t1.col, "expected 'then'");
      TermPtr thenb = term();
      Token t2 = expect(Tok::LName, "'else'");
      if (t2.text != "else") throw ParseError(t2.line, t2.col, "expected 'else'");
      TermPtr elseb = term();
      return mk_case(c, {{"False", {}, elseb}, {"True", {}, thenb}});
    }
    return eq_expr();
  }

  CaseBranch branch() {
    CaseBranch b;
    if (at(Tok::LBracket)) {
      take();
      expect(Tok::RBracket, "]");
      b.ctor = "Nil";
    } else if (at(Tok::LName) && peek().kind == Tok::Colon) {
      b.ctor = "Cons";
      b.binders.push_back(lname());
      take();  // :
      b.binders.push_back(lname());
    } else {
      b.ctor = expect(Tok::UName, "constructor pattern").text;
      while (at(Tok::LName) && !kKeywords.count(cur().text))
        b.binders.push_back(lname());
    }
    expect(Tok::Arrow, "->");
    b.body = term();
    return b;
  }

  bool at_atom_start() const {
    if (cur().col == 1) return false;
    switch (cur().kind) {
      case Tok::LName:
        return !kKeywords.count(cur().text);
      case Tok::UName:
      case Tok::Number:
      case Tok::Hole:
      case Tok::LParen:
      case Tok::LBracket:
        return true;
      default:
        return false;
    }
  }

  TermPtr eq_expr() {
    TermPtr lhs = cons_expr();
    if (at(Tok::EqEq)) {
      take();
      TermPtr rhs = cons_expr();
      return mk_app(mk_app(mk_var("eq"), lhs), rhs);
    }
    return lhs;
  }

  TermPtr cons_expr() {
    TermPtr lhs = app_expr();
    if (at(Tok::Colon)) {
      take();
      return mk_ctor("Cons", {lhs, cons_expr()});
    }
    if (at(Tok::PlusPlus)) {
      take();
      return mk_app(mk_app(mk_var("append"), lhs), cons_expr());
    }
    return lhs;
  }

  TermPtr app_expr() {
    if (at(Tok::UName)) return ctor_app();
    TermPtr head = atom();
    while (at_atom_start()) head = mk_app(head, atom());
    return head;
  }

  TermPtr ctor_app() {
    Token name = take();
    auto it = ctors_.find(name.text);
    if (it == ctors_.end())
      throw ParseError(name.line, name.col,
                       "unknown constructor '" + name.text + "'");
    int arity = it->second;
    std::vector<TermPtr> args;
    while (static_cast<int>(args.size()) < arity && at_atom_start())
      args.push_back(atom());
    if (static_cast<int>(args.size()) < arity)
      throw ParseError(name.line, name.col,
                       "constructor '" + name.text + "' expects " +
                           std::to_string(arity) + " arguments");
    TermPtr t = mk_ctor(name.text, std::move(args));
    while (at_atom_start()) t = mk_app(t, atom());
    return t;
  }

  TermPtr atom() {
    if (at(Tok::LName)) {
      if (kKeywords.count(cur().text)) throw err("unexpected keyword");
      return mk_var(take().text);
    }
    if (at(Tok::UName)) {
      Token name = cur();
      auto it = ctors_.find(name.text);
      if (it == ctors_.end())
        throw ParseError(name.line, name.col,
                         "unknown constructor '" + name.text + "'");
      if (it->second != 0)
        throw ParseError(name.line, name.col,
                         "constructor '" + name.text +
                             "' expects arguments; parenthesize the application");
      take();
      return mk_ctor(name.text, {});
    }
    if (at(Tok::Number)) {
      int n = std::stoi(take().text);
      TermPtr t = mk_ctor("Zero", {});
      for (int i = 0; i < n; ++i) t = mk_ctor("Succ", {t});
      return t;
    }
    if (at(Tok::Hole)) {
      Token h = take();
      int id;
      if (h.text.empty()) {
        while (used_hole_ids_.count(next_auto_hole_)) ++next_auto_hole_;
        id = next_auto_hole_;
      } else {
        id = std::stoi(h.text);
        if (!holes_may_repeat_ && used_hole_ids_.count(id))
          throw ParseError(h.line, h.col,
                           "hole _" + h.text + " appears more than once");
      }
      used_hole_ids_.insert(id);
      return mk_hole(id);
    }
    if (at(Tok::LBracket)) {
      take();
      std::vector<TermPtr> elems;
      if (!at(Tok::RBracket)) {
        elems.push_back(term());
        while (at(Tok::Comma)) {
          take();
          elems.push_back(term());
        }
      }
      expect(Tok::RBracket, "]");
      TermPtr t = mk_ctor("Nil", {});
      for (auto it = elems.rbegin(); it != elems.rend(); ++it)
        t = mk_ctor("Cons", {*it, t});
      return t;
    }
    if (at(Tok::LParen)) {
      take();
      TermPtr t = term();
      expect(Tok::RParen, ")");
      return t;
    }
    throw err("expected an expression");
  }

  // -- assert values --------------------------------------------------------

  ExPtr avalue() {
    if (at(Tok::UName)) {
      Token name = take();
      auto it = ctors_.find(name.text);
      if (it == ctors_.end())
        throw ParseError(name.line, name.col,
                         "unknown constructor '" + name.text + "'");
      std::vector<ExPtr> args;
      for (int k = 0; k < it->second; ++k) args.push_back(avalue_atom());
      return ex_ctor(name.text, std::move(args));
    }
    return avalue_atom();
  }

  ExPtr avalue_atom() {
    if (at(Tok::Hole)) {
      Token h = take();
      if (!h.text.empty())
        throw ParseError(h.line, h.col, "numbered holes are not values; use '_'");
      return ex_top();
    }
    if (at(Tok::Number)) {
      int n = std::stoi(take().text);
      ExPtr e = ex_ctor("Zero");
      for (int i = 0; i < n; ++i) e = ex_ctor("Succ", {e});
      return e;
    }
    if (at(Tok::UName)) {
      Token name = cur();
      auto it = ctors_.find(name.text);
      if (it == ctors_.end())
        throw ParseError(name.line, name.col,
                         "unknown constructor '" + name.text + "'");
      if (it->second != 0)
        throw ParseError(name.line, name.col,
                         "parenthesize constructor applications in asserts");
      take();
      return ex_ctor(name.text, {});
    }
    if (at(Tok::LBracket)) {
      take();
      std::vector<ExPtr> elems;
      if (!at(Tok::RBracket)) {
        elems.push_back(avalue());
        while (at(Tok::Comma)) {
          take();
          elems.push_back(avalue());
        }
      }
      expect(Tok::RBracket, "]");
      ExPtr e = ex_ctor("Nil");
      for (auto it = elems.rbegin(); it != elems.rend(); ++it)
        e = ex_ctor("Cons", {*it, e});
      return e;
    }
    if (at(Tok::LBrace)) {
      take();
      std::vector<std::pair<ExPtr, ExPtr>> table;
      if (!at(Tok::RBrace)) {
        for (;;) {
          std::vector<ExPtr> ins;
          ins.push_back(avalue_atom());
          while (!at(Tok::Arrow)) {
            if (at(Tok::End)) throw err("expected '->' in function example");
            ins.push_back(avalue_atom());
          }
          expect(Tok::Arrow, "->");
          ExPtr out = avalue();
          for (size_t k = ins.size(); k-- > 1;) out = ex_fun({{ins[k], out}});
          table.emplace_back(ins[0], out);
          if (at(Tok::Comma)) {
            take();
            continue;
          }
          break;
        }
      }
      expect(Tok::RBrace, "}");
      // Rows sharing a first input merge into one nested table; conflicting
      // outputs are a functionality error worth rejecting at parse time.
      std::vector<std::pair<ExPtr, ExPtr>> merged;
      for (auto& [in, out] : table) {
        bool done = false;
        for (auto& row : merged) {
          if (ex_equal(row.first, in)) {
            auto m = ex_meet(row.second, out);
            if (!m)
              throw err("function example maps one input to conflicting outputs");
            row.second = *m;
            done = true;
            break;
          }
        }
        if (!done) merged.emplace_back(in, out);
      }
      return ex_fun(std::move(merged));
    }
    if (at(Tok::LParen)) {
      take();
      ExPtr e = avalue();
      expect(Tok::RParen, ")");
      return e;
    }
    throw err("expected a value");
  }
};

}  // namespace

CtorArities builtin_ctor_arities() {
  return {
      {"False", 0},   {"True", 0}, {"Zero", 0}, {"Succ", 1}, {"Nil", 0},
      {"Cons", 2},    {"Nothing", 0}, {"Just", 1}, {"Leaf", 0}, {"Node", 3},
  };
}

Program parse_program(const std::string& source) {
  return parse_program(source, builtin_ctor_arities());
}

Program parse_program(const std::string& source, const CtorArities& ctors) {
  Parser p(lex(source), ctors);
  return p.program();
}

TermPtr parse_term(const std::string& source, const CtorArities& ctors) {
  Parser p(lex(source), ctors);
  return p.stand_alone_term();
}

TermPtr parse_pattern(const std::string& source, const CtorArities& ctors) {
  Parser p(lex(source), ctors, /*holes_may_repeat=*/true);
  return p.stand_alone_term();
}

TypePtr parse_type(const std::string& source) {
  Parser p(lex(source), {});
  return p.stand_alone_type();
}

PreludeFile parse_prelude(const std::string& source) {
  // The prelude declares the builtin datatypes itself, so it starts from an
  // empty constructor map; declarations must precede the bodies using them.
  Parser p(lex(source), {});
  return p.prelude();
}

}  // namespace lacuna
