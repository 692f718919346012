#ifndef SPCF_SYNTAX_HPP
#define SPCF_SYNTAX_HPP

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

// Abstract syntax, surface grammar and type checking for SPCF: a simply
// typed call-by-value language whose programs may contain opaque values
// `(• T)` standing for unknown, possibly higher-order, closed terms.
//
// Surface grammar (s-expressions, `;` comments):
//
//   expr := var | int | "(•" type ")" | "(λ (" var ":" type ")" expr ")"
//         | "(if" expr expr expr ")" | "(" prim expr+ ")" | "(" expr expr ")"
//   type := "int" | "(" type "->" type ")"
//   prim := "zero?" | "add1" | "sub1" | "+" | "-" | "*" | "div" | "="
//
// Every opaque occurrence and every primitive application site is labeled
// ℓ1, ℓ2, ... in left-to-right source order.

namespace spcf {

using Int = long long;

// ---------------------------------------------------------------------------
// Labels and primitive operators

struct Label {
  int id = -1;
  auto operator<=>(const Label&) const = default;
};

inline std::string show(Label l) { return "ℓ" + std::to_string(l.id); }

enum class Op { IsZero, Add1, Sub1, Add, Sub, Mul, Div, Eq };

inline const char* op_name(Op op) {
  switch (op) {
    case Op::IsZero: return "zero?";
    case Op::Add1: return "add1";
    case Op::Sub1: return "sub1";
    case Op::Add: return "+";
    case Op::Sub: return "-";
    case Op::Mul: return "*";
    case Op::Div: return "div";
    case Op::Eq: return "=";
  }
  return "?";
}

inline int op_arity(Op op) {
  switch (op) {
    case Op::IsZero:
    case Op::Add1:
    case Op::Sub1: return 1;
    default: return 2;
  }
}

inline std::optional<Op> op_from_name(const std::string& s) {
  if (s == "zero?") return Op::IsZero;
  if (s == "add1") return Op::Add1;
  if (s == "sub1") return Op::Sub1;
  if (s == "+") return Op::Add;
  if (s == "-") return Op::Sub;
  if (s == "*") return Op::Mul;
  if (s == "div") return Op::Div;
  if (s == "=") return Op::Eq;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Types: int | (T -> T)

class Type;
using TypePtr = std::shared_ptr<const Type>;

class Type {
 public:
  static TypePtr base() {
    static const TypePtr t = std::shared_ptr<const Type>(new Type());
    return t;
  }
  static TypePtr arrow(TypePtr dom, TypePtr cod) {
    return std::shared_ptr<const Type>(new Type(std::move(dom), std::move(cod)));
  }

  bool is_base() const { return !dom_; }
  bool is_arrow() const { return static_cast<bool>(dom_); }
  const TypePtr& domain() const { return dom_; }
  const TypePtr& codomain() const { return cod_; }

 private:
  Type() = default;
  Type(TypePtr d, TypePtr c) : dom_(std::move(d)), cod_(std::move(c)) {}
  TypePtr dom_, cod_;
};

inline bool type_eq(const TypePtr& a, const TypePtr& b) {
  if (a.get() == b.get()) return true;
  if (!a || !b) return false;
  if (a->is_base() != b->is_base()) return false;
  if (a->is_base()) return true;
  return type_eq(a->domain(), b->domain()) && type_eq(a->codomain(), b->codomain());
}

inline std::string show(const TypePtr& t) {
  if (t->is_base()) return "int";
  return "(" + show(t->domain()) + " -> " + show(t->codomain()) + ")";
}

// ---------------------------------------------------------------------------
// Expressions

struct LocId {
  int id = -1;
  auto operator<=>(const LocId&) const = default;
};

inline std::string show(LocId l) { return "L" + std::to_string(l.id); }

struct ExprNode;
using Expr = std::shared_ptr<const ExprNode>;

struct VarE {
  std::string name;
};
struct LitE {
  Int value;
};
struct OpqE {
  TypePtr type;
  Label label;
};
struct LamE {
  std::string param;
  TypePtr param_type;
  Expr body;
};
struct AppE {
  Expr fn;
  Expr arg;
};
struct IfE {
  Expr cond;
  Expr then_branch;
  Expr else_branch;
};
struct PrimE {
  Op op;
  std::vector<Expr> args;
  Label site;
};
// Internal forms, produced only by reduction: heap references and errors.
struct LocE {
  LocId loc;
};
struct ErrE {
  Label blame;
  Op op;
};

struct ExprNode {
  std::variant<VarE, LitE, OpqE, LamE, AppE, IfE, PrimE, LocE, ErrE> node;
};

inline Expr mk_var(std::string n) { return std::make_shared<ExprNode>(ExprNode{VarE{std::move(n)}}); }
inline Expr mk_lit(Int v) { return std::make_shared<ExprNode>(ExprNode{LitE{v}}); }
inline Expr mk_opq(TypePtr t, Label l) { return std::make_shared<ExprNode>(ExprNode{OpqE{std::move(t), l}}); }
inline Expr mk_lam(std::string p, TypePtr t, Expr b) {
  return std::make_shared<ExprNode>(ExprNode{LamE{std::move(p), std::move(t), std::move(b)}});
}
inline Expr mk_app(Expr f, Expr a) { return std::make_shared<ExprNode>(ExprNode{AppE{std::move(f), std::move(a)}}); }
inline Expr mk_if(Expr c, Expr t, Expr e) {
  return std::make_shared<ExprNode>(ExprNode{IfE{std::move(c), std::move(t), std::move(e)}});
}
inline Expr mk_prim(Op op, std::vector<Expr> args, Label site) {
  return std::make_shared<ExprNode>(ExprNode{PrimE{op, std::move(args), site}});
}
inline Expr mk_loc(LocId l) { return std::make_shared<ExprNode>(ExprNode{LocE{l}}); }
inline Expr mk_err(Label blame, Op op) { return std::make_shared<ExprNode>(ExprNode{ErrE{blame, op}}); }

template <typename T>
const T* as(const Expr& e) {
  return std::get_if<T>(&e->node);
}

inline bool is_value(const Expr& e) {
  return as<LitE>(e) || as<LamE>(e) || as<OpqE>(e);
}

// ---------------------------------------------------------------------------
// Rendering. `show` on a user-facing AST is the inverse of `parse_expr`.

inline std::string show(const Expr& e);

inline std::string show(const Expr& e) {
  std::ostringstream out;
  if (auto* v = as<VarE>(e)) {
    out << v->name;
  } else if (auto* n = as<LitE>(e)) {
    out << n->value;
  } else if (auto* o = as<OpqE>(e)) {
    out << "(• " << show(o->type) << ")";
  } else if (auto* l = as<LamE>(e)) {
    out << "(λ (" << l->param << " : " << show(l->param_type) << ") " << show(l->body) << ")";
  } else if (auto* a = as<AppE>(e)) {
    out << "(" << show(a->fn) << " " << show(a->arg) << ")";
  } else if (auto* i = as<IfE>(e)) {
    out << "(if " << show(i->cond) << " " << show(i->then_branch) << " " << show(i->else_branch) << ")";
  } else if (auto* p = as<PrimE>(e)) {
    out << "(" << op_name(p->op);
    for (const auto& arg : p->args) out << " " << show(arg);
    out << ")";
  } else if (auto* loc = as<LocE>(e)) {
    out << show(loc->loc);
  } else if (auto* err = as<ErrE>(e)) {
    out << "(err " << show(err->blame) << " " << op_name(err->op) << ")";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Programs

struct Program {
  Expr root;
  // Primitive-application site labels; errors blaming anything else come
  // from synthesized unknown-portion code and are not reported.
  std::set<Label> known_labels;
  // Source opaques in left-to-right order, with their annotations.
  std::vector<Label> opq_order;
  std::map<Label, TypePtr> opq_types;
  int label_count = 0;
};

// ---------------------------------------------------------------------------
// Parsing

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, int col, const std::string& msg)
      : std::runtime_error("parse error at " + std::to_string(line) + ":" + std::to_string(col) + ": " + msg),
        line_(line),
        col_(col) {}
  int line() const { return line_; }
  int column() const { return col_; }

 private:
  int line_, col_;
};

namespace detail {

struct Token {
  enum Kind { LParen, RParen, Atom, End } kind;
  std::string text;
  int line, col;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    skip_ws();
    if (pos_ >= src_.size()) return {Token::End, "", line_, col_};
    int line = line_, col = col_;
    char c = src_[pos_];
    if (c == '(') {
      advance();
      return {Token::LParen, "(", line, col};
    }
    if (c == ')') {
      advance();
      return {Token::RParen, ")", line, col};
    }
    std::string atom;
    while (pos_ < src_.size() && !std::isspace(static_cast<unsigned char>(src_[pos_])) && src_[pos_] != '(' &&
           src_[pos_] != ')' && src_[pos_] != ';') {
      atom += src_[pos_];
      advance();
    }
    return {Token::Atom, atom, line, col};
  }

 private:
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }
  void skip_ws() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == ';') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  std::string_view src_;
  size_t pos_ = 0;
  int line_ = 1, col_ = 1;
};

inline bool is_integer_atom(const std::string& s) {
  if (s.empty()) return false;
  size_t i = (s[0] == '-') ? 1 : 0;
  if (i == s.size()) return false;
  for (; i < s.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  return true;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : lex_(src) { shift(); }

  Program parse_program() {
    Program p;
    p.root = parse_expr(p);
    if (cur_.kind != Token::End) fail("trailing input after expression");
    p.label_count = next_label_;
    return p;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) { throw ParseError(cur_.line, cur_.col, msg); }

  void shift() { cur_ = lex_.next(); }

  Label fresh_label() { return Label{++next_label_}; }

  std::string expect_atom(const char* what) {
    if (cur_.kind != Token::Atom) fail(std::string("expected ") + what);
    std::string s = cur_.text;
    shift();
    return s;
  }

  void expect(Token::Kind k, const char* what) {
    if (cur_.kind != k) fail(std::string("expected ") + what);
    shift();
  }

  TypePtr parse_type() {
    if (cur_.kind == Token::Atom) {
      if (cur_.text != "int") fail("expected type");
      shift();
      return Type::base();
    }
    expect(Token::LParen, "type");
    TypePtr dom = parse_type();
    std::string arrow = expect_atom("'->'");
    if (arrow != "->") fail("expected '->' in arrow type");
    TypePtr cod = parse_type();
    expect(Token::RParen, "')' closing arrow type");
    return Type::arrow(std::move(dom), std::move(cod));
  }

  bool reserved(const std::string& s) const {
    return s == "if" || s == "λ" || s == "lambda" || s == "•" || s == "opaque" || s == "int" ||
           op_from_name(s).has_value();
  }

  Expr parse_expr(Program& p) {
    if (cur_.kind == Token::Atom) {
      std::string a = cur_.text;
      if (is_integer_atom(a)) {
        shift();
        return mk_lit(std::stoll(a));
      }
      if (reserved(a)) fail("reserved word '" + a + "' cannot appear here");
      shift();
      return mk_var(a);
    }
    expect(Token::LParen, "expression");
    if (cur_.kind == Token::Atom) {
      const std::string head = cur_.text;
      if (head == "•" || head == "opaque") {
        shift();
        TypePtr t = parse_type();
        expect(Token::RParen, "')' closing opaque");
        Label l = fresh_label();
        p.opq_order.push_back(l);
        p.opq_types[l] = t;
        return mk_opq(std::move(t), l);
      }
      if (head == "λ" || head == "lambda") {
        shift();
        expect(Token::LParen, "'(' opening parameter");
        std::string param = expect_atom("parameter name");
        if (reserved(param) || is_integer_atom(param)) fail("bad parameter name '" + param + "'");
        std::string colon = expect_atom("':'");
        if (colon != ":") fail("expected ':' after parameter name");
        TypePtr t = parse_type();
        expect(Token::RParen, "')' closing parameter");
        Expr body = parse_expr(p);
        expect(Token::RParen, "')' closing λ");
        return mk_lam(std::move(param), std::move(t), std::move(body));
      }
      if (head == "if") {
        shift();
        Expr c = parse_expr(p);
        Expr t = parse_expr(p);
        Expr e = parse_expr(p);
        expect(Token::RParen, "')' closing if");
        return mk_if(std::move(c), std::move(t), std::move(e));
      }
      if (auto op = op_from_name(head)) {
        shift();
        Label site = fresh_label();
        p.known_labels.insert(site);
        std::vector<Expr> args;
        while (cur_.kind != Token::RParen) {
          if (cur_.kind == Token::End) fail("unterminated primitive application");
          args.push_back(parse_expr(p));
        }
        shift();
        if (args.empty()) fail("primitive application needs at least one argument");
        return mk_prim(*op, std::move(args), site);
      }
    }
    Expr fn = parse_expr(p);
    Expr arg = parse_expr(p);
    expect(Token::RParen, "')' closing application");
    return mk_app(std::move(fn), std::move(arg));
  }

  Lexer lex_;
  Token cur_{Token::End, "", 0, 0};
  int next_label_ = 0;
};

}  // namespace detail

inline Program parse(std::string_view text) { return detail::Parser(text).parse_program(); }

// ---------------------------------------------------------------------------
// Type checking

class TypeError : public std::runtime_error {
 public:
  explicit TypeError(const std::string& msg) : std::runtime_error("type error: " + msg) {}
};

namespace detail {

inline TypePtr check(const Expr& e, std::vector<std::pair<std::string, TypePtr>>& env) {
  if (auto* v = as<VarE>(e)) {
    for (auto it = env.rbegin(); it != env.rend(); ++it)
      if (it->first == v->name) return it->second;
    throw TypeError("unbound variable '" + v->name + "'");
  }
  if (as<LitE>(e)) return Type::base();
  if (auto* o = as<OpqE>(e)) return o->type;
  if (auto* l = as<LamE>(e)) {
    env.emplace_back(l->param, l->param_type);
    TypePtr body = check(l->body, env);
    env.pop_back();
    return Type::arrow(l->param_type, std::move(body));
  }
  if (auto* a = as<AppE>(e)) {
    TypePtr fn = check(a->fn, env);
    TypePtr arg = check(a->arg, env);
    if (!fn->is_arrow()) throw TypeError("applied non-function: " + show(a->fn));
    if (!type_eq(fn->domain(), arg)) {
      throw TypeError("argument type mismatch in " + show(e) + ": expected " + show(fn->domain()) + ", got " +
                      show(arg));
    }
    return fn->codomain();
  }
  if (auto* i = as<IfE>(e)) {
    TypePtr c = check(i->cond, env);
    if (!c->is_base()) throw TypeError("condition must be int: " + show(i->cond));
    TypePtr t = check(i->then_branch, env);
    TypePtr f = check(i->else_branch, env);
    if (!type_eq(t, f)) throw TypeError("branch types differ in " + show(e));
    return t;
  }
  if (auto* pr = as<PrimE>(e)) {
    if (static_cast<int>(pr->args.size()) != op_arity(pr->op))
      throw TypeError(std::string(op_name(pr->op)) + " expects " + std::to_string(op_arity(pr->op)) +
                      " argument(s): " + show(e));
    for (const auto& arg : pr->args) {
      TypePtr t = check(arg, env);
      if (!t->is_base()) throw TypeError("primitive argument must be int: " + show(arg));
    }
    return Type::base();
  }
  throw TypeError("internal form in source program: " + show(e));
}

}  // namespace detail

inline TypePtr typecheck(const Program& p) {
  std::vector<std::pair<std::string, TypePtr>> env;
  return detail::check(p.root, env);
}

}  // namespace spcf

#endif  // SPCF_SYNTAX_HPP
