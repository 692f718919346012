#ifndef SPCF_LOGIC_HPP
#define SPCF_LOGIC_HPP

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "spcf/heap.hpp"
#include "spcf/syntax.hpp"

// First-order reasoning over heaps. A heap translates to a conjunction of
// integer constraints: concrete bindings become equalities, predicates on
// base opaques translate directly, and case mappings assert that equal
// inputs imply equal outputs. Function-formed outputs are compared
// structurally over the residue shapes the reduction rules produce; unlike
// forms compare as false. No uninterpreted functions are emitted — queries
// range over integers only.
//
// Two backends answer satisfiability: a built-in bounded enumerator (the
// default, hermetic) and an external SMT-LIB2 process.

namespace spcf {

// ---------------------------------------------------------------------------
// Terms and formulas

struct Term;
using TermPtr = std::shared_ptr<const Term>;

struct Term {
  enum class Kind { Const, Var, Bin } kind;
  Int value = 0;      // Const
  LocId var;          // Var
  Op op = Op::Add;    // Bin
  TermPtr lhs, rhs;   // Bin
};

inline TermPtr t_const(Int v) { return std::make_shared<Term>(Term{Term::Kind::Const, v, {}, Op::Add, nullptr, nullptr}); }
inline TermPtr t_var(LocId l) { return std::make_shared<Term>(Term{Term::Kind::Var, 0, l, Op::Add, nullptr, nullptr}); }
inline TermPtr t_bin(Op op, TermPtr a, TermPtr b) {
  return std::make_shared<Term>(Term{Term::Kind::Bin, 0, {}, op, std::move(a), std::move(b)});
}

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
  enum class Kind { True, False, Eq, Not, And, Implies } kind;
  TermPtr a, b;                     // Eq
  FormulaPtr f, g;                  // Not (f), Implies (f -> g)
  std::vector<FormulaPtr> conj;     // And
};

inline FormulaPtr f_true() {
  static const FormulaPtr t = std::make_shared<Formula>(Formula{Formula::Kind::True, nullptr, nullptr, nullptr, nullptr, {}});
  return t;
}
inline FormulaPtr f_false() {
  static const FormulaPtr t = std::make_shared<Formula>(Formula{Formula::Kind::False, nullptr, nullptr, nullptr, nullptr, {}});
  return t;
}
inline FormulaPtr f_eq(TermPtr a, TermPtr b) {
  return std::make_shared<Formula>(Formula{Formula::Kind::Eq, std::move(a), std::move(b), nullptr, nullptr, {}});
}
inline FormulaPtr f_not(FormulaPtr f) {
  return std::make_shared<Formula>(Formula{Formula::Kind::Not, nullptr, nullptr, std::move(f), nullptr, {}});
}
inline FormulaPtr f_implies(FormulaPtr f, FormulaPtr g) {
  return std::make_shared<Formula>(Formula{Formula::Kind::Implies, nullptr, nullptr, std::move(f), std::move(g), {}});
}
inline FormulaPtr f_and(std::vector<FormulaPtr> fs) {
  std::vector<FormulaPtr> kept;
  for (auto& f : fs) {
    if (f->kind == Formula::Kind::True) continue;
    if (f->kind == Formula::Kind::And) {
      for (const auto& g : f->conj) kept.push_back(g);
    } else {
      kept.push_back(std::move(f));
    }
  }
  if (kept.empty()) return f_true();
  if (kept.size() == 1) return kept[0];
  return std::make_shared<Formula>(Formula{Formula::Kind::And, nullptr, nullptr, nullptr, nullptr, std::move(kept)});
}

inline void term_vars(const TermPtr& t, std::set<LocId>& out) {
  switch (t->kind) {
    case Term::Kind::Const: return;
    case Term::Kind::Var: out.insert(t->var); return;
    case Term::Kind::Bin:
      term_vars(t->lhs, out);
      term_vars(t->rhs, out);
      return;
  }
}

inline void formula_vars(const FormulaPtr& f, std::set<LocId>& out) {
  switch (f->kind) {
    case Formula::Kind::True:
    case Formula::Kind::False: return;
    case Formula::Kind::Eq:
      term_vars(f->a, out);
      term_vars(f->b, out);
      return;
    case Formula::Kind::Not: formula_vars(f->f, out); return;
    case Formula::Kind::Implies:
      formula_vars(f->f, out);
      formula_vars(f->g, out);
      return;
    case Formula::Kind::And:
      for (const auto& g : f->conj) formula_vars(g, out);
      return;
  }
}

inline std::string show(const TermPtr& t) {
  switch (t->kind) {
    case Term::Kind::Const: return std::to_string(t->value);
    case Term::Kind::Var: return show(t->var);
    case Term::Kind::Bin:
      return "(" + std::string(op_name(t->op)) + " " + show(t->lhs) + " " + show(t->rhs) + ")";
  }
  return "?";
}

inline std::string show(const FormulaPtr& f) {
  switch (f->kind) {
    case Formula::Kind::True: return "true";
    case Formula::Kind::False: return "false";
    case Formula::Kind::Eq: return "(= " + show(f->a) + " " + show(f->b) + ")";
    case Formula::Kind::Not: return "(not " + show(f->f) + ")";
    case Formula::Kind::Implies: return "(=> " + show(f->f) + " " + show(f->g) + ")";
    case Formula::Kind::And: {
      std::string s = "(and";
      for (const auto& g : f->conj) s += " " + show(g);
      return s + ")";
    }
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Exact integer arithmetic shared by evaluation and the built-in backend.
// Division is Euclidean (remainder always nonnegative), agreeing with
// SMT-LIB `div`.

inline Int euclidean_div(Int a, Int b) {
  Int q = a / b;
  Int r = a % b;
  if (r < 0) q += (b > 0 ? -1 : 1);
  return q;
}

inline std::optional<Int> eval_op(Op op, Int a, Int b) {
  switch (op) {
    case Op::Add: return a + b;
    case Op::Sub: return a - b;
    case Op::Mul: return a * b;
    case Op::Div:
      if (b == 0) return std::nullopt;
      return euclidean_div(a, b);
    default: return std::nullopt;
  }
}

inline std::optional<Int> eval_term(const TermPtr& t, const std::map<LocId, Int>& m) {
  switch (t->kind) {
    case Term::Kind::Const: return t->value;
    case Term::Kind::Var: {
      auto it = m.find(t->var);
      if (it == m.end()) return std::nullopt;
      return it->second;
    }
    case Term::Kind::Bin: {
      auto a = eval_term(t->lhs, m);
      auto b = eval_term(t->rhs, m);
      if (!a || !b) return std::nullopt;
      return eval_op(t->op, *a, *b);
    }
  }
  return std::nullopt;
}

// Division by zero poisons the candidate: the enclosing assignment is
// rejected rather than given a defined value.
inline std::optional<bool> eval_formula(const FormulaPtr& f, const std::map<LocId, Int>& m) {
  switch (f->kind) {
    case Formula::Kind::True: return true;
    case Formula::Kind::False: return false;
    case Formula::Kind::Eq: {
      auto a = eval_term(f->a, m);
      auto b = eval_term(f->b, m);
      if (!a || !b) return std::nullopt;
      return *a == *b;
    }
    case Formula::Kind::Not: {
      auto v = eval_formula(f->f, m);
      if (!v) return std::nullopt;
      return !*v;
    }
    case Formula::Kind::Implies: {
      auto a = eval_formula(f->f, m);
      if (!a) return std::nullopt;
      if (!*a) return true;
      return eval_formula(f->g, m);
    }
    case Formula::Kind::And: {
      for (const auto& g : f->conj) {
        auto v = eval_formula(g, m);
        if (!v) return std::nullopt;
        if (!*v) return false;
      }
      return true;
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Heap translation

inline bool loc_is_base(const Heap& h, LocId l) {
  const Storeable& s = h.at(l);
  if (std::holds_alternative<IntS>(s)) return true;
  if (const auto* o = std::get_if<OpaqueS>(&s)) return o->type->is_base();
  return false;
}

inline std::vector<LocId> base_locations(const Heap& h) {
  std::vector<LocId> out;
  for (const auto& [l, s] : h.entries)
    if (loc_is_base(h, l)) out.push_back(l);
  return out;
}

inline TermPtr arith_to_term(const ArithPtr& a) {
  switch (a->kind) {
    case Arith::Kind::Const: return t_const(a->value);
    case Arith::Kind::Loc: return t_var(a->loc);
    case Arith::Kind::Bin: return t_bin(a->op, arith_to_term(a->lhs), arith_to_term(a->rhs));
  }
  return t_const(0);
}

class UntranslatablePredicate : public std::logic_error {
 public:
  UntranslatablePredicate() : std::logic_error("predicate outside translatable forms") {}
};

inline FormulaPtr translate_pred(LocId l, const Predicate& p) {
  switch (p.kind) {
    case Predicate::Kind::IsZero: return f_eq(t_var(l), t_const(0));
    case Predicate::Kind::Not: return f_not(translate_pred(l, *p.inner));
    case Predicate::Kind::EqRhs: return f_eq(t_var(l), arith_to_term(p.rhs));
  }
  throw UntranslatablePredicate();
}

namespace detail {

// Equality between heap values. Base-typed locations compare as integer
// variables; function-formed locations compare structurally over the
// residue shapes reduction produces (case mappings, constant-function,
// argument-wrapping and curried-application residues). Unlike forms give
// false. Revisited pairs are assumed equal to keep the recursion finite.
inline FormulaPtr loc_eq(const Heap& h, LocId a, LocId b, std::set<std::pair<int, int>>& seen);

inline FormulaPtr storeable_eq(const Heap& h, const Storeable& sa, const Storeable& sb,
                               std::set<std::pair<int, int>>& seen) {
  if (const auto* ca = std::get_if<CaseS>(&sa)) {
    const auto* cb = std::get_if<CaseS>(&sb);
    if (!cb) return f_false();
    std::vector<FormulaPtr> parts;
    for (const auto& ea : ca->entries)
      for (const auto& eb : cb->entries)
        parts.push_back(f_implies(f_eq(t_var(ea.input), t_var(eb.input)), loc_eq(h, ea.output, eb.output, seen)));
    return f_and(std::move(parts));
  }
  const auto* la = std::get_if<LamS>(&sa);
  const auto* lb = std::get_if<LamS>(&sb);
  if (!la || !lb) return f_false();

  // constant-function residue: λx. L
  const auto* loca = as<LocE>(la->body);
  const auto* locb = as<LocE>(lb->body);
  if (loca && locb) return loc_eq(h, loca->loc, locb->loc, seen);
  if (loca || locb) return f_false();

  // argument-wrapping residue: λx. (K (x V))
  auto wrap_shape = [](const LamS& lam) -> std::optional<std::pair<LocId, LocId>> {
    const auto* app = as<AppE>(lam.body);
    if (!app) return std::nullopt;
    const auto* k = as<LocE>(app->fn);
    const auto* inner = as<AppE>(app->arg);
    if (!k || !inner) return std::nullopt;
    const auto* x = as<VarE>(inner->fn);
    const auto* v = as<LocE>(inner->arg);
    if (!x || !v || x->name != lam.param) return std::nullopt;
    return std::make_pair(k->loc, v->loc);
  };
  auto wa = wrap_shape(*la);
  auto wb = wrap_shape(*lb);
  if (wa && wb)
    return f_and({loc_eq(h, wa->first, wb->first, seen), loc_eq(h, wa->second, wb->second, seen)});
  if (wa || wb) return f_false();

  // curried-application residue: λx. λy. ((K x) y)
  auto curry_shape = [](const LamS& lam) -> std::optional<LocId> {
    const auto* inner = as<LamE>(lam.body);
    if (!inner) return std::nullopt;
    const auto* app = as<AppE>(inner->body);
    if (!app) return std::nullopt;
    const auto* y = as<VarE>(app->arg);
    const auto* app2 = as<AppE>(app->fn);
    if (!y || !app2 || y->name != inner->param) return std::nullopt;
    const auto* k = as<LocE>(app2->fn);
    const auto* x = as<VarE>(app2->arg);
    if (!k || !x || x->name != lam.param) return std::nullopt;
    return k->loc;
  };
  auto ca2 = curry_shape(*la);
  auto cb2 = curry_shape(*lb);
  if (ca2 && cb2) return loc_eq(h, *ca2, *cb2, seen);
  return f_false();
}

inline FormulaPtr loc_eq(const Heap& h, LocId a, LocId b, std::set<std::pair<int, int>>& seen) {
  if (loc_is_base(h, a) && loc_is_base(h, b)) return f_eq(t_var(a), t_var(b));
  if (loc_is_base(h, a) != loc_is_base(h, b)) return f_false();
  auto key = std::make_pair(a.id, b.id);
  if (!seen.insert(key).second) return f_true();
  FormulaPtr out = storeable_eq(h, h.at(a), h.at(b), seen);
  seen.erase(key);
  return out;
}

}  // namespace detail

inline FormulaPtr translate_heap(const Heap& h) {
  std::vector<FormulaPtr> parts;
  for (const auto& [l, s] : h.entries) {
    if (const auto* i = std::get_if<IntS>(&s)) {
      parts.push_back(f_eq(t_var(l), t_const(i->value)));
    } else if (const auto* o = std::get_if<OpaqueS>(&s)) {
      if (o->type->is_base())
        for (const auto& p : o->preds) parts.push_back(translate_pred(l, p));
      // higher-order opaques carry no first-order content
    } else if (const auto* c = std::get_if<CaseS>(&s)) {
      std::set<std::pair<int, int>> seen;
      for (size_t i = 0; i < c->entries.size(); ++i)
        for (size_t j = i + 1; j < c->entries.size(); ++j)
          parts.push_back(f_implies(f_eq(t_var(c->entries[i].input), t_var(c->entries[j].input)),
                                    detail::loc_eq(h, c->entries[i].output, c->entries[j].output, seen)));
    }
    // LamS contributes nothing
  }
  return f_and(std::move(parts));
}

// ---------------------------------------------------------------------------
// Solving

enum class Verdict { Proved, Refuted, Ambig };

inline const char* show(Verdict v) {
  switch (v) {
    case Verdict::Proved: return "Proved";
    case Verdict::Refuted: return "Refuted";
    case Verdict::Ambig: return "Ambig";
  }
  return "?";
}

using Model = std::map<LocId, Int>;

struct Sat {
  Model model;
};
struct Unsat {};
struct Unknown {};
using SolveResult = std::variant<Sat, Unsat, Unknown>;

class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& msg) : std::runtime_error("solver failure: " + msg) {}
};

class SolverBackend {
 public:
  virtual ~SolverBackend() = default;
  virtual SolveResult solve(const FormulaPtr& f, const std::vector<LocId>& vars) = 0;
  virtual const char* name() const = 0;
};

// Bounded search over integer assignments. Conjuncts of the form x = t
// with x not occurring in t act as derivations: once t's variables are
// known, x is computed exactly (its value may exceed the bound). The
// remaining free variables are searched over 0, 1, -1, 2, -2, ... up to
// |value| <= bound, so unconstrained variables settle at 0. Conjuncts are
// checked as soon as their variables are available. A completed search
// with no hit is unsat at this bound; an aborted one (evaluation budget)
// is unknown.
class BuiltinSolver final : public SolverBackend {
 public:
  explicit BuiltinSolver(Int bound = 256, long long eval_budget = 20'000'000)
      : bound_(bound), budget_(eval_budget) {}

  const char* name() const override { return "builtin"; }

  SolveResult solve(const FormulaPtr& f, const std::vector<LocId>& extra_vars) override {
    std::set<LocId> var_set(extra_vars.begin(), extra_vars.end());
    formula_vars(f, var_set);

    std::vector<FormulaPtr> conjuncts;
    if (f->kind == Formula::Kind::And)
      conjuncts = f->conj;
    else if (f->kind != Formula::Kind::True)
      conjuncts.push_back(f);

    // pick at most one defining equation per variable, acyclically
    struct Def {
      LocId var;
      TermPtr term;
    };
    std::vector<Def> defs;
    std::set<LocId> defined;
    std::vector<FormulaPtr> checks;
    for (const auto& c : conjuncts) {
      if (c->kind == Formula::Kind::Eq) {
        auto try_def = [&](const TermPtr& lhs, const TermPtr& rhs) {
          if (lhs->kind != Term::Kind::Var || defined.count(lhs->var)) return false;
          std::set<LocId> tv;
          term_vars(rhs, tv);
          if (tv.count(lhs->var)) return false;
          for (LocId v : tv)
            if (defined.count(v)) return false;  // keep the dependency order simple: defs read search vars only
          defs.push_back({lhs->var, rhs});
          defined.insert(lhs->var);
          return true;
        };
        if (try_def(c->a, c->b) || try_def(c->b, c->a)) continue;
      }
      checks.push_back(c);
    }

    std::vector<LocId> search_vars;
    for (LocId v : var_set)
      if (!defined.count(v)) search_vars.push_back(v);

    // a derivation or check is due once the search variables it reads are set
    auto last_search_var = [&](const std::set<LocId>& used) {
      size_t last = 0;
      for (size_t i = 0; i < search_vars.size(); ++i)
        if (used.count(search_vars[i])) last = i + 1;
      return last;
    };
    std::vector<std::vector<size_t>> defs_due(search_vars.size() + 1);
    for (size_t d = 0; d < defs.size(); ++d) {
      std::set<LocId> used;
      term_vars(defs[d].term, used);
      defs_due[last_search_var(used)].push_back(d);
    }
    std::vector<std::vector<size_t>> checks_due(search_vars.size() + 1);
    for (size_t c = 0; c < checks.size(); ++c) {
      std::set<LocId> used;
      formula_vars(checks[c], used);
      for (LocId v : used)
        if (defined.count(v)) {
          // a check reading a defined variable is due when that definition is
          for (const auto& d : defs) {
            if (d.var != v) continue;
            std::set<LocId> dv;
            term_vars(d.term, dv);
            used.insert(dv.begin(), dv.end());
          }
        }
      checks_due[last_search_var(used)].push_back(c);
    }

    long long evals = 0;
    Model m;
    bool aborted = false;

    auto settle = [&](size_t depth) -> bool {
      for (size_t d : defs_due[depth]) {
        ++evals;
        auto v = eval_term(defs[d].term, m);
        if (!v) return false;
        m[defs[d].var] = *v;
      }
      for (size_t c : checks_due[depth]) {
        ++evals;
        auto v = eval_formula(checks[c], m);
        if (!v || !*v) return false;
      }
      return true;
    };

    std::function<bool(size_t)> go = [&](size_t depth) -> bool {
      if (evals > budget_) {
        aborted = true;
        return false;
      }
      if (depth == search_vars.size()) return true;
      for (Int k = 0; k <= bound_; ++k) {
        for (int sign = 0; sign < (k == 0 ? 1 : 2); ++sign) {
          Int v = sign == 0 ? k : -k;
          m[search_vars[depth]] = v;
          if (settle(depth + 1) && go(depth + 1)) return true;
          if (aborted) return false;
        }
      }
      m.erase(search_vars[depth]);
      return false;
    };

    if (!settle(0)) return Unsat{};
    if (go(0)) return Sat{std::move(m)};
    if (aborted) return Unknown{};
    return Unsat{};
  }

 private:
  Int bound_;
  long long budget_;
};

// ---------------------------------------------------------------------------
// External SMT-LIB2 process backend. Each query spawns a fresh process and
// sends a self-contained script; no incremental state is kept.

inline std::string term_to_smt(const TermPtr& t) {
  switch (t->kind) {
    case Term::Kind::Const:
      if (t->value < 0) return "(- " + std::to_string(-t->value) + ")";
      return std::to_string(t->value);
    case Term::Kind::Var: return show(t->var);
    case Term::Kind::Bin:
      return "(" + std::string(t->op == Op::Div ? "div" : op_name(t->op)) + " " + term_to_smt(t->lhs) + " " +
             term_to_smt(t->rhs) + ")";
  }
  return "0";
}

inline std::string formula_to_smt(const FormulaPtr& f) {
  switch (f->kind) {
    case Formula::Kind::True: return "true";
    case Formula::Kind::False: return "false";
    case Formula::Kind::Eq: return "(= " + term_to_smt(f->a) + " " + term_to_smt(f->b) + ")";
    case Formula::Kind::Not: return "(not " + formula_to_smt(f->f) + ")";
    case Formula::Kind::Implies: return "(=> " + formula_to_smt(f->f) + " " + formula_to_smt(f->g) + ")";
    case Formula::Kind::And: {
      std::string s = "(and";
      for (const auto& g : f->conj) s += " " + formula_to_smt(g);
      return s + ")";
    }
  }
  return "true";
}

inline std::string to_smtlib(const FormulaPtr& f, const std::vector<LocId>& vars, const std::string& logic) {
  std::set<LocId> var_set(vars.begin(), vars.end());
  formula_vars(f, var_set);
  std::ostringstream out;
  out << "(set-logic " << logic << ")\n";
  for (LocId v : var_set) out << "(declare-const " << show(v) << " Int)\n";
  if (f->kind == Formula::Kind::And) {
    for (const auto& g : f->conj) out << "(assert " << formula_to_smt(g) << ")\n";
  } else {
    out << "(assert " << formula_to_smt(f) << ")\n";
  }
  out << "(check-sat)\n(get-model)\n";
  return out.str();
}

namespace detail {

inline std::string run_process(const std::string& command, const std::string& input) {
  char tmpl[] = "/tmp/spcf-query-XXXXXX";
  int fd = mkstemp(tmpl);
  if (fd < 0) throw SolverError("cannot create temp file for query");
  std::string path = tmpl;
  FILE* tf = fdopen(fd, "w");
  fwrite(input.data(), 1, input.size(), tf);
  fclose(tf);

  std::string cmd = command + " < " + path + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) {
    std::remove(path.c_str());
    throw SolverError("cannot spawn solver process: " + command);
  }
  std::string output;
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) output.append(buf, n);
  int rc = pclose(pipe);
  std::remove(path.c_str());
  if (rc == -1) throw SolverError("lost solver process: " + command);
  return output;
}

// Answer token and optional (define-fun Lk () Int v) model entries, where v
// may be a plain numeral or (- v).
inline SolveResult parse_smt_response(const std::string& text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char c : text) {
    if (c == '(' || c == ')') {
      if (!cur.empty()) tokens.push_back(cur), cur.clear();
      tokens.push_back(std::string(1, c));
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) tokens.push_back(cur), cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) tokens.push_back(cur);

  size_t answer_at = tokens.size();
  bool sat = false;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] == "sat" || tokens[i] == "unsat" || tokens[i] == "unknown") {
      answer_at = i;
      sat = tokens[i] == "sat";
      break;
    }
  }
  if (answer_at == tokens.size()) throw SolverError("no answer in solver output: " + text.substr(0, 200));
  if (tokens[answer_at] == "unsat") return Unsat{};
  if (tokens[answer_at] == "unknown") return Unknown{};

  Model m;
  for (size_t i = answer_at; i + 5 < tokens.size(); ++i) {
    if (tokens[i] != "define-fun") continue;
    const std::string& name = tokens[i + 1];
    if (name.size() < 2 || name[0] != 'L') continue;
    bool digits = true;
    for (size_t k = 1; k < name.size(); ++k)
      if (!std::isdigit(static_cast<unsigned char>(name[k]))) digits = false;
    if (!digits) continue;
    // name ( ) Int value...
    size_t j = i + 2;
    if (j + 2 >= tokens.size() || tokens[j] != "(" || tokens[j + 1] != ")") continue;
    j += 2;
    if (tokens[j] != "Int") continue;
    ++j;
    Int value = 0;
    if (tokens[j] == "(" && j + 2 < tokens.size() && tokens[j + 1] == "-") {
      value = -std::stoll(tokens[j + 2]);
    } else {
      try {
        value = std::stoll(tokens[j]);
      } catch (...) {
        continue;
      }
    }
    m[LocId{std::stoi(name.substr(1))}] = value;
  }
  if (sat) return Sat{std::move(m)};
  return Unknown{};
}

}  // namespace detail

class SmtProcessSolver final : public SolverBackend {
 public:
  explicit SmtProcessSolver(std::string command) : command_(std::move(command)) {}

  const char* name() const override { return "smt-process"; }

  SolveResult solve(const FormulaPtr& f, const std::vector<LocId>& vars) override {
    std::string out = detail::run_process(command_, to_smtlib(f, vars, "QF_NIA"));
    if (rejects_logic(out)) out = detail::run_process(command_, to_smtlib(f, vars, "ALL"));
    return detail::parse_smt_response(out);
  }

 private:
  static bool rejects_logic(const std::string& out) {
    auto err = out.find("error");
    if (err == std::string::npos) return false;
    // only treat as a logic rejection when no answer token precedes the error
    auto answer = out.find("sat");
    return answer == std::string::npos || answer > err;
  }

  std::string command_;
};

// ---------------------------------------------------------------------------
// The proof relation: does the value at a location satisfy a predicate,
// for every instantiation permitted by the heap?

class Prover {
 public:
  explicit Prover(std::unique_ptr<SolverBackend> backend) : backend_(std::move(backend)) {}
  Prover() : Prover(std::make_unique<BuiltinSolver>()) {}

  const char* backend_name() const { return backend_->name(); }
  long queries() const { return queries_; }
  long contradictions() const { return contradictions_; }

  SolveResult solve(const FormulaPtr& f, const std::vector<LocId>& vars) {
    ++queries_;
    return backend_->solve(f, vars);
  }

  SolveResult solve_heap(const Heap& h) { return solve(translate_heap(h), base_locations(h)); }

  Verdict prove(const Heap& h, LocId l, const Predicate& p) {
    FormulaPtr phi = translate_heap(h);
    FormulaPtr psi = translate_pred(l, p);
    std::vector<LocId> vars = base_locations(h);
    SolveResult validity = solve(f_and({phi, f_not(psi)}), vars);   // counterexample to phi => psi
    SolveResult together = solve(f_and({phi, psi}), vars);
    bool proved = std::holds_alternative<Unsat>(validity);
    bool refuted = std::holds_alternative<Unsat>(together);
    if (proved && refuted) ++contradictions_;  // possible only for unsatisfiable heaps
    if (proved) return Verdict::Proved;
    if (refuted) return Verdict::Refuted;
    return Verdict::Ambig;
  }

 private:
  std::unique_ptr<SolverBackend> backend_;
  long queries_ = 0;
  long contradictions_ = 0;
};

}  // namespace spcf

#endif  // SPCF_LOGIC_HPP
