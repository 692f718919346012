#ifndef SPCF_TESTS_SUPPORT_HPP
#define SPCF_TESTS_SUPPORT_HPP

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "spcf/cex.hpp"
#include "spcf/delta.hpp"
#include "spcf/heap.hpp"
#include "spcf/logic.hpp"
#include "spcf/machine.hpp"
#include "spcf/oracle.hpp"
#include "spcf/syntax.hpp"

namespace spcf_tests {

// The running example: an unknown context applied to a function whose body
// divides by an expression the context controls.
inline const char* kWorkedExample =
    "((• (((int -> int) -> (int -> int)) -> int))"
    " (λ (g : (int -> int)) (λ (n : int) (div 1 (- 100 (g n))))))";

inline spcf::Program parse_ok(const std::string& src) {
  spcf::Program p = spcf::parse(src);
  spcf::typecheck(p);
  return p;
}

struct RunResult {
  spcf::Program program;
  spcf::SearchReport report;
};

inline RunResult run_src(const std::string& src, spcf::Prover& prover, long max_steps = 20000,
                         long max_states = 20000) {
  RunResult r{parse_ok(src), {}};
  spcf::Budget budget{max_steps, max_states, std::chrono::milliseconds(60000)};
  r.report = spcf::run(r.program, budget, prover);
  return r;
}

inline std::vector<const spcf::BlameOutcome*> blames(const spcf::SearchReport& report) {
  std::vector<const spcf::BlameOutcome*> out;
  for (const auto& o : report.outcomes)
    if (const auto* b = std::get_if<spcf::BlameOutcome>(&o)) out.push_back(b);
  return out;
}

inline std::vector<const spcf::AnswerOutcome*> answers(const spcf::SearchReport& report) {
  std::vector<const spcf::AnswerOutcome*> out;
  for (const auto& o : report.outcomes)
    if (const auto* a = std::get_if<spcf::AnswerOutcome>(&o)) out.push_back(a);
  return out;
}

inline bool search_exhausted(const spcf::SearchReport& report) {
  for (const auto& o : report.outcomes)
    if (std::holds_alternative<spcf::ExhaustedOutcome>(o)) return true;
  return false;
}

inline bool expr_eq(const spcf::Expr& a, const spcf::Expr& b) {
  using namespace spcf;
  if (a.get() == b.get()) return true;
  if (const auto* v = as<VarE>(a)) {
    const auto* w = as<VarE>(b);
    return w && v->name == w->name;
  }
  if (const auto* n = as<LitE>(a)) {
    const auto* m = as<LitE>(b);
    return m && n->value == m->value;
  }
  if (const auto* o = as<OpqE>(a)) {
    const auto* q = as<OpqE>(b);
    return q && o->label == q->label && type_eq(o->type, q->type);
  }
  if (const auto* l = as<LamE>(a)) {
    const auto* k = as<LamE>(b);
    return k && l->param == k->param && type_eq(l->param_type, k->param_type) && expr_eq(l->body, k->body);
  }
  if (const auto* x = as<AppE>(a)) {
    const auto* y = as<AppE>(b);
    return y && expr_eq(x->fn, y->fn) && expr_eq(x->arg, y->arg);
  }
  if (const auto* i = as<IfE>(a)) {
    const auto* j = as<IfE>(b);
    return j && expr_eq(i->cond, j->cond) && expr_eq(i->then_branch, j->then_branch) &&
           expr_eq(i->else_branch, j->else_branch);
  }
  if (const auto* p = as<PrimE>(a)) {
    const auto* q = as<PrimE>(b);
    if (!q || p->op != q->op || p->site != q->site || p->args.size() != q->args.size()) return false;
    for (size_t k = 0; k < p->args.size(); ++k)
      if (!expr_eq(p->args[k], q->args[k])) return false;
    return true;
  }
  if (const auto* l = as<LocE>(a)) {
    const auto* k = as<LocE>(b);
    return k && l->loc == k->loc;
  }
  if (const auto* e = as<ErrE>(a)) {
    const auto* f = as<ErrE>(b);
    return f && e->blame == f->blame && e->op == f->op;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Independent formula evaluation for coverage/exclusivity checks. Deliberately
// re-implemented rather than shared with the engine.

inline std::optional<long long> eval_arith_ref(const spcf::TermPtr& t, const std::map<spcf::LocId, long long>& m) {
  using namespace spcf;
  switch (t->kind) {
    case Term::Kind::Const: return t->value;
    case Term::Kind::Var: {
      auto it = m.find(t->var);
      if (it == m.end()) return std::nullopt;
      return it->second;
    }
    case Term::Kind::Bin: {
      auto a = eval_arith_ref(t->lhs, m);
      auto b = eval_arith_ref(t->rhs, m);
      if (!a || !b) return std::nullopt;
      switch (t->op) {
        case Op::Add: return *a + *b;
        case Op::Sub: return *a - *b;
        case Op::Mul: return *a * *b;
        case Op::Div: {
          if (*b == 0) return std::nullopt;
          long long q = *a / *b, r = *a % *b;
          if (r < 0) q += (*b > 0 ? -1 : 1);
          return q;
        }
        default: return std::nullopt;
      }
    }
  }
  return std::nullopt;
}

inline bool eval_formula_ref(const spcf::FormulaPtr& f, const std::map<spcf::LocId, long long>& m) {
  using namespace spcf;
  switch (f->kind) {
    case Formula::Kind::True: return true;
    case Formula::Kind::False: return false;
    case Formula::Kind::Eq: {
      auto a = eval_arith_ref(f->a, m);
      auto b = eval_arith_ref(f->b, m);
      return a && b && *a == *b;
    }
    case Formula::Kind::Not: return !eval_formula_ref(f->f, m);
    case Formula::Kind::Implies: return !eval_formula_ref(f->f, m) || eval_formula_ref(f->g, m);
    case Formula::Kind::And: {
      for (const auto& g : f->conj)
        if (!eval_formula_ref(g, m)) return false;
      return true;
    }
  }
  return false;
}

// ---------------------------------------------------------------------------
// Deterministic random programs. Generated at the source level so labels
// come out of the ordinary parsing path. All generated expressions have
// type int; lambdas appear immediately applied, and opaques appear either
// as base values, as int->int functions applied to an integer expression,
// or as (int->int)->int contexts applied to a lambda.

class ProgramGen {
 public:
  explicit ProgramGen(unsigned seed, bool with_opaques) : rng_(seed), opq_(with_opaques) {}

  std::string gen(int depth) { return expr(depth, 0); }

 private:
  unsigned pick(unsigned n) { return static_cast<unsigned>(rng_()) % n; }

  std::string num() {
    static const char* small[] = {"0", "1", "2", "3", "5", "7", "100", "-1", "-3"};
    return small[pick(sizeof(small) / sizeof(small[0]))];
  }

  std::string var(int scope) {
    if (scope == 0) return num();
    return "x" + std::to_string(pick(static_cast<unsigned>(scope)));
  }

  std::string expr(int depth, int scope) {
    if (depth <= 0) return pick(3) == 0 ? var(scope) : num();
    switch (pick(opq_ ? 12u : 9u)) {
      case 0: return num();
      case 1: return var(scope);
      case 2: return "(add1 " + expr(depth - 1, scope) + ")";
      case 3: return "(sub1 " + expr(depth - 1, scope) + ")";
      case 4: {
        static const char* ops[] = {"+", "-", "*", "="};
        return "(" + std::string(ops[pick(4)]) + " " + expr(depth - 1, scope) + " " + expr(depth - 1, scope) + ")";
      }
      case 5: return "(div " + expr(depth - 1, scope) + " " + expr(depth - 1, scope) + ")";
      case 6:
        return "(if " + expr(depth - 1, scope) + " " + expr(depth - 1, scope) + " " + expr(depth - 1, scope) + ")";
      case 7: return "(zero? " + expr(depth - 1, scope) + ")";
      case 8: {
        std::string v = "x" + std::to_string(scope);
        return "((λ (" + v + " : int) " + expr(depth - 1, scope + 1) + ") " + expr(depth - 1, scope) + ")";
      }
      case 9: return "(• int)";
      case 10: return "((• (int -> int)) " + expr(depth - 1, scope) + ")";
      default: {
        std::string v = "x" + std::to_string(scope);
        return "((• ((int -> int) -> int)) (λ (" + v + " : int) " + expr(depth - 1, scope + 1) + "))";
      }
    }
  }

  std::mt19937 rng_;
  bool opq_;
};

}  // namespace spcf_tests

#endif  // SPCF_TESTS_SUPPORT_HPP
