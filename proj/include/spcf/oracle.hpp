#ifndef SPCF_ORACLE_HPP
#define SPCF_ORACLE_HPP

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "spcf/machine.hpp"
#include "spcf/syntax.hpp"

// Trusted baselines used for validation and differential testing:
//
//  * concrete_eval — a direct big-step interpreter for opaque-free
//    programs, written independently of the reduction machinery it is
//    compared against;
//  * TermStream — bounded enumeration of closed terms of a type, shaped
//    after the few function forms symbolic application distinguishes;
//  * check_instantiation — a bounded, backtracking checker for whether a
//    concrete state instantiates an abstract one under some location
//    correspondence F. "No witness" means not shown within budget, never
//    a refutation.

namespace spcf {

// ---------------------------------------------------------------------------
// Concrete evaluation

struct ConcreteResult {
  enum class Kind { IntValue, Closure, Error, Diverged } kind;
  Int value = 0;  // IntValue only
  Label blame{};  // Error only
  Op op = Op::Div;
};

namespace oracle_detail {

struct CValue;
using CValuePtr = std::shared_ptr<const CValue>;

struct CEnv {
  std::string name;
  CValuePtr value;
  std::shared_ptr<const CEnv> next;
};
using CEnvPtr = std::shared_ptr<const CEnv>;

struct Closure {
  std::string param;
  Expr body;
  CEnvPtr env;
};

struct CValue {
  std::variant<Int, Closure> v;
};

inline CValuePtr c_int(Int n) { return std::make_shared<CValue>(CValue{n}); }
inline CValuePtr c_closure(Closure c) { return std::make_shared<CValue>(CValue{std::move(c)}); }

inline CValuePtr lookup(const CEnvPtr& env, const std::string& name) {
  for (const CEnv* e = env.get(); e; e = e->next.get())
    if (e->name == name) return e->value;
  throw std::logic_error("unbound variable in concrete evaluation: " + name);
}

struct BlameSignal {
  Label label;
  Op op;
};
struct FuelSignal {};

inline Int expect_int(const CValuePtr& v) {
  const Int* n = std::get_if<Int>(&v->v);
  if (!n) throw std::logic_error("expected integer value");
  return *n;
}

inline Int div_euclid(Int a, Int b) {
  Int q = a / b, r = a % b;
  if (r < 0) q += (b > 0 ? -1 : 1);
  return q;
}

inline CValuePtr eval(const Expr& e, const CEnvPtr& env, long& fuel) {
  if (--fuel < 0) throw FuelSignal{};
  if (const auto* v = as<VarE>(e)) return lookup(env, v->name);
  if (const auto* n = as<LitE>(e)) return c_int(n->value);
  if (const auto* lam = as<LamE>(e)) return c_closure(Closure{lam->param, lam->body, env});
  if (const auto* a = as<AppE>(e)) {
    CValuePtr fn = eval(a->fn, env, fuel);
    CValuePtr arg = eval(a->arg, env, fuel);
    const auto* clo = std::get_if<Closure>(&fn->v);
    if (!clo) throw std::logic_error("applied non-closure");
    CEnvPtr extended = std::make_shared<CEnv>(CEnv{clo->param, arg, clo->env});
    return eval(clo->body, extended, fuel);
  }
  if (const auto* i = as<IfE>(e)) {
    Int c = expect_int(eval(i->cond, env, fuel));
    return eval(c != 0 ? i->then_branch : i->else_branch, env, fuel);
  }
  if (const auto* p = as<PrimE>(e)) {
    std::vector<Int> args;
    for (const auto& arg : p->args) args.push_back(expect_int(eval(arg, env, fuel)));
    switch (p->op) {
      case Op::IsZero: return c_int(args[0] == 0 ? 1 : 0);
      case Op::Add1: return c_int(args[0] + 1);
      case Op::Sub1: return c_int(args[0] - 1);
      case Op::Add: return c_int(args[0] + args[1]);
      case Op::Sub: return c_int(args[0] - args[1]);
      case Op::Mul: return c_int(args[0] * args[1]);
      case Op::Eq: return c_int(args[0] == args[1] ? 1 : 0);
      case Op::Div:
        if (args[1] == 0) throw BlameSignal{p->site, Op::Div};
        return c_int(div_euclid(args[0], args[1]));
    }
  }
  throw std::logic_error("internal form in concrete evaluation: " + show(e));
}

}  // namespace oracle_detail

inline ConcreteResult concrete_eval(const Expr& e, long budget) {
  long fuel = budget;
  try {
    auto v = oracle_detail::eval(e, nullptr, fuel);
    if (const Int* n = std::get_if<Int>(&v->v)) return {ConcreteResult::Kind::IntValue, *n, {}, Op::Div};
    return {ConcreteResult::Kind::Closure, 0, {}, Op::Div};
  } catch (const oracle_detail::BlameSignal& b) {
    return {ConcreteResult::Kind::Error, 0, b.label, b.op};
  } catch (const oracle_detail::FuelSignal&) {
    return {ConcreteResult::Kind::Diverged, 0, {}, Op::Div};
  }
}

// ---------------------------------------------------------------------------
// Bounded enumeration of closed terms of a type. Base values range over
// 0, 1, -1, ..., ±bound. Base-domain functions are constants plus finite
// case tables over a small support set; higher-order-domain functions are
// constants plus single-probe shapes λf. K (f V). Labels on generated
// primitive sites are negative and so never collide with source labels.

class TermStream {
 public:
  TermStream(const TypePtr& type, int bound) {
    int next_label = -1;
    build(type, bound, 0, next_label, terms_);
  }

  std::optional<Expr> next() {
    if (pos_ >= terms_.size()) return std::nullopt;
    return terms_[pos_++];
  }
  void reset() { pos_ = 0; }
  const std::vector<Expr>& all() const { return terms_; }

 private:
  // caps keeping nested enumeration tractable
  static constexpr size_t kSupportPoolPair = 5;  // support points/outputs in two-point tables
  static constexpr size_t kProbeFns = 24;        // K candidates in probe shapes
  static constexpr size_t kProbeArgs = 9;        // V candidates in probe shapes
  static constexpr size_t kMaxTerms = 4000;

  static void base_values(int bound, std::vector<Int>& out) {
    out.push_back(0);
    for (Int k = 1; k <= bound; ++k) {
      out.push_back(k);
      out.push_back(-k);
    }
  }

  static void build(const TypePtr& t, int bound, int depth, int& next_label, std::vector<Expr>& out) {
    if (t->is_base()) {
      std::vector<Int> vals;
      base_values(bound, vals);
      for (Int v : vals) out.push_back(mk_lit(v));
      return;
    }

    std::vector<Expr> cod_terms;
    build(t->codomain(), bound, depth + 1, next_label, cod_terms);

    const std::string param = "x" + std::to_string(depth);
    if (t->domain()->is_base()) {
      for (const auto& c : cod_terms) {
        out.push_back(mk_lam(param, t->domain(), c));
        if (out.size() >= kMaxTerms) return;
      }
      std::vector<Int> points;
      base_values(bound, points);
      Expr dflt = cod_terms.front();
      auto guard = [&](Int point, Expr then_e, Expr else_e) {
        return mk_if(mk_prim(Op::Eq, {mk_var(param), mk_lit(point)}, Label{next_label--}), std::move(then_e),
                     std::move(else_e));
      };
      for (Int a : points) {
        for (const auto& v : cod_terms) {
          out.push_back(mk_lam(param, t->domain(), guard(a, v, dflt)));
          if (out.size() >= kMaxTerms) return;
        }
      }
      size_t pool = std::min(points.size(), kSupportPoolPair);
      size_t cod_pool = std::min(cod_terms.size(), kSupportPoolPair);
      for (size_t i = 0; i < pool; ++i)
        for (size_t j = i + 1; j < pool; ++j)
          for (size_t vi = 0; vi < cod_pool; ++vi)
            for (size_t vj = 0; vj < cod_pool; ++vj) {
              out.push_back(mk_lam(param, t->domain(),
                                   guard(points[i], cod_terms[vi], guard(points[j], cod_terms[vj], dflt))));
              if (out.size() >= kMaxTerms) return;
            }
      return;
    }

    for (const auto& c : cod_terms) {
      out.push_back(mk_lam(param, t->domain(), c));
      if (out.size() >= kMaxTerms) return;
    }
    // probe shapes: λf. K (f V)
    std::vector<Expr> k_terms;
    build(Type::arrow(t->domain()->codomain(), t->codomain()), bound, depth + 1, next_label, k_terms);
    std::vector<Expr> v_terms;
    build(t->domain()->domain(), bound, depth + 1, next_label, v_terms);
    size_t kn = std::min(k_terms.size(), kProbeFns);
    size_t vn = std::min(v_terms.size(), kProbeArgs);
    for (size_t ki = 0; ki < kn; ++ki)
      for (size_t vi = 0; vi < vn; ++vi) {
        out.push_back(mk_lam(param, t->domain(), mk_app(k_terms[ki], mk_app(mk_var(param), v_terms[vi]))));
        if (out.size() >= kMaxTerms) return;
      }
  }

  std::vector<Expr> terms_;
  size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Approximation checking: does `concrete` instantiate `abstract` under some
// correspondence F from abstract to concrete locations? The checker first
// unifies locations forced by the expressions, then verifies every mapped
// pair's storeables to a fixpoint (case tables re-run the concrete function
// on the mapped input, which may map further locations), and finally
// searches over candidates for any abstract location still unmapped.

struct InstantiationWitness {
  std::map<LocId, LocId> F;
};

namespace oracle_detail {

struct OutOfBudget {};

struct InstCtx {
  Heap cheap;  // concrete heap; grows when case-table premises are re-run
  const Heap& aheap;
  const std::set<Label>& known;
  long budget;
  Prover prover;  // never consulted on concrete steps

  void spend(long n = 1) {
    budget -= n;
    if (budget < 0) throw OutOfBudget{};
  }
};

using Fmap = std::map<LocId, LocId>;

inline bool labels_clear(InstCtx& ctx, const Expr& e) {
  auto labs = compute_labels(ctx.cheap, e);
  for (Label l : labs)
    if (ctx.known.count(l)) return false;
  return true;
}

inline bool unify(Fmap& F, LocId la, LocId lc) {
  auto it = F.find(la);
  if (it != F.end()) return it->second == lc;
  F.emplace(la, lc);
  return true;
}

// Structural congruence between a concrete and an abstract expression,
// recording the location correspondences it forces; storeables are
// verified afterwards. An opaque on the abstract side matches any concrete
// term free of known-portion sites; a concrete error blaming an unknown
// site matches anything.
inline bool rel_expr(InstCtx& ctx, const Expr& ce, const Expr& ae, Fmap& F) {
  ctx.spend();
  if (const auto* cerr = as<ErrE>(ce)) {
    if (!ctx.known.count(cerr->blame)) return true;
    const auto* aerr = as<ErrE>(ae);
    return aerr && aerr->blame == cerr->blame && aerr->op == cerr->op;
  }
  if (as<OpqE>(ae)) return labels_clear(ctx, ce);
  if (const auto* aloc = as<LocE>(ae)) {
    const auto* cloc = as<LocE>(ce);
    return cloc && unify(F, aloc->loc, cloc->loc);
  }
  if (const auto* av = as<VarE>(ae)) {
    const auto* cv = as<VarE>(ce);
    return cv && cv->name == av->name;
  }
  if (const auto* an = as<LitE>(ae)) {
    const auto* cn = as<LitE>(ce);
    return cn && cn->value == an->value;
  }
  if (const auto* al = as<LamE>(ae)) {
    const auto* cl = as<LamE>(ce);
    return cl && cl->param == al->param && rel_expr(ctx, cl->body, al->body, F);
  }
  if (const auto* aa = as<AppE>(ae)) {
    const auto* ca = as<AppE>(ce);
    return ca && rel_expr(ctx, ca->fn, aa->fn, F) && rel_expr(ctx, ca->arg, aa->arg, F);
  }
  if (const auto* ai = as<IfE>(ae)) {
    const auto* ci = as<IfE>(ce);
    return ci && rel_expr(ctx, ci->cond, ai->cond, F) && rel_expr(ctx, ci->then_branch, ai->then_branch, F) &&
           rel_expr(ctx, ci->else_branch, ai->else_branch, F);
  }
  if (const auto* ap = as<PrimE>(ae)) {
    const auto* cp = as<PrimE>(ce);
    if (!cp || cp->op != ap->op || cp->site != ap->site || cp->args.size() != ap->args.size()) return false;
    for (size_t i = 0; i < ap->args.size(); ++i)
      if (!rel_expr(ctx, cp->args[i], ap->args[i], F)) return false;
    return true;
  }
  return false;
}

inline std::optional<Int> eval_arith_concrete(InstCtx& ctx, const ArithPtr& a, const Fmap& F) {
  switch (a->kind) {
    case Arith::Kind::Const: return a->value;
    case Arith::Kind::Loc: {
      auto it = F.find(a->loc);
      if (it == F.end()) return std::nullopt;
      const auto* n = std::get_if<IntS>(&ctx.cheap.at(it->second));
      if (!n) return std::nullopt;
      return n->value;
    }
    case Arith::Kind::Bin: {
      auto x = eval_arith_concrete(ctx, a->lhs, F);
      auto y = eval_arith_concrete(ctx, a->rhs, F);
      if (!x || !y) return std::nullopt;
      return eval_op(a->op, *x, *y);
    }
  }
  return std::nullopt;
}

inline bool pred_holds_concrete(InstCtx& ctx, const Predicate& p, Int n, const Fmap& F) {
  switch (p.kind) {
    case Predicate::Kind::IsZero: return n == 0;
    case Predicate::Kind::Not: return !pred_holds_concrete(ctx, *p.inner, n, F);
    case Predicate::Kind::EqRhs: {
      auto v = eval_arith_concrete(ctx, p.rhs, F);
      return v && *v == n;
    }
  }
  return false;
}

// Run a concrete state to an answer, extending the context's concrete heap.
inline std::optional<Expr> run_concrete(InstCtx& ctx, Expr e) {
  State s{std::move(e), ctx.cheap, 0};
  while (!is_answer(s.expr)) {
    ctx.spend();
    auto succs = step(s, ctx.prover);
    if (succs.size() != 1) return std::nullopt;  // not a concrete state
    s = std::move(succs[0].state);
  }
  ctx.cheap = s.heap;
  return s.expr;
}

enum class VerifyOne { Ok, Fail, NeedInput };

inline VerifyOne verify_storeable(InstCtx& ctx, LocId lc, LocId la, Fmap& F) {
  ctx.spend();
  if (!ctx.aheap.contains(la) || !ctx.cheap.contains(lc)) return VerifyOne::Fail;
  const Storeable& sa = ctx.aheap.at(la);

  if (const auto* ai = std::get_if<IntS>(&sa)) {
    const auto* ci = std::get_if<IntS>(&ctx.cheap.at(lc));
    return ci && ci->value == ai->value ? VerifyOne::Ok : VerifyOne::Fail;
  }
  if (const auto* alam = std::get_if<LamS>(&sa)) {
    const auto* clam = std::get_if<LamS>(&ctx.cheap.at(lc));
    if (!clam) return VerifyOne::Fail;
    return clam->param == alam->param && rel_expr(ctx, clam->body, alam->body, F) ? VerifyOne::Ok
                                                                                  : VerifyOne::Fail;
  }
  if (const auto* aopq = std::get_if<OpaqueS>(&sa)) {
    const Storeable& sc = ctx.cheap.at(lc);
    if (const auto* clam = std::get_if<LamS>(&sc)) {
      if (!labels_clear(ctx, mk_lam(clam->param, clam->param_type, clam->body))) return VerifyOne::Fail;
    }
    if (aopq->type->is_base()) {
      const auto* ci = std::get_if<IntS>(&sc);
      if (!ci) return VerifyOne::Fail;
      for (const auto& p : aopq->preds) {
        std::vector<LocId> needed;
        const Predicate* q = &p;
        while (q->kind == Predicate::Kind::Not) q = q->inner.get();
        if (q->kind == Predicate::Kind::EqRhs) arith_locs(q->rhs, needed);
        for (LocId n : needed)
          if (!F.count(n)) return VerifyOne::NeedInput;
        if (!pred_holds_concrete(ctx, p, ci->value, F)) return VerifyOne::Fail;
      }
      return VerifyOne::Ok;
    }
    return std::holds_alternative<IntS>(sc) ? VerifyOne::Fail : VerifyOne::Ok;
  }

  const auto* acase = std::get_if<CaseS>(&sa);
  const auto* clam = std::get_if<LamS>(&ctx.cheap.at(lc));
  if (!acase || !clam) return VerifyOne::Fail;
  if (!labels_clear(ctx, mk_lam(clam->param, clam->param_type, clam->body))) return VerifyOne::Fail;
  for (const auto& entry : acase->entries)
    if (!F.count(entry.input)) return VerifyOne::NeedInput;
  std::string param = clam->param;
  Expr body = clam->body;
  for (const auto& entry : acase->entries) {
    auto result = run_concrete(ctx, subst(body, param, F.at(entry.input)));
    if (!result) return VerifyOne::Fail;
    const auto* rloc = as<LocE>(*result);
    if (!rloc) return VerifyOne::Fail;  // premise requires a value
    if (!unify(F, entry.output, rloc->loc)) return VerifyOne::Fail;
  }
  return VerifyOne::Ok;
}

// Verify all mapped pairs to a fixpoint, then search candidates for any
// abstract location still unmapped. Returns the completed correspondence.
inline std::optional<Fmap> solve(InstCtx& ctx, Fmap F, std::set<std::pair<int, int>> verified) {
  bool pending = true;
  while (pending) {
    pending = false;
    bool progress = false;
    Fmap snapshot = F;
    for (const auto& [la, lc] : snapshot) {
      if (verified.count({la.id, lc.id})) continue;
      switch (verify_storeable(ctx, lc, la, F)) {
        case VerifyOne::Ok:
          verified.insert({la.id, lc.id});
          progress = true;
          break;
        case VerifyOne::Fail: return std::nullopt;
        case VerifyOne::NeedInput: pending = true; break;
      }
    }
    if (F.size() != snapshot.size()) pending = true;  // new pairs appeared
    if (pending && !progress) break;                  // blocked on unmapped locations
  }

  for (const auto& [la, sa] : ctx.aheap.entries) {
    if (F.count(la)) continue;
    Heap saved_heap = ctx.cheap;
    for (const auto& [lc, sc] : saved_heap.entries) {
      ctx.spend();
      Fmap attempt = F;
      if (!unify(attempt, la, lc)) continue;
      if (auto done = solve(ctx, std::move(attempt), verified)) return done;
      ctx.cheap = saved_heap;
    }
    return std::nullopt;
  }

  // everything mapped; confirm nothing is left unverified
  for (const auto& [la, lc] : F)
    if (!verified.count({la.id, lc.id}) && verify_storeable(ctx, lc, la, F) != VerifyOne::Ok)
      return std::nullopt;
  return F;
}

}  // namespace oracle_detail

inline std::optional<InstantiationWitness> check_instantiation(const State& concrete, const State& abstract,
                                                               const std::set<Label>& known_labels, long budget) {
  oracle_detail::InstCtx ctx{concrete.heap, abstract.heap, known_labels, budget, Prover{}};
  oracle_detail::Fmap F;
  try {
    // a concrete error blaming an unknown site instantiates any state;
    // a known-site error must match exactly, with no heap obligation
    if (const auto* cerr = as<ErrE>(concrete.expr)) {
      if (!known_labels.count(cerr->blame)) return InstantiationWitness{};
      const auto* aerr = as<ErrE>(abstract.expr);
      if (aerr && aerr->blame == cerr->blame && aerr->op == cerr->op) return InstantiationWitness{};
      return std::nullopt;
    }
    if (!oracle_detail::rel_expr(ctx, concrete.expr, abstract.expr, F)) return std::nullopt;
    auto solved = oracle_detail::solve(ctx, std::move(F), {});
    if (!solved) return std::nullopt;
    return InstantiationWitness{std::move(*solved)};
  } catch (const oracle_detail::OutOfBudget&) {
    return std::nullopt;
  }
}

}  // namespace spcf

#endif  // SPCF_ORACLE_HPP
