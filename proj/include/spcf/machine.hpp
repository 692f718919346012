#ifndef SPCF_MACHINE_HPP
#define SPCF_MACHINE_HPP

#include <cassert>
#include <chrono>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <variant>
#include <vector>

#include "spcf/delta.hpp"
#include "spcf/heap.hpp"
#include "spcf/logic.hpp"
#include "spcf/syntax.hpp"

// Small-step reduction over expression/heap states and the breadth-first
// search across nondeterministic branches. Values reduce to heap locations;
// applying an opaque function refines its storeable into one of a few
// residue shapes (case mapping, constant function, delayed wrapper, havoc)
// so that by the time an error is reached the heap constrains only base
// values. Branch feasibility is decided inside the primitive interpretation,
// so every explored state carries a satisfiable path condition.

namespace spcf {

struct State {
  Expr expr;
  Heap heap;
  long steps = 0;  // transitions from the initial state
};

class StuckState : public std::logic_error {
 public:
  explicit StuckState(const Expr& e) : std::logic_error("stuck non-answer state: " + show(e)) {}
};

inline bool is_answer(const Expr& e) { return as<LocE>(e) || as<ErrE>(e); }

// ---------------------------------------------------------------------------
// Substitution of a location for a variable. Bodies only ever receive
// locations, never open terms, so capture cannot occur.

inline Expr subst(const Expr& e, const std::string& name, LocId l) {
  if (const auto* v = as<VarE>(e)) return v->name == name ? mk_loc(l) : e;
  if (as<LitE>(e) || as<OpqE>(e) || as<LocE>(e) || as<ErrE>(e)) return e;
  if (const auto* lam = as<LamE>(e)) {
    if (lam->param == name) return e;
    return mk_lam(lam->param, lam->param_type, subst(lam->body, name, l));
  }
  if (const auto* a = as<AppE>(e)) return mk_app(subst(a->fn, name, l), subst(a->arg, name, l));
  if (const auto* i = as<IfE>(e))
    return mk_if(subst(i->cond, name, l), subst(i->then_branch, name, l), subst(i->else_branch, name, l));
  const auto* p = as<PrimE>(e);
  std::vector<Expr> args;
  for (const auto& arg : p->args) args.push_back(subst(arg, name, l));
  return mk_prim(p->op, std::move(args), p->site);
}

// ---------------------------------------------------------------------------
// Evaluation-context decomposition: leftmost call-by-value, operator before
// operand, primitive arguments left to right. The redex is a value awaiting
// allocation, an if/application/primitive whose scrutinised positions are
// all locations, or an error inside a nonempty context.

struct Decomposition {
  Expr redex;
  std::function<Expr(const Expr&)> plug;
  bool at_top;  // plug is the identity
};

inline std::optional<Decomposition> decompose(const Expr& e) {
  using Plug = std::function<Expr(const Expr&)>;

  std::function<std::optional<Decomposition>(const Expr&, const Plug&, bool)> go =
      [&](const Expr& cur, const Plug& plug, bool top) -> std::optional<Decomposition> {
    if (as<LocE>(cur)) return std::nullopt;  // finished position
    if (as<ErrE>(cur)) {
      if (top) return std::nullopt;  // an answer, not a redex
      return Decomposition{cur, plug, false};
    }
    if (is_value(cur)) return Decomposition{cur, plug, top};
    if (const auto* i = as<IfE>(cur)) {
      if (!as<LocE>(i->cond)) {
        Expr t = i->then_branch, f = i->else_branch;
        return go(i->cond, [plug, t, f](const Expr& x) { return plug(mk_if(x, t, f)); }, false);
      }
      return Decomposition{cur, plug, top};
    }
    if (const auto* a = as<AppE>(cur)) {
      if (!as<LocE>(a->fn)) {
        Expr arg = a->arg;
        return go(a->fn, [plug, arg](const Expr& x) { return plug(mk_app(x, arg)); }, false);
      }
      if (!as<LocE>(a->arg)) {
        Expr fn = a->fn;
        return go(a->arg, [plug, fn](const Expr& x) { return plug(mk_app(fn, x)); }, false);
      }
      return Decomposition{cur, plug, top};
    }
    if (const auto* p = as<PrimE>(cur)) {
      for (size_t k = 0; k < p->args.size(); ++k) {
        if (!as<LocE>(p->args[k])) {
          Op op = p->op;
          Label site = p->site;
          std::vector<Expr> args = p->args;
          return go(p->args[k],
                    [plug, op, site, args, k](const Expr& x) {
                      std::vector<Expr> plugged = args;
                      plugged[k] = x;
                      return plug(mk_prim(op, std::move(plugged), site));
                    },
                    false);
        }
      }
      return Decomposition{cur, plug, top};
    }
    throw StuckState(cur);
  };

  return go(e, [](const Expr& x) { return x; }, true);
}

// ---------------------------------------------------------------------------
// One reduction step: all successors permitted by the semantics.

struct Successor {
  State state;
  const char* rule;
};

inline std::vector<Successor> step(const State& s, Prover& prover) {
  assert(!is_answer(s.expr));
  auto d = decompose(s.expr);
  if (!d) return {};
  const Expr& r = d->redex;
  const auto& plug = d->plug;
  long n = s.steps + 1;
  std::vector<Successor> out;

  if (as<ErrE>(r)) {
    out.push_back({State{r, s.heap, n}, "Error"});
    return out;
  }
  if (const auto* o = as<OpqE>(r)) {
    auto [h, l] = alloc_opq(s.heap, o->label, o->type);
    out.push_back({State{plug(mk_loc(l)), std::move(h), n}, "Opq"});
    return out;
  }
  if (const auto* lit = as<LitE>(r)) {
    auto [h, l] = alloc(s.heap, IntS{lit->value});
    out.push_back({State{plug(mk_loc(l)), std::move(h), n}, "Conc"});
    return out;
  }
  if (const auto* lam = as<LamE>(r)) {
    auto [h, l] = alloc(s.heap, LamS{lam->param, lam->param_type, lam->body});
    out.push_back({State{plug(mk_loc(l)), std::move(h), n}, "Conc"});
    return out;
  }

  if (const auto* i = as<IfE>(r)) {
    LocId cond = as<LocE>(i->cond)->loc;
    auto results = delta(s.heap, Op::IsZero, {cond}, prover);
    // a zero? answer of 0 means the condition is non-zero, hence true
    for (const auto& dr : results) {
      const auto& val = std::get<DeltaVal>(dr);
      if (std::get<IntS>(val.result).value == 0)
        out.push_back({State{plug(i->then_branch), val.heap, n}, "IfTrue"});
    }
    for (const auto& dr : results) {
      const auto& val = std::get<DeltaVal>(dr);
      if (std::get<IntS>(val.result).value == 1)
        out.push_back({State{plug(i->else_branch), val.heap, n}, "IfFalse"});
    }
    return out;
  }

  if (const auto* p = as<PrimE>(r)) {
    std::vector<LocId> args;
    for (const auto& a : p->args) args.push_back(as<LocE>(a)->loc);
    for (auto& dr : delta(s.heap, p->op, args, prover)) {
      if (auto* val = std::get_if<DeltaVal>(&dr)) {
        auto [h, l] = alloc(val->heap, std::move(val->result));
        out.push_back({State{plug(mk_loc(l)), std::move(h), n}, "Prim"});
      } else {
        auto& err = std::get<DeltaErr>(dr);
        out.push_back({State{plug(mk_err(p->site, err.op)), std::move(err.heap), n}, "Prim"});
      }
    }
    return out;
  }

  const auto* app = as<AppE>(r);
  assert(app);
  LocId lf = as<LocE>(app->fn)->loc;
  LocId lx = as<LocE>(app->arg)->loc;
  const Storeable& fn = s.heap.at(lf);

  if (const auto* lam = std::get_if<LamS>(&fn)) {
    out.push_back({State{plug(subst(lam->body, lam->param, lx)), s.heap, n}, "AppLam"});
    return out;
  }

  if (const auto* opq = std::get_if<OpaqueS>(&fn)) {
    if (!opq->type->is_arrow()) throw StuckState(r);
    TypePtr dom = opq->type->domain();
    TypePtr cod = opq->type->codomain();

    if (dom->is_base()) {
      auto [h1, la] = alloc(s.heap, OpaqueS{cod, {}});
      Heap h2 = extend_case(h1, lf, lx, la);
      out.push_back({State{plug(mk_loc(la)), std::move(h2), n}, "AppOpq1"});
      return out;
    }

    // constant function: ignores its argument
    {
      auto [h1, la] = alloc(s.heap, OpaqueS{cod, {}});
      Heap h2 = h1;
      h2.entries.at(lf) = LamS{"x", dom, mk_loc(la)};
      out.push_back({State{plug(mk_loc(la)), std::move(h2), n}, "AppOpq2"});
    }

    // delays its argument behind another unknown of the same type
    if (cod->is_arrow()) {
      auto [h1, l1] = alloc(s.heap, OpaqueS{opq->type, {}});
      Expr body = mk_lam("y", cod->domain(), mk_app(mk_app(mk_loc(l1), mk_var("x")), mk_var("y")));
      Heap h2 = h1;
      h2.entries.at(lf) = LamS{"x", dom, body};
      Expr result = mk_lam("y", cod->domain(), mk_app(mk_app(mk_loc(l1), mk_loc(lx)), mk_var("y")));
      out.push_back({State{plug(result), std::move(h2), n}, "AppOpq3"});
    }

    // probes its argument with a fresh unknown, result consumed by a
    // fresh unknown context
    {
      auto [h1, l1] = alloc(s.heap, OpaqueS{dom->domain(), {}});
      auto [h2, l2] = alloc(h1, OpaqueS{Type::arrow(dom->codomain(), cod), {}});
      Heap h3 = h2;
      h3.entries.at(lf) = LamS{"x", dom, mk_app(mk_loc(l2), mk_app(mk_var("x"), mk_loc(l1)))};
      Expr result = mk_app(mk_loc(l2), mk_app(mk_loc(lx), mk_loc(l1)));
      out.push_back({State{plug(result), std::move(h3), n}, "AppHavoc"});
    }
    return out;
  }

  if (const auto* cs = std::get_if<CaseS>(&fn)) {
    auto arg_val = concrete_value(s.heap, lx);
    for (const auto& e : cs->entries) {
      bool hit = e.input == lx;
      if (!hit && arg_val) {
        auto in_val = concrete_value(s.heap, e.input);
        hit = in_val && *in_val == *arg_val;
      }
      if (hit) {
        out.push_back({State{plug(mk_loc(e.output)), s.heap, n}, "AppCase1"});
        return out;
      }
    }
    auto [h1, la] = alloc(s.heap, OpaqueS{cs->codomain, {}});
    Heap h2 = extend_case(h1, lf, lx, la);
    out.push_back({State{plug(mk_loc(la)), std::move(h2), n}, "AppCase2"});
    return out;
  }

  throw StuckState(r);  // applied an integer
}

// ---------------------------------------------------------------------------
// Labels of primitive-application sites reachable from an expression,
// following locations through the heap.

inline void compute_labels_into(const Heap& h, const Expr& e, std::set<Label>& out, std::set<LocId>& visited) {
  if (const auto* p = as<PrimE>(e)) {
    out.insert(p->site);
    for (const auto& a : p->args) compute_labels_into(h, a, out, visited);
  } else if (const auto* a = as<AppE>(e)) {
    compute_labels_into(h, a->fn, out, visited);
    compute_labels_into(h, a->arg, out, visited);
  } else if (const auto* i = as<IfE>(e)) {
    compute_labels_into(h, i->cond, out, visited);
    compute_labels_into(h, i->then_branch, out, visited);
    compute_labels_into(h, i->else_branch, out, visited);
  } else if (const auto* lam = as<LamE>(e)) {
    compute_labels_into(h, lam->body, out, visited);
  } else if (const auto* loc = as<LocE>(e)) {
    if (!visited.insert(loc->loc).second) return;
    const Storeable* s = h.find(loc->loc);
    if (!s) return;
    if (const auto* sl = std::get_if<LamS>(s)) compute_labels_into(h, sl->body, out, visited);
  }
  // variables, literals, opaques and errors carry no sites
}

inline std::set<Label> compute_labels(const Heap& h, const Expr& e) {
  std::set<Label> out;
  std::set<LocId> visited;
  compute_labels_into(h, e, out, visited);
  return out;
}

// ---------------------------------------------------------------------------
// Breadth-first search

struct Budget {
  long max_steps = 100000;
  long max_states = 50000;
  std::chrono::milliseconds timeout{10000};
};

enum class ExhaustReason { StepBudget, StateBudget, Timeout, SolverUnknown };

inline const char* show(ExhaustReason r) {
  switch (r) {
    case ExhaustReason::StepBudget: return "step-budget";
    case ExhaustReason::StateBudget: return "state-budget";
    case ExhaustReason::Timeout: return "timeout";
    case ExhaustReason::SolverUnknown: return "solver-unknown";
  }
  return "?";
}

struct TraceNode {
  State state;
  const char* rule;  // rule producing this state; null at the root
  std::shared_ptr<const TraceNode> parent;
};

struct AnswerOutcome {
  LocId loc;
  Heap heap;
  TypePtr type;
};
struct BlameOutcome {
  Label label;
  Op op;
  Heap heap;
  std::shared_ptr<const TraceNode> trace;
};
struct ExhaustedOutcome {
  ExhaustReason reason;
};
using Outcome = std::variant<AnswerOutcome, BlameOutcome, ExhaustedOutcome>;

struct SearchReport {
  std::vector<Outcome> outcomes;
  long states_explored = 0;
  long solver_queries = 0;
};

using TraceFn = std::function<void(const State& from, const State& to, const char* rule)>;

inline SearchReport run(const Program& p, const Budget& budget, Prover& prover, const TraceFn& trace = nullptr) {
  TypePtr root_type = typecheck(p);
  SearchReport report;
  long queries_before = prover.queries();
  auto started = std::chrono::steady_clock::now();
  long transitions = 0;

  std::deque<std::shared_ptr<const TraceNode>> frontier;
  frontier.push_back(std::make_shared<TraceNode>(TraceNode{State{p.root, Heap{}, 0}, nullptr, nullptr}));

  while (!frontier.empty()) {
    if (report.states_explored >= budget.max_states) {
      report.outcomes.push_back(ExhaustedOutcome{ExhaustReason::StateBudget});
      break;
    }
    if (std::chrono::steady_clock::now() - started > budget.timeout) {
      report.outcomes.push_back(ExhaustedOutcome{ExhaustReason::Timeout});
      break;
    }
    auto node = frontier.front();
    frontier.pop_front();
    ++report.states_explored;

    const State& s = node->state;
    if (is_answer(s.expr)) {
      if (const auto* loc = as<LocE>(s.expr)) {
        report.outcomes.push_back(AnswerOutcome{loc->loc, s.heap, root_type});
      } else {
        const auto* err = as<ErrE>(s.expr);
        if (p.known_labels.count(err->blame))
          report.outcomes.push_back(BlameOutcome{err->blame, err->op, s.heap, node});
        // unknown-portion errors are not reportable
      }
      continue;
    }
    if (transitions >= budget.max_steps) {
      report.outcomes.push_back(ExhaustedOutcome{ExhaustReason::StepBudget});
      break;
    }

    for (auto& succ : step(s, prover)) {
      ++transitions;
      if (trace) trace(s, succ.state, succ.rule);
      frontier.push_back(std::make_shared<TraceNode>(TraceNode{std::move(succ.state), succ.rule, node}));
    }
  }

  report.solver_queries = prover.queries() - queries_before;
  return report;
}

}  // namespace spcf

#endif  // SPCF_MACHINE_HPP
