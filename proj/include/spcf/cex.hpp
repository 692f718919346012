#ifndef SPCF_CEX_HPP
#define SPCF_CEX_HPP

#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "spcf/logic.hpp"
#include "spcf/machine.hpp"
#include "spcf/oracle.hpp"
#include "spcf/syntax.hpp"

// Counterexample construction. Solving the final heap of an error branch
// gives integer values for every base location; plugging those back into
// the heap's function residues yields a closed, opaque-free term for each
// source opaque. Synthesized terms use only literals, lambdas, equality
// tests, conditionals and applications of the bound argument, so they can
// never be blamed themselves. Every counterexample is re-run concretely
// before being reported.

namespace spcf {

struct Counterexample {
  std::map<Label, Expr> bindings;  // one closed term per source opaque
  Label blame;
  Op op = Op::Div;
  Model model;
  enum class Validation { NotRun, Passed, Failed } validated = Validation::NotRun;
  std::string validation_detail;
};

struct NoModel {
  enum class Reason { UnsatHeap, Unknown } reason;
};

// ---------------------------------------------------------------------------
// Value synthesis

inline Expr default_value(const TypePtr& t) {
  if (t->is_base()) return mk_lit(0);
  return mk_lam("x", t->domain(), default_value(t->codomain()));
}

namespace cex_detail {

class Renderer {
 public:
  Renderer(const Heap& h, const Model& m, int first_free_label) : h_(h), m_(m), next_label_(first_free_label) {}

  Expr render_loc(LocId l) {
    if (!visiting_.insert(l.id).second) throw std::logic_error("cyclic heap value at " + show(l));
    Expr out = render_storeable(l);
    visiting_.erase(l.id);
    return out;
  }

 private:
  Int model_value(LocId l) const {
    auto it = m_.find(l);
    return it == m_.end() ? 0 : it->second;  // unconstrained locations default to 0
  }

  Int input_value(LocId l) const {
    if (const auto* i = std::get_if<IntS>(&h_.at(l))) return i->value;
    return model_value(l);
  }

  Expr render_storeable(LocId l) {
    const Storeable& s = h_.at(l);
    if (const auto* i = std::get_if<IntS>(&s)) return mk_lit(i->value);
    if (const auto* o = std::get_if<OpaqueS>(&s)) {
      if (o->type->is_base()) return mk_lit(model_value(l));
      return default_value(o->type);  // never applied: any total function works
    }
    if (const auto* lam = std::get_if<LamS>(&s)) return mk_lam(lam->param, lam->param_type, render_body(lam->body));
    const auto& cs = std::get<CaseS>(s);
    Expr chain = default_value(cs.codomain);
    for (auto it = cs.entries.rbegin(); it != cs.entries.rend(); ++it) {
      // later duplicates of an input value are shadowed by the first entry,
      // which ends up outermost
      chain = mk_if(mk_prim(Op::Eq, {mk_var("n"), mk_lit(input_value(it->input))}, Label{next_label_++}),
                    render_loc(it->output), chain);
    }
    return mk_lam("n", Type::base(), chain);
  }

  Expr render_body(const Expr& e) {
    if (const auto* loc = as<LocE>(e)) return render_loc(loc->loc);
    if (as<VarE>(e) || as<LitE>(e)) return e;
    if (const auto* lam = as<LamE>(e)) return mk_lam(lam->param, lam->param_type, render_body(lam->body));
    if (const auto* a = as<AppE>(e)) return mk_app(render_body(a->fn), render_body(a->arg));
    if (const auto* i = as<IfE>(e))
      return mk_if(render_body(i->cond), render_body(i->then_branch), render_body(i->else_branch));
    if (const auto* p = as<PrimE>(e)) {
      std::vector<Expr> args;
      for (const auto& arg : p->args) args.push_back(render_body(arg));
      return mk_prim(p->op, std::move(args), p->site);
    }
    throw std::logic_error("unexpected form in stored function body: " + show(e));
  }

  const Heap& h_;
  const Model& m_;
  int next_label_;
  std::set<int> visiting_;
};

}  // namespace cex_detail

inline Expr render_value(const Heap& h, const Model& m, LocId l, const TypePtr& t) {
  if (!h.contains(l)) return default_value(t);
  return cex_detail::Renderer(h, m, 1 << 20).render_loc(l);
}

// ---------------------------------------------------------------------------
// Construction and validation

inline std::variant<Counterexample, NoModel> build_counterexample(const Program& p, const BlameOutcome& b,
                                                                  Prover& prover) {
  SolveResult res = prover.solve_heap(b.heap);
  if (std::holds_alternative<Unsat>(res)) return NoModel{NoModel::Reason::UnsatHeap};
  if (std::holds_alternative<Unknown>(res)) return NoModel{NoModel::Reason::Unknown};

  Counterexample cex;
  cex.blame = b.label;
  cex.op = b.op;
  cex.model = std::get<Sat>(res).model;
  cex_detail::Renderer renderer(b.heap, cex.model, p.label_count + (1 << 20));
  for (Label src : p.opq_order) {
    auto it = b.heap.opq_reuse.find(src);
    if (it != b.heap.opq_reuse.end())
      cex.bindings[src] = renderer.render_loc(it->second);
    else
      cex.bindings[src] = default_value(p.opq_types.at(src));
  }
  return cex;
}

inline Expr substitute_opaques(const Expr& e, const std::map<Label, Expr>& bindings) {
  if (const auto* o = as<OpqE>(e)) {
    auto it = bindings.find(o->label);
    if (it == bindings.end()) throw std::logic_error("missing binding for " + show(o->label));
    return it->second;
  }
  if (as<VarE>(e) || as<LitE>(e) || as<LocE>(e) || as<ErrE>(e)) return e;
  if (const auto* lam = as<LamE>(e)) return mk_lam(lam->param, lam->param_type, substitute_opaques(lam->body, bindings));
  if (const auto* a = as<AppE>(e)) return mk_app(substitute_opaques(a->fn, bindings), substitute_opaques(a->arg, bindings));
  if (const auto* i = as<IfE>(e))
    return mk_if(substitute_opaques(i->cond, bindings), substitute_opaques(i->then_branch, bindings),
                 substitute_opaques(i->else_branch, bindings));
  const auto* p = as<PrimE>(e);
  std::vector<Expr> args;
  for (const auto& arg : p->args) args.push_back(substitute_opaques(arg, bindings));
  return mk_prim(p->op, std::move(args), p->site);
}

struct ValidationOutcome {
  bool ok;
  std::string detail;
};

inline ValidationOutcome validate(const Program& p, const Counterexample& c, long budget) {
  Expr plugged = substitute_opaques(p.root, c.bindings);
  ConcreteResult r = concrete_eval(plugged, budget);
  switch (r.kind) {
    case ConcreteResult::Kind::Error:
      if (r.blame == c.blame && r.op == c.op) return {true, ""};
      return {false, "wrong error: " + show(r.blame) + "/" + op_name(r.op) + ", expected " + show(c.blame) + "/" +
                         op_name(c.op)};
    case ConcreteResult::Kind::IntValue: return {false, "program returned " + std::to_string(r.value)};
    case ConcreteResult::Kind::Closure: return {false, "program returned a function"};
    case ConcreteResult::Kind::Diverged: return {false, "timeout: no error within step budget"};
  }
  return {false, "unreachable"};
}

// ---------------------------------------------------------------------------
// Reports

inline std::string error_message(Op op) {
  if (op == Op::Div) return "Division_by_zero";
  return std::string(op_name(op)) + "_precondition_violation";
}

inline nlohmann::json counterexample_json(const Counterexample& c, bool include_validation) {
  nlohmann::json bindings = nlohmann::json::object();
  for (const auto& [label, term] : c.bindings) bindings[show(label)] = show(term);
  nlohmann::json model = nlohmann::json::object();
  for (const auto& [loc, v] : c.model) model[show(loc)] = v;
  nlohmann::json out = {
      {"verdict", "counterexample"},
      {"blame", show(c.blame)},
      {"op", op_name(c.op)},
      {"bindings", bindings},
      {"model", model},
  };
  if (include_validation) out["validated"] = c.validated == Counterexample::Validation::Passed;
  return out;
}

inline std::string counterexample_text(const Counterexample& c, bool include_validation) {
  std::ostringstream out;
  out << "Error: " << error_message(c.op) << " (blame " << show(c.blame) << ")\n";
  out << "Breaking context:\n";
  for (const auto& [label, term] : c.bindings) out << "  " << show(label) << " = " << show(term) << "\n";
  out << "Model:";
  bool first = true;
  for (const auto& [loc, v] : c.model) {
    out << (first ? " " : ", ") << show(loc) << " = " << v;
    first = false;
  }
  out << "\n";
  if (include_validation)
    out << "Validated: " << (c.validated == Counterexample::Validation::Passed ? "yes" : "NO") << "\n";
  return out.str();
}

}  // namespace spcf

#endif  // SPCF_CEX_HPP
