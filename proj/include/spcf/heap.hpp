#ifndef SPCF_HEAP_HPP
#define SPCF_HEAP_HPP

#include <algorithm>
#include <cassert>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <variant>
#include <vector>

#include "spcf/syntax.hpp"

// The path condition of one execution branch: a finite map from locations
// to storeables. Opaque base values accumulate predicates as branches are
// taken; opaque base-domain functions are refined into case mappings that
// force equal inputs to equal outputs. Heaps are immutable values; every
// operation returns a new heap. Location names are drawn from a counter
// carried inside the heap, so replaying the same operation sequence yields
// the identical heap, location names included.

namespace spcf {

// ---------------------------------------------------------------------------
// Predicates over base-typed locations. Exactly the forms the primitive
// interpretation emits: zero?, its negation, and defining equations over
// locations and integer constants.

struct Arith;
using ArithPtr = std::shared_ptr<const Arith>;

struct Arith {
  enum class Kind { Const, Loc, Bin } kind;
  Int value = 0;         // Const
  LocId loc;             // Loc
  Op op = Op::Add;       // Bin: Add, Sub, Mul or Div
  ArithPtr lhs, rhs;     // Bin
};

inline ArithPtr arith_const(Int v) { return std::make_shared<Arith>(Arith{Arith::Kind::Const, v, {}, Op::Add, nullptr, nullptr}); }
inline ArithPtr arith_loc(LocId l) { return std::make_shared<Arith>(Arith{Arith::Kind::Loc, 0, l, Op::Add, nullptr, nullptr}); }
inline ArithPtr arith_bin(Op op, ArithPtr a, ArithPtr b) {
  return std::make_shared<Arith>(Arith{Arith::Kind::Bin, 0, {}, op, std::move(a), std::move(b)});
}

inline bool arith_eq(const ArithPtr& a, const ArithPtr& b) {
  if (a.get() == b.get()) return true;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case Arith::Kind::Const: return a->value == b->value;
    case Arith::Kind::Loc: return a->loc == b->loc;
    case Arith::Kind::Bin: return a->op == b->op && arith_eq(a->lhs, b->lhs) && arith_eq(a->rhs, b->rhs);
  }
  return false;
}

inline std::string show(const ArithPtr& a) {
  switch (a->kind) {
    case Arith::Kind::Const: return std::to_string(a->value);
    case Arith::Kind::Loc: return show(a->loc);
    case Arith::Kind::Bin:
      return "(" + std::string(op_name(a->op)) + " " + show(a->lhs) + " " + show(a->rhs) + ")";
  }
  return "?";
}

inline void arith_locs(const ArithPtr& a, std::vector<LocId>& out) {
  switch (a->kind) {
    case Arith::Kind::Const: return;
    case Arith::Kind::Loc: out.push_back(a->loc); return;
    case Arith::Kind::Bin:
      arith_locs(a->lhs, out);
      arith_locs(a->rhs, out);
      return;
  }
}

struct Predicate;
using PredPtr = std::shared_ptr<const Predicate>;

struct Predicate {
  enum class Kind { IsZero, Not, EqRhs } kind;
  PredPtr inner;  // Not
  ArithPtr rhs;   // EqRhs
};

inline Predicate pred_is_zero() { return Predicate{Predicate::Kind::IsZero, nullptr, nullptr}; }
inline Predicate pred_not(Predicate p) {
  return Predicate{Predicate::Kind::Not, std::make_shared<Predicate>(std::move(p)), nullptr};
}
inline Predicate pred_eq(ArithPtr rhs) { return Predicate{Predicate::Kind::EqRhs, nullptr, std::move(rhs)}; }

inline bool pred_eq_syntactic(const Predicate& a, const Predicate& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Predicate::Kind::IsZero: return true;
    case Predicate::Kind::Not: return pred_eq_syntactic(*a.inner, *b.inner);
    case Predicate::Kind::EqRhs: return arith_eq(a.rhs, b.rhs);
  }
  return false;
}

inline std::string show(const Predicate& p) {
  switch (p.kind) {
    case Predicate::Kind::IsZero: return "zero?";
    case Predicate::Kind::Not: return "¬" + show(*p.inner);
    case Predicate::Kind::EqRhs: return "(≡ " + show(p.rhs) + ")";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Storeables

struct IntS {
  Int value;
};
struct LamS {
  std::string param;
  TypePtr param_type;
  Expr body;
};
struct OpaqueS {
  TypePtr type;
  std::vector<Predicate> preds;  // base-typed opaques only
};
struct CaseEntry {
  LocId input;
  LocId output;
};
struct CaseS {
  TypePtr codomain;
  std::vector<CaseEntry> entries;  // pairwise-distinct inputs
};

using Storeable = std::variant<IntS, LamS, OpaqueS, CaseS>;

inline std::string show(const Storeable& s);

// ---------------------------------------------------------------------------
// Heaps

class RefineNonBase : public std::logic_error {
 public:
  explicit RefineNonBase(LocId l) : std::logic_error("cannot refine function storeable at " + show(l)) {}
};

class DuplicateCaseInput : public std::logic_error {
 public:
  explicit DuplicateCaseInput(LocId l) : std::logic_error("case mapping already has input " + show(l)) {}
};

struct Heap {
  std::map<LocId, Storeable> entries;
  std::map<Label, LocId> opq_reuse;
  int next_loc = 0;

  const Storeable* find(LocId l) const {
    auto it = entries.find(l);
    return it == entries.end() ? nullptr : &it->second;
  }
  const Storeable& at(LocId l) const {
    auto it = entries.find(l);
    assert(it != entries.end());
    return it->second;
  }
  bool contains(LocId l) const { return entries.count(l) != 0; }
};

inline std::pair<Heap, LocId> alloc(const Heap& h, Storeable s) {
  Heap out = h;
  LocId l{out.next_loc++};
  out.entries.emplace(l, std::move(s));
  return {std::move(out), l};
}

// Opaque values stand for arbitrary but fixed terms, so the same source
// occurrence always shares one location.
inline std::pair<Heap, LocId> alloc_opq(const Heap& h, Label src, TypePtr t) {
  if (auto it = h.opq_reuse.find(src); it != h.opq_reuse.end()) return {h, it->second};
  auto [out, l] = alloc(h, OpaqueS{std::move(t), {}});
  out.opq_reuse.emplace(src, l);
  return {std::move(out), l};
}

inline Heap refine(const Heap& h, LocId l, Predicate p) {
  const Storeable& s = h.at(l);
  if (std::holds_alternative<IntS>(s)) return h;  // concrete values subsume predicates
  const auto* opq = std::get_if<OpaqueS>(&s);
  if (!opq) throw RefineNonBase(l);
  for (const auto& q : opq->preds)
    if (pred_eq_syntactic(q, p)) return h;
  Heap out = h;
  std::get<OpaqueS>(out.entries.at(l)).preds.push_back(std::move(p));
  return out;
}

inline Heap set_concrete(const Heap& h, LocId l, Int n) {
  const Storeable& s = h.at(l);
  if (const auto* i = std::get_if<IntS>(&s)) {
    assert(i->value == n);
    return h;
  }
  assert(std::holds_alternative<OpaqueS>(s) && std::get<OpaqueS>(s).type->is_base());
  Heap out = h;
  out.entries.at(l) = IntS{n};
  return out;
}

inline Heap extend_case(const Heap& h, LocId fn, LocId in, LocId out_loc) {
  const Storeable& s = h.at(fn);
  Heap out = h;
  if (const auto* opq = std::get_if<OpaqueS>(&s)) {
    assert(opq->type->is_arrow() && opq->type->domain()->is_base());
    out.entries.at(fn) = CaseS{opq->type->codomain(), {CaseEntry{in, out_loc}}};
    return out;
  }
  const auto* cs = std::get_if<CaseS>(&s);
  assert(cs);
  for (const auto& e : cs->entries)
    if (e.input == in) throw DuplicateCaseInput(in);
  std::get<CaseS>(out.entries.at(fn)).entries.push_back(CaseEntry{in, out_loc});
  return out;
}

// ---------------------------------------------------------------------------
// Debug rendering: [L0 ↦ 5, L1 ↦ •{int, (≡ 0)}, L2 ↦ case^int [L3 ↦ L1]]

inline std::string show(const Storeable& s) {
  std::ostringstream out;
  if (const auto* i = std::get_if<IntS>(&s)) {
    out << i->value;
  } else if (const auto* lam = std::get_if<LamS>(&s)) {
    out << show(mk_lam(lam->param, lam->param_type, lam->body));
  } else if (const auto* opq = std::get_if<OpaqueS>(&s)) {
    out << "•";
    if (opq->preds.empty()) {
      out << "^" << show(opq->type);
    } else {
      out << "{" << show(opq->type);
      for (const auto& p : opq->preds) out << ", " << show(p);
      out << "}";
    }
  } else if (const auto* cs = std::get_if<CaseS>(&s)) {
    out << "case^" << show(cs->codomain) << " [";
    bool first = true;
    for (const auto& e : cs->entries) {
      if (!first) out << ", ";
      first = false;
      out << show(e.input) << " ↦ " << show(e.output);
    }
    out << "]";
  }
  return out.str();
}

inline std::string show(const Heap& h) {
  std::ostringstream out;
  out << "[";
  bool first = true;
  for (const auto& [l, s] : h.entries) {
    if (!first) out << ", ";
    first = false;
    out << show(l) << " ↦ " << show(s);
  }
  out << "]";
  return out.str();
}

// Locations mentioned by a storeable (for closure checks and translation).
inline void storeable_locs(const Storeable& s, std::vector<LocId>& out) {
  if (const auto* lam = std::get_if<LamS>(&s)) {
    // walk the body for embedded locations
    std::vector<Expr> stack{lam->body};
    while (!stack.empty()) {
      Expr e = stack.back();
      stack.pop_back();
      if (const auto* loc = as<LocE>(e)) {
        out.push_back(loc->loc);
      } else if (const auto* l2 = as<LamE>(e)) {
        stack.push_back(l2->body);
      } else if (const auto* a = as<AppE>(e)) {
        stack.push_back(a->fn);
        stack.push_back(a->arg);
      } else if (const auto* i = as<IfE>(e)) {
        stack.push_back(i->cond);
        stack.push_back(i->then_branch);
        stack.push_back(i->else_branch);
      } else if (const auto* p = as<PrimE>(e)) {
        for (const auto& arg : p->args) stack.push_back(arg);
      }
    }
  } else if (const auto* opq = std::get_if<OpaqueS>(&s)) {
    for (const auto& p : opq->preds) {
      const Predicate* q = &p;
      while (q->kind == Predicate::Kind::Not) q = q->inner.get();
      if (q->kind == Predicate::Kind::EqRhs) arith_locs(q->rhs, out);
    }
  } else if (const auto* cs = std::get_if<CaseS>(&s)) {
    for (const auto& e : cs->entries) {
      out.push_back(e.input);
      out.push_back(e.output);
    }
  }
}

inline bool heap_closed(const Heap& h) {
  for (const auto& [l, s] : h.entries) {
    std::vector<LocId> locs;
    storeable_locs(s, locs);
    for (LocId m : locs)
      if (!h.contains(m)) return false;
  }
  for (const auto& [lab, l] : h.opq_reuse)
    if (!h.contains(l)) return false;
  return true;
}

}  // namespace spcf

#endif  // SPCF_HEAP_HPP
