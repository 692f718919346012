#ifndef SPCF_DELTA_HPP
#define SPCF_DELTA_HPP

#include <cassert>
#include <optional>
#include <variant>
#include <vector>

#include "spcf/heap.hpp"
#include "spcf/logic.hpp"

// Interpretation of primitive operations over heap locations. On concrete
// arguments each operation behaves as ordinary integer arithmetic with a
// single result. On symbolic arguments it may branch, refining the heap
// with the assumption taken on each side; infeasible sides are dropped by
// consulting the proof relation up front, so every emitted branch carries
// a satisfiable heap whenever the input heap was satisfiable.

namespace spcf {

struct DeltaVal {
  Storeable result;
  Heap heap;
};
struct DeltaErr {
  Op op;
  Heap heap;
};
using DeltaResult = std::variant<DeltaVal, DeltaErr>;

inline std::optional<Int> concrete_value(const Heap& h, LocId l) {
  if (const auto* i = std::get_if<IntS>(&h.at(l))) return i->value;
  return std::nullopt;
}

namespace detail {

inline ArithPtr as_arith(const Heap& h, LocId l) {
  if (auto n = concrete_value(h, l)) return arith_const(*n);
  return arith_loc(l);
}

inline bool has_preds(const Heap& h, LocId l) {
  const auto* o = std::get_if<OpaqueS>(&h.at(l));
  return o && !o->preds.empty();
}

// The zero? relation: pairs of (answer, refined heap) where answer 1 means
// the location is zero. On an ambiguous opaque both sides are possible; the
// zero side collapses an unconstrained opaque to the concrete 0 and
// otherwise records the equation, keeping earlier refinements intact.
inline std::vector<std::pair<Int, Heap>> zero_branches(const Heap& h, LocId l, Prover& prover) {
  if (auto n = concrete_value(h, l)) return {{*n == 0 ? 1 : 0, h}};
  switch (prover.prove(h, l, pred_is_zero())) {
    case Verdict::Proved: return {{1, h}};
    case Verdict::Refuted: return {{0, h}};
    case Verdict::Ambig: break;
  }
  Heap zero_side = has_preds(h, l) ? refine(h, l, pred_eq(arith_const(0))) : set_concrete(h, l, 0);
  Heap nonzero_side = refine(h, l, pred_not(pred_is_zero()));
  return {{1, std::move(zero_side)}, {0, std::move(nonzero_side)}};
}

inline DeltaVal sym_result(Heap h, ArithPtr defining) {
  return DeltaVal{OpaqueS{Type::base(), {pred_eq(std::move(defining))}}, std::move(h)};
}

}  // namespace detail

inline std::vector<DeltaResult> delta(const Heap& h, Op op, const std::vector<LocId>& args, Prover& prover) {
  assert(static_cast<int>(args.size()) == op_arity(op));

  switch (op) {
    case Op::IsZero: {
      std::vector<DeltaResult> out;
      for (auto& [answer, heap] : detail::zero_branches(h, args[0], prover))
        out.push_back(DeltaVal{IntS{answer}, std::move(heap)});
      return out;
    }

    case Op::Add1:
    case Op::Sub1: {
      LocId l = args[0];
      Op bin = (op == Op::Add1) ? Op::Add : Op::Sub;
      if (auto n = concrete_value(h, l))
        return {DeltaVal{IntS{op == Op::Add1 ? *n + 1 : *n - 1}, h}};
      return {detail::sym_result(h, arith_bin(bin, arith_loc(l), arith_const(1)))};
    }

    case Op::Add:
    case Op::Sub:
    case Op::Mul: {
      auto a = concrete_value(h, args[0]);
      auto b = concrete_value(h, args[1]);
      if (a && b) {
        Int r = op == Op::Add ? *a + *b : op == Op::Sub ? *a - *b : *a * *b;
        return {DeltaVal{IntS{r}, h}};
      }
      return {detail::sym_result(h, arith_bin(op, detail::as_arith(h, args[0]), detail::as_arith(h, args[1])))};
    }

    case Op::Div: {
      auto a = concrete_value(h, args[0]);
      auto b = concrete_value(h, args[1]);
      if (b && *b == 0) return {DeltaErr{Op::Div, h}};
      if (a && b) return {DeltaVal{IntS{euclidean_div(*a, *b)}, h}};
      if (b) return {detail::sym_result(h, arith_bin(Op::Div, detail::as_arith(h, args[0]), arith_const(*b)))};
      std::vector<DeltaResult> out;
      for (auto& [divisor_zero, heap] : detail::zero_branches(h, args[1], prover)) {
        if (divisor_zero == 1) {
          out.push_back(DeltaErr{Op::Div, std::move(heap)});
        } else {
          out.insert(out.begin(),
                     detail::sym_result(std::move(heap),
                                        arith_bin(Op::Div, detail::as_arith(h, args[0]), arith_loc(args[1]))));
        }
      }
      return out;
    }

    case Op::Eq: {
      auto a = concrete_value(h, args[0]);
      auto b = concrete_value(h, args[1]);
      if (a && b) return {DeltaVal{IntS{*a == *b ? 1 : 0}, h}};
      LocId target = a ? args[1] : args[0];
      ArithPtr other = a ? arith_const(*a) : detail::as_arith(h, args[1]);
      switch (prover.prove(h, target, pred_eq(other))) {
        case Verdict::Proved: return {DeltaVal{IntS{1}, h}};
        case Verdict::Refuted: return {DeltaVal{IntS{0}, h}};
        case Verdict::Ambig: break;
      }
      return {DeltaVal{IntS{1}, refine(h, target, pred_eq(other))},
              DeltaVal{IntS{0}, refine(h, target, pred_not(pred_eq(other)))}};
    }
  }
  assert(false && "unhandled primitive");
  return {};
}

}  // namespace spcf

#endif  // SPCF_DELTA_HPP
