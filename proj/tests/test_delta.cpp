#include "doctest.h"
#include "support.hpp"

using namespace spcf;

namespace {

const DeltaVal& val_of(const DeltaResult& r) { return std::get<DeltaVal>(r); }
bool is_err(const DeltaResult& r) { return std::holds_alternative<DeltaErr>(r); }

Int int_result(const DeltaResult& r) { return std::get<IntS>(val_of(r).result).value; }

}  // namespace

TEST_CASE("zero? on an unconstrained opaque branches both ways") {
  Prover prover;
  auto [h, l] = alloc(Heap{}, OpaqueS{Type::base(), {}});
  auto rs = delta(h, Op::IsZero, {l}, prover);
  REQUIRE(rs.size() == 2);
  CHECK(int_result(rs[0]) == 1);
  CHECK(std::get<IntS>(val_of(rs[0]).heap.at(l)).value == 0);  // zero side collapses to 0
  CHECK(int_result(rs[1]) == 0);
  const auto& preds = std::get<OpaqueS>(val_of(rs[1]).heap.at(l)).preds;
  REQUIRE(preds.size() == 1);
  CHECK(show(preds[0]) == "¬zero?");
}

TEST_CASE("zero? keeps existing refinements on the zero side") {
  Prover prover;
  Heap h0;
  auto [h1, x] = alloc(h0, OpaqueS{Type::base(), {}});
  auto [h2, l] = alloc(h1, OpaqueS{Type::base(), {}});
  Heap h3 = refine(h2, l, pred_eq(arith_bin(Op::Sub, arith_const(100), arith_loc(x))));
  auto rs = delta(h3, Op::IsZero, {l}, prover);
  REQUIRE(rs.size() == 2);
  const auto& zero_preds = std::get<OpaqueS>(val_of(rs[0]).heap.at(l)).preds;
  REQUIRE(zero_preds.size() == 2);  // the defining equation survives alongside the zero equation
  // only x = 100 satisfies the zero side
  Prover check;
  auto res = check.solve_heap(val_of(rs[0]).heap);
  REQUIRE(std::holds_alternative<Sat>(res));
  CHECK(std::get<Sat>(res).model.at(x) == 100);
}

TEST_CASE("zero? respects proved and refuted verdicts") {
  Prover prover;
  auto [h1, l] = alloc(Heap{}, OpaqueS{Type::base(), {}});
  Heap h2 = refine(h1, l, pred_eq(arith_const(0)));
  auto proved = delta(h2, Op::IsZero, {l}, prover);
  REQUIRE(proved.size() == 1);
  CHECK(int_result(proved[0]) == 1);

  Heap h3 = refine(h1, l, pred_eq(arith_const(7)));
  auto refuted = delta(h3, Op::IsZero, {l}, prover);
  REQUIRE(refuted.size() == 1);
  CHECK(int_result(refuted[0]) == 0);
}

TEST_CASE("subtraction with one symbolic operand produces a defining equation") {
  Prover prover;
  Heap h0;
  auto [h1, c] = alloc(h0, IntS{100});
  auto [h2, x] = alloc(h1, OpaqueS{Type::base(), {}});
  auto rs = delta(h2, Op::Sub, {c, x}, prover);
  REQUIRE(rs.size() == 1);
  const auto& opq = std::get<OpaqueS>(val_of(rs[0]).result);
  REQUIRE(opq.preds.size() == 1);
  CHECK(show(opq.preds[0]) == "(≡ (- 100 L1))");  // concrete operand inlined
  CHECK(show(val_of(rs[0]).heap) == show(h2));
}

TEST_CASE("concrete arithmetic agrees with direct computation") {
  Prover prover;
  std::mt19937 rng(3);
  for (int i = 0; i < 200; ++i) {
    Int a = static_cast<Int>(rng() % 41) - 20;
    Int b = static_cast<Int>(rng() % 41) - 20;
    Heap h0;
    auto [h1, la] = alloc(h0, IntS{a});
    auto [h2, lb] = alloc(h1, IntS{b});
    Op ops[] = {Op::Add, Op::Sub, Op::Mul, Op::Eq, Op::Div, Op::IsZero, Op::Add1, Op::Sub1};
    Op op = ops[rng() % 8];
    std::vector<LocId> args = op_arity(op) == 1 ? std::vector<LocId>{la} : std::vector<LocId>{la, lb};
    auto rs = delta(h2, op, args, prover);
    REQUIRE(rs.size() == 1);
    if (op == Op::Div && b == 0) {
      CHECK(is_err(rs[0]));
      continue;
    }
    Int expect = 0;
    switch (op) {
      case Op::Add: expect = a + b; break;
      case Op::Sub: expect = a - b; break;
      case Op::Mul: expect = a * b; break;
      case Op::Eq: expect = a == b ? 1 : 0; break;
      case Op::Div: expect = euclidean_div(a, b); break;
      case Op::IsZero: expect = a == 0 ? 1 : 0; break;
      case Op::Add1: expect = a + 1; break;
      case Op::Sub1: expect = a - 1; break;
    }
    CHECK(int_result(rs[0]) == expect);
  }
  CHECK(prover.queries() == 0);  // concrete cases never consult the solver
}

TEST_CASE("division is Euclidean, matching SMT-LIB div") {
  CHECK(euclidean_div(7, 2) == 3);
  CHECK(euclidean_div(-7, 2) == -4);
  CHECK(euclidean_div(7, -2) == -3);
  CHECK(euclidean_div(-7, -2) == 4);
  for (Int a = -20; a <= 20; ++a)
    for (Int b = -5; b <= 5; ++b) {
      if (b == 0) continue;
      Int q = euclidean_div(a, b);
      Int r = a - q * b;
      CHECK(r >= 0);
      CHECK(r < (b < 0 ? -b : b));
    }
}

TEST_CASE("division by a concrete zero errors regardless of the dividend") {
  Prover prover;
  Heap h0;
  auto [h1, x] = alloc(h0, OpaqueS{Type::base(), {}});
  auto [h2, z] = alloc(h1, IntS{0});
  auto rs = delta(h2, Op::Div, {x, z}, prover);
  REQUIRE(rs.size() == 1);
  CHECK(is_err(rs[0]));
}

TEST_CASE("division by a symbolic divisor forks into quotient and error") {
  Prover prover;
  Heap h0;
  auto [h1, a] = alloc(h0, IntS{1});
  auto [h2, b] = alloc(h1, OpaqueS{Type::base(), {}});
  auto rs = delta(h2, Op::Div, {a, b}, prover);
  REQUIRE(rs.size() == 2);
  const auto& quotient = std::get<OpaqueS>(val_of(rs[0]).result);
  CHECK(show(quotient.preds[0]) == "(≡ (div 1 L1))");
  // quotient branch assumes the divisor nonzero
  CHECK(show(val_of(rs[0]).heap.at(b)) == "•{int, ¬zero?}");
  REQUIRE(is_err(rs[1]));
  CHECK(std::get<IntS>(std::get<DeltaErr>(rs[1]).heap.at(b)).value == 0);

  // a divisor proved nonzero only yields the quotient
  Heap h3 = refine(h2, b, pred_eq(arith_const(2)));
  auto only_val = delta(h3, Op::Div, {a, b}, prover);
  REQUIRE(only_val.size() == 1);
  CHECK(!is_err(only_val[0]));

  // a divisor proved zero only yields the error
  Heap h4 = refine(h2, b, pred_eq(arith_const(0)));
  auto only_err = delta(h4, Op::Div, {a, b}, prover);
  REQUIRE(only_err.size() == 1);
  CHECK(is_err(only_err[0]));
}

TEST_CASE("division with concrete nonzero divisor and symbolic dividend stays symbolic") {
  Prover prover;
  Heap h0;
  auto [h1, x] = alloc(h0, OpaqueS{Type::base(), {}});
  auto [h2, d] = alloc(h1, IntS{4});
  auto rs = delta(h2, Op::Div, {x, d}, prover);
  REQUIRE(rs.size() == 1);
  CHECK(show(std::get<OpaqueS>(val_of(rs[0]).result).preds[0]) == "(≡ (div L0 4))");
}

TEST_CASE("equality on symbolic operands refines both ways") {
  Prover prover;
  Heap h0;
  auto [h1, x] = alloc(h0, OpaqueS{Type::base(), {}});
  auto [h2, c] = alloc(h1, IntS{5});
  auto rs = delta(h2, Op::Eq, {x, c}, prover);
  REQUIRE(rs.size() == 2);
  CHECK(int_result(rs[0]) == 1);
  CHECK(show(val_of(rs[0]).heap.at(x)) == "•{int, (≡ 5)}");
  CHECK(int_result(rs[1]) == 0);
  CHECK(show(val_of(rs[1]).heap.at(x)) == "•{int, ¬(≡ 5)}");

  // forced equal: single branch
  Heap h3 = refine(h2, x, pred_eq(arith_const(5)));
  auto forced = delta(h3, Op::Eq, {x, c}, prover);
  REQUIRE(forced.size() == 1);
  CHECK(int_result(forced[0]) == 1);
}

TEST_CASE("branch refinements are exclusive and cover all integers") {
  Prover prover;
  std::mt19937 rng(17);
  for (int round = 0; round < 40; ++round) {
    Heap h;
    auto [h1, a] = alloc(h, OpaqueS{Type::base(), {}});
    auto [h2, b] = alloc(h1, rng() % 2 ? Storeable{OpaqueS{Type::base(), {}}}
                                       : Storeable{IntS{static_cast<Int>(rng() % 9) - 4}});
    Heap cur = h2;
    if (rng() % 2) cur = refine(cur, a, pred_not(pred_is_zero()));
    Op ops[] = {Op::IsZero, Op::Div, Op::Eq};
    Op op = ops[rng() % 3];
    std::vector<LocId> args = op == Op::IsZero ? std::vector<LocId>{a} : std::vector<LocId>{b, a};
    auto rs = delta(cur, op, args, prover);
    if (rs.size() < 2) continue;

    auto heap_of = [](const DeltaResult& r) {
      return std::holds_alternative<DeltaVal>(r) ? std::get<DeltaVal>(r).heap : std::get<DeltaErr>(r).heap;
    };
    std::vector<FormulaPtr> branch_fs;
    for (const auto& r : rs) branch_fs.push_back(translate_heap(heap_of(r)));
    FormulaPtr input_f = translate_heap(cur);
    std::vector<LocId> vars = base_locations(cur);

    std::map<LocId, long long> m;
    std::function<void(size_t)> enumerate = [&](size_t i) {
      if (i == vars.size()) {
        if (!spcf_tests::eval_formula_ref(input_f, m)) return;
        int holds = 0;
        for (const auto& bf : branch_fs)
          if (spcf_tests::eval_formula_ref(bf, m)) ++holds;
        CHECK(holds >= 1);  // coverage: no behavior lost
        CHECK(holds <= 1);  // exclusivity: branches disjoint
        return;
      }
      for (long long v = -16; v <= 16; ++v) {
        m[vars[i]] = v;
        enumerate(i + 1);
      }
    };
    enumerate(0);
  }
}
