#include <set>

#include "doctest.h"
#include "hanf/corpus.hpp"
#include "hanf/errors.hpp"
#include "hanf/eval.hpp"
#include "hanf/hnf.hpp"
#include "support.hpp"

using namespace hanf;
using namespace hanf::test;

namespace {

PatternPtr in_u_singleton() {
  return make_pattern(Sphere(structure(sig_u(), "structure 1\nU 0\n"), {0}, 1));
}

EquivBudget quick() {
  EquivBudget b;
  b.sample_count = 30;
  return b;
}

}  // namespace

TEST_SUITE("eval") {
  TEST_CASE("eval_fo examples") {
    auto a = structure(sig_u(), "structure 2\nU 0\n");
    auto empty = structure(sig_u(), "structure 2\n");
    CHECK(eval_fo(a, {}, f_true()));
    CHECK(eval_fo(a, {}, formula("(exists x (rel U x))", sig_u())));
    CHECK_FALSE(eval_fo(empty, {}, formula("(exists x (rel U x))", sig_u())));
    CHECK(eval_fo(a, {}, f_hanf(0, var("y"), in_u_singleton(), {})));
    CHECK(eval_fo(a, {{var("x"), 0}}, formula("(rel U x)", sig_u())));
    CHECK_THROWS_AS(eval_fo(a, {}, formula("(rel U x)", sig_u())), Error);
    CHECK_THROWS_AS(eval_fo(a, {{var("x"), 5}}, formula("(rel U x)", sig_u())), Error);
    // Structure over a different signature.
    CHECK_THROWS_AS(eval_fo(structure(sig_e(), "structure 1\n"), {}, f_hanf(1, var("y"), in_u_singleton(), {})),
                    Error);
  }

  TEST_CASE("eval_hnf counts realizations") {
    auto a = structure(sig_u(), "structure 3\nU 0\nU 1\n");
    HnfFormula two{f_hanf(2, var("y"), in_u_singleton(), {}), {}};
    HnfFormula three{f_hanf(3, var("y"), in_u_singleton(), {}), {}};
    CHECK(eval_hnf(a, {}, two));
    CHECK_FALSE(eval_hnf(a, {}, three));
    CHECK(eval_fo(a, {}, two.formula));
    CHECK_FALSE(eval_fo(a, {}, three.formula));
    CHECK_THROWS_AS(eval_hnf(a, {}, HnfFormula{formula("(rel U x)", sig_u()), {var("x")}}), Error);
  }

  TEST_CASE("eval_hnf agrees with eval_fo on normalizer output") {
    NormalizationConfig cfg;
    cfg.f = 1;
    for (const char* text : {"(exists y (and (rel E x y) (rel U y)))", "(rel E x y)",
                             "(forall x (exists y (rel E x y)))"}) {
      auto psi = normalize(formula(text), sig_eu(), cfg);
      HnfEvaluator hnf(psi);
      enumerate_structures_up_to_isomorphism(sig_eu(), 4, 1, [&](const Structure& a) {
        FoEvaluator fo(a);
        const auto n = psi.context.size();
        std::vector<Element> idx(n, 0);
        while (true) {
          Assignment asg;
          for (std::size_t i = 0; i < n; ++i) asg[psi.context[i]] = idx[i];
          REQUIRE(fo.eval(asg, psi.formula) == hnf.eval(a, asg));
          std::size_t k = 0;
          while (k < n && ++idx[k] == a.size()) idx[k++] = 0;
          if (k == n) break;
        }
        return true;
      });
    }
  }

  TEST_CASE("sphere_histogram") {
    auto a = structure(sig_u(), "structure 3\nU 0\n");
    auto h = sphere_histogram(a, 1, 2);
    REQUIRE(h.size() == 2);
    std::multiset<std::size_t> counts;
    for (const auto& [code, n] : h) counts.insert(n);
    CHECK(counts == std::multiset<std::size_t>{1, 2});
    auto in_u = canonical_form(Sphere(structure(sig_u(), "structure 1\nU 0\n"), {0}, 1));
    CHECK(h.at(in_u) == 1);

    auto c6 = sphere_histogram(make_cycle(6), 2, 10);
    REQUIRE(c6.size() == 1);
    CHECK(c6.begin()->second == 6);

    for (const auto& [code, n] : sphere_histogram(make_cycle(7), 1, 1)) CHECK(n == 1);
  }

  TEST_CASE("histogram counts add up and decide Hanf sentences") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      auto a = random_structure(sig_eu(), 6 + seed % 4, 2, seed);
      for (std::uint32_t d = 1; d <= 2; ++d) {
        auto h = sphere_histogram(a, d, a.size());
        std::size_t total = 0;
        for (const auto& [code, n] : h) total += n;
        CHECK(total == a.size());
        std::vector<Element> first{0};
        auto p = make_pattern(extract_sphere(a, first, d));
        for (std::uint32_t m = 1; m <= 3; ++m) {
          HnfFormula psi{f_hanf(m, var("y"), p, {}), {}};
          CHECK(eval_hnf(a, {}, psi) == (sphere_histogram(a, d, m).at(p->code) >= m));
        }
      }
    }
  }

  TEST_CASE("check_f_equiv examples") {
    auto v = check_f_equiv(formula("(rel U x)"), formula("(not (not (rel U x)))"), sig_eu(), 1,
                           quick());
    CHECK(v.status == EquivStatus::Equivalent);
    CHECK_FALSE(v.structure.has_value());

    auto c = check_f_equiv(formula("(exists x (rel U x))"), f_true(), sig_eu(), 1, quick());
    REQUIRE(c.status == EquivStatus::Counterexample);
    REQUIRE(c.structure.has_value());
    CHECK(c.structure->size() == 1);
    CHECK(c.structure->tuple_count(1) == 0);
    CHECK_FALSE(eval_fo(*c.structure, c.assignment, formula("(exists x (rel U x))")));

    CHECK_THROWS_AS(check_f_equiv(formula("(rel U x)"), formula("(rel U y)"), sig_eu(), 1, quick()),
                    Error);
  }

  TEST_CASE("parallel checking reports the same counterexample") {
    auto lhs = formula("(exists y (and (rel E x y) (rel U y)))");
    auto rhs = formula("(exists y (rel E x y))");
    auto b1 = quick();
    auto b4 = quick();
    b4.jobs = 4;
    auto v1 = check_f_equiv(lhs, rhs, sig_eu(), 2, b1);
    auto v4 = check_f_equiv(lhs, rhs, sig_eu(), 2, b4);
    REQUIRE(v1.status == EquivStatus::Counterexample);
    REQUIRE(v4.status == EquivStatus::Counterexample);
    CHECK(*v1.structure == *v4.structure);
    CHECK(v1.assignment == v4.assignment);
    CHECK(v1.structures_checked == v4.structures_checked);

    auto e1 = check_f_equiv(lhs, lhs, sig_eu(), 1, b1);
    auto e4 = check_f_equiv(lhs, lhs, sig_eu(), 1, b4);
    CHECK(e1.structures_checked == e4.structures_checked);
    CHECK(e1.assignments_checked == e4.assignments_checked);
  }

  TEST_CASE("enumerate_structures counts") {
    auto count = [](const SignaturePtr& sig, std::uint32_t n, std::uint32_t f) {
      std::size_t k = 0;
      enumerate_structures(sig, n, f, [&](const Structure&) {
        ++k;
        return true;
      });
      return k;
    };
    CHECK(count(sig_u(), 1, 0) == 2);
    CHECK(count(sig_u(), 2, 0) == 6);
    // {E} on two elements: 4 loop patterns times the 4 edge patterns, of
    // which only the empty one has degree 0.
    CHECK(count(sig_e(), 2, 0) == 2 + 4);
    CHECK(count(sig_e(), 2, 1) == 2 + 16);
    enumerate_structures(sig_eu(), 4, 1, [](const Structure& a) {
      CHECK(degree(a) <= 1);
      return true;
    });
    CHECK_THROWS_AS(count(sig_eu(), 6, 2), BudgetExceeded);
  }

  TEST_CASE("random structures are deterministic and respect the degree bound") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      auto a = random_structure(sig_eu(), 8, 2, seed);
      CHECK(a == random_structure(sig_eu(), 8, 2, seed));
      CHECK(degree(a) <= 2);
    }
    EquivBudget b;
    for (std::size_t i = 0; i < 20; ++i) {
      auto s = equiv_sample(sig_eu(), 2, b, i);
      CHECK(s.size() >= b.sample_min_size);
      CHECK(s.size() <= b.sample_max_size);
      CHECK(s == equiv_sample(sig_eu(), 2, b, i));
    }
  }

  TEST_CASE("isomorphism-reduced enumeration") {
    std::size_t classes = 0;
    enumerate_structures_up_to_isomorphism(sig_u(), 3, 0, [&](const Structure&) {
      ++classes;
      return true;
    });
    // n elements, k of them in U: sum over n of (n + 1).
    CHECK(classes == 2 + 3 + 4);
  }
}
