#include <benchmark/benchmark.h>

#include "hanf/eval.hpp"
#include "hanf/formula.hpp"
#include "hanf/hnf.hpp"
#include "hanf/sphere.hpp"
#include "hanf/structure.hpp"

namespace {

hanf::SignaturePtr sig_eu() {
  static const auto sig = hanf::make_signature({{"E", 2}, {"U", 1}});
  return sig;
}

/// Directed cycle over {E, U}, every seventh element in U.
hanf::Structure cycle(std::uint32_t n) {
  hanf::StructureBuilder b(sig_eu(), n);
  for (hanf::Element i = 0; i < n; ++i) {
    b.add("E", {i, (i + 1) % n});
    if (i % 7 == 3) b.add("U", {i});
  }
  return b.build();
}

hanf::HnfFormula compile(const char* text, std::uint32_t f) {
  hanf::NormalizationConfig cfg;
  cfg.f = f;
  return hanf::normalize(hanf::parse_formula(text, sig_eu()), sig_eu(), cfg);
}

void BM_EvalHnfOnCycle(benchmark::State& state) {
  static const auto psi = compile("(exists x (and (rel U x) (rel E x x)))", 2);
  const hanf::HnfEvaluator eval(psi);
  const auto a = cycle(static_cast<std::uint32_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(eval.eval(a, {}));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_EvalHnfOnCycle)->RangeMultiplier(10)->Range(1000, 100000)->Complexity();

void BM_EvalFoOnCycle(benchmark::State& state) {
  const auto phi = hanf::parse_formula("(forall x (exists y (and (rel E x y) (not (rel U y)))))",
                                       sig_eu());
  const auto a = cycle(static_cast<std::uint32_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(hanf::eval_fo(a, {}, phi));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_EvalFoOnCycle)->RangeMultiplier(10)->Range(100, 10000)->Complexity();

void BM_NormalizeRankOne(benchmark::State& state) {
  const auto phi = hanf::parse_formula("(exists x (rel U x))", sig_eu());
  hanf::NormalizationConfig cfg;
  cfg.f = static_cast<std::uint32_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(hanf::normalize(phi, sig_eu(), cfg));
}
BENCHMARK(BM_NormalizeRankOne)->DenseRange(1, 2)->Unit(benchmark::kMillisecond);

void BM_NormalizeNested(benchmark::State& state) {
  const auto phi = hanf::parse_formula("(forall x (exists y (rel E x y)))", sig_eu());
  hanf::NormalizationConfig cfg;
  cfg.f = 1;
  for (auto _ : state) benchmark::DoNotOptimize(hanf::normalize(phi, sig_eu(), cfg));
}
BENCHMARK(BM_NormalizeNested)->Unit(benchmark::kMillisecond);

void BM_EnumerateSpheres(benchmark::State& state) {
  static const auto sig = hanf::make_signature({{"E", 2}});
  const auto d = static_cast<std::uint32_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(hanf::enumerate_spheres(sig, d, 1, 2));
}
BENCHMARK(BM_EnumerateSpheres)->DenseRange(1, 3)->Unit(benchmark::kMillisecond);

void BM_CanonicalForm(benchmark::State& state) {
  const auto a = cycle(64);
  std::vector<hanf::Element> centers{0};
  const auto s = hanf::extract_sphere(a, centers, static_cast<std::uint32_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(hanf::canonical_form(s));
}
BENCHMARK(BM_CanonicalForm)->DenseRange(1, 9, 4);

}  // namespace

BENCHMARK_MAIN();
