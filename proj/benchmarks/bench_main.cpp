#include <random>

#include <benchmark/benchmark.h>

#include "extcalc/atlas.hpp"
#include "extcalc/curvature.hpp"
#include "extcalc/multitensor.hpp"
#include "extcalc/smoothexpr.hpp"
#include "extcalc/testfields.hpp"

namespace {

using namespace extcalc;

void BM_ContractProduct(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    TensorD a(n, Valence{1, 1});
    TensorD b(n, Valence{1, 1});
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = 0.1 * static_cast<double>(i + 1);
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = 0.2 * static_cast<double>(i + 1);
    for (auto _ : state) {
        const TensorD c = contract(tensor_product(a, b), 0, 1);
        benchmark::DoNotOptimize(c.components().data());
    }
}
BENCHMARK(BM_ContractProduct)->Arg(2)->Arg(4);

void BM_TransitionJets(benchmark::State& state) {
    const Transition t("cart", "polar", 2,
                       {parse("sqrt(x1^2+x2^2)"), parse("atan2(x2,x1)")},
                       {parse("x1*cos(x2)"), parse("x1*sin(x2)")});
    const double p[2] = {1.2, 0.7};
    for (auto _ : state) {
        const TransitionData d = transition_data(t, std::span<const double>(p, 2));
        benchmark::DoNotOptimize(d.theta.data());
    }
}
BENCHMARK(BM_TransitionJets);

void BM_ExprJet2(benchmark::State& state) {
    const Expr e = parse("exp(0.3*x1)*sin(x2)+x1^3/(2+x2^2)");
    const std::map<std::string, double> env{{"x1", 0.8}, {"x2", -0.4}};
    const std::vector<std::string> seeds{"x1", "x2"};
    for (auto _ : state) {
        const Jet2 r = eval_jet2(e, env, seeds);
        benchmark::DoNotOptimize(r.v);
    }
}
BENCHMARK(BM_ExprJet2);

void BM_SpatialDifferential(benchmark::State& state) {
    BundleSpec spec{2, {Valence{1, 0}}};
    std::mt19937_64 rng(3);
    const ExtendedConnection conn = make_poly_connection(spec, rng);
    const ExtField f = make_poly_field(spec, Valence{1, 1}, rng);
    const ExtField df = spatial_covariant_differential(conn, f);
    const FiberPointD q = random_fiber_point(spec, rng);
    for (auto _ : state) {
        const TensorD v = df.eval(q);
        benchmark::DoNotOptimize(v.components().data());
    }
}
BENCHMARK(BM_SpatialDifferential);

void BM_StaticCurvature(benchmark::State& state) {
    BundleSpec spec{2, {Valence{1, 0}, Valence{0, 2}}};
    std::mt19937_64 rng(5);
    const ExtendedConnection conn = make_poly_connection(spec, rng);
    const ExtField R = static_curvature(conn);
    const FiberPointD q = random_fiber_point(spec, rng);
    for (auto _ : state) {
        const TensorD v = R.eval(q);
        benchmark::DoNotOptimize(v.components().data());
    }
}
BENCHMARK(BM_StaticCurvature);

// one full Ricci-style probe: nested spatial differentials on a vector field
void BM_CommutatorProbe(benchmark::State& state) {
    BundleSpec spec{2, {Valence{1, 0}}};
    std::mt19937_64 rng(7);
    const ExtendedConnection conn = make_poly_connection(spec, rng);
    const ExtField X = make_poly_field(spec, Valence{1, 0}, rng);
    const ExtField ddX = spatial_covariant_differential(conn, spatial_covariant_differential(conn, X));
    const FiberPointD q = random_fiber_point(spec, rng);
    for (auto _ : state) {
        const TensorD v = ddX.eval(q);
        benchmark::DoNotOptimize(v.components().data());
    }
}
BENCHMARK(BM_CommutatorProbe);

}  // namespace

BENCHMARK_MAIN();
