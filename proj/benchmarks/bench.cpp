#include <benchmark/benchmark.h>

#include "diracq/dsl.hpp"

using namespace diracq;

namespace {

const ChartPtr qp = make_chart("R2", {"q", "p"});
const Expr q = Expr::symbol("q");
const Expr p = Expr::symbol("p");

DiracStructure plane() { return graph_presymplectic(KForm::basis(qp, {0, 1})); }

void BM_RationalArithmetic(benchmark::State& st) {
    Expr a = (q * q - p) / (q + Expr(1));
    Expr b = (p * p * q + Expr::frac(3, 7)) / (q * p - Expr(2));
    for (auto _ : st) benchmark::DoNotOptimize((a + b) * (a - b) / (a * b + Expr(1)));
}
BENCHMARK(BM_RationalArithmetic);

void BM_Differentiate(benchmark::State& st) {
    Expr e = sin(q * p) * exp(q) / (q * q + p * p + Expr(1));
    for (auto _ : st) benchmark::DoNotOptimize(differentiate(differentiate(e, "q"), "p"));
}
BENCHMARK(BM_Differentiate);

void BM_TranscendentalZeroTest(benchmark::State& st) {
    Expr e = sin(q).pow(2) + cos(q).pow(2) - Expr(1);
    for (auto _ : st) benchmark::DoNotOptimize(is_zero(e));
}
BENCHMARK(BM_TranscendentalZeroTest);

void BM_VerifyDirac(benchmark::State& st) {
    auto r2 = make_chart("R2x", {"x1", "x2"});
    Expr x1 = Expr::symbol("x1"), x2 = Expr::symbol("x2");
    KVector pi = (x1 * x1 + x2 * x2) * KVector::basis(r2, {0, 1});
    for (auto _ : st) {
        DiracStructure d = graph_poisson(pi);
        benchmark::DoNotOptimize(verify_dirac(d).passed());
    }
}
BENCHMARK(BM_VerifyDirac);

void BM_JacobiSuite(benchmark::State& st) {
    DiracStructure d = plane();
    ComplementH h = default_complement(d);
    Expr f = q * q * p + p, g = q - p * p * p, k = q * p + Expr(2);
    for (auto _ : st) benchmark::DoNotOptimize(jacobi_suite(d, h, f, g, k).passed());
}
BENCHMARK(BM_JacobiSuite);

void BM_HomotopyIdentity(benchmark::State& st) {
    auto d1 = pullback_over_line(plane());
    Expr t = Expr::symbol("t");
    AForm w = (q * t * t + p) * AForm::basis(d1, {0, 2}) + (t * p) * AForm::basis(d1, {1, 2});
    for (auto _ : st) benchmark::DoNotOptimize(d_A(homotopy_S(w)) + homotopy_S(d_A(w)));
}
BENCHMARK(BM_HomotopyIdentity);

void BM_CommutatorResidual(benchmark::State& st) {
    DiracStructure d = plane();
    auto a = dirac_algebroid(d);
    BundleAtlas b(a, {"U"}, {ComplexAForm(rho_pullback(-p * KForm::basis(qp, {0}), a))}, {}, true);
    ComplementH h = default_complement(d);
    LineSection s{{ComplexExpr(q * p, q)}};
    for (auto _ : st) benchmark::DoNotOptimize(commutator_residual(b, h, q * q, p * q, s));
}
BENCHMARK(BM_CommutatorResidual);

const char* kModel = R"(chart R2 dim 2 coords q p
dirac D = graph_presymplectic(dq/\dp)
atlas B patches U
sigma U = -p*dq
hermitian
polarization P = span((d_p ; -dq))
halfdensity v = q^2 + I*q on U
check all
)";

void BM_ParseModel(benchmark::State& st) {
    for (auto _ : st) benchmark::DoNotOptimize(parse_model(kModel));
}
BENCHMARK(BM_ParseModel);

void BM_RunAllSuites(benchmark::State& st) {
    Model m = parse_model(kModel);
    RunOptions o;
    o.trials = static_cast<int>(st.range(0));
    for (auto _ : st) benchmark::DoNotOptimize(run_checks(m, suite_names(), o).ok());
}
BENCHMARK(BM_RunAllSuites)->Arg(5)->Arg(20)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
