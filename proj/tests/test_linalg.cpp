#include "doctest.h"

#include "diracq/linalg.hpp"
#include "generators.hpp"

using namespace diracq;

namespace {
Expr x = Expr::symbol("x");
Expr y = Expr::symbol("y");

Matrix from_rows(const std::vector<std::vector<Expr>>& rows) {
    Matrix m(rows.size(), rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
    return m;
}
}  // namespace

TEST_CASE("solve with symbolic entries") {
    Matrix a = from_rows({{x, Expr(1)}, {Expr(1), y}});
    auto r = solve(a, {Expr(1), Expr(0)}, PivotOrder::LowestIndexFirst);
    REQUIRE(r.consistent);
    CHECK(r.x[0] == y / (x * y - 1));
    CHECK(r.x[1] == -1 / (x * y - 1));
}

TEST_CASE("free variables are zeroed according to pivot order") {
    Matrix a = from_rows({{Expr(1), Expr(1), Expr(1)}});
    auto lo = solve(a, {Expr(5)}, PivotOrder::LowestIndexFirst);
    auto hi = solve(a, {Expr(5)}, PivotOrder::HighestIndexFirst);
    CHECK(lo.x == std::vector<Expr>{Expr(5), Expr(0), Expr(0)});
    CHECK(hi.x == std::vector<Expr>{Expr(0), Expr(0), Expr(5)});
}

TEST_CASE("inconsistent systems carry a witness") {
    Matrix a = from_rows({{Expr(1), x}, {Expr(2), 2 * x}});
    auto r = solve(a, {Expr(1), Expr(3)}, PivotOrder::LowestIndexFirst);
    CHECK_FALSE(r.consistent);
    REQUIRE(r.witness_row);
    CHECK_FALSE(r.witness_residual.is_canonical_zero());
}

TEST_CASE("null space and rank") {
    Matrix a = from_rows({{Expr(1), x}});
    auto ns = null_space(a, PivotOrder::LowestIndexFirst);
    REQUIRE(ns.size() == 1);
    CHECK(ns[0][0] == -x);
    CHECK(ns[0][1] == Expr(1));
    CHECK(rank(from_rows({{x, y}, {x * x, x * y}})) == 1);
    CHECK(rank(from_rows({{sin(x), cos(x)}, {-cos(x), sin(x)}})) == 2);
    CHECK(rank(from_rows({{sin(x) * sin(x), Expr(1)}, {Expr(1) - cos(x) * cos(x), Expr(1)}})) == 1);
}

TEST_CASE("degeneracy locus lists non-constant pivots") {
    auto ech = row_echelon(from_rows({{x, Expr(0)}, {Expr(0), Expr(3)}}), PivotOrder::LowestIndexFirst);
    auto loc = degeneracy_locus(ech.pivots);
    REQUIRE(loc.size() == 1);
    CHECK(loc[0] == "x");
}

TEST_CASE("property: random square systems round trip") {
    gen::Rng r(17);
    std::vector<std::string> vars{"x", "y"};
    for (int t = 0; t < 25; ++t) {
        const std::size_t n = static_cast<std::size_t>(r.uniform(2, 4));
        Matrix a(n, n);
        std::vector<Expr> sol(n);
        for (std::size_t i = 0; i < n; ++i) {
            sol[i] = gen::random_polynomial(r, vars, 2, 2);
            for (std::size_t j = 0; j < n; ++j) a(i, j) = gen::random_polynomial(r, vars, 1, 2);
        }
        std::vector<Expr> b(n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) b[i] += a(i, j) * sol[j];
        if (rank(a) < n) continue;
        auto res = solve(a, b, t % 2 ? PivotOrder::HighestIndexFirst : PivotOrder::LowestIndexFirst);
        REQUIRE(res.consistent);
        for (std::size_t i = 0; i < n; ++i) CHECK(res.x[i] == sol[i]);
    }
}
