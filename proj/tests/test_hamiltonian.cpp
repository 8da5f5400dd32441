#include "doctest.h"

#include "diracq/hamiltonian.hpp"
#include "fixtures.hpp"

using namespace diracq;

namespace {

ChartPtr qp = make_chart("R2", {"q", "p"});
Expr q = Expr::symbol("q");
Expr p = Expr::symbol("p");
Expr x1 = Expr::symbol("x1");
Expr x2 = Expr::symbol("x2");
Expr x4 = Expr::symbol("x4");
Expr k = Expr::symbol("k");

DiracStructure standard() { return graph_presymplectic(wedge(KForm::basis(qp, {0}), KForm::basis(qp, {1}))); }

VectorField field(const ChartPtr& c, std::vector<Expr> comps) { return VectorField(c, std::move(comps)); }

}  // namespace

TEST_CASE("admissible vector fields") {
    DiracStructure d = fx::kernel_r4();
    auto c = d.chart();
    AdmissibleFunction a = admissible_vector_field(d, x1 * x1 + k * (x2 + x4));
    REQUIRE(a.admissible);
    CHECK(equal(a.X, field(c, {k, Expr(), Expr(), Expr(-2) * x1})));

    CHECK(equal(admissible_vector_field(standard(), q).X, -VectorField::basis(qp, 1)));

    auto r2 = make_chart("R2x", {"x1", "x2"});
    DiracStructure f = regular_distribution(r2, {VectorField::basis(r2, 0)});
    AdmissibleFunction na = admissible_vector_field(f, x1);
    CHECK_FALSE(na.admissible);
    CHECK(na.witness == "dx1 not in the covector range: residual 1 at dx1");
    CHECK(admissible_vector_field(f, x2 * x2).admissible);
    CHECK_THROWS_WITH_AS(bracket_prime(f, x2, x1), "not admissible: x1", DomainError);
}

TEST_CASE("H_f") {
    DiracStructure d = fx::kernel_r4();
    auto c = d.chart();
    Expr f = x1 * x1 + k * (x2 + x4);
    ComplementH h(d, {Section(VectorField::basis(c, 0), KForm::basis(c, {1}) + KForm::basis(c, {3})),
                      Section(-VectorField::basis(c, 3), KForm::basis(c, {0}))});
    VectorField expected = field(c, {k, Expr(), Expr(), Expr(-2) * x1});
    CHECK(equal(hamiltonian_H(d, h, f), expected));
    CHECK(equal(hamiltonian_H(d, default_complement(d), f), expected));
    AdmissibleFunction a = admissible(d, h, f);
    REQUIRE(a.H);
    CHECK(equal(*a.H, expected));

    auto r2 = make_chart("R2x", {"x1", "x2"});
    DiracStructure fo = regular_distribution(r2, {VectorField::basis(r2, 0)});
    CHECK(hamiltonian_H(fo, default_complement(fo), x2 * x2 + x2).is_zero());

    Expr g = x1 * x1 + x2 * x2;
    DiracStructure pg = graph_poisson(g * KVector::basis(r2, {0, 1}));
    CHECK(equal(hamiltonian_H(pg, default_complement(pg), x1), -g * VectorField::basis(r2, 1)));
}

TEST_CASE("invalid complements are rejected") {
    DiracStructure d = fx::kernel_r4();
    auto c = d.chart();
    CHECK_THROWS_AS(ComplementH(d, {Section(VectorField::basis(c, 0), KForm(c, 1))}), DomainError);
    Section h1(VectorField::basis(c, 0), KForm::basis(c, {1}) + KForm::basis(c, {3}));
    Section h2 = h1 + Section(VectorField::basis(c, 2), KForm(c, 1));
    CHECK_THROWS_AS(ComplementH(d, {h1, h2}), DomainError);
    CHECK_THROWS_AS(ComplementH(d, {h1}), DomainError);
}

TEST_CASE("brackets on the standard plane") {
    DiracStructure d = standard();
    ComplementH h = default_complement(d);
    CHECK(bracket_prime(d, q, p) == Expr(1));
    CHECK(bracket_omega(d, h, q, p) == Expr(1));
    CHECK(bracket_prime(d, q * p, q * p) == Expr());
    CHECK(bracket_prime_residual(d, q * q, p).is_zero());
    CHECK(bracket_omega(d, h, q * q + p, Expr(5)) == Expr());
    JacobiResidual j = jacobi_suite(d, h, q, p, q * p);
    CHECK(j.passed());
}

TEST_CASE("Omega bracket on the G Poisson structure") {
    auto r2 = make_chart("R2x", {"x1", "x2"});
    KVector pi = (x1 * x1 + x2 * x2) * KVector::basis(r2, {0, 1});
    DiracStructure d = graph_poisson(pi);
    ComplementH h = default_complement(d);
    Expr v = bracket_omega(d, h, x1, x2);
    CHECK(equal(v, evaluate_kvector(pi, {differential(r2, x1), differential(r2, x2)})));
    CHECK(equal(v, x1 * x1 + x2 * x2));
}

TEST_CASE("property: Poisson algebra laws on shipped structures") {
    gen::Rng r(99);
    for (const auto& s : fx::shipped()) {
        ComplementH h = default_complement(s.d);
        auto br = [&](const Expr& a, const Expr& b) { return bracket_omega(s.d, h, a, b); };
        int trials = 0;
        for (; trials < 20; ++trials) {
            Expr f = s.admissible(r), g = s.admissible(r), e = s.admissible(r);
            INFO(s.name << " f=" << f.str() << " g=" << g.str() << " e=" << e.str());
            CHECK(is_zero(br(f, g) + br(g, f)));
            CHECK(equal(br(f, g * e), br(f, g) * e + g * br(f, e)));
            JacobiResidual j = jacobi_suite(s.d, h, f, g, e);
            CHECK(is_zero(j.jacobi));
            CHECK(j.field.is_zero());
            CHECK(equal(br(f, g), bracket_prime(s.d, f, g)));
            VectorField res = bracket_prime_residual(s.d, f, g);
            CHECK(membership(s.d, Section(res, KForm(s.d.chart(), 1))).member);
        }
        CHECK(trials >= 20);
    }
}

TEST_CASE("property: bracket independent of choices") {
    gen::Rng r(5);
    DiracStructure d = fx::kernel_r4();
    auto c = d.chart();
    ComplementH h1(d, {Section(VectorField::basis(c, 0), KForm::basis(c, {1}) + KForm::basis(c, {3})),
                       Section(-VectorField::basis(c, 3), KForm::basis(c, {0}))});
    // shifted by D n TM
    ComplementH h2(d, {Section(VectorField::basis(c, 0) + x1 * VectorField::basis(c, 2), KForm::basis(c, {1}) + KForm::basis(c, {3})),
                       Section(-VectorField::basis(c, 1), KForm::basis(c, {0}))});
    std::vector<VectorField> kernel = tangent_kernel(d);
    REQUIRE(kernel.size() == 2);
    auto sample = fx::shipped()[1].admissible;
    for (int t = 0; t < 20; ++t) {
        Expr f = sample(r), g = sample(r);
        CHECK(equal(bracket_omega(d, h1, f, g), bracket_omega(d, h2, f, g)));
        VectorField shifted = admissible_vector_field(d, g).X;
        for (const auto& z : kernel) shifted = shifted + gen::random_coefficient(r, c, 2) * z;
        CHECK(membership(d, Section(shifted, differential(c, g))).member);
        CHECK(equal(shifted.apply(f), bracket_prime(d, f, g)));
    }
}
