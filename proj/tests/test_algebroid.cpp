#include "doctest.h"

#include "diracq/algebroid.hpp"
#include "generators.hpp"

using namespace diracq;

namespace {

ChartPtr qp = make_chart("R2", {"q", "p"});
ChartPtr xy = make_chart("Rxy", {"x", "y"});
Expr q = Expr::symbol("q");
Expr p = Expr::symbol("p");
Expr x = Expr::symbol("x");
Expr y = Expr::symbol("y");
Expr t = Expr::symbol("t");

KForm dq() { return KForm::basis(qp, {0}); }
KForm dp() { return KForm::basis(qp, {1}); }

DiracStructure standard() { return graph_presymplectic(wedge(dq(), dp())); }

AForm from_form(const PresentationPtr& a, const KForm& phi) {
    AForm out(a, phi.degree());
    for (const auto& [idx, v] : phi.terms()) out.add(idx, v);
    return out;
}

std::vector<PresentationPtr> presentations() {
    auto r4 = make_chart("R4", {"x1", "x2", "x3", "x4"});
    auto r2 = make_chart("R2x", {"x1", "x2"});
    Expr x1 = Expr::symbol("x1");
    Expr x2 = Expr::symbol("x2");
    return {
        tangent_algebroid(xy),
        tangent_algebroid(make_chart("R3", {"x", "y", "z"})),
        cotangent_algebroid(KVector::basis(qp, {0, 1})),
        cotangent_algebroid((x * x + y * y) * KVector::basis(xy, {0, 1})),
        dirac_algebroid(standard()),
        dirac_algebroid(graph_presymplectic(KForm::basis(r4, {0, 1}) + KForm::basis(r4, {0, 3}))),
        dirac_algebroid(graph_poisson((x1 * x1 + x2 * x2) * KVector::basis(r2, {0, 1}))),
        dirac_algebroid(regular_distribution(r2, {VectorField::basis(r2, 0) + x1 * VectorField::basis(r2, 1)})),
    };
}

}  // namespace

TEST_CASE("presentations are Lie algebroids") {
    for (const auto& a : presentations()) {
        PresentationReport r = a->check();
        INFO(a->name() << " " << r.witness);
        CHECK(r.passed());
    }
    // a bracket that breaks the anchor law
    StructureFunctions c(2, std::vector<std::vector<Expr>>(2, std::vector<Expr>(2)));
    c[0][1][0] = Expr(1);
    c[1][0][0] = Expr(-1);
    AlgebroidPresentation bad(xy, "bad", {VectorField::basis(xy, 0), VectorField::basis(xy, 1)}, c);
    CHECK_FALSE(bad.check().anchor_compatible);
}

TEST_CASE("d_A on the tangent algebroid is the de Rham differential") {
    auto a = tangent_algebroid(xy);
    AForm xdy = from_form(a, x * KForm::basis(xy, {1}));
    AForm d = d_A(xdy);
    CHECK(d.get({0, 1}) == Expr(1));
    gen::Rng r(11);
    auto c3 = make_chart("R3", {"x", "y", "z"});
    auto a3 = tangent_algebroid(c3);
    for (int k = 0; k < 3; ++k)
        for (int s = 0; s < 4; ++s) {
            KForm phi = gen::random_form(r, c3, k);
            CHECK(equal(d_A(from_form(a3, phi)), from_form(a3, exterior_derivative(phi))));
        }
    CHECK(d_A(AForm::basis(a3, {0, 1, 2})).terms().empty());
}

TEST_CASE("d_A on the cotangent algebroid") {
    KVector pi = KVector::basis(qp, {0, 1});
    auto a = cotangent_algebroid(pi);
    Expr f = q * q * p + p;
    AForm df = d_A(AForm::scalar(a, f));
    CHECK(equal(df.get({0}), sharp(pi, dq()).apply(f)));
    CHECK(equal(df.get({1}), sharp(pi, dp()).apply(f)));
}

TEST_CASE("d_D of pairs") {
    auto a = dirac_algebroid(standard());
    Expr f = q * q + p * q * q * q;
    AForm df = d_D_pair(KForm::scalar(qp, f), KVector::scalar(qp, Expr()), a);
    for (std::size_t i = 0; i < 2; ++i) CHECK(equal(df.get({static_cast<int>(i)}), a->realization()[i].X().apply(f)));

    AForm v = d_D_pair(p * dq(), KVector(qp, 1), a);
    CHECK(v.get({0, 1}) == Expr(-1));

    // phi = 0: the contravariant part alone, evaluated on the frame's covectors
    KVector Q = q * KVector::basis(qp, {1});
    AForm w = d_D_pair(KForm(qp, 1), Q, a);
    const auto& fr = a->realization();
    CHECK(equal(w.get({0, 1}), contravariant_eval(Q, {fr[0].X(), fr[1].X()}, {fr[0].xi(), fr[1].xi()})));

    CHECK_THROWS_AS(d_D_pair(dq(), KVector(qp, 2), a), DomainError);
    CHECK_THROWS_AS(d_D_pair(dq(), KVector(qp, 1), tangent_algebroid(qp)), DomainError);
}

TEST_CASE("property: d_D splits as d + del") {
    gen::Rng r(2024);
    auto r2 = make_chart("R2x", {"x1", "x2"});
    Expr x1 = Expr::symbol("x1");
    std::vector<PresentationPtr> ps{dirac_algebroid(standard()),
                                    dirac_algebroid(graph_poisson((x1 * x1 + 1) * KVector::basis(r2, {0, 1}))),
                                    dirac_algebroid(regular_distribution(r2, {VectorField::basis(r2, 0)}))};
    int count = 0;
    for (const auto& a : ps)
        for (int s = 0; s < 8; ++s) {
            const int l = r.uniform(0, 1);
            KForm phi = gen::random_form(r, a->chart(), l);
            KVector Q = gen::random_kvector(r, a->chart(), l);
            CHECK(equal(d_D_pair(phi, Q, a), d_A(pair_form(phi, Q, a))));
            ++count;
        }
    CHECK(count >= 20);
}

TEST_CASE("property: d_A squares to zero and is a graded derivation") {
    gen::Rng r(77);
    int count = 0;
    for (const auto& a : presentations()) {
        const int rk = static_cast<int>(a->rank());
        for (int s = 0; s < 7; ++s) {
            const int k = r.uniform(0, rk);
            AForm th = gen::random_aform(r, a, k);
            CHECK(d_A(d_A(th)).is_zero());
            const int l = r.uniform(0, rk - k);
            AForm vt = gen::random_aform(r, a, l);
            AForm lhs = d_A(wedge(th, vt));
            AForm rhs = wedge(d_A(th), vt) + Expr(k % 2 ? -1 : 1) * wedge(th, d_A(vt));
            CHECK(equal(lhs, rhs));
            ++count;
        }
    }
    CHECK(count >= 50);
}

TEST_CASE("rho pull-back of 2-forms") {
    DiracStructure d = standard();
    auto a = dirac_algebroid(d);
    AForm s = rho_pullback(wedge(dq(), dp()), a);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j)
            CHECK(s.get({static_cast<int>(i), static_cast<int>(j)}) == pairing_minus(d.frame()[i], d.frame()[j]));
    CHECK(rho_pullback(KForm(qp, 2), a).is_zero());
    KForm alpha = p * dq();
    CHECK(equal(rho_pullback(exterior_derivative(alpha), a), d_A(rho_pullback(alpha, a))));
    gen::Rng r(8);
    for (const auto& pr : presentations())
        for (int k = 0; k < 3; ++k) {
            if (pr->chart()->dim() < 2) continue;
            KForm al = gen::random_form(r, pr->chart(), 1);
            CHECK(equal(rho_pullback(exterior_derivative(al), pr), d_A(rho_pullback(al, pr))));
        }
}

TEST_CASE("curvature of connections") {
    auto tan = tangent_algebroid(xy);
    AConnection zero{tan, {{ComplexAForm(AForm(tan, 1))}}};
    CHECK(curvature(zero)[0][0].is_zero());

    AConnection c1{tan, {{ComplexAForm(from_form(tan, x * KForm::basis(xy, {1})))}}};
    CHECK(curvature(c1)[0][0].get({0, 1}) == ComplexExpr(1));
    CHECK(curvature_operator(c1, 0, 1, 0, 0) == ComplexExpr(1));

    auto a = dirac_algebroid(standard());
    ComplexAForm sigma(rho_pullback(-p * dq(), a));
    AConnection line{a, {{ComplexExpr::two_pi_i() * sigma}}};
    ComplexAForm k = curvature(line)[0][0];
    ComplexAForm expected = ComplexExpr::two_pi_i() * ComplexAForm(rho_pullback(wedge(dq(), dp()), a));
    CHECK(equal(k, expected));

    gen::Rng r(31);
    for (const auto& pr : presentations()) {
        const std::size_t m = 2;
        AConnection conn{pr, std::vector<std::vector<ComplexAForm>>(m, std::vector<ComplexAForm>(m))};
        for (auto& row : conn.theta)
            for (auto& th : row) th = ComplexAForm(gen::random_aform(r, pr, 1, 1), gen::random_aform(r, pr, 1, 1));
        auto kap = curvature(conn);
        for (std::size_t i = 0; i < pr->rank(); ++i)
            for (std::size_t j = i + 1; j < pr->rank(); ++j)
                for (std::size_t a1 = 0; a1 < m; ++a1)
                    for (std::size_t b1 = 0; b1 < m; ++b1)
                        CHECK(equal(curvature_operator(conn, i, j, a1, b1),
                                    kap[a1][b1].get({static_cast<int>(i), static_cast<int>(j)})));
    }
}

TEST_CASE("pull-back over the line") {
    DiracStructure d = standard();
    auto base = dirac_algebroid(d);
    auto d1 = pullback_over_line(d);
    CHECK(d1->rank() == 3);
    CHECK(d1->chart()->dim() == 3);
    CHECK(equal(d1->anchor(2), VectorField::basis(d1->chart(), 2)));
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j)
            for (std::size_t k = 0; k < 2; ++k) CHECK(d1->c(i, j, k) == base->c(i, j, k));
    CHECK(d1->check().passed());
    CHECK_THROWS_AS(pullback_over_line(base, "q"), DomainError);

    auto line = make_chart("R1", {"q"});
    DiracStructure bad(line, {Section(VectorField::basis(line, 0), KForm::basis(line, {0}))});
    CHECK_THROWS_AS(pullback_over_line(bad), DomainError);
}

TEST_CASE("homotopy operator") {
    auto d1 = pullback_over_line(standard());
    AForm tdt = t * AForm::basis(d1, {2});
    CHECK(equal(homotopy_S(tdt), AForm::scalar(d1, t * t / Expr(2))));
    CHECK(homotopy_S(q * t * AForm::basis(d1, {0})).is_zero());
    CHECK_THROWS_WITH_AS(homotopy_S(sin(t) * AForm::basis(d1, {2})), "unsupported integrand: sin(t)", DomainError);

    // dt /\ gamma_1 = -gamma_1 /\ dt
    AForm w = -t * AForm::basis(d1, {0, 2});
    CHECK(equal(homotopy_S(w), (t * t / Expr(2)) * AForm::basis(d1, {0})));
    AForm lhs = d_A(homotopy_S(w)) + homotopy_S(d_A(w));
    CHECK(equal(lhs, w - pullback_form(restrict_to_zero(w), d1)));

    AForm f = AForm::scalar(d1, q * t * t + p);
    CHECK(equal(homotopy_S(d_A(f)), f - pullback_form(restrict_to_zero(f), d1)));
}

TEST_CASE("property: homotopy identity and pull-back commutation") {
    gen::Rng r(404);
    auto r2 = make_chart("R2x", {"x1", "x2"});
    Expr x1 = Expr::symbol("x1");
    std::vector<PresentationPtr> d1s{pullback_over_line(standard()),
                                     pullback_over_line(graph_poisson((x1 * x1 + 1) * KVector::basis(r2, {0, 1})))};
    int count = 0;
    for (const auto& d1 : d1s)
        for (int s = 0; s < 12; ++s) {
            const int l = r.uniform(0, 3);
            AForm w = gen::random_aform(r, d1, l);
            AForm lhs = l == 0 ? homotopy_S(d_A(w)) : d_A(homotopy_S(w)) + homotopy_S(d_A(w));
            CHECK(equal(lhs, w - pullback_form(restrict_to_zero(w), d1)));
            ++count;
            const int k = r.uniform(0, 2);
            AForm b = gen::random_aform(r, d1->base(), k);
            CHECK(equal(pullback_form(d_A(b), d1), d_A(pullback_form(b, d1))));
        }
    CHECK(count >= 20);
}
