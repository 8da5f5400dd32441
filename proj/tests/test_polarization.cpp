#include "doctest.h"

#include "diracq/polarization.hpp"
#include "fixtures.hpp"

using namespace diracq;

namespace {

ChartPtr qp = make_chart("R2", {"q", "p"});
Expr q = Expr::symbol("q");
Expr p = Expr::symbol("p");
KForm dq() { return KForm::basis(qp, {0}); }
KForm dp() { return KForm::basis(qp, {1}); }
VectorField d_q() { return VectorField::basis(qp, 0); }
VectorField d_p() { return VectorField::basis(qp, 1); }
const ComplexExpr tpi = ComplexExpr::two_pi_i();
const ComplexExpr I = ComplexExpr::i();

struct Standard {
    DiracStructure d = graph_presymplectic(wedge(dq(), dp()));
    PresentationPtr a = dirac_algebroid(d);
    ComplementH h = default_complement(d);
    BundleAtlas b{a, {"U"}, {ComplexAForm(rho_pullback(-p * dq(), a))}, {}, true};

    Polarization real_p() const { return {d, h, {ComplexSection(Section(d_q(), dp()))}}; }
    Polarization vertical() const { return {d, h, {ComplexSection(Section(d_p(), -dq()))}}; }
    Polarization holomorphic() const {
        return {d, h, {ComplexSection(Section(d_q(), dp()), Section(-d_p(), dq()))}};
    }
};

HalfDensitySection hd(const ComplexExpr& z) { return half_density(qp, LineSection{{z}}); }

ComplexExpr random_complex(gen::Rng& r, const ChartPtr& c, int deg = 2) {
    return {gen::random_coefficient(r, c, deg), gen::random_coefficient(r, c, deg)};
}

}  // namespace

TEST_CASE("polarization checks") {
    auto r4 = make_chart("R4qp", {"q1", "q2", "p1", "p2"});
    KForm w = KForm::basis(r4, {0, 2}) + KForm::basis(r4, {1, 3});
    DiracStructure d4 = graph_presymplectic(w);
    ComplementH h4 = default_complement(d4);
    Polarization std4{d4, h4,
                      {ComplexSection(Section(VectorField::basis(r4, 0), KForm::basis(r4, {2}))),
                       ComplexSection(Section(VectorField::basis(r4, 1), KForm::basis(r4, {3})))}};
    PolarizationReport r = polarization_check(std4);
    CHECK(r.passed());
    CHECK(r.rank == 2);
    CHECK(r.real_rank == 2);

    Standard s;
    Polarization both{s.d, s.h, {ComplexSection(Section(d_q(), dp())), ComplexSection(Section(d_p(), -dq()))}};
    PolarizationReport rb = polarization_check(both);
    CHECK_FALSE(rb.isotropic);
    CHECK(rb.witness == "Lambda(p1,p2) = 1");

    PolarizationReport rh = polarization_check(s.holomorphic());
    CHECK(rh.passed());
    CHECK(rh.rank == 1);
    CHECK(rh.real_rank == 0);

    // degenerate form on R3: the complement is a genuine choice
    auto r3 = make_chart("R3", {"x", "y", "z"});
    DiracStructure d3 = graph_presymplectic(KForm::basis(r3, {0, 1}));
    Section ex(VectorField::basis(r3, 0), KForm::basis(r3, {1}));
    Section ey(VectorField::basis(r3, 1), -KForm::basis(r3, {0}));
    Section tilted = ex + Section(VectorField::basis(r3, 2), KForm(r3, 1));
    Polarization inside{d3, ComplementH(d3, {ex, ey}), {ComplexSection(ex)}};
    CHECK(polarization_check(inside).passed());
    Polarization outside{d3, ComplementH(d3, {tilted, ey}), {ComplexSection(ex)}};
    PolarizationReport ro = polarization_check(outside);
    CHECK_FALSE(ro.in_H);
    CHECK(ro.witness.rfind("p1 not in H", 0) == 0);
}

TEST_CASE("complex membership") {
    Standard s;
    auto P = s.holomorphic().frame;
    ComplexSection x = ComplexExpr(q, p) * P[0];
    ComplexMembership m = complex_membership(P, x);
    REQUIRE(m.member);
    CHECK(equal(m.coefficients[0], ComplexExpr(q, p)));
    CHECK_FALSE(complex_membership(P, P[0].conj()).member);
    CHECK(complex_membership({}, ComplexSection(Section(qp))).member);
}

TEST_CASE("S(P) membership") {
    Standard s;
    Polarization P = s.real_p();
    CHECK(sp_membership(P, p).member);
    SPMembership sq = sp_membership(P, q * q);
    CHECK_FALSE(sq.member);
    CHECK(sq.witness.find("not in P") != std::string::npos);
    CHECK(sp_membership(P, Expr(4)).member);
}

TEST_CASE("delta connection") {
    Standard s;
    BundleAtlas flat(s.a, {"U"}, {ComplexAForm(AForm(s.a, 1))}, {}, true);
    CHECK(is_zero(delta_connection(flat, ComplexSection(Section(d_q(), dp())), hd(ComplexExpr(1)))));

    auto r2 = make_chart("R2x", {"x1", "x2"});
    auto fa = dirac_algebroid(regular_distribution(r2, {VectorField::basis(r2, 0)}));
    BundleAtlas fb(fa, {"U"}, {ComplexAForm(AForm(fa, 1))});
    HalfDensitySection v = half_density(r2, LineSection{{ComplexExpr(Expr::symbol("x1"))}});
    CHECK(is_zero(delta_connection(fb, ComplexSection(Section(VectorField(r2), KForm::basis(r2, {1}))), v)));

    gen::Rng r(41);
    for (int t = 0; t < 10; ++t) {
        ComplexSection psi = random_complex(r, qp, 1) * ComplexSection(Section(d_q(), dp())) +
                             random_complex(r, qp, 1) * ComplexSection(Section(d_p(), -dq()));
        HalfDensitySection w = hd(random_complex(r, qp));
        w.kappa.coeff = random_complex(r, qp, 1);
        ComplexExpr u = random_complex(r, qp);
        HalfDensitySection uw{LineSection{{u * w.s.s[0]}}, w.kappa};
        ComplexExpr rho_u = ComplexExpr(psi.re.X().apply(u.re()), psi.re.X().apply(u.im())) +
                            I * ComplexExpr(psi.im.X().apply(u.re()), psi.im.X().apply(u.im()));
        HalfDensitySection dw = delta_connection(s.b, psi, w).normalized();
        HalfDensitySection lhs = delta_connection(s.b, psi, uw);
        HalfDensitySection rhs{LineSection{{u * dw.s.s[0] + rho_u * w.normalized().s.s[0]}}, dw.kappa};
        CHECK(equal(lhs, rhs));
    }
    CHECK_THROWS_AS(delta_connection(s.b, ComplexSection(Section(d_q(), dq())), hd(ComplexExpr(1))), DomainError);
}

TEST_CASE("f^ on half-densities") {
    Standard s;
    gen::Rng r(8);
    HalfDensitySection v = hd(random_complex(r, qp));
    CHECK(equal(fhat_halfdensity(s.b, s.h, Expr(3), v), hd(Expr(-3) * tpi * v.s.s[0])));
    CHECK(equal(fhat_halfdensity(s.b, s.h, q, hd(ComplexExpr(1))), hd(-(tpi * q))));

    auto sample = fx::shipped()[0].admissible;
    for (int t = 0; t < 10; ++t) {
        Expr f = t == 0 ? q : sample(r);
        Expr g = t == 0 ? p : sample(r);
        HalfDensitySection w = hd(random_complex(r, qp));
        w.kappa.coeff = random_complex(r, qp, 1);
        HalfDensitySection lhs = fhat_halfdensity(s.b, s.h, bracket_omega(s.d, s.h, f, g), w);
        HalfDensitySection fg = fhat_halfdensity(s.b, s.h, f, fhat_halfdensity(s.b, s.h, g, w));
        HalfDensitySection gf = fhat_halfdensity(s.b, s.h, g, fhat_halfdensity(s.b, s.h, f, w));
        CHECK(is_zero(lhs - (fg - gf)));
    }
}

TEST_CASE("quantization residual") {
    Standard s;
    gen::Rng r(51);
    ComplexSection psi_p = hamiltonian_pair(s.real_p(), p);
    CHECK(is_zero(lemma51_residual(s.b, s.h, psi_p, p, hd(random_complex(r, qp)))));
    CHECK(is_zero(lemma51_residual(s.b, s.h, ComplexSection(Section(d_q(), dp())), p, hd(random_complex(r, qp)))));

    const std::vector<Expr> fs{q, p, q + p, Expr(2), Expr::frac(-1, 3)};
    for (const Polarization& P : {s.real_p(), s.vertical(), s.holomorphic()})
        for (const Expr& f : fs) {
            HalfDensitySection v = hd(random_complex(r, qp));
            v.kappa.coeff = random_complex(r, qp, 1);
            for (const auto& psi : P.frame) CHECK(is_zero(lemma51_residual(s.b, s.h, psi, f, v)));
        }

    BundleAtlas bad(s.a, {"U"}, {ComplexAForm(rho_pullback(Expr(-2) * p * dq(), s.a))}, {}, true);
    CHECK_THROWS_AS(lemma51_residual(bad, s.h, psi_p, p, hd(ComplexExpr(1))), DomainError);
}

TEST_CASE("self-adjointness integrand") {
    Standard s;
    gen::Rng r(60);
    const std::vector<Expr> fs{q, p, q + p, Expr(5)};
    for (int t = 0; t < 10; ++t) {
        HalfDensitySection v1 = hd(random_complex(r, qp)), v2 = hd(random_complex(r, qp));
        v2.kappa.coeff = random_complex(r, qp, 1);
        for (const Expr& f : fs) CHECK(is_zero(selfadjoint_integrand(s.b, s.h, f, v1, v2).coeff));
    }
    BundleAtlas leaky(s.a, {"U"}, {ComplexAForm(rho_pullback(-p * dq(), s.a), rho_pullback(q * dp(), s.a))}, {}, true);
    AlphaDensity w = selfadjoint_integrand(leaky, s.h, q, hd(ComplexExpr(1)), hd(ComplexExpr(1)));
    CHECK(w.alpha == Rational(1));
    CHECK_FALSE(is_zero(w.coeff));
}

TEST_CASE("Q bundle") {
    Standard s;
    CHECK(q_bundle(s.holomorphic()).frame.empty());
    QBundle qr = q_bundle(s.real_p(), {p, Expr(1), q * q});
    REQUIRE(qr.frame.size() == 1);
    CHECK(complex_membership(s.real_p().frame, ComplexSection(qr.frame[0])).member);
    CHECK(qr.projectable);

    auto r4 = make_chart("R4qp", {"q1", "q2", "p1", "p2"});
    DiracStructure d4 = graph_presymplectic(KForm::basis(r4, {0, 2}) + KForm::basis(r4, {1, 3}));
    Section a(VectorField::basis(r4, 0), KForm::basis(r4, {2}));
    ComplexSection mixed(Section(VectorField::basis(r4, 1), KForm::basis(r4, {3})),
                         Section(-VectorField::basis(r4, 3), KForm::basis(r4, {1})));
    Polarization P{d4, default_complement(d4), {ComplexSection(a), mixed}};
    CHECK(polarization_check(P).passed());
    QBundle q4 = q_bundle(P, {Expr::symbol("p1")});
    REQUIRE(q4.frame.size() == 1);
    CHECK(complex_membership({ComplexSection(a)}, ComplexSection(q4.frame[0])).member);
    CHECK(q4.projectable);
}

TEST_CASE("invariance of the polarized sections") {
    Standard s;
    Polarization P = s.vertical();
    gen::Rng r(77);
    for (int t = 0; t < 5; ++t) {
        ComplexExpr z(gen::random_polynomial(r, {"q"}, 3, 3), gen::random_polynomial(r, {"q"}, 3, 3));
        InvarianceProbe pr = hzero_probe(P, s.b, hd(z), {q, q * q, Expr(2), p});
        CHECK(pr.applicable);
        CHECK(pr.passed);
    }
    InvarianceProbe no = hzero_probe(P, s.b, hd(ComplexExpr(p)), {q});
    CHECK_FALSE(no.applicable);
    CHECK(sp_membership(P, q * q).member);
    CHECK_FALSE(sp_membership(P, p * p).member);
}

TEST_CASE("density quadrature") {
    auto c2 = qp;
    CHECK(abs(integrate_density(AlphaDensity(c2, 1, ComplexExpr(1)), {{0, 1}, {0, 1}}) - 1) < Real("1e-8"));
    auto line = make_chart("R1", {"x"});
    Expr x = Expr::symbol("x");
    CHECK(abs(integrate_density(AlphaDensity(line, 1, ComplexExpr(x)), {{0, 1}}) - Real("0.5")) < Real("1e-8"));
    AlphaDensity cube(line, 1, ComplexExpr(x * x * x));
    Real lhs = integrate_density(lie_derivative_density(VectorField::basis(line, 0), cube), {{-1, 1}});
    CHECK(abs(lhs - 2) < Real("1e-6"));
    CHECK_THROWS_AS(integrate_density(AlphaDensity(line, 1, ComplexExpr(Expr(1) / x)), {{-1, 1}}), DomainError);
    CHECK_THROWS_AS(integrate_density(AlphaDensity(line, Rational(1, 2), ComplexExpr(x)), {{0, 1}}), DomainError);
}
