#include "doctest.h"

#include <thread>

#include "diracq/courant.hpp"
#include "generators.hpp"

using namespace diracq;

namespace {

ChartPtr qp = make_chart("R2", {"q", "p"});
ChartPtr r4 = make_chart("R4", {"x1", "x2", "x3", "x4"});
Expr q = Expr::symbol("q");
Expr p = Expr::symbol("p");
Expr x1 = Expr::symbol("x1");
Expr x2 = Expr::symbol("x2");

KForm dq() { return KForm::basis(qp, {0}); }
KForm dp() { return KForm::basis(qp, {1}); }
VectorField Dq() { return VectorField::basis(qp, 0); }
VectorField Dp() { return VectorField::basis(qp, 1); }
KForm zero1(const ChartPtr& c) { return KForm(c, 1); }

KForm kernel_omega() {
    return KForm::basis(r4, {0, 1}) + KForm::basis(r4, {0, 3});
}

}  // namespace

TEST_CASE("pairings") {
    Section a(Dq(), dp());
    Section b(Dp(), -dq());
    CHECK(pairing_plus(a, b) == Expr(0));
    // dp(d_q) = 0, so a is null; (d_q, dq) is not
    CHECK(pairing_plus(a, a) == Expr(0));
    Section c(Dq(), dq());
    CHECK(pairing_plus(c, c) == Expr(1));
    CHECK(pairing_minus(a, b) == Expr(1));
    CHECK(pairing_minus(a, a) == Expr(0));
    gen::Rng r(5);
    for (int t = 0; t < 20; ++t) {
        Section u(gen::random_vector_field(r, qp), gen::random_form(r, qp, 1));
        Section v(gen::random_vector_field(r, qp), gen::random_form(r, qp, 1));
        CHECK(equal(pairing_plus(u, v), pairing_plus(v, u)));
        CHECK(equal(pairing_minus(u, v), -pairing_minus(v, u)));
    }
    Section other(VectorField(make_chart("N", {"q", "p"})), KForm(make_chart("N", {"q", "p"}), 1));
    CHECK_THROWS_AS(pairing_plus(a, other), ChartMismatch);
}

TEST_CASE("Courant bracket") {
    Section a(Dq(), dp());
    Section b(q * Dq(), q * dp());
    CHECK(equal(courant_bracket(a, b), a));
    CHECK(courant_bracket(a, a).is_zero());
    CHECK(courant_bracket(Section(Dq(), zero1(qp)), Section(Dp(), zero1(qp))).is_zero());

    // oracle: coordinate expansion of [X,Y], L_X eta and i_Y d xi written out by hand
    Section c(p * Dq(), q * q * dp());
    Section d(q * Dp(), p * dq());
    Section br = courant_bracket(c, d);
    // [p d_q, q d_p] = p d_p - q d_q
    CHECK(equal(br.X(), p * Dp() - q * Dq()));
    // L_{p d_q}(p dq) = i_X d(p dq) + d(p^2) = -p dp + 2p dp
    // i_{q d_p} d(q^2 dp) = i_{q d_p}(2q dq/\dp) = -2q^2 dq
    CHECK(equal(br.xi(), p * dp() + Expr(2) * q * q * dq()));
}

TEST_CASE("graph of a presymplectic form") {
    DiracStructure d = graph_presymplectic(wedge(dq(), dp()));
    REQUIRE(d.frame().size() == 2);
    CHECK(equal(d.frame()[0], Section(Dq(), dp())));
    CHECK(equal(d.frame()[1], Section(Dp(), -dq())));
    CHECK(verify_dirac(d).passed());

    DiracStructure e = graph_presymplectic(kernel_omega());
    Matrix m = e.form_block();
    const int expected[4][4] = {{0, -1, 0, -1}, {1, 0, 0, 0}, {0, 0, 0, 0}, {1, 0, 0, 0}};
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) CHECK(m(i, j) == Expr(expected[i][j]));
    CHECK(verify_dirac(e).passed());

    DiracStructure z = graph_presymplectic(KForm(qp, 2));
    CHECK(z.frame()[0].xi().is_zero());
    CHECK(verify_dirac(z).passed());

    auto r3 = make_chart("R3", {"x", "y", "z"});
    KForm bad = Expr::symbol("x") * KForm::basis(r3, {1, 2});
    CHECK_THROWS_WITH_AS(graph_presymplectic(bad), "not presymplectic", DomainError);
}

TEST_CASE("graph of a Poisson bivector") {
    DiracStructure d = graph_poisson(KVector::basis(qp, {0, 1}));
    CHECK(equal(d.frame()[0], Section(-Dp(), dq())));
    CHECK(equal(d.frame()[1], Section(Dq(), dp())));
    CHECK(verify_dirac(d).passed());

    auto r2 = make_chart("R2x", {"x1", "x2"});
    Expr g = x1 * x1 + x2 * x2;
    DiracStructure gd = graph_poisson(g * KVector::basis(r2, {0, 1}));
    // (G (b d_1 - a d_2), a dx1 + b dx2) at (a,b) = (1,0) and (0,1)
    CHECK(equal(gd.frame()[0].X(), -g * VectorField::basis(r2, 1)));
    CHECK(equal(gd.frame()[1].X(), g * VectorField::basis(r2, 0)));
    CHECK(verify_dirac(gd).passed());

    DiracStructure zero = graph_poisson(KVector(qp, 2));
    CHECK(zero.frame()[0].X().is_zero());
    CHECK(equal(zero.frame()[1].xi(), dp()));
    CHECK(verify_dirac(zero).passed());

    auto r3 = make_chart("R3", {"x", "y", "z"});
    KVector bad = KVector::basis(r3, {0, 1}) + Expr::symbol("y") * KVector::basis(r3, {1, 2});
    CHECK_THROWS_WITH_AS(graph_poisson(bad), "not Poisson", DomainError);
}

TEST_CASE("regular distributions") {
    auto r2 = make_chart("R2x", {"x1", "x2"});
    DiracStructure a = regular_distribution(r2, {VectorField::basis(r2, 0)});
    CHECK(equal(a.frame()[0], Section(VectorField::basis(r2, 0), zero1(r2))));
    CHECK(equal(a.frame()[1], Section(VectorField(r2), KForm::basis(r2, {1}))));
    CHECK(verify_dirac(a).passed());

    auto r3 = make_chart("R3x", {"x1", "x2", "x3"});
    DiracStructure b = regular_distribution(r3, {VectorField::basis(r3, 0), VectorField::basis(r3, 1)});
    CHECK(equal(b.frame()[2].xi(), KForm::basis(r3, {2})));
    CHECK(verify_dirac(b).passed());

    VectorField tilted = VectorField::basis(r2, 0) + x1 * VectorField::basis(r2, 1);
    DiracStructure c = regular_distribution(r2, {tilted});
    // null space of (1, x1) with the lowest free column set to one
    CHECK(equal(c.frame()[1].xi(), -x1 * KForm::basis(r2, {0}) + KForm::basis(r2, {1})));
    CHECK(pair(c.frame()[1].xi(), tilted) == Expr(0));
    CHECK(verify_dirac(c).passed());

    // [d_x, d_y + x d_z] = d_z leaves the span
    auto r3b = make_chart("R3", {"x", "y", "z"});
    VectorField u = VectorField::basis(r3b, 0);
    VectorField v = VectorField::basis(r3b, 1) + Expr::symbol("x") * VectorField::basis(r3b, 2);
    CHECK_THROWS_AS(regular_distribution(r3b, {u, v}), DomainError);
}

TEST_CASE("verification reports") {
    auto line = make_chart("R1", {"q"});
    DiracStructure bad(line, {Section(VectorField::basis(line, 0), KForm::basis(line, {0}))});
    const DiracReport& r = verify_dirac(bad);
    CHECK_FALSE(r.isotropic);
    CHECK(r.isotropy_witness == "<e1,e1>_+ = 1");
    CHECK_FALSE(r.passed());

    auto r3 = make_chart("R3x", {"x1", "x2", "x3"});
    Section e1(VectorField::basis(r3, 0), zero1(r3));
    Section e2(VectorField::basis(r3, 1), x1 * KForm::basis(r3, {2}));
    Section e3(VectorField(r3), KForm::basis(r3, {2}));
    CHECK(equal(courant_bracket(e1, e2), e3));
    DiracStructure d(r3, {e1, e2, e3});
    CHECK(verify_dirac(d).passed());

    // isotropic and full rank, but [[e1,e2]] = (d_z, 0) leaves the span
    auto xyz = make_chart("R3", {"x", "y", "z"});
    Section f1(VectorField::basis(xyz, 0), zero1(xyz));
    Section f2(VectorField::basis(xyz, 1) + Expr::symbol("x") * VectorField::basis(xyz, 2), zero1(xyz));
    Section f3(VectorField(xyz), -Expr::symbol("x") * KForm::basis(xyz, {1}) + KForm::basis(xyz, {2}));
    DiracStructure nd(xyz, {f1, f2, f3});
    const DiracReport& nr = verify_dirac(nd);
    CHECK(nr.isotropic);
    CHECK(nr.full_rank);
    CHECK_FALSE(nr.involutive);
    CHECK(nr.involutivity_witness.find("[[e1,e2]]") == 0);

    DiracStructure deficient(qp, {Section(Dq(), zero1(qp)), Section(q * Dq(), zero1(qp))});
    CHECK_FALSE(verify_dirac(deficient).full_rank);
    CHECK_THROWS_AS(membership(deficient, Section(Dq(), zero1(qp))), SingularError);

    DiracStructure loc(qp, {Section(q * Dq(), zero1(qp)), Section(VectorField(qp), dp())});
    CHECK(verify_dirac(loc).degeneracy_locus == std::vector<std::string>{"q"});
}

TEST_CASE("membership") {
    DiracStructure d = graph_presymplectic(wedge(dq(), dp()));
    MembershipCertificate a = membership(d, Section(Dq(), dp()));
    REQUIRE(a.member);
    CHECK(a.coefficients[0] == Expr(1));
    CHECK(a.coefficients[1] == Expr(0));
    MembershipCertificate b = membership(d, Section(Dq(), dq()));
    CHECK_FALSE(b.member);
    CHECK(b.witness_row.has_value());
    CHECK_FALSE(b.witness.empty());

    gen::Rng r(17);
    std::vector<DiracStructure> ds{d, graph_presymplectic(kernel_omega()),
                                   graph_poisson((q * q + 1) * KVector::basis(qp, {0, 1}))};
    for (const auto& dd : ds)
        for (int t = 0; t < 8; ++t) {
            std::vector<Expr> c;
            Section s(dd.chart());
            for (const auto& e : dd.frame()) {
                c.push_back(gen::random_coefficient(r, dd.chart()));
                s = s + c.back() * e;
            }
            MembershipCertificate m = membership(dd, s);
            REQUIRE(m.member);
            for (std::size_t i = 0; i < c.size(); ++i) CHECK(equal(m.coefficients[i], c[i]));
        }
}

TEST_CASE("Omega and Pi on the frame") {
    DiracStructure d = graph_presymplectic(wedge(dq(), dp()));
    FrameTwoForm w = omega_on_frame(d);
    CHECK(w(0, 1) == Expr(1));
    CHECK(w(0, 0) == Expr(0));
    CHECK(w.antisymmetric);
    CHECK(w.cocycle);

    FrameTwoForm z = omega_on_frame(graph_poisson(KVector(qp, 2)));
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) CHECK(z(i, j) == Expr(0));

    CHECK(equal(pi_sharp(d, dq()), -Dp()));
    CHECK(equal(pi_sharp(d, dp()), Dq()));
    CHECK(pi_sharp_morphism(d));
    auto r2 = make_chart("R2x", {"x1", "x2"});
    DiracStructure f = regular_distribution(r2, {VectorField::basis(r2, 0)});
    CHECK_THROWS_WITH_AS(pi_sharp(f, KForm::basis(r2, {0})), "not in admissible covector range: dx1", DomainError);
    CHECK(pi_sharp_morphism(f));
}

TEST_CASE("property: kernels, duality and Lambda on shipped structures") {
    auto r2 = make_chart("R2x", {"x1", "x2"});
    auto r3 = make_chart("R3x", {"x1", "x2", "x3"});
    std::vector<DiracStructure> ds{
        graph_presymplectic(wedge(dq(), dp())),
        graph_presymplectic(kernel_omega()),
        graph_poisson(KVector::basis(qp, {0, 1})),
        graph_poisson((x1 * x1 + x2 * x2) * KVector::basis(r2, {0, 1})),
        regular_distribution(r2, {VectorField::basis(r2, 0)}),
        regular_distribution(r2, {VectorField::basis(r2, 0) + x1 * VectorField::basis(r2, 1)}),
        regular_distribution(r3, {VectorField::basis(r3, 0), VectorField::basis(r3, 1)}),
    };
    for (const auto& d : ds) {
        const std::size_t n = d.dim();
        CHECK(verify_dirac(d).passed());
        auto tk = tangent_kernel(d);
        auto ck = cotangent_kernel(d);
        CHECK(characteristic_rank(d) + ck.size() == n);
        CHECK(covector_rank(d) + tk.size() == n);
        for (const auto& eta : ck)
            for (const auto& e : d.frame()) CHECK(is_zero(pair(eta, e.X())));
        for (const auto& v : tk)
            for (const auto& e : d.frame()) CHECK(is_zero(pair(e.xi(), v)));
        FrameTwoForm w = omega_on_frame(d);
        CHECK(w.antisymmetric);
        CHECK(w.cocycle);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) CHECK(equal(pairing_minus(d.frame()[i], d.frame()[j]), w(i, j)));
        CHECK(pi_sharp_morphism(d));
    }
}

TEST_CASE("property: graph constructors always produce Dirac structures") {
    gen::Rng r(99);
    auto c3 = make_chart("R3", {"x", "y", "z"});
    for (int t = 0; t < 6; ++t) {
        KForm omega = exterior_derivative(gen::random_form(r, c3, 1));
        CHECK(verify_dirac(graph_presymplectic(omega)).passed());
        KVector pi = gen::random_coefficient(r, qp) * KVector::basis(qp, {0, 1});
        CHECK(verify_dirac(graph_poisson(pi)).passed());
    }
}

TEST_CASE("report is computed once across threads") {
    DiracStructure d = graph_presymplectic(kernel_omega());
    std::vector<std::thread> ts;
    std::vector<const DiracReport*> seen(4);
    for (int i = 0; i < 4; ++i) ts.emplace_back([&, i] { seen[static_cast<std::size_t>(i)] = &d.report(); });
    for (auto& t : ts) t.join();
    for (auto* s : seen) CHECK(s == seen[0]);
    CHECK(seen[0]->passed());
}
