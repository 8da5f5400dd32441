#pragma once

#include <functional>
#include <string>
#include <vector>

#include "diracq/hamiltonian.hpp"
#include "generators.hpp"

namespace fx {

using diracq::Expr;

// A shipped Dirac structure and a sampler for its admissible functions.
struct Shipped {
    std::string name;
    diracq::DiracStructure d;
    std::function<Expr(gen::Rng&)> admissible;
};

inline Expr sym(const char* s) { return Expr::symbol(s); }

// Random polynomial of degree <= 3 in the given invariants.
inline Expr poly_in(gen::Rng& r, const std::vector<Expr>& u) {
    std::vector<std::string> names;
    std::map<std::string, Expr> sub;
    for (std::size_t i = 0; i < u.size(); ++i) {
        names.push_back("u" + std::to_string(i));
        sub[names.back()] = u[i];
    }
    return diracq::substitute(gen::random_polynomial(r, names, 3, r.uniform(1, 4)), sub);
}

inline diracq::DiracStructure kernel_r4() {
    auto c = diracq::make_chart("R4", {"x1", "x2", "x3", "x4"}, {"k"});
    return diracq::graph_presymplectic(diracq::KForm::basis(c, {0, 1}) + diracq::KForm::basis(c, {0, 3}));
}

inline std::vector<Shipped> shipped() {
    using namespace diracq;
    auto qp = make_chart("R2", {"q", "p"});
    auto r2 = make_chart("R2x", {"x1", "x2"});
    auto r3 = make_chart("R3", {"x1", "x2", "x3"});
    Expr x1 = sym("x1"), x2 = sym("x2"), x3 = sym("x3"), x4 = sym("x4");
    Expr g = x1 * x1 + x2 * x2;
    return {
        {"symplectic R2", graph_presymplectic(wedge(KForm::basis(qp, {0}), KForm::basis(qp, {1}))),
         [](gen::Rng& r) { return poly_in(r, {sym("q"), sym("p")}); }},
        {"kernel plane", kernel_r4(), [=](gen::Rng& r) { return poly_in(r, {x1, x2 + x4}); }},
        {"poisson R2", graph_poisson(KVector::basis(qp, {0, 1})),
         [](gen::Rng& r) { return poly_in(r, {sym("q"), sym("p")}); }},
        {"poisson G", graph_poisson(g * KVector::basis(r2, {0, 1})),
         [=](gen::Rng& r) { return poly_in(r, {x1, x2}); }},
        {"distribution dx1+x1dx2", regular_distribution(r2, {VectorField::basis(r2, 0) + x1 * VectorField::basis(r2, 1)}),
         [=](gen::Rng& r) { return poly_in(r, {Expr(2) * x2 - x1 * x1}); }},
        {"distribution d_x1,d_x2 in R3", regular_distribution(r3, {VectorField::basis(r3, 0), VectorField::basis(r3, 1)}),
         [=](gen::Rng& r) { return poly_in(r, {x3}); }},
    };
}

}  // namespace fx
