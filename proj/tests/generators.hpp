#pragma once

// Hand-rolled random generators for property tests.

#include <cstdint>
#include <string>
#include <vector>

#include "diracq/expr.hpp"

namespace gen {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : s_(seed) {}
    std::uint64_t next() {
        std::uint64_t z = (s_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    int uniform(int lo, int hi) { return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1)); }
    bool coin() { return next() & 1u; }
    diracq::Rational small_rational() {
        diracq::Rational q(uniform(-9, 9), uniform(1, 4));
        q.canonicalize();
        return q;
    }

private:
    std::uint64_t s_;
};

inline diracq::Expr random_polynomial(Rng& r, const std::vector<std::string>& vars, int max_degree, int terms) {
    diracq::Expr p;
    for (int t = 0; t < terms; ++t) {
        diracq::Expr m(r.small_rational());
        int budget = r.uniform(0, max_degree);
        for (int k = 0; k < budget; ++k) m *= diracq::Expr::symbol(vars[static_cast<std::size_t>(r.uniform(0, static_cast<int>(vars.size()) - 1))]);
        p += m;
    }
    return p;
}

// Random expression tree of bounded depth; atoms only when requested.
inline diracq::Expr random_expr(Rng& r, const std::vector<std::string>& vars, int depth, bool atoms) {
    if (depth <= 0 || r.uniform(0, 5) == 0) {
        if (r.coin()) return diracq::Expr(r.small_rational());
        return diracq::Expr::symbol(vars[static_cast<std::size_t>(r.uniform(0, static_cast<int>(vars.size()) - 1))]);
    }
    const int op = r.uniform(0, atoms ? 7 : 4);
    auto sub = [&] { return random_expr(r, vars, depth - 1, atoms); };
    switch (op) {
        case 0: return sub() + sub();
        case 1: return sub() - sub();
        case 2: return sub() * sub();
        case 3: {
            diracq::Expr d = sub();
            if (d.is_canonical_zero()) d = diracq::Expr(1) + diracq::Expr::symbol(vars[0]) * diracq::Expr::symbol(vars[0]);
            return sub() / d;
        }
        case 4: return sub().pow(r.uniform(0, 3));
        case 5: return exp(random_expr(r, vars, depth - 2, false));
        case 6: return sin(random_expr(r, vars, depth - 2, false));
        default: return cos(random_expr(r, vars, depth - 2, false));
    }
}

}  // namespace gen

#include "diracq/chart.hpp"

namespace gen {

inline std::vector<std::string> chart_vars(const diracq::ChartPtr& c) {
    auto v = c->coords();
    v.insert(v.end(), c->params().begin(), c->params().end());
    return v;
}

inline diracq::Expr random_coefficient(Rng& r, const diracq::ChartPtr& c, int max_degree = 2, bool atoms = false) {
    auto vars = chart_vars(c);
    diracq::Expr e = random_polynomial(r, vars, max_degree, r.uniform(1, 3));
    if (atoms && r.uniform(0, 3) == 0) e += diracq::sin(diracq::Expr::symbol(vars[0]));
    return e;
}

inline diracq::KForm random_form(Rng& r, const diracq::ChartPtr& c, int degree, int max_degree = 2, bool atoms = false) {
    diracq::KForm f(c, degree);
    for (const auto& idx : diracq::increasing_tuples(static_cast<int>(c->dim()), degree))
        if (r.uniform(0, 2) != 0) f.add(idx, random_coefficient(r, c, max_degree, atoms));
    return f;
}

inline diracq::KVector random_kvector(Rng& r, const diracq::ChartPtr& c, int degree, int max_degree = 2) {
    diracq::KVector f(c, degree);
    for (const auto& idx : diracq::increasing_tuples(static_cast<int>(c->dim()), degree))
        if (r.uniform(0, 2) != 0) f.add(idx, random_coefficient(r, c, max_degree));
    return f;
}

inline diracq::VectorField random_vector_field(Rng& r, const diracq::ChartPtr& c, int max_degree = 2) {
    diracq::VectorField v(c);
    for (std::size_t i = 0; i < c->dim(); ++i) v[i] = random_coefficient(r, c, max_degree);
    return v;
}

}  // namespace gen

#include "diracq/algebroid.hpp"

namespace gen {

inline diracq::AForm random_aform(Rng& r, const diracq::PresentationPtr& p, int degree, int max_degree = 2) {
    diracq::AForm f(p, degree);
    for (const auto& idx : diracq::increasing_tuples(static_cast<int>(p->rank()), degree))
        if (r.uniform(0, 2) != 0) f.add(idx, random_coefficient(r, p->chart(), max_degree));
    return f;
}

}  // namespace gen
