#include "diracq/hamiltonian.hpp"

#include <algorithm>

namespace diracq {

namespace {

std::vector<Expr> covector(const KForm& eta) {
    std::vector<Expr> out(eta.chart()->dim());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = eta.get({static_cast<int>(i)});
    return out;
}

Matrix form_columns(const ChartPtr& chart, const std::vector<Section>& s) {
    Matrix m(chart->dim(), s.size());
    for (std::size_t j = 0; j < s.size(); ++j)
        for (std::size_t i = 0; i < chart->dim(); ++i) m(i, j) = s[j].xi().get({static_cast<int>(i)});
    return m;
}

VectorField combine(const ChartPtr& chart, const std::vector<Section>& s, const std::vector<Expr>& c) {
    VectorField x(chart);
    for (std::size_t j = 0; j < s.size(); ++j)
        if (!c[j].is_canonical_zero()) x = x + c[j] * s[j].X();
    return x;
}

std::string not_admissible(const Expr& f) { return "not admissible: " + f.str(); }

VectorField particular(const DiracStructure& d, const Expr& f, PivotOrder order) {
    KForm df = differential(d.chart(), f);
    SolveResult r = solve(d.form_block(), covector(df), order);
    if (!r.consistent) throw DomainError(not_admissible(f));
    return combine(d.chart(), d.frame(), r.x);
}

}  // namespace

ComplementH::ComplementH(const DiracStructure& d, std::vector<Section> sections)
    : chart_(d.chart()), sections_(std::move(sections)) {
    for (std::size_t a = 0; a < sections_.size(); ++a) {
        MembershipCertificate c = membership(d, sections_[a]);
        if (!c.member) throw DomainError("complement section h" + std::to_string(a + 1) + " not in D: " + c.witness);
    }
    const std::size_t r = diracq::rank(form_columns(chart_, sections_));
    if (r < sections_.size()) throw DomainError("complement meets D n TM: covector parts are dependent");
    if (r < diracq::rank(d.form_block())) throw DomainError("complement too small: D n TM + H does not span D");
}

ComplementH default_complement(const DiracStructure& d) {
    Echelon e = row_echelon(d.form_block(), PivotOrder::HighestIndexFirst);
    std::vector<std::size_t> cols = e.pivot_cols;
    std::sort(cols.begin(), cols.end());
    std::vector<Section> s;
    for (std::size_t j : cols) s.push_back(d.frame()[j]);
    return ComplementH(d, std::move(s));
}

AdmissibleFunction admissible_vector_field(const DiracStructure& d, const Expr& f) {
    AdmissibleFunction a;
    a.f = f;
    KForm df = differential(d.chart(), f);
    SolveResult r = solve(d.form_block(), covector(df), PivotOrder::HighestIndexFirst);
    if (!r.consistent) {
        a.witness = "d" + f.str() + " not in the covector range: residual " + r.witness_residual.str() + " at " +
                    "d" + d.chart()->coords()[*r.witness_row];
        return a;
    }
    a.admissible = true;
    a.X = combine(d.chart(), d.frame(), r.x);
    return a;
}

AdmissibleFunction admissible(const DiracStructure& d, const ComplementH& h, const Expr& f) {
    AdmissibleFunction a = admissible_vector_field(d, f);
    if (a.admissible) a.H = hamiltonian_H(d, h, f);
    return a;
}

VectorField hamiltonian_H(const DiracStructure& d, const ComplementH& h, const Expr& f) {
    require_same_chart(d.chart(), h.chart());
    KForm df = differential(d.chart(), f);
    SolveResult r = solve(form_columns(h.chart(), h.sections()), covector(df), PivotOrder::HighestIndexFirst);
    if (!r.consistent) throw DomainError(not_admissible(f));
    return combine(h.chart(), h.sections(), r.x);
}

Expr bracket_prime(const DiracStructure& d, const Expr& f, const Expr& g) {
    if (!admissible_vector_field(d, f).admissible) throw DomainError(not_admissible(f));
    Expr v = particular(d, g, PivotOrder::HighestIndexFirst).apply(f);
    Expr w = particular(d, g, PivotOrder::LowestIndexFirst).apply(f);
    if (!equal(v, w)) throw DomainError("bracket depends on the choice of X_g: " + v.str() + " vs " + w.str());
    return v;
}

VectorField bracket_prime_residual(const DiracStructure& d, const Expr& f, const Expr& g) {
    Expr b = bracket_prime(d, f, g);
    VectorField xf = particular(d, f, PivotOrder::HighestIndexFirst);
    VectorField xg = particular(d, g, PivotOrder::HighestIndexFirst);
    return particular(d, b, PivotOrder::HighestIndexFirst) + lie_bracket(xf, xg);
}

Expr bracket_omega(const DiracStructure& d, const ComplementH& h, const Expr& f, const Expr& g) {
    if (!admissible_vector_field(d, f).admissible) throw DomainError(not_admissible(f));
    return hamiltonian_H(d, h, g).apply(f);
}

bool JacobiResidual::passed() const { return is_zero(jacobi) && field.is_zero(); }

JacobiResidual jacobi_suite(const DiracStructure& d, const ComplementH& h, const Expr& f, const Expr& g, const Expr& k) {
    auto br = [&](const Expr& a, const Expr& b) { return bracket_omega(d, h, a, b); };
    JacobiResidual r;
    r.jacobi = br(br(f, g), k) + br(br(g, k), f) + br(br(k, f), g);
    r.field = lie_bracket(hamiltonian_H(d, h, f), hamiltonian_H(d, h, g)) + hamiltonian_H(d, h, br(f, g));
    return r;
}

}  // namespace diracq
