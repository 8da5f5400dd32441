#include "diracq/courant.hpp"

#include <mutex>

namespace diracq {

Section::Section(ChartPtr chart) : x_(chart), xi_(chart, 1) {}

Section::Section(VectorField x, KForm xi) : x_(std::move(x)), xi_(std::move(xi)) {
    require_same_chart(x_.chart(), xi_.chart());
    if (xi_.degree() != 1) throw DomainError("section needs a 1-form");
}

std::vector<Expr> Section::components() const {
    const std::size_t n = x_.dim();
    std::vector<Expr> c(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        c[i] = x_[i];
        c[n + i] = xi_.get({static_cast<int>(i)});
    }
    return c;
}

Section Section::from_components(const ChartPtr& chart, const std::vector<Expr>& c) {
    const std::size_t n = chart->dim();
    if (c.size() != 2 * n) throw DomainError("section needs 2n components");
    std::vector<Expr> x(c.begin(), c.begin() + static_cast<long>(n));
    std::vector<Expr> xi(c.begin() + static_cast<long>(n), c.end());
    return {VectorField(chart, std::move(x)), one_form(chart, std::move(xi))};
}

std::string Section::str() const { return "(" + x_.str() + " ; " + xi_.str() + ")"; }

bool equal(const Section& a, const Section& b) { return (a - b).is_zero(); }

Expr pairing_plus(const Section& a, const Section& b) {
    require_same_chart(a.chart(), b.chart());
    return Expr::frac(1, 2) * (pair(a.xi(), b.X()) + pair(b.xi(), a.X()));
}

Expr pairing_minus(const Section& a, const Section& b) {
    require_same_chart(a.chart(), b.chart());
    return Expr::frac(1, 2) * (pair(a.xi(), b.X()) - pair(b.xi(), a.X()));
}

Section courant_bracket(const Section& a, const Section& b) {
    require_same_chart(a.chart(), b.chart());
    return {lie_bracket(a.X(), b.X()),
            lie_derivative_form(a.X(), b.xi()) - interior_product(b.X(), exterior_derivative(a.xi()))};
}

std::string DiracReport::first_witness() const {
    if (!full_rank) return "rank " + std::to_string(rank);
    if (!isotropic) return isotropy_witness;
    if (!involutive) return involutivity_witness;
    if (!lemma_identity) return lemma_witness;
    return {};
}

struct DiracStructure::Cache {
    std::once_flag once;
    DiracReport report;
};

DiracStructure::DiracStructure(ChartPtr chart, std::vector<Section> frame, std::string kind)
    : chart_(std::move(chart)), frame_(std::move(frame)), kind_(std::move(kind)), cache_(std::make_shared<Cache>()) {
    if (frame_.size() != chart_->dim())
        throw DomainError("a Dirac frame needs " + std::to_string(chart_->dim()) + " sections, got " +
                          std::to_string(frame_.size()));
    for (const auto& s : frame_) require_same_chart(chart_, s.chart());
}

Matrix DiracStructure::matrix() const {
    const std::size_t n = dim();
    Matrix m(2 * n, n);
    for (std::size_t j = 0; j < n; ++j) {
        auto c = frame_[j].components();
        for (std::size_t i = 0; i < 2 * n; ++i) m(i, j) = c[i];
    }
    return m;
}

Matrix DiracStructure::vector_block() const {
    const std::size_t n = dim();
    Matrix m(n, n);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) m(i, j) = frame_[j].X()[i];
    return m;
}

Matrix DiracStructure::form_block() const {
    const std::size_t n = dim();
    Matrix m(n, n);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) m(i, j) = frame_[j].xi().get({static_cast<int>(i)});
    return m;
}

namespace {

std::string slot_name(const ChartPtr& c, std::size_t row) {
    const std::size_t n = c->dim();
    return row < n ? "d_" + c->coords()[row] : "d" + c->coords()[row - n];
}

std::string frame_name(std::size_t i) { return "e" + std::to_string(i + 1); }

DiracReport compute_report(const DiracStructure& d) {
    DiracReport r;
    const auto& f = d.frame();
    const std::size_t n = d.dim();

    Echelon ech = row_echelon(d.matrix(), PivotOrder::LowestIndexFirst);
    r.rank = ech.rank();
    r.full_rank = r.rank == n;
    r.degeneracy_locus = degeneracy_locus(ech.pivots);

    r.isotropic = true;
    for (std::size_t i = 0; i < n && r.isotropic; ++i)
        for (std::size_t j = i; j < n; ++j) {
            Expr v = pairing_plus(f[i], f[j]);
            if (!is_zero(v)) {
                r.isotropic = false;
                r.isotropy_witness = "<" + frame_name(i) + "," + frame_name(j) + ">_+ = " + v.str();
                break;
            }
        }

    if (!r.full_rank) {
        r.involutivity_witness = "frame rank " + std::to_string(r.rank) + " < " + std::to_string(n);
    } else {
        r.involutive = true;
        for (std::size_t i = 0; i < n && r.involutive; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                Section b = courant_bracket(f[i], f[j]);
                MembershipCertificate c = membership(d, b);
                if (!c.member) {
                    r.involutive = false;
                    r.involutivity_witness =
                        "[[" + frame_name(i) + "," + frame_name(j) + "]] = " + b.str() + " not in D: " + c.witness;
                    break;
                }
            }
    }

    // (L_{X_i} xi_j)(X_k) summed cyclically
    std::vector<std::vector<KForm>> lie(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) lie[i].push_back(lie_derivative_form(f[i].X(), f[j].xi()));
    r.lemma_identity = true;
    for (std::size_t i = 0; i < n && r.lemma_identity; ++i)
        for (std::size_t j = 0; j < n && r.lemma_identity; ++j)
            for (std::size_t k = 0; k < n; ++k) {
                Expr v = pair(lie[i][j], f[k].X()) + pair(lie[j][k], f[i].X()) + pair(lie[k][i], f[j].X());
                if (!is_zero(v)) {
                    r.lemma_identity = false;
                    r.lemma_witness = "cyclic Lie sum on (" + frame_name(i) + "," + frame_name(j) + "," +
                                      frame_name(k) + ") = " + v.str();
                    break;
                }
            }
    return r;
}

}  // namespace

const DiracReport& DiracStructure::report() const {
    if (!cache_) throw DomainError("empty Dirac structure");
    std::call_once(cache_->once, [this] { cache_->report = compute_report(*this); });
    return cache_->report;
}

const DiracReport& verify_dirac(const DiracStructure& d) { return d.report(); }

DiracStructure graph_presymplectic(const KForm& omega) {
    if (omega.degree() != 2) throw DomainError("presymplectic form must have degree 2");
    const ChartPtr& c = omega.chart();
    if (!exterior_derivative(omega).is_zero()) throw DomainError("not presymplectic");
    std::vector<Section> frame;
    for (std::size_t i = 0; i < c->dim(); ++i) {
        VectorField e = VectorField::basis(c, i);
        frame.emplace_back(e, interior_product(e, omega));
    }
    return {c, std::move(frame), "graph_presymplectic"};
}

DiracStructure graph_poisson(const KVector& pi) {
    if (pi.degree() != 2) throw DomainError("Poisson tensor must have degree 2");
    const ChartPtr& c = pi.chart();
    for (std::size_t k = 0; k < c->dim(); ++k) {
        KVector f = KVector::scalar(c, c->coord(k));
        if (!contravariant_derivative(pi, contravariant_derivative(pi, f)).is_zero()) throw DomainError("not Poisson");
    }
    std::vector<Section> frame;
    for (std::size_t i = 0; i < c->dim(); ++i) {
        KForm dx = KForm::basis(c, {static_cast<int>(i)});
        frame.emplace_back(sharp(pi, dx), dx);
    }
    return {c, std::move(frame), "graph_poisson"};
}

DiracStructure regular_distribution(const ChartPtr& chart, const std::vector<VectorField>& f) {
    const std::size_t n = chart->dim();
    const std::size_t k = f.size();
    Matrix rows(k, n);
    Matrix cols(n, k);
    for (std::size_t a = 0; a < k; ++a) {
        require_same_chart(chart, f[a].chart());
        for (std::size_t i = 0; i < n; ++i) rows(a, i) = cols(i, a) = f[a][i];
    }
    if (rank(rows) != k) throw DomainError("distribution fields are not independent");
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = a + 1; b < k; ++b) {
            VectorField br = lie_bracket(f[a], f[b]);
            if (!solve(cols, br.components(), PivotOrder::LowestIndexFirst).consistent)
                throw DomainError("distribution is not involutive: [F" + std::to_string(a + 1) + ",F" +
                                  std::to_string(b + 1) + "] = " + br.str());
        }
    std::vector<Section> frame;
    for (const auto& v : f) frame.emplace_back(v, KForm(chart, 1));
    for (auto& eta : null_space(rows, PivotOrder::LowestIndexFirst))
        frame.emplace_back(VectorField(chart), one_form(chart, std::move(eta)));
    return {chart, std::move(frame), "regular_distribution"};
}

MembershipCertificate membership(const DiracStructure& d, const Section& s) {
    require_same_chart(d.chart(), s.chart());
    SolveResult r = solve(d.matrix(), s.components(), PivotOrder::LowestIndexFirst);
    if (r.pivots.size() < d.dim()) throw SingularError("frame is rank deficient; membership undefined");
    MembershipCertificate c;
    c.member = r.consistent;
    if (r.consistent) {
        c.coefficients = std::move(r.x);
    } else {
        c.witness_row = r.witness_row;
        c.witness_residual = r.witness_residual;
        c.witness = "inconsistent at " + slot_name(d.chart(), *r.witness_row) + " slot, residual " +
                    r.witness_residual.str();
    }
    return c;
}

FrameTwoForm omega_on_frame(const DiracStructure& d) {
    const auto& f = d.frame();
    const std::size_t n = d.dim();
    FrameTwoForm w;
    w.values.assign(n, std::vector<Expr>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) w.values[i][j] = pair(f[i].xi(), f[j].X());
    w.antisymmetric = true;
    for (std::size_t i = 0; i < n && w.antisymmetric; ++i)
        for (std::size_t j = i; j < n; ++j)
            if (!is_zero(w.values[i][j] + w.values[j][i])) {
                w.antisymmetric = false;
                w.witness = "Omega not skew on (" + frame_name(i) + "," + frame_name(j) + ")";
                break;
            }
    // X Omega(Y,Z) - Y Omega(X,Z) + Z Omega(X,Y) + Omega(Z,[X,Y]) + Omega(X,[Y,Z]) + Omega(Y,[Z,X])
    w.cocycle = true;
    for (std::size_t i = 0; i < n && w.cocycle; ++i)
        for (std::size_t j = i + 1; j < n && w.cocycle; ++j)
            for (std::size_t k = j + 1; k < n; ++k) {
                const Section &a = f[i], &b = f[j], &c = f[k];
                Expr v = a.X().apply(w(j, k)) - b.X().apply(w(i, k)) + c.X().apply(w(i, j)) +
                         pair(c.xi(), lie_bracket(a.X(), b.X())) + pair(a.xi(), lie_bracket(b.X(), c.X())) +
                         pair(b.xi(), lie_bracket(c.X(), a.X()));
                if (!is_zero(v)) {
                    w.cocycle = false;
                    w.witness = "cocycle residual on (" + frame_name(i) + "," + frame_name(j) + "," +
                                frame_name(k) + ") = " + v.str();
                    break;
                }
            }
    return w;
}

VectorField pi_sharp(const DiracStructure& d, const KForm& eta) {
    require_same_chart(d.chart(), eta.chart());
    if (eta.degree() != 1) throw DomainError("pi_sharp needs a 1-form");
    std::vector<Expr> rhs(d.dim());
    for (std::size_t i = 0; i < d.dim(); ++i) rhs[i] = eta.get({static_cast<int>(i)});
    SolveResult r = solve(d.form_block(), rhs, PivotOrder::LowestIndexFirst);
    if (!r.consistent) throw DomainError("not in admissible covector range: " + eta.str());
    VectorField x(d.chart());
    for (std::size_t j = 0; j < d.dim(); ++j)
        if (!r.x[j].is_canonical_zero()) x = x + r.x[j] * d.frame()[j].X();
    return x;
}

bool pi_sharp_morphism(const DiracStructure& d, std::string* witness) {
    const auto& f = d.frame();
    for (std::size_t i = 0; i < d.dim(); ++i)
        for (std::size_t j = i + 1; j < d.dim(); ++j) {
            KForm br = lie_derivative_form(f[i].X(), f[j].xi()) - interior_product(f[j].X(), exterior_derivative(f[i].xi()));
            VectorField diff = pi_sharp(d, br) - lie_bracket(f[i].X(), f[j].X());
            if (!membership(d, Section(diff, KForm(d.chart(), 1))).member) {
                if (witness) *witness = "Pi# fails on (" + frame_name(i) + "," + frame_name(j) + "): " + diff.str();
                return false;
            }
        }
    return true;
}

std::vector<VectorField> tangent_kernel(const DiracStructure& d) {
    std::vector<VectorField> out;
    for (const auto& c : null_space(d.form_block(), PivotOrder::LowestIndexFirst)) {
        VectorField x(d.chart());
        for (std::size_t j = 0; j < d.dim(); ++j)
            if (!c[j].is_canonical_zero()) x = x + c[j] * d.frame()[j].X();
        if (!x.is_zero()) out.push_back(std::move(x));
    }
    return out;
}

std::vector<KForm> cotangent_kernel(const DiracStructure& d) {
    std::vector<KForm> out;
    for (const auto& c : null_space(d.vector_block(), PivotOrder::LowestIndexFirst)) {
        KForm eta(d.chart(), 1);
        for (std::size_t j = 0; j < d.dim(); ++j)
            if (!c[j].is_canonical_zero()) eta = eta + c[j] * d.frame()[j].xi();
        if (!eta.is_zero()) out.push_back(std::move(eta));
    }
    return out;
}

std::size_t characteristic_rank(const DiracStructure& d) { return rank(d.vector_block()); }
std::size_t covector_rank(const DiracStructure& d) { return rank(d.form_block()); }

}  // namespace diracq
