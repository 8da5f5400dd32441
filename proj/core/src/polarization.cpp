#include "diracq/polarization.hpp"

#include <functional>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace diracq {

namespace {

std::string slot_label(const ChartPtr& c, std::size_t i) {
    const std::size_t n = c->dim();
    const std::size_t k = i % (2 * n);
    std::string s = k < n ? "d_" + c->coords()[k] : "d" + c->coords()[k - n];
    return (i < 2 * n ? "re " : "im ") + s;
}

std::string frame_label(const char* prefix, std::size_t i) { return prefix + std::to_string(i + 1); }

std::vector<ComplexExpr> complex_coefficients(const DiracStructure& d, const ComplexSection& psi) {
    MembershipCertificate re = membership(d, psi.re);
    MembershipCertificate im = membership(d, psi.im);
    if (!re.member) throw DomainError("section not in the complexified D: " + re.witness);
    if (!im.member) throw DomainError("section not in the complexified D: " + im.witness);
    std::vector<ComplexExpr> c;
    for (std::size_t i = 0; i < re.coefficients.size(); ++i) c.emplace_back(re.coefficients[i], im.coefficients[i]);
    return c;
}

LineSection scale(const LineSection& s, const ComplexExpr& z) {
    LineSection out;
    for (const auto& v : s.s) out.s.push_back(z * v);
    return out;
}

AlphaDensity unit_half(const ChartPtr& c) { return AlphaDensity(c, Rational(1, 2), ComplexExpr(1)); }

// (a (x) kappa) + (b (x) L kappa), normalized.
HalfDensitySection combine(const LineSection& a, const LineSection& s, const AlphaDensity& kappa,
                           const AlphaDensity& lk) {
    HalfDensitySection out{LineSection{}, unit_half(kappa.chart)};
    for (std::size_t j = 0; j < a.s.size(); ++j) out.s.s.push_back(a.s[j] * kappa.coeff + s.s[j] * lk.coeff);
    return out;
}

HalfDensitySection scaled(const HalfDensitySection& v, const ComplexExpr& z) {
    HalfDensitySection n = v.normalized();
    n.s = scale(n.s, z);
    return n;
}

}  // namespace

std::string ComplexSection::str() const {
    if (im.is_zero()) return re.str();
    return re.str() + " + I*" + im.str();
}

bool equal(const ComplexSection& a, const ComplexSection& b) { return equal(a.re, b.re) && equal(a.im, b.im); }

ComplexSection complex_courant_bracket(const ComplexSection& a, const ComplexSection& b) {
    return {courant_bracket(a.re, b.re) - courant_bracket(a.im, b.im),
            courant_bracket(a.re, b.im) + courant_bracket(a.im, b.re)};
}

ComplexExpr complex_lambda(const ComplexSection& a, const ComplexSection& b) {
    return {pairing_minus(a.re, b.re) - pairing_minus(a.im, b.im), pairing_minus(a.re, b.im) + pairing_minus(a.im, b.re)};
}

ComplexMembership complex_membership(const std::vector<ComplexSection>& frame, const ComplexSection& s) {
    ComplexMembership m;
    const std::size_t k = frame.size();
    const std::vector<Expr> sr = s.re.components(), si = s.im.components();
    const std::size_t n2 = sr.size();
    Matrix a(2 * n2, 2 * k);
    for (std::size_t c = 0; c < k; ++c) {
        const std::vector<Expr> r = frame[c].re.components(), im = frame[c].im.components();
        for (std::size_t i = 0; i < n2; ++i) {
            a(i, c) = r[i];
            a(i, k + c) = -im[i];
            a(n2 + i, c) = im[i];
            a(n2 + i, k + c) = r[i];
        }
    }
    std::vector<Expr> rhs(sr);
    rhs.insert(rhs.end(), si.begin(), si.end());
    if (k == 0) {
        for (std::size_t i = 0; i < rhs.size(); ++i)
            if (!is_zero(rhs[i])) {
                m.witness = "not in span: " + slot_label(s.chart(), i) + " component " + rhs[i].str();
                return m;
            }
        m.member = true;
        return m;
    }
    SolveResult r = solve(a, rhs, PivotOrder::LowestIndexFirst);
    m.member = r.consistent;
    if (!r.consistent) {
        m.witness = "not in span: residual " + r.witness_residual.str() + " at " + slot_label(s.chart(), *r.witness_row);
        return m;
    }
    for (std::size_t c = 0; c < k; ++c) m.coefficients.emplace_back(r.x[c], r.x[k + c]);
    return m;
}

PolarizationReport polarization_check(const Polarization& p) {
    PolarizationReport r;
    std::vector<ComplexSection> hs;
    for (const auto& s : p.h.sections()) hs.emplace_back(s);
    r.in_H = true;
    for (std::size_t a = 0; a < p.frame.size() && r.in_H; ++a) {
        ComplexMembership m = complex_membership(hs, p.frame[a]);
        if (!m.member) {
            r.in_H = false;
            r.witness = frame_label("p", a) + " not in H: " + m.witness;
        }
    }
    r.isotropic = true;
    for (std::size_t a = 0; a < p.frame.size() && r.isotropic; ++a)
        for (std::size_t b = a + 1; b < p.frame.size(); ++b) {
            ComplexExpr l = complex_lambda(p.frame[a], p.frame[b]);
            if (!is_zero(l)) {
                r.isotropic = false;
                if (r.witness.empty())
                    r.witness = "Lambda(" + frame_label("p", a) + "," + frame_label("p", b) + ") = " + l.str();
                break;
            }
        }
    r.involutive = true;
    for (std::size_t a = 0; a < p.frame.size() && r.involutive; ++a)
        for (std::size_t b = a + 1; b < p.frame.size(); ++b) {
            ComplexSection br = complex_courant_bracket(p.frame[a], p.frame[b]);
            ComplexMembership m = complex_membership(p.frame, br);
            if (!m.member) {
                r.involutive = false;
                if (r.witness.empty())
                    r.witness = "[[" + frame_label("p", a) + "," + frame_label("p", b) + "]] = " + br.str() +
                                " not in P: " + m.witness;
                break;
            }
        }
    // complex rank from the realified frame
    const std::size_t k = p.frame.size();
    if (k > 0) {
        const std::size_t n2 = 2 * p.d.dim();
        Matrix a(2 * n2, 2 * k);
        for (std::size_t c = 0; c < k; ++c) {
            const auto re = p.frame[c].re.components(), im = p.frame[c].im.components();
            for (std::size_t i = 0; i < n2; ++i) {
                a(i, c) = re[i];
                a(i, k + c) = -im[i];
                a(n2 + i, c) = im[i];
                a(n2 + i, k + c) = re[i];
            }
        }
        r.rank = rank(a) / 2;
    }
    r.real_rank = q_bundle(p).frame.size();
    return r;
}

ComplexSection hamiltonian_pair(const Polarization& p, const Expr& f) {
    return ComplexSection(Section(hamiltonian_H(p.d, p.h, f), differential(p.d.chart(), f)));
}

SPMembership sp_membership(const Polarization& p, const Expr& f) {
    SPMembership r;
    ComplexSection psi = hamiltonian_pair(p, f);
    for (std::size_t a = 0; a < p.frame.size(); ++a) {
        ComplexSection br = complex_courant_bracket(psi, p.frame[a]);
        ComplexMembership m = complex_membership(p.frame, br);
        if (!m.member) {
            r.witness = "[[(H_f,df)," + frame_label("p", a) + "]] = " + br.str() + " not in P: " + m.witness;
            return r;
        }
    }
    r.member = true;
    return r;
}

HalfDensitySection HalfDensitySection::normalized() const {
    HalfDensitySection out{scale(s, kappa.coeff), unit_half(kappa.chart)};
    return out;
}

std::string HalfDensitySection::str() const {
    HalfDensitySection n = normalized();
    std::string out;
    for (std::size_t j = 0; j < n.s.s.size(); ++j) {
        if (j) out += "; ";
        out += n.s.s[j].str();
    }
    return "(" + out + ") |dx|^(1/2)";
}

HalfDensitySection half_density(const ChartPtr& chart, const LineSection& s) { return {s, unit_half(chart)}; }

HalfDensitySection operator-(const HalfDensitySection& a, const HalfDensitySection& b) {
    HalfDensitySection na = a.normalized(), nb = b.normalized();
    require_same_chart(na.kappa.chart, nb.kappa.chart);
    return {na.s - nb.s, na.kappa};
}

bool is_zero(const HalfDensitySection& v) { return is_zero(v.normalized().s); }
bool equal(const HalfDensitySection& a, const HalfDensitySection& b) { return is_zero(a - b); }

HalfDensitySection delta_connection(const BundleAtlas& b, const ComplexSection& psi, const HalfDensitySection& v) {
    require_same_chart(b.dirac().chart(), psi.chart());
    require_same_chart(b.dirac().chart(), v.kappa.chart);
    if (v.kappa.alpha != Rational(1, 2)) throw DomainError("half-density expected");
    LineSection nabla = covariant_derivative(b, complex_coefficients(b.dirac(), psi), v.s);
    AlphaDensity lk = lie_derivative_density(psi.re.X(), psi.im.X(), v.kappa);
    return combine(nabla, v.s, v.kappa, lk);
}

HalfDensitySection fhat_halfdensity(const BundleAtlas& b, const ComplementH& h, const Expr& f,
                                    const HalfDensitySection& v) {
    LineSection fs = prequant_operator(b, h, f, v.s);
    VectorField hf = hamiltonian_H(b.dirac(), h, f);
    AlphaDensity lk = lie_derivative_density(hf, v.kappa);
    HalfDensitySection out = combine(fs, scale(v.s, ComplexExpr(-1)), v.kappa, lk);
    ComplexSection psi(Section(hf, differential(b.dirac().chart(), f)));
    HalfDensitySection alt = scaled(delta_connection(b, psi, v), ComplexExpr(-1)) -
                             scaled(v, ComplexExpr::two_pi_i() * f);
    if (!equal(out, alt)) throw Error("f^ disagrees with -delta_(H_f,df) - 2 pi I f");
    return out;
}

HalfDensitySection lemma51_residual(const BundleAtlas& b, const ComplementH& h, const ComplexSection& psi,
                                    const Expr& f, const HalfDensitySection& v) {
    PrequantCondition pc = prequant_condition(b);
    if (!pc.holds) throw DomainError("quantization residual needs a prequantizable atlas: " + pc.witness);
    ComplexSection psi_f(Section(hamiltonian_H(b.dirac(), h, f), differential(b.dirac().chart(), f)));
    HalfDensitySection lhs = delta_connection(b, psi, fhat_halfdensity(b, h, f, v));
    HalfDensitySection rhs = fhat_halfdensity(b, h, f, delta_connection(b, psi, v));
    HalfDensitySection corr = delta_connection(b, complex_courant_bracket(psi, psi_f), v);
    return (lhs - rhs) - scaled(corr, ComplexExpr(-1));
}

AlphaDensity selfadjoint_integrand(const BundleAtlas& b, const ComplementH& h, const Expr& f,
                                   const HalfDensitySection& v1, const HalfDensitySection& v2, std::size_t j) {
    if (!b.hermitian()) throw DomainError("self-adjointness needs a Hermitian atlas");
    const ComplexExpr a1 = v1.normalized().s.s.at(j), a2 = v2.normalized().s.s.at(j);
    const ComplexExpr f1 = fhat_halfdensity(b, h, f, v1).s.s.at(j);
    const ComplexExpr f2 = fhat_halfdensity(b, h, f, v2).s.s.at(j);
    const ChartPtr& c = b.dirac().chart();
    AlphaDensity inner(c, Rational(1), a1.conj() * a2);
    AlphaDensity lie = lie_derivative_density(hamiltonian_H(b.dirac(), h, f), inner);
    return AlphaDensity(c, Rational(1), f1.conj() * a2 + a1.conj() * f2 + lie.coeff);
}

QBundle q_bundle(const Polarization& p, const std::vector<Expr>& probe) {
    QBundle q;
    const std::size_t k = p.frame.size();
    if (k == 0) return q;
    const ChartPtr& c = p.d.chart();
    const std::size_t n2 = 2 * c->dim();
    // imaginary part of sum (u_a + I v_a) P_a
    Matrix m(n2, 2 * k);
    for (std::size_t a = 0; a < k; ++a) {
        const auto re = p.frame[a].re.components(), im = p.frame[a].im.components();
        for (std::size_t i = 0; i < n2; ++i) {
            m(i, a) = im[i];
            m(i, k + a) = re[i];
        }
    }
    std::vector<std::vector<Expr>> cols;
    for (const auto& uv : null_space(m, PivotOrder::LowestIndexFirst)) {
        Section s(c);
        for (std::size_t a = 0; a < k; ++a) s = s + uv[a] * p.frame[a].re - uv[k + a] * p.frame[a].im;
        if (s.is_zero()) continue;
        cols.push_back(s.components());
        Matrix t(n2, cols.size());
        for (std::size_t j = 0; j < cols.size(); ++j)
            for (std::size_t i = 0; i < n2; ++i) t(i, j) = cols[j][i];
        if (rank(t) < cols.size()) {
            cols.pop_back();
            continue;
        }
        q.frame.push_back(s);
    }
    std::vector<ComplexSection> qs;
    for (const auto& s : q.frame) qs.emplace_back(s);
    for (const Expr& f : probe) {
        if (!sp_membership(p, f).member) continue;
        Section psi(hamiltonian_H(p.d, p.h, f), differential(c, f));
        for (std::size_t a = 0; a < q.frame.size(); ++a) {
            ComplexSection br(courant_bracket(psi, q.frame[a]));
            ComplexMembership mm = complex_membership(qs, br);
            if (!mm.member) {
                q.projectable = false;
                q.witness = "[[(H_f,df),q" + std::to_string(a + 1) + "]] leaves Q for f = " + f.str() + ": " + mm.witness;
                return q;
            }
        }
    }
    return q;
}

InvarianceProbe hzero_probe(const Polarization& p, const BundleAtlas& b, const HalfDensitySection& v,
                            const std::vector<Expr>& fs) {
    InvarianceProbe r;
    for (std::size_t a = 0; a < p.frame.size(); ++a) {
        HalfDensitySection d = delta_connection(b, p.frame[a], v);
        if (!is_zero(d)) {
            r.witness = "delta_" + frame_label("p", a) + " v = " + d.str();
            return r;
        }
    }
    r.applicable = true;
    for (const Expr& f : fs) {
        if (!sp_membership(p, f).member) continue;
        HalfDensitySection w = fhat_halfdensity(b, p.h, f, v);
        for (std::size_t a = 0; a < p.frame.size(); ++a) {
            HalfDensitySection d = delta_connection(b, p.frame[a], w);
            if (!is_zero(d)) {
                r.witness = "delta_" + frame_label("p", a) + " (f^ v) = " + d.str() + " for f = " + f.str();
                return r;
            }
        }
    }
    r.passed = true;
    return r;
}

Real integrate_density(const AlphaDensity& k, const std::vector<std::pair<Rational, Rational>>& box) {
    if (k.alpha != Rational(1)) throw DomainError("integration needs a 1-density");
    if (!is_zero(k.coeff.im())) throw DomainError("integration needs a real density");
    const auto& coords = k.chart->coords();
    if (box.size() != coords.size()) throw DomainError("box does not match the chart dimension");
    for (const auto& s : k.coeff.re().free_symbols())
        if (std::find(coords.begin(), coords.end(), s) == coords.end())
            throw DomainError("integrand has a free parameter " + s);
    const Expr f = k.coeff.re();
    std::map<std::string, Real> point;
    std::function<Real(std::size_t)> level = [&](std::size_t d) -> Real {
        if (d == coords.size()) {
            try {
                Real v = evaluate_real(f, point);
                if (!boost::multiprecision::isfinite(v)) throw DomainError("singularity inside box");
                return v;
            } catch (const SingularError&) {
                throw DomainError("singularity inside box");
            }
        }
        auto g = [&](const Real& x) {
            point[coords[d]] = x;
            return level(d + 1);
        };
        Real err;
        return boost::math::quadrature::gauss_kronrod<Real, 15>::integrate(g, to_real(box[d].first), to_real(box[d].second),
                                                                           10, Real("1e-8"), &err);
    };
    return level(0);
}

}  // namespace diracq
