#pragma once

#include <string>
#include <utility>
#include <vector>

#include "diracq/prequant.hpp"

namespace diracq {

// Section re + I im of the complexified TM + T*M.
struct ComplexSection {
    Section re;
    Section im;

    ComplexSection() = default;
    explicit ComplexSection(Section r) : re(std::move(r)), im(re.chart()) {}
    ComplexSection(Section r, Section i) : re(std::move(r)), im(std::move(i)) {}

    const ChartPtr& chart() const { return re.chart(); }
    ComplexSection conj() const { return {re, -im}; }
    bool is_zero() const { return re.is_zero() && im.is_zero(); }
    std::string str() const;

    friend ComplexSection operator+(const ComplexSection& a, const ComplexSection& b) {
        return {a.re + b.re, a.im + b.im};
    }
    friend ComplexSection operator-(const ComplexSection& a, const ComplexSection& b) {
        return {a.re - b.re, a.im - b.im};
    }
    friend ComplexSection operator*(const ComplexExpr& z, const ComplexSection& a) {
        return {z.re() * a.re - z.im() * a.im, z.re() * a.im + z.im() * a.re};
    }
};

bool equal(const ComplexSection& a, const ComplexSection& b);
ComplexSection complex_courant_bracket(const ComplexSection& a, const ComplexSection& b);
// Complex-bilinear extension of the skew pairing.
ComplexExpr complex_lambda(const ComplexSection& a, const ComplexSection& b);

struct ComplexMembership {
    bool member = false;
    std::vector<ComplexExpr> coefficients;
    std::string witness;
};
// Membership in the complex span of `frame` by realification.
ComplexMembership complex_membership(const std::vector<ComplexSection>& frame, const ComplexSection& s);

struct Polarization {
    DiracStructure d;
    ComplementH h;
    std::vector<ComplexSection> frame;
};

struct PolarizationReport {
    bool in_H = false;
    bool isotropic = false;
    bool involutive = false;
    std::size_t rank = 0;       // complex rank of P
    std::size_t real_rank = 0;  // rank of the real part P n conj(P)
    std::string witness;
    bool passed() const { return in_H && isotropic && involutive; }
};
PolarizationReport polarization_check(const Polarization& p);

ComplexSection hamiltonian_pair(const Polarization& p, const Expr& f);

struct SPMembership {
    bool member = false;
    std::string witness;
};
SPMembership sp_membership(const Polarization& p, const Expr& f);

// s (x) kappa with kappa a half-density.
struct HalfDensitySection {
    LineSection s;
    AlphaDensity kappa;

    // Same section with kappa = |dx|^(1/2) and the factor moved into s.
    HalfDensitySection normalized() const;
    std::string str() const;
};
HalfDensitySection half_density(const ChartPtr& chart, const LineSection& s);
HalfDensitySection operator-(const HalfDensitySection& a, const HalfDensitySection& b);
bool is_zero(const HalfDensitySection& v);
bool equal(const HalfDensitySection& a, const HalfDensitySection& b);

// (nabla_psi s) (x) kappa + s (x) L_{rho psi} kappa; psi must lie in the complexified D.
HalfDensitySection delta_connection(const BundleAtlas& b, const ComplexSection& psi, const HalfDensitySection& v);
// (f^ s) (x) kappa - s (x) L_{H_f} kappa, checked against -delta_{(H_f, df)} - 2 pi I f.
HalfDensitySection fhat_halfdensity(const BundleAtlas& b, const ComplementH& h, const Expr& f,
                                    const HalfDensitySection& v);
// delta_psi(f^ v) - f^(delta_psi v) + delta_[[psi, (H_f, df)]] v. DomainError
// when the atlas is not prequantizable.
HalfDensitySection lemma51_residual(const BundleAtlas& b, const ComplementH& h, const ComplexSection& psi,
                                    const Expr& f, const HalfDensitySection& v);
// conj(f^ v1) v2 + conj(v1) f^ v2 + L_{H_f}(h(s1, s2) conj(kappa1) kappa2) on patch j, a 1-density.
AlphaDensity selfadjoint_integrand(const BundleAtlas& b, const ComplementH& h, const Expr& f,
                                   const HalfDensitySection& v1, const HalfDensitySection& v2, std::size_t j = 0);

struct QBundle {
    std::vector<Section> frame;  // real sections spanning P n conj(P)
    bool projectable = true;
    std::string witness;
};
// Real frame of Q; the projectability probe runs on the given functions that lie in S(P).
QBundle q_bundle(const Polarization& p, const std::vector<Expr>& probe = {});

struct InvarianceProbe {
    bool applicable = false;  // delta_psi v = 0 on the P frame
    bool passed = false;
    std::string witness;
};
InvarianceProbe hzero_probe(const Polarization& p, const BundleAtlas& b, const HalfDensitySection& v,
                            const std::vector<Expr>& fs);

// Integral of a real 1-density over a box with rational bounds; relative
// tolerance 1e-8. DomainError when the integrand is singular in the box.
Real integrate_density(const AlphaDensity& k, const std::vector<std::pair<Rational, Rational>>& box);

}  // namespace diracq
