#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "diracq/algebroid.hpp"
#include "diracq/hamiltonian.hpp"

namespace diracq {

// Complex line bundle over one chart covered by named patches. The local
// frames satisfy eps_k = g_jk eps_j and nabla eps_j = 2 pi I sigma_j eps_j.
class BundleAtlas {
public:
    BundleAtlas() = default;
    // `a` must carry a section realization (dirac_algebroid); sigma_j live on it.
    BundleAtlas(PresentationPtr a, std::vector<std::string> patches, std::vector<ComplexAForm> sigma,
                std::map<std::pair<std::size_t, std::size_t>, ComplexExpr> transitions = {}, bool hermitian = false);

    const DiracStructure& dirac() const { return d_; }
    const PresentationPtr& presentation() const { return a_; }
    const std::vector<std::string>& patches() const { return patches_; }
    std::size_t patch_count() const { return patches_.size(); }
    std::size_t patch_index(const std::string& name) const;
    const ComplexAForm& sigma(std::size_t j) const { return sigma_[j]; }
    bool hermitian() const { return hermitian_; }

    // Overlap of patches j and k; g_kj = 1/g_jk, g_jj = 1.
    bool overlaps(std::size_t j, std::size_t k) const;
    ComplexExpr g(std::size_t j, std::size_t k) const;
    const std::map<std::pair<std::size_t, std::size_t>, ComplexExpr>& transitions() const { return g_; }

    // Cech 1-cochain the transitions were built from, when known.
    std::map<std::pair<std::size_t, std::size_t>, Expr> w;

    BundleAtlas with_sigma(std::vector<ComplexAForm> sigma) const;

private:
    DiracStructure d_;
    PresentationPtr a_;
    std::vector<std::string> patches_;
    std::vector<ComplexAForm> sigma_;
    std::map<std::pair<std::size_t, std::size_t>, ComplexExpr> g_;
    bool hermitian_ = false;
};

struct AtlasReport {
    bool cocycle = false;
    bool compatible = false;
    bool real = false;  // every sigma_j has zero imaginary part
    std::string witness;
    bool passed() const { return cocycle && compatible; }
};
AtlasReport check_atlas(const BundleAtlas& b);

// Per-patch coefficients with s_j = g_jk s_k on overlaps.
struct LineSection {
    std::vector<ComplexExpr> s;
};
// Extends a coefficient on patch j to all patches through the transitions.
LineSection line_section(const BundleAtlas& b, std::size_t j, const ComplexExpr& sj);
// Residual of the gluing relation, empty when it holds.
std::string gluing_witness(const BundleAtlas& b, const LineSection& s);

// tau = d_D sigma_j; DomainError with an overlap witness when the atlas is
// not compatible or tau depends on the patch, and when a Hermitian atlas has
// complex tau.
ComplexAForm curvature_2section(const BundleAtlas& b);

// The global 1-section sigma' - sigma with tau' - tau = d_D of it.
ComplexAForm dirac_chern_check(const BundleAtlas& b1, const BundleAtlas& b2);

struct LambdaForm {
    AForm lambda;
    bool closed = false;        // d_D Lambda = 0
    bool matches_omega = false; // Lambda(e_i, e_j) = Omega(X_i, X_j)
    std::string witness;
};
LambdaForm lambda_Dform(const PresentationPtr& a);

struct PrequantCondition {
    bool holds = false;
    ComplexAForm residual;  // tau - Lambda
    std::string witness;
};
PrequantCondition prequant_condition(const BundleAtlas& b);

// nabla_psi s with psi given by frame coefficients.
LineSection covariant_derivative(const BundleAtlas& b, const std::vector<ComplexExpr>& psi, const LineSection& s);
// Frame coefficients of (H_f, df).
std::vector<Expr> hamiltonian_section(const BundleAtlas& b, const ComplementH& h, const Expr& f);

// f^ s = -nabla_(H_f, df) s - 2 pi I f s.
LineSection prequant_operator(const BundleAtlas& b, const ComplementH& h, const Expr& f, const LineSection& s);
// (f,g)^ s - [f^, g^] s.
LineSection commutator_residual(const BundleAtlas& b, const ComplementH& h, const Expr& f, const Expr& g,
                                const LineSection& s);
// 2 pi I (Lambda - tau)(psi_f, psi_g) s, what the residual must equal.
LineSection predicted_commutator_residual(const BundleAtlas& b, const ComplementH& h, const Expr& f, const Expr& g,
                                          const LineSection& s);

bool is_zero(const LineSection& s);
bool equal(const LineSection& a, const LineSection& b);
LineSection operator-(const LineSection& a, const LineSection& b);

// g_jk = exp(-2 pi I w_jk). Checks Lambda = d_D sigma_j, d_D w_jk = sigma_j - sigma_k,
// and that w_jk + w_kl - w_jl is an integer constant; DomainError
// "integrality obstruction: ..." otherwise.
BundleAtlas build_prequantization(const PresentationPtr& a, std::vector<std::string> patches,
                                  std::vector<AForm> sigma, std::map<std::pair<std::size_t, std::size_t>, Expr> w);

// h(s1, s2) = conj(z1) z2 on patch j.
ComplexExpr hermitian_metric(const ComplexExpr& z1, const ComplexExpr& z2);
// H_f h(s1,s2) - h(nabla s1, s2) - h(s1, nabla s2) on patch j.
ComplexExpr hermitian_check(const BundleAtlas& b, const ComplementH& h, const Expr& f, const LineSection& s1,
                            const LineSection& s2, std::size_t j = 0);

}  // namespace diracq
