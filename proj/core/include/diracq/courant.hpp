#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "diracq/chart.hpp"
#include "diracq/linalg.hpp"

namespace diracq {

// A section (X, xi) of TM + T*M.
class Section {
public:
    Section() = default;
    explicit Section(ChartPtr chart);
    Section(VectorField x, KForm xi);

    const ChartPtr& chart() const { return x_.chart(); }
    const VectorField& X() const { return x_; }
    const KForm& xi() const { return xi_; }

    // X components followed by xi components.
    std::vector<Expr> components() const;
    static Section from_components(const ChartPtr& chart, const std::vector<Expr>& c);

    bool is_zero() const { return x_.is_zero() && xi_.is_zero(); }
    std::string str() const;

    Section operator-() const { return {-x_, -xi_}; }
    friend Section operator+(const Section& a, const Section& b) { return {a.x_ + b.x_, a.xi_ + b.xi_}; }
    friend Section operator-(const Section& a, const Section& b) { return {a.x_ - b.x_, a.xi_ - b.xi_}; }
    friend Section operator*(const Expr& f, const Section& a) { return {f * a.x_, f * a.xi_}; }

private:
    VectorField x_;
    KForm xi_;
};

bool equal(const Section& a, const Section& b);

Expr pairing_plus(const Section& a, const Section& b);
Expr pairing_minus(const Section& a, const Section& b);
Section courant_bracket(const Section& a, const Section& b);

struct MembershipCertificate {
    bool member = false;
    std::vector<Expr> coefficients;
    std::optional<std::size_t> witness_row;  // 0..n-1 vector slot, n..2n-1 form slot
    Expr witness_residual;
    std::string witness;
};

struct DiracReport {
    bool isotropic = false;
    bool full_rank = false;
    bool involutive = false;
    bool lemma_identity = false;
    std::size_t rank = 0;
    std::vector<std::string> degeneracy_locus;
    std::string isotropy_witness;
    std::string involutivity_witness;
    std::string lemma_witness;

    bool passed() const { return isotropic && full_rank && involutive && lemma_identity; }
    std::string first_witness() const;
};

// A frame of dim M sections presented as spanning D. The verification
// report is computed on first use and shared by copies.
class DiracStructure {
public:
    DiracStructure() = default;
    DiracStructure(ChartPtr chart, std::vector<Section> frame, std::string kind = "frame");

    const ChartPtr& chart() const { return chart_; }
    const std::vector<Section>& frame() const { return frame_; }
    std::size_t dim() const { return frame_.size(); }
    const std::string& kind() const { return kind_; }

    // 2n x n matrix whose columns are the frame sections.
    Matrix matrix() const;
    // n x n blocks: columns are the X parts, resp. the xi parts.
    Matrix vector_block() const;
    Matrix form_block() const;

    const DiracReport& report() const;

private:
    struct Cache;
    ChartPtr chart_;
    std::vector<Section> frame_;
    std::string kind_;
    std::shared_ptr<Cache> cache_;
};

DiracStructure graph_presymplectic(const KForm& omega);
DiracStructure graph_poisson(const KVector& pi);
DiracStructure regular_distribution(const ChartPtr& chart, const std::vector<VectorField>& f);

const DiracReport& verify_dirac(const DiracStructure& d);

// Throws SingularError when the frame is generically rank deficient.
MembershipCertificate membership(const DiracStructure& d, const Section& s);

// Values Omega(X_i, X_j) := xi_i(X_j) on the frame, with the checks that make
// it a presymplectic form on the characteristic distribution.
struct FrameTwoForm {
    std::vector<std::vector<Expr>> values;
    bool antisymmetric = false;
    bool cocycle = false;
    std::string witness;
    const Expr& operator()(std::size_t i, std::size_t j) const { return values[i][j]; }
};
FrameTwoForm omega_on_frame(const DiracStructure& d);

// X with (X, eta) in D, free coefficients zeroed; DomainError when eta is not
// in the covector range.
VectorField pi_sharp(const DiracStructure& d, const KForm& eta);
// Pi#({xi_i, xi_j}) - [X_i, X_j] lies in D n TM for every frame pair.
bool pi_sharp_morphism(const DiracStructure& d, std::string* witness = nullptr);

// D n TM and D n T*M.
std::vector<VectorField> tangent_kernel(const DiracStructure& d);
std::vector<KForm> cotangent_kernel(const DiracStructure& d);
// Generic ranks of rho_TM(D) and rho_T*M(D).
std::size_t characteristic_rank(const DiracStructure& d);
std::size_t covector_rank(const DiracStructure& d);

}  // namespace diracq
