#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "diracq/courant.hpp"

namespace diracq {

class AlgebroidPresentation;
using PresentationPtr = std::shared_ptr<const AlgebroidPresentation>;

// Structure functions c[i][j][k] with [[e_i, e_j]] = sum_k c[i][j][k] e_k.
using StructureFunctions = std::vector<std::vector<std::vector<Expr>>>;

struct PresentationReport {
    bool antisymmetric = false;
    bool anchor_compatible = false;
    bool jacobi = false;
    std::string witness;
    bool passed() const { return antisymmetric && anchor_compatible && jacobi; }
};

// A Lie algebroid given by a local frame e_1..e_r, the anchors of the frame
// elements and the structure functions of the bracket.
class AlgebroidPresentation {
public:
    AlgebroidPresentation(ChartPtr chart, std::string name, std::vector<VectorField> anchor, StructureFunctions c,
                          std::vector<Section> realization = {});

    const ChartPtr& chart() const { return chart_; }
    const std::string& name() const { return name_; }
    std::size_t rank() const { return anchor_.size(); }
    const VectorField& anchor(std::size_t i) const { return anchor_[i]; }
    const Expr& c(std::size_t i, std::size_t j, std::size_t k) const { return c_[i][j][k]; }
    // Frame as sections of TM + T*M when the algebroid is a Dirac structure.
    const std::vector<Section>& realization() const { return realization_; }

    // Set for pull-backs along M x R -> M: the base presentation, the line
    // coordinate, and the frame slot carrying d/dt (always the last one).
    const PresentationPtr& base() const { return base_; }
    const std::string& line_coordinate() const { return line_; }
    std::size_t line_slot() const { return rank() - 1; }

    PresentationReport check() const;

private:
    friend PresentationPtr pullback_over_line(const PresentationPtr& base, const std::string& t);

    ChartPtr chart_;
    std::string name_;
    std::vector<VectorField> anchor_;
    StructureFunctions c_;
    std::vector<Section> realization_;
    PresentationPtr base_;
    std::string line_;
};

PresentationPtr tangent_algebroid(const ChartPtr& chart);
// Frame dx_i with anchor Pi#(dx_i).
PresentationPtr cotangent_algebroid(const KVector& pi);
// Structure functions are solved once from Courant brackets of the frame;
// DomainError with the witness when a bracket leaves D.
PresentationPtr dirac_algebroid(const DiracStructure& d);
// Pull-back D_1 of `base` to M x R; frame = lifted base frame, then (d/dt; 0).
PresentationPtr pullback_over_line(const PresentationPtr& base, const std::string& t = "t");
PresentationPtr pullback_over_line(const DiracStructure& d, const std::string& t = "t");

// Section of the exterior power of the dual of A: coefficients on
// increasing tuples of frame indices.
class AForm {
public:
    AForm() = default;
    AForm(PresentationPtr p, int degree);
    static AForm scalar(PresentationPtr p, const Expr& f);
    static AForm basis(PresentationPtr p, Multi idx);

    const PresentationPtr& presentation() const { return p_; }
    int degree() const { return degree_; }
    const std::map<Multi, Expr>& terms() const { return c_; }

    // Value on frame elements in the given order.
    Expr get(Multi idx) const;
    void add(Multi idx, const Expr& v);

    bool is_zero() const;
    std::string str() const;

    AForm operator-() const;
    friend AForm operator+(const AForm& a, const AForm& b);
    friend AForm operator-(const AForm& a, const AForm& b) { return a + (-b); }
    friend AForm operator*(const Expr& f, const AForm& a);

private:
    PresentationPtr p_;
    int degree_ = 0;
    std::map<Multi, Expr> c_;
};

bool equal(const AForm& a, const AForm& b);
AForm d_A(const AForm& theta);
AForm wedge(const AForm& a, const AForm& b);
// Value on an arbitrary section given by frame coefficients (degree 1).
Expr evaluate_on(const AForm& theta, const std::vector<Expr>& coefficients);
// Degree-2 value on two sections given by frame coefficients.
Expr evaluate_on(const AForm& theta, const std::vector<Expr>& a, const std::vector<Expr>& b);

// Complex-valued A-forms; d_A and wedge extend complex-linearly.
struct ComplexAForm {
    AForm re;
    AForm im;

    ComplexAForm() = default;
    explicit ComplexAForm(AForm r) : re(std::move(r)), im(re.presentation(), re.degree()) {}
    ComplexAForm(AForm r, AForm i) : re(std::move(r)), im(std::move(i)) {}

    ComplexExpr get(const Multi& idx) const { return {re.get(idx), im.get(idx)}; }
    bool is_zero() const { return re.is_zero() && im.is_zero(); }
    std::string str() const;

    friend ComplexAForm operator+(const ComplexAForm& a, const ComplexAForm& b) { return {a.re + b.re, a.im + b.im}; }
    friend ComplexAForm operator-(const ComplexAForm& a, const ComplexAForm& b) { return {a.re - b.re, a.im - b.im}; }
    friend ComplexAForm operator*(const ComplexExpr& z, const ComplexAForm& a) {
        return {z.re() * a.re - z.im() * a.im, z.re() * a.im + z.im() * a.re};
    }
};

bool equal(const ComplexAForm& a, const ComplexAForm& b);
ComplexAForm d_A(const ComplexAForm& theta);
ComplexAForm wedge(const ComplexAForm& a, const ComplexAForm& b);

// The D-form psi_1..psi_l -> phi(X_1..X_l) + Q(xi_1..xi_l) on a presentation
// with a realization.
AForm pair_form(const KForm& phi, const KVector& q, const PresentationPtr& p);
// d_D(phi, Q) evaluated as d phi on the X's plus the contravariant part on the xi's.
AForm d_D_pair(const KForm& phi, const KVector& q, const PresentationPtr& p);
// sigma on anchor images of frame tuples.
AForm rho_pullback(const KForm& sigma, const PresentationPtr& p);

// pr^*: base form to the pull-back (same coefficients, no t slot).
AForm pullback_form(const AForm& theta, const PresentationPtr& d1);
// iota^*: restriction to t = 0 as a base form.
AForm restrict_to_zero(const AForm& theta);
// Homotopy operator: drops terms without the t slot and integrates the t-slot
// coefficient from 0 to t. DomainError "unsupported integrand" when a
// coefficient is not polynomial in t.
AForm homotopy_S(const AForm& omega);

// Connection on a trivial rank-m bundle: nabla_a eps_k = sum_j theta[j][k](a) eps_j.
struct AConnection {
    PresentationPtr presentation;
    std::vector<std::vector<ComplexAForm>> theta;
    std::size_t bundle_rank() const { return theta.size(); }
};

// kappa = d_A theta + theta /\ theta.
std::vector<std::vector<ComplexAForm>> curvature(const AConnection& conn);
// R(e_a, e_b) eps_k, component j, from the operator definition.
ComplexExpr curvature_operator(const AConnection& conn, std::size_t a, std::size_t b, std::size_t j, std::size_t k);

}  // namespace diracq
