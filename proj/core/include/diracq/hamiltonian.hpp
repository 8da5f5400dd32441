#pragma once

#include <optional>
#include <string>
#include <vector>

#include "diracq/courant.hpp"

namespace diracq {

// Sections h_a = (Y_a, eta_a) of D spanning a complement H of V = D n TM.
class ComplementH {
public:
    ComplementH() = default;
    // Validates the sections; DomainError with a witness when one leaves D
    // or the form parts are dependent or too few.
    ComplementH(const DiracStructure& d, std::vector<Section> sections);

    const ChartPtr& chart() const { return chart_; }
    const std::vector<Section>& sections() const { return sections_; }
    std::size_t rank() const { return sections_.size(); }

private:
    ChartPtr chart_;
    std::vector<Section> sections_;
};

// The frame elements at the pivot columns of the covector block.
ComplementH default_complement(const DiracStructure& d);

struct AdmissibleFunction {
    Expr f;
    bool admissible = false;
    VectorField X;                  // particular X_f
    std::optional<VectorField> H;   // H_f when a complement was given
    std::string witness;            // set when not admissible
};

// Particular solution of (X, df) in D: coefficients on the frame with the
// highest-index columns pivoted first and free coefficients zeroed.
AdmissibleFunction admissible_vector_field(const DiracStructure& d, const Expr& f);
AdmissibleFunction admissible(const DiracStructure& d, const ComplementH& h, const Expr& f);

// DomainError "not admissible: ..." for inadmissible f.
VectorField hamiltonian_H(const DiracStructure& d, const ComplementH& h, const Expr& f);

// {f,g}' = X_g f. Checked against a second particular solution.
Expr bracket_prime(const DiracStructure& d, const Expr& f, const Expr& g);
// X_{f,g}' + [X_f, X_g]; lies in D n TM, and vanishes when that is zero.
VectorField bracket_prime_residual(const DiracStructure& d, const Expr& f, const Expr& g);

// {f,g} = H_g f.
Expr bracket_omega(const DiracStructure& d, const ComplementH& h, const Expr& f, const Expr& g);

struct JacobiResidual {
    Expr jacobi;        // cyclic sum of {{f,g},h}
    VectorField field;  // [H_f, H_g] + H_{f,g}
    bool passed() const;
};
JacobiResidual jacobi_suite(const DiracStructure& d, const ComplementH& h, const Expr& f, const Expr& g, const Expr& k);

}  // namespace diracq
