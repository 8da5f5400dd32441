#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "diracq/expr.hpp"

namespace diracq {

class Chart {
public:
    Chart(std::string name, std::vector<std::string> coords, std::vector<std::string> params = {});

    const std::string& name() const { return name_; }
    std::size_t dim() const { return coords_.size(); }
    const std::vector<std::string>& coords() const { return coords_; }
    const std::vector<std::string>& params() const { return params_; }

    // -1 when `s` is not a coordinate.
    int index_of(const std::string& s) const;
    bool is_param(const std::string& s) const;
    Expr coord(std::size_t i) const { return Expr::symbol(coords_[i]); }

    Expr partial(const Expr& e, std::size_t i) const { return differentiate(e, coords_[i]); }
    // Derivative along a named coordinate; SymbolError for anything else.
    Expr differentiate_by(const Expr& e, const std::string& coordinate) const;
    // Throws SymbolError naming the first undeclared symbol of e.
    void check(const Expr& e) const;
    Point point(const std::map<std::string, Rational>& values) const;

    // Same chart with one more coordinate appended.
    std::shared_ptr<const Chart> extended(const std::string& coordinate) const;

    bool operator==(const Chart& o) const {
        return name_ == o.name_ && coords_ == o.coords_ && params_ == o.params_;
    }
    bool operator!=(const Chart& o) const { return !(*this == o); }

private:
    std::string name_;
    std::vector<std::string> coords_;
    std::vector<std::string> params_;
};

using ChartPtr = std::shared_ptr<const Chart>;

ChartPtr make_chart(std::string name, std::vector<std::string> coords, std::vector<std::string> params = {});
void require_same_chart(const ChartPtr& a, const ChartPtr& b);

// Strictly increasing coordinate or frame indices.
using Multi = std::vector<int>;

// Sorts idx in place; returns the permutation sign, or 0 on a repeated index.
int sort_with_sign(Multi& idx);
std::vector<Multi> increasing_tuples(int n, int k);

class VectorField {
public:
    VectorField() = default;
    explicit VectorField(ChartPtr chart);
    VectorField(ChartPtr chart, std::vector<Expr> components);
    static VectorField basis(ChartPtr chart, std::size_t i);

    const ChartPtr& chart() const { return chart_; }
    std::size_t dim() const { return c_.size(); }
    const Expr& operator[](std::size_t i) const { return c_[i]; }
    Expr& operator[](std::size_t i) { return c_[i]; }
    const std::vector<Expr>& components() const { return c_; }

    Expr apply(const Expr& f) const;
    Expr divergence() const;
    bool is_zero() const;
    std::string str() const;

    VectorField operator-() const;
    friend VectorField operator+(const VectorField& a, const VectorField& b);
    friend VectorField operator-(const VectorField& a, const VectorField& b);
    friend VectorField operator*(const Expr& f, const VectorField& a);

private:
    ChartPtr chart_;
    std::vector<Expr> c_;
};

VectorField lie_bracket(const VectorField& x, const VectorField& y);
bool equal(const VectorField& a, const VectorField& b);

struct FormTag {
    static constexpr const char* prefix = "d";
};
struct VectorTag {
    static constexpr const char* prefix = "d_";
};

// Totally antisymmetric tensor: a k-form (FormTag) or a k-vector (VectorTag).
template <class Tag>
class Alternating {
public:
    Alternating() = default;
    Alternating(ChartPtr chart, int degree) : chart_(std::move(chart)), degree_(degree) {}

    static Alternating scalar(ChartPtr chart, const Expr& f) {
        Alternating a(std::move(chart), 0);
        a.add({}, f);
        return a;
    }
    static Alternating basis(ChartPtr chart, Multi idx) {
        Alternating a(std::move(chart), static_cast<int>(idx.size()));
        a.add(std::move(idx), Expr(1));
        return a;
    }

    const ChartPtr& chart() const { return chart_; }
    int degree() const { return degree_; }
    const std::map<Multi, Expr>& terms() const { return c_; }

    // Component at an arbitrary index order.
    Expr get(Multi idx) const {
        int s = sort_with_sign(idx);
        if (s == 0) return Expr();
        auto it = c_.find(idx);
        if (it == c_.end()) return Expr();
        return s > 0 ? it->second : -it->second;
    }
    void add(Multi idx, const Expr& v) {
        if (v.is_canonical_zero()) return;
        int s = sort_with_sign(idx);
        if (s == 0) return;
        Expr& slot = c_[idx];
        slot = s > 0 ? slot + v : slot - v;
        if (slot.is_canonical_zero()) c_.erase(idx);
    }
    void set(const Multi& sorted_idx, const Expr& v) {
        if (v.is_canonical_zero())
            c_.erase(sorted_idx);
        else
            c_[sorted_idx] = v;
    }

    bool is_zero() const {
        for (const auto& [k, v] : c_)
            if (!diracq::is_zero(v)) return false;
        return true;
    }

    std::string str() const {
        if (c_.empty()) return "0";
        std::string out;
        for (const auto& [idx, v] : c_) {
            std::string basis;
            for (int i : idx) {
                if (!basis.empty()) basis += "/\\";
                basis += std::string(Tag::prefix) + chart_->coords()[static_cast<std::size_t>(i)];
            }
            std::string coef = v.str();
            std::string term;
            if (basis.empty())
                term = coef;
            else if (v.is_one())
                term = basis;
            else
                term = "(" + coef + ")*" + basis;
            out += out.empty() ? term : " + " + term;
        }
        return out;
    }

    Alternating operator-() const {
        Alternating r = *this;
        for (auto& [k, v] : r.c_) v = -v;
        return r;
    }
    friend Alternating operator+(const Alternating& a, const Alternating& b) {
        check_compatible(a, b);
        Alternating r = a;
        for (const auto& [k, v] : b.c_) r.add(k, v);
        return r;
    }
    friend Alternating operator-(const Alternating& a, const Alternating& b) { return a + (-b); }
    friend Alternating operator*(const Expr& f, const Alternating& a) {
        Alternating r(a.chart_, a.degree_);
        if (f.is_canonical_zero()) return r;
        for (const auto& [k, v] : a.c_) r.set(k, f * v);
        return r;
    }

private:
    static void check_compatible(const Alternating& a, const Alternating& b) {
        require_same_chart(a.chart_, b.chart_);
        if (a.degree_ != b.degree_) throw DomainError("degree mismatch in sum");
    }

    ChartPtr chart_;
    int degree_ = 0;
    std::map<Multi, Expr> c_;
};

using KForm = Alternating<FormTag>;
using KVector = Alternating<VectorTag>;

template <class Tag>
bool equal(const Alternating<Tag>& a, const Alternating<Tag>& b) {
    return (a - b).is_zero();
}

KForm exterior_derivative(const KForm& phi);
KForm wedge(const KForm& a, const KForm& b);
KVector wedge(const KVector& a, const KVector& b);
KForm interior_product(const VectorField& x, const KForm& phi);
KForm lie_derivative_form(const VectorField& x, const KForm& phi);

// 1-form of a function.
KForm differential(const ChartPtr& chart, const Expr& f);
KForm one_form(const ChartPtr& chart, std::vector<Expr> components);
Expr pair(const KForm& xi, const VectorField& x);

// phi(X_1, ..., X_k) with the determinant convention.
Expr evaluate_form(const KForm& phi, const std::vector<VectorField>& xs);
// Q(alpha_1, ..., alpha_k) with the determinant convention.
Expr evaluate_kvector(const KVector& q, const std::vector<KForm>& alphas);

// (Pi#alpha)^i = Pi(dx_i, alpha).
VectorField sharp(const KVector& pi, const KForm& alpha);

// Contravariant-type derivative evaluated on pairs (X_j, alpha_j): the
// alternating sum of X_j Q(...) and Q({alpha_j, alpha_k}, ...) with
// {alpha_j, alpha_k} = L_{X_j} alpha_k - i_{X_k} d alpha_j.
Expr contravariant_eval(const KVector& q, const std::vector<VectorField>& xs, const std::vector<KForm>& alphas);
KVector contravariant_derivative(const KVector& pi, const KVector& q);

// f |dx_1 ... dx_n|^alpha with complex coefficient.
struct AlphaDensity {
    ChartPtr chart;
    Rational alpha;
    ComplexExpr coeff;

    AlphaDensity() = default;
    AlphaDensity(ChartPtr c, Rational a, ComplexExpr f);
    AlphaDensity conj() const { return {chart, alpha, coeff.conj()}; }
    std::string str() const;
};

AlphaDensity tensor(const AlphaDensity& a, const AlphaDensity& b);
AlphaDensity lie_derivative_density(const VectorField& x, const AlphaDensity& k);
// Complex vector field re + I im.
AlphaDensity lie_derivative_density(const VectorField& re, const VectorField& im, const AlphaDensity& k);
bool equal(const AlphaDensity& a, const AlphaDensity& b);

}  // namespace diracq
