#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <gmpxx.h>
#include <boost/multiprecision/mpfr.hpp>

namespace diracq {

using Rational = mpq_class;
using Real = boost::multiprecision::mpfr_float_50;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// Unknown or undeclared identifier.
struct SymbolError : Error {
    using Error::Error;
};
// Division by zero, pole at an evaluation point, rank-deficient systems.
struct SingularError : Error {
    using Error::Error;
};
// Objects living on different charts combined.
struct ChartMismatch : Error {
    using Error::Error;
};
// A documented precondition does not hold.
struct DomainError : Error {
    using Error::Error;
};

namespace detail {
struct RatFun;
struct Gen;
}  // namespace detail

// Exact scalar: a reduced quotient of polynomials over Q whose generators are
// symbols, the constant pi, and the opaque atoms exp/sin/cos of an Expr.
// Values are kept canonical at all times, so structural equality decides
// equality on the atom-free fragment.
class Expr {
public:
    Expr();
    Expr(int v);
    Expr(long v);
    Expr(long long v);
    Expr(const Rational& q);

    static Expr symbol(const std::string& name);
    static Expr pi();
    static Expr frac(long num, long den);

    friend Expr exp(const Expr& e);
    friend Expr sin(const Expr& e);
    friend Expr cos(const Expr& e);

    Expr operator-() const;
    friend Expr operator+(const Expr& a, const Expr& b);
    friend Expr operator-(const Expr& a, const Expr& b);
    friend Expr operator*(const Expr& a, const Expr& b);
    friend Expr operator/(const Expr& a, const Expr& b);
    Expr& operator+=(const Expr& b) { return *this = *this + b; }
    Expr& operator-=(const Expr& b) { return *this = *this - b; }
    Expr& operator*=(const Expr& b) { return *this = *this * b; }
    Expr& operator/=(const Expr& b) { return *this = *this / b; }

    Expr pow(long n) const;

    // Structural (canonical form) equality.
    bool operator==(const Expr& o) const;
    bool operator!=(const Expr& o) const { return !(*this == o); }

    bool is_canonical_zero() const;
    bool is_one() const;
    std::optional<Rational> as_rational() const;
    bool has_atoms() const;
    bool has_pi() const;
    bool is_polynomial() const;
    // Symbols occurring anywhere, atom arguments included.
    std::vector<std::string> free_symbols() const;
    bool depends_on(const std::string& name) const;

    Expr numerator() const;
    // Numerator scaled to leading coefficient 1.
    Expr monic_numerator() const;
    Expr denominator() const;

    // Coefficients of e as a polynomial in the symbol v (index = degree).
    // Throws DomainError when e is not polynomial in v.
    std::vector<Expr> coefficients_in(const std::string& v) const;

    std::string str() const;
    std::size_t node_count() const;

    const detail::RatFun& rep() const { return *r_; }
    explicit Expr(std::shared_ptr<const detail::RatFun> r) : r_(std::move(r)) {}

private:
    std::shared_ptr<const detail::RatFun> r_;
};

Expr exp(const Expr& e);
Expr sin(const Expr& e);
Expr cos(const Expr& e);
inline Expr pow(const Expr& e, long n) { return e.pow(n); }

// Partial derivative with respect to the symbol `v`.
Expr differentiate(const Expr& e, const std::string& v);
// Simultaneous substitution of symbols, atom arguments included.
Expr substitute(const Expr& e, const std::map<std::string, Expr>& values);
// Values are stored canonically; kept for interface symmetry.
Expr normalize(const Expr& e);

struct EqualityConfig {
    std::uint64_t seed = 7;
    int samples = 20;
    int max_retries = 200;
    double rel_tol = 1e-9;
};
void set_equality_config(const EqualityConfig& cfg);
EqualityConfig equality_config();

// Zero test: canonical on the atom-free fragment (pi is transcendental, so it
// is treated as an indeterminate), probabilistic once exp/sin/cos appear.
bool is_zero(const Expr& e);
bool equal(const Expr& a, const Expr& b);

// Evaluation-only equality used to cross-check the canonical test.
bool probabilistic_zero(const Expr& e, int samples, std::uint64_t seed);
bool probabilistic_equal(const Expr& a, const Expr& b, int samples, std::uint64_t seed);

struct Point {
    std::string chart;
    std::map<std::string, Rational> values;
};

using Value = std::variant<Rational, Real>;

Value evaluate(const Expr& e, const Point& p);
Real evaluate_real(const Expr& e, const std::map<std::string, Real>& values);
Real to_real(const Rational& q);
Real value_as_real(const Value& v);

// Rationals with numerator and denominator bounded by `bound`.
class RationalSampler {
public:
    explicit RationalSampler(std::uint64_t seed, long bound = 10000);
    Rational next();
    std::uint64_t next_u64();

private:
    std::uint64_t state_;
    long bound_;
};

std::uint64_t stable_hash(const std::string& s, std::uint64_t seed = 0);

// a + I b with real-valued Expr parts.
class ComplexExpr {
public:
    ComplexExpr() = default;
    ComplexExpr(Expr re) : re_(std::move(re)) {}
    ComplexExpr(int v) : re_(v) {}
    ComplexExpr(Expr re, Expr im) : re_(std::move(re)), im_(std::move(im)) {}

    static ComplexExpr i() { return ComplexExpr(Expr(0), Expr(1)); }
    // 2 pi I, the factor in front of every prequantum term.
    static ComplexExpr two_pi_i() { return ComplexExpr(Expr(0), Expr(2) * Expr::pi()); }

    const Expr& re() const { return re_; }
    const Expr& im() const { return im_; }
    ComplexExpr conj() const { return {re_, -im_}; }

    ComplexExpr operator-() const { return {-re_, -im_}; }
    friend ComplexExpr operator+(const ComplexExpr& a, const ComplexExpr& b) {
        return {a.re_ + b.re_, a.im_ + b.im_};
    }
    friend ComplexExpr operator-(const ComplexExpr& a, const ComplexExpr& b) {
        return {a.re_ - b.re_, a.im_ - b.im_};
    }
    friend ComplexExpr operator*(const ComplexExpr& a, const ComplexExpr& b);
    friend ComplexExpr operator/(const ComplexExpr& a, const ComplexExpr& b);
    ComplexExpr& operator+=(const ComplexExpr& b) { return *this = *this + b; }
    ComplexExpr& operator-=(const ComplexExpr& b) { return *this = *this - b; }
    ComplexExpr& operator*=(const ComplexExpr& b) { return *this = *this * b; }

    bool operator==(const ComplexExpr& o) const { return re_ == o.re_ && im_ == o.im_; }
    bool is_real() const { return im_.is_canonical_zero(); }
    std::string str() const;

private:
    Expr re_;
    Expr im_;
};

ComplexExpr differentiate(const ComplexExpr& e, const std::string& v);
bool is_zero(const ComplexExpr& e);
bool equal(const ComplexExpr& a, const ComplexExpr& b);

}  // namespace diracq
