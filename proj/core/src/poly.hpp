#pragma once

// Sparse multivariate polynomials over Q in interned generators.

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "diracq/expr.hpp"

namespace diracq::detail {

struct Gen {
    enum class Kind : std::uint8_t { Symbol, Pi, Exp, Sin, Cos };
    Kind kind;
    std::string name;  // symbol name or function name
    Expr arg;          // atoms only
    std::string key;   // total order on generators
    std::string text;  // printed form
};

const Gen* intern_symbol(const std::string& name);
const Gen* intern_pi();
const Gen* intern_atom(Gen::Kind kind, const Expr& arg);

inline bool gen_less(const Gen* a, const Gen* b) { return a != b && a->key < b->key; }

using Monomial = std::vector<std::pair<const Gen*, unsigned>>;

// Lexicographic order with the smallest generator most significant.
struct MonoLess {
    bool operator()(const Monomial& a, const Monomial& b) const;
};

using Poly = std::map<Monomial, Rational, MonoLess>;

Poly poly_const(const Rational& c);
Poly poly_gen(const Gen* g);
bool poly_is_const(const Poly& p);
Rational poly_const_value(const Poly& p);
bool poly_is_one(const Poly& p);

Poly poly_add(const Poly& a, const Poly& b);
Poly poly_sub(const Poly& a, const Poly& b);
Poly poly_neg(const Poly& a);
Poly poly_scale(const Poly& a, const Rational& c);
Poly poly_mul(const Poly& a, const Poly& b);
Poly poly_pow(const Poly& a, unsigned n);
Monomial mono_mul(const Monomial& a, const Monomial& b);

const Rational& poly_lead_coeff(const Poly& p);
Poly poly_monic(const Poly& p);

// Generators occurring in p, sorted by key.
std::vector<const Gen*> poly_gens(const Poly& p);
unsigned poly_degree_in(const Poly& p, const Gen* v);
std::vector<Poly> poly_coeffs_in(const Poly& p, const Gen* v);

// Exact quotient a / b; throws if b does not divide a.
Poly poly_exact_div(const Poly& a, const Poly& b);
// Monic gcd (gcd(0, 0) = 0).
Poly poly_gcd(const Poly& a, const Poly& b);

std::string poly_str(const Poly& p);
std::size_t poly_term_count(const Poly& p);

struct RatFun {
    Poly num;
    Poly den;
    bool atoms = false;
    bool pi = false;
};

}  // namespace diracq::detail
