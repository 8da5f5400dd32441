#include "diracq/expr.hpp"

#include <algorithm>
#include <mutex>
#include <set>

#include <boost/math/constants/constants.hpp>

#include "poly.hpp"

namespace diracq {

using detail::Gen;
using detail::Monomial;
using detail::Poly;
using detail::RatFun;

namespace {

bool gen_is_transcendental_atom(const Gen* g) { return g->kind != Gen::Kind::Symbol && g->kind != Gen::Kind::Pi; }

void scan_flags(const Poly& p, RatFun& r) {
    for (const auto& [m, c] : p)
        for (const auto& [g, e] : m) {
            if (g->kind == Gen::Kind::Pi) r.pi = true;
            if (gen_is_transcendental_atom(g)) {
                r.atoms = true;
                if (g->arg.has_pi()) r.pi = true;
            }
        }
}

std::shared_ptr<const RatFun> finish(Poly num, Poly den) {
    auto r = std::make_shared<RatFun>();
    r->num = std::move(num);
    r->den = std::move(den);
    scan_flags(r->num, *r);
    scan_flags(r->den, *r);
    return r;
}

const std::shared_ptr<const RatFun>& zero_rep() {
    static const std::shared_ptr<const RatFun> z = finish({}, detail::poly_const(1));
    return z;
}

std::shared_ptr<const RatFun> from_poly(Poly num) {
    if (num.empty()) return zero_rep();
    return finish(std::move(num), detail::poly_const(1));
}

// Canonical form: gcd removed, monic denominator.
std::shared_ptr<const RatFun> make(Poly num, Poly den, bool coprime = false) {
    if (den.empty()) throw SingularError("division by the zero expression");
    if (num.empty()) return zero_rep();
    if (detail::poly_is_const(den)) return from_poly(detail::poly_scale(num, 1 / den.begin()->second));
    if (!coprime) {
        Poly g = detail::poly_gcd(num, den);
        if (!detail::poly_is_one(g)) {
            num = detail::poly_exact_div(num, g);
            den = detail::poly_exact_div(den, g);
        }
        if (detail::poly_is_const(den)) return from_poly(detail::poly_scale(num, 1 / den.begin()->second));
    }
    const Rational lc = detail::poly_lead_coeff(den);
    if (lc != 1) {
        const Rational inv = 1 / lc;
        num = detail::poly_scale(num, inv);
        den = detail::poly_scale(den, inv);
    }
    return finish(std::move(num), std::move(den));
}

Rational to_rational(long long v) {
    Rational q;
    mpq_set_si(q.get_mpq_t(), static_cast<long>(v), 1);
    return q;
}

Expr atom(Gen::Kind k, const Expr& arg) { return Expr(from_poly(detail::poly_gen(detail::intern_atom(k, arg)))); }

void collect_symbols(const Poly& p, std::set<std::string>& out) {
    for (const auto& [m, c] : p)
        for (const auto& [g, e] : m) {
            if (g->kind == Gen::Kind::Symbol)
                out.insert(g->name);
            else if (gen_is_transcendental_atom(g)) {
                collect_symbols(g->arg.rep().num, out);
                collect_symbols(g->arg.rep().den, out);
            }
        }
}

std::size_t count_nodes(const Poly& p) {
    std::size_t n = 0;
    for (const auto& [m, c] : p) {
        n += 1 + m.size();
        for (const auto& [g, e] : m)
            if (gen_is_transcendental_atom(g)) n += g->arg.node_count();
    }
    return n;
}

Monomial lower(const Monomial& m, std::size_t k) {
    Monomial rest = m;
    if (rest[k].second == 1)
        rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(k));
    else
        rest[k].second -= 1;
    return rest;
}

Expr diff_poly(const Poly& p, const std::string& v) {
    const Gen* vg = detail::intern_symbol(v);
    Poly acc;
    Expr extra;
    for (const auto& [m, c] : p) {
        for (std::size_t k = 0; k < m.size(); ++k) {
            const auto [g, e] = m[k];
            if (g->kind == Gen::Kind::Symbol) {
                if (g != vg) continue;
                acc = detail::poly_add(acc, Poly{{lower(m, k), c * e}});
            } else if (g->kind == Gen::Kind::Pi) {
                continue;
            } else {
                Expr du = differentiate(g->arg, v);
                if (du.is_canonical_zero()) continue;
                Expr dg;
                switch (g->kind) {
                    case Gen::Kind::Exp: dg = exp(g->arg) * du; break;
                    case Gen::Kind::Sin: dg = cos(g->arg) * du; break;
                    default: dg = -sin(g->arg) * du; break;
                }
                Rational ce = c * e;
                extra += Expr(from_poly(Poly{{lower(m, k), ce}})) * dg;
            }
        }
    }
    return Expr(from_poly(std::move(acc))) + extra;
}

struct Substituter {
    const std::map<std::string, Expr>& values;
    std::map<const Gen*, Expr> cache;

    Expr gen(const Gen* g) {
        auto it = cache.find(g);
        if (it != cache.end()) return it->second;
        Expr v;
        switch (g->kind) {
            case Gen::Kind::Symbol: {
                auto f = values.find(g->name);
                v = f == values.end() ? Expr::symbol(g->name) : f->second;
                break;
            }
            case Gen::Kind::Pi: v = Expr::pi(); break;
            case Gen::Kind::Exp: v = exp(substitute(g->arg, values)); break;
            case Gen::Kind::Sin: v = sin(substitute(g->arg, values)); break;
            case Gen::Kind::Cos: v = cos(substitute(g->arg, values)); break;
        }
        cache.emplace(g, v);
        return v;
    }

    Expr poly(const Poly& p) {
        Expr acc;
        for (const auto& [m, c] : p) {
            Expr t(c);
            for (const auto& [g, e] : m) t *= gen(g).pow(e);
            acc += t;
        }
        return acc;
    }
};

struct RealEvaluator {
    const std::map<std::string, Real>& values;
    std::map<const Gen*, Real> cache;

    Real gen(const Gen* g) {
        auto it = cache.find(g);
        if (it != cache.end()) return it->second;
        Real v;
        switch (g->kind) {
            case Gen::Kind::Symbol: {
                auto f = values.find(g->name);
                if (f == values.end()) throw SymbolError("no value for symbol '" + g->name + "'");
                v = f->second;
                break;
            }
            case Gen::Kind::Pi: v = boost::math::constants::pi<Real>(); break;
            case Gen::Kind::Exp: v = boost::multiprecision::exp(expr(g->arg)); break;
            case Gen::Kind::Sin: v = boost::multiprecision::sin(expr(g->arg)); break;
            case Gen::Kind::Cos: v = boost::multiprecision::cos(expr(g->arg)); break;
        }
        cache.emplace(g, v);
        return v;
    }

    Real poly(const Poly& p, Real* abs_sum) {
        Real acc = 0;
        Real mag = 0;
        for (const auto& [m, c] : p) {
            Real t = to_real(c);
            for (const auto& [g, e] : m) t *= boost::multiprecision::pow(gen(g), static_cast<int>(e));
            acc += t;
            mag += boost::multiprecision::abs(t);
        }
        if (abs_sum) *abs_sum = mag;
        return acc;
    }

    Real expr(const Expr& e) {
        const RatFun& r = e.rep();
        Real n = poly(r.num, nullptr);
        if (detail::poly_is_one(r.den)) return n;
        Real mag;
        Real d = poly(r.den, &mag);
        if (d == 0 || boost::multiprecision::abs(d) <= mag * Real("1e-40"))
            throw SingularError("singular at point: denominator of " + e.str() + " vanishes");
        return n / d;
    }
};

struct ExactEvaluator {
    const std::map<std::string, Rational>& values;

    Rational poly(const Poly& p) {
        Rational acc = 0;
        for (const auto& [m, c] : p) {
            Rational t = c;
            for (const auto& [g, e] : m) {
                auto f = values.find(g->name);
                if (g->kind != Gen::Kind::Symbol || f == values.end())
                    throw SymbolError("no value for symbol '" + g->name + "'");
                Rational b;
                mpz_pow_ui(b.get_num_mpz_t(), f->second.get_num_mpz_t(), e);
                mpz_pow_ui(b.get_den_mpz_t(), f->second.get_den_mpz_t(), e);
                t *= b;
            }
            acc += t;
        }
        return acc;
    }

    Rational expr(const Expr& e) {
        Rational n = poly(e.rep().num);
        Rational d = poly(e.rep().den);
        if (sgn(d) == 0) throw SingularError("singular at point: denominator of " + e.str() + " vanishes");
        return n / d;
    }
};

std::mutex& config_mutex() {
    static std::mutex m;
    return m;
}

EqualityConfig& config_storage() {
    static EqualityConfig c;
    return c;
}

}  // namespace

Expr::Expr() : r_(zero_rep()) {}
Expr::Expr(int v) : Expr(static_cast<long long>(v)) {}
Expr::Expr(long v) : Expr(static_cast<long long>(v)) {}
Expr::Expr(long long v) : r_(v == 0 ? zero_rep() : from_poly(detail::poly_const(to_rational(v)))) {}
Expr::Expr(const Rational& q) : r_(from_poly(detail::poly_const(q))) {}

Expr Expr::symbol(const std::string& name) { return Expr(from_poly(detail::poly_gen(detail::intern_symbol(name)))); }

Expr Expr::pi() { return Expr(from_poly(detail::poly_gen(detail::intern_pi()))); }

Expr Expr::frac(long num, long den) {
    if (den == 0) throw SingularError("division by the zero expression");
    Rational q(num, den);
    q.canonicalize();
    return Expr(q);
}

Expr exp(const Expr& e) {
    if (e.is_canonical_zero()) return Expr(1);
    return atom(Gen::Kind::Exp, e);
}

Expr sin(const Expr& e) {
    if (e.is_canonical_zero()) return Expr(0);
    return atom(Gen::Kind::Sin, e);
}

Expr cos(const Expr& e) {
    if (e.is_canonical_zero()) return Expr(1);
    return atom(Gen::Kind::Cos, e);
}

Expr Expr::operator-() const {
    if (is_canonical_zero()) return *this;
    return Expr(finish(detail::poly_neg(r_->num), r_->den));
}

Expr operator+(const Expr& a, const Expr& b) {
    if (a.is_canonical_zero()) return b;
    if (b.is_canonical_zero()) return a;
    const RatFun& x = *a.r_;
    const RatFun& y = *b.r_;
    const bool xone = detail::poly_is_one(x.den);
    const bool yone = detail::poly_is_one(y.den);
    if (xone && yone) return Expr(from_poly(detail::poly_add(x.num, y.num)));
    if (yone) return Expr(make(detail::poly_add(x.num, detail::poly_mul(y.num, x.den)), x.den, true));
    if (xone) return Expr(make(detail::poly_add(detail::poly_mul(x.num, y.den), y.num), y.den, true));
    // Henrici: only gcds of the denominators and of the sum with their gcd.
    Poly g = detail::poly_gcd(x.den, y.den);
    if (detail::poly_is_one(g))
        return Expr(make(detail::poly_add(detail::poly_mul(x.num, y.den), detail::poly_mul(y.num, x.den)),
                         detail::poly_mul(x.den, y.den), true));
    Poly xd = detail::poly_exact_div(x.den, g);
    Poly yd = detail::poly_exact_div(y.den, g);
    Poly t = detail::poly_add(detail::poly_mul(x.num, yd), detail::poly_mul(y.num, xd));
    if (t.empty()) return Expr();
    Poly g2 = detail::poly_gcd(t, g);
    if (!detail::poly_is_one(g2)) {
        t = detail::poly_exact_div(t, g2);
        g = detail::poly_exact_div(g, g2);
    }
    return Expr(make(std::move(t), detail::poly_mul(detail::poly_mul(xd, yd), g), true));
}

Expr operator-(const Expr& a, const Expr& b) { return a + (-b); }

namespace {

// (a/b) * (c/d) with cross cancellation; inputs are reduced.
std::shared_ptr<const RatFun> mul_reduced(const Poly& a, const Poly& b, const Poly& c, const Poly& d) {
    Poly g1 = detail::poly_gcd(a, d);
    Poly g2 = detail::poly_gcd(c, b);
    const bool o1 = detail::poly_is_one(g1);
    const bool o2 = detail::poly_is_one(g2);
    Poly an = o1 ? a : detail::poly_exact_div(a, g1);
    Poly dn = o1 ? d : detail::poly_exact_div(d, g1);
    Poly cn = o2 ? c : detail::poly_exact_div(c, g2);
    Poly bn = o2 ? b : detail::poly_exact_div(b, g2);
    return make(detail::poly_mul(an, cn), detail::poly_mul(bn, dn), true);
}

}  // namespace

Expr operator*(const Expr& a, const Expr& b) {
    if (a.is_canonical_zero() || b.is_canonical_zero()) return Expr();
    if (a.is_one()) return b;
    if (b.is_one()) return a;
    const RatFun& x = *a.r_;
    const RatFun& y = *b.r_;
    if (detail::poly_is_one(x.den) && detail::poly_is_one(y.den)) return Expr(from_poly(detail::poly_mul(x.num, y.num)));
    return Expr(mul_reduced(x.num, x.den, y.num, y.den));
}

Expr operator/(const Expr& a, const Expr& b) {
    if (b.is_canonical_zero()) throw SingularError("division by the zero expression");
    if (a.is_canonical_zero()) return Expr();
    if (b.is_one()) return a;
    const RatFun& x = *a.r_;
    const RatFun& y = *b.r_;
    return Expr(mul_reduced(x.num, x.den, y.den, y.num));
}

Expr Expr::pow(long n) const {
    if (n == 0) return Expr(1);
    if (n < 0) {
        if (is_canonical_zero()) throw SingularError("division by the zero expression");
        Expr inv(make(r_->den, r_->num, true));
        return inv.pow(-n);
    }
    if (n == 1) return *this;
    const auto e = static_cast<unsigned>(n);
    return Expr(make(detail::poly_pow(r_->num, e), detail::poly_pow(r_->den, e), true));
}

bool Expr::operator==(const Expr& o) const {
    if (r_ == o.r_) return true;
    return r_->num == o.r_->num && r_->den == o.r_->den;
}

bool Expr::is_canonical_zero() const { return r_->num.empty(); }

bool Expr::is_one() const { return detail::poly_is_one(r_->num) && detail::poly_is_one(r_->den); }

std::optional<Rational> Expr::as_rational() const {
    if (!detail::poly_is_const(r_->num) || !detail::poly_is_one(r_->den)) return std::nullopt;
    return detail::poly_const_value(r_->num);
}

bool Expr::has_atoms() const { return r_->atoms; }
bool Expr::has_pi() const { return r_->pi; }
bool Expr::is_polynomial() const { return detail::poly_is_one(r_->den); }

std::vector<std::string> Expr::free_symbols() const {
    std::set<std::string> s;
    collect_symbols(r_->num, s);
    collect_symbols(r_->den, s);
    return {s.begin(), s.end()};
}

bool Expr::depends_on(const std::string& name) const {
    auto s = free_symbols();
    return std::binary_search(s.begin(), s.end(), name);
}

Expr Expr::numerator() const { return Expr(from_poly(r_->num)); }
Expr Expr::monic_numerator() const { return Expr(from_poly(detail::poly_monic(r_->num))); }
Expr Expr::denominator() const { return Expr(from_poly(r_->den)); }

std::vector<Expr> Expr::coefficients_in(const std::string& v) const {
    const Gen* g = detail::intern_symbol(v);
    std::set<std::string> den_syms;
    collect_symbols(r_->den, den_syms);
    if (den_syms.count(v)) throw DomainError("not polynomial in " + v + ": " + str());
    for (const auto& [m, c] : r_->num)
        for (const auto& [h, e] : m)
            if (gen_is_transcendental_atom(h) && h->arg.depends_on(v))
                throw DomainError("not polynomial in " + v + ": " + str());
    std::vector<Expr> out;
    for (Poly& c : detail::poly_coeffs_in(r_->num, g)) out.emplace_back(make(std::move(c), r_->den, true));
    return out;
}

std::string Expr::str() const {
    if (detail::poly_is_one(r_->den)) return detail::poly_str(r_->num);
    std::string n = detail::poly_str(r_->num);
    if (r_->num.size() > 1) n = "(" + n + ")";
    std::string d = detail::poly_str(r_->den);
    if (r_->den.size() > 1 || r_->den.begin()->first.size() > 1) d = "(" + d + ")";
    return n + "/" + d;
}

std::size_t Expr::node_count() const { return count_nodes(r_->num) + count_nodes(r_->den); }

Expr differentiate(const Expr& e, const std::string& v) {
    const RatFun& r = e.rep();
    if (r.num.empty()) return Expr();
    Expr dn = diff_poly(r.num, v);
    if (detail::poly_is_one(r.den)) return dn;
    Expr dd = diff_poly(r.den, v);
    Expr n(from_poly(r.num));
    Expr d(from_poly(r.den));
    if (dd.is_canonical_zero()) return dn / d;
    return (dn * d - n * dd) / (d * d);
}

Expr substitute(const Expr& e, const std::map<std::string, Expr>& values) {
    if (values.empty()) return e;
    Substituter s{values, {}};
    return s.poly(e.rep().num) / s.poly(e.rep().den);
}

Expr normalize(const Expr& e) { return e; }

void set_equality_config(const EqualityConfig& cfg) {
    std::lock_guard<std::mutex> lock(config_mutex());
    config_storage() = cfg;
}

EqualityConfig equality_config() {
    std::lock_guard<std::mutex> lock(config_mutex());
    return config_storage();
}

bool probabilistic_zero(const Expr& e, int samples, std::uint64_t seed) {
    if (e.is_canonical_zero()) return true;
    const EqualityConfig cfg = equality_config();
    const auto syms = e.free_symbols();
    RationalSampler rs(stable_hash(e.str(), seed));
    const bool exact = !e.has_atoms() && !e.has_pi();
    int accepted = 0;
    int attempts = 0;
    while (accepted < samples) {
        if (attempts++ >= samples + cfg.max_retries)
            throw SingularError("could not find enough regular sample points for " + e.str());
        if (exact) {
            std::map<std::string, Rational> pt;
            for (const auto& s : syms) pt[s] = rs.next();
            ExactEvaluator ev{pt};
            if (sgn(ev.poly(e.rep().den)) == 0) continue;
            if (sgn(ev.poly(e.rep().num)) != 0) return false;
        } else {
            std::map<std::string, Real> pt;
            for (const auto& s : syms) pt[s] = to_real(rs.next());
            RealEvaluator ev{pt, {}};
            try {
                Real dmag;
                Real d = ev.poly(e.rep().den, &dmag);
                if (d == 0 || boost::multiprecision::abs(d) <= dmag * Real("1e-40")) continue;
                Real mag;
                Real n = ev.poly(e.rep().num, &mag);
                // Absolute floor near working precision: sin(2 pi) is ~1e-50
                // and its only term is just as small.
                if (boost::multiprecision::abs(n) > mag * Real(cfg.rel_tol) &&
                    boost::multiprecision::abs(n) > Real("1e-40"))
                    return false;
            } catch (const SingularError&) {
                continue;
            }
        }
        ++accepted;
    }
    return true;
}

bool probabilistic_equal(const Expr& a, const Expr& b, int samples, std::uint64_t seed) {
    return probabilistic_zero(a - b, samples, seed);
}

bool is_zero(const Expr& e) {
    if (e.is_canonical_zero()) return true;
    if (!e.has_atoms()) return false;
    const EqualityConfig cfg = equality_config();
    return probabilistic_zero(e, cfg.samples, cfg.seed);
}

bool equal(const Expr& a, const Expr& b) { return a == b || is_zero(a - b); }

Real to_real(const Rational& q) {
    Real r;
    mpfr_set_q(r.backend().data(), q.get_mpq_t(), MPFR_RNDN);
    return r;
}

Real value_as_real(const Value& v) {
    if (const auto* q = std::get_if<Rational>(&v)) return to_real(*q);
    return std::get<Real>(v);
}

Value evaluate(const Expr& e, const Point& p) {
    if (!e.has_atoms() && !e.has_pi()) {
        ExactEvaluator ev{p.values};
        return ev.expr(e);
    }
    std::map<std::string, Real> vals;
    for (const auto& [k, v] : p.values) vals[k] = to_real(v);
    return evaluate_real(e, vals);
}

Real evaluate_real(const Expr& e, const std::map<std::string, Real>& values) {
    RealEvaluator ev{values, {}};
    return ev.expr(e);
}

RationalSampler::RationalSampler(std::uint64_t seed, long bound) : state_(seed), bound_(bound) {}

std::uint64_t RationalSampler::next_u64() {
    // splitmix64
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Rational RationalSampler::next() {
    const auto span = static_cast<std::uint64_t>(2 * bound_ + 1);
    const long num = static_cast<long>(next_u64() % span) - bound_;
    const long den = static_cast<long>(next_u64() % static_cast<std::uint64_t>(bound_)) + 1;
    Rational q(num, den);
    q.canonicalize();
    return q;
}

std::uint64_t stable_hash(const std::string& s, std::uint64_t seed) {
    std::uint64_t h = 0xcbf29ce484222325ULL ^ (seed * 0x100000001b3ULL);
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

ComplexExpr operator*(const ComplexExpr& a, const ComplexExpr& b) {
    if (a.is_real() && b.is_real()) return ComplexExpr(a.re() * b.re());
    return {a.re() * b.re() - a.im() * b.im(), a.re() * b.im() + a.im() * b.re()};
}

ComplexExpr operator/(const ComplexExpr& a, const ComplexExpr& b) {
    if (b.is_real()) return {a.re() / b.re(), a.im() / b.re()};
    const Expr n = b.re() * b.re() + b.im() * b.im();
    return {(a.re() * b.re() + a.im() * b.im()) / n, (a.im() * b.re() - a.re() * b.im()) / n};
}

std::string ComplexExpr::str() const {
    if (im_.is_canonical_zero()) return re_.str();
    std::string i = "I*(" + im_.str() + ")";
    if (re_.is_canonical_zero()) return i;
    return re_.str() + " + " + i;
}

ComplexExpr differentiate(const ComplexExpr& e, const std::string& v) {
    return {differentiate(e.re(), v), differentiate(e.im(), v)};
}

bool is_zero(const ComplexExpr& e) { return is_zero(e.re()) && is_zero(e.im()); }

bool equal(const ComplexExpr& a, const ComplexExpr& b) { return equal(a.re(), b.re()) && equal(a.im(), b.im()); }

}  // namespace diracq
