#include "poly.hpp"

#include <algorithm>
#include <cstdint>
#include <iterator>
#include <memory>
#include <mutex>

namespace diracq::detail {

namespace {

std::mutex& registry_mutex() {
    static std::mutex m;
    return m;
}

std::map<std::string, std::unique_ptr<Gen>>& registry() {
    static std::map<std::string, std::unique_ptr<Gen>> r;
    return r;
}

const Gen* intern(std::unique_ptr<Gen> g) {
    std::lock_guard<std::mutex> lock(registry_mutex());
    auto [it, inserted] = registry().try_emplace(g->key);
    if (inserted) it->second = std::move(g);
    return it->second.get();
}

const char* func_name(Gen::Kind k) {
    switch (k) {
        case Gen::Kind::Exp: return "exp";
        case Gen::Kind::Sin: return "sin";
        case Gen::Kind::Cos: return "cos";
        default: return "";
    }
}

bool mono_div(const Monomial& a, const Monomial& b, Monomial& out) {
    out.clear();
    std::size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        if (j == b.size()) {
            out.push_back(a[i++]);
        } else if (i == a.size()) {
            return false;
        } else if (a[i].first == b[j].first) {
            if (a[i].second < b[j].second) return false;
            if (a[i].second > b[j].second) out.emplace_back(a[i].first, a[i].second - b[j].second);
            ++i;
            ++j;
        } else if (gen_less(a[i].first, b[j].first)) {
            out.push_back(a[i++]);
        } else {
            return false;
        }
    }
    return true;
}

void add_term(Poly& p, const Monomial& m, const Rational& c) {
    if (sgn(c) == 0) return;
    auto [it, inserted] = p.try_emplace(m, c);
    if (!inserted) {
        it->second += c;
        if (sgn(it->second) == 0) p.erase(it);
    }
}

// p -= c * m * b, in place.
void sub_scaled(Poly& p, const Poly& b, const Monomial& m, const Rational& c) {
    for (const auto& [mb, cb] : b) add_term(p, mono_mul(m, mb), -c * cb);
}

Poly mul_monomial(const Poly& a, const Monomial& m) {
    Poly out;
    for (const auto& [ma, ca] : a) out.emplace(mono_mul(ma, m), ca);
    return out;
}

Poly prem(Poly a, const Poly& b, const Gen* v) {
    const unsigned db = poly_degree_in(b, v);
    const Poly lcb = poly_coeffs_in(b, v)[db];
    unsigned da = poly_degree_in(a, v);
    while (!a.empty() && da >= db) {
        Poly lca = poly_coeffs_in(a, v)[da];
        Monomial vm;
        if (da > db) vm.emplace_back(v, da - db);
        a = poly_sub(poly_mul(lcb, a), poly_mul(mul_monomial(lca, vm), b));
        if (a.empty()) break;
        unsigned nd = poly_degree_in(a, v);
        da = nd;
    }
    return a;
}

Poly content_in(const Poly& p, const Gen* v) {
    Poly g;
    for (const Poly& c : poly_coeffs_in(p, v)) {
        if (c.empty()) continue;
        g = g.empty() ? poly_monic(c) : poly_gcd(g, c);
        if (poly_is_one(g)) break;
    }
    return g;
}

Poly primitive_part(const Poly& p, const Gen* v) {
    return poly_monic(poly_exact_div(p, content_in(p, v)));
}

bool contains_gen(const Poly& p, const Gen* v) {
    for (const auto& [m, c] : p)
        for (const auto& [g, e] : m)
            if (g == v) return true;
    return false;
}

Poly prs_gcd(Poly a, Poly b, const Gen* v) {
    if (poly_degree_in(a, v) < poly_degree_in(b, v)) std::swap(a, b);
    for (;;) {
        Poly r = prem(a, b, v);
        if (r.empty()) return b;
        if (poly_degree_in(r, v) == 0) return poly_const(1);
        a = std::move(b);
        b = primitive_part(r, v);
    }
}

// Arithmetic modulo the Mersenne prime 2^61 - 1.
constexpr std::uint64_t kP = (1ULL << 61) - 1;

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b) {
    unsigned __int128 r = static_cast<unsigned __int128>(a) * b;
    std::uint64_t lo = static_cast<std::uint64_t>(r & kP);
    std::uint64_t hi = static_cast<std::uint64_t>(r >> 61);
    std::uint64_t s = lo + hi;
    return s >= kP ? s - kP : s;
}

std::uint64_t addmod(std::uint64_t a, std::uint64_t b) {
    std::uint64_t s = a + b;
    return s >= kP ? s - kP : s;
}

std::uint64_t submod(std::uint64_t a, std::uint64_t b) { return a >= b ? a - b : a + kP - b; }

std::uint64_t powmod(std::uint64_t a, std::uint64_t e) {
    std::uint64_t r = 1;
    while (e) {
        if (e & 1) r = mulmod(r, a);
        a = mulmod(a, a);
        e >>= 1;
    }
    return r;
}

std::uint64_t invmod(std::uint64_t a) { return powmod(a, kP - 2); }

std::uint64_t mpz_mod_p(const mpz_class& z) {
    mpz_class m = z % mpz_class(static_cast<unsigned long>(kP));
    if (m < 0) m += static_cast<unsigned long>(kP);
    return m.get_ui();
}

// Returns false when the denominator vanishes mod p.
bool rational_mod_p(const Rational& q, std::uint64_t& out) {
    std::uint64_t d = mpz_mod_p(q.get_den());
    if (d == 0) return false;
    out = mulmod(mpz_mod_p(q.get_num()), invmod(d));
    return true;
}

using UPoly = std::vector<std::uint64_t>;  // index = degree

void trim(UPoly& p) {
    while (!p.empty() && p.back() == 0) p.pop_back();
}

UPoly upoly_rem(UPoly a, const UPoly& b) {
    const std::uint64_t inv = invmod(b.back());
    while (a.size() >= b.size()) {
        std::uint64_t f = mulmod(a.back(), inv);
        std::size_t shift = a.size() - b.size();
        for (std::size_t i = 0; i < b.size(); ++i) a[i + shift] = submod(a[i + shift], mulmod(f, b[i]));
        a.pop_back();
        trim(a);
    }
    return a;
}

std::size_t upoly_gcd_degree(UPoly a, UPoly b) {
    while (!b.empty()) {
        UPoly r = upoly_rem(a, b);
        a = std::move(b);
        b = std::move(r);
    }
    return a.empty() ? 0 : a.size() - 1;
}

// Specialise every generator except v; false if a coefficient is not representable.
bool specialise(const Poly& p, const Gen* v, const std::map<const Gen*, std::uint64_t>& vals, UPoly& out) {
    out.assign(poly_degree_in(p, v) + 1, 0);
    for (const auto& [m, c] : p) {
        std::uint64_t t;
        if (!rational_mod_p(c, t)) return false;
        unsigned d = 0;
        for (const auto& [g, e] : m) {
            if (g == v)
                d = e;
            else
                t = mulmod(t, powmod(vals.at(g), e));
        }
        out[d] = addmod(out[d], t);
    }
    return true;
}

// Certifies gcd(a, b) = 1: for each shared generator v, a specialisation of the
// others that keeps both leading coefficients nonzero and gives a constant
// univariate gcd bounds deg_v gcd(a, b) by 0.
bool certify_coprime(const Poly& a, const Poly& b) {
    auto ga = poly_gens(a);
    auto gb = poly_gens(b);
    std::vector<const Gen*> shared;
    std::set_intersection(ga.begin(), ga.end(), gb.begin(), gb.end(), std::back_inserter(shared), gen_less);
    if (shared.empty()) return true;
    std::vector<const Gen*> all;
    std::set_union(ga.begin(), ga.end(), gb.begin(), gb.end(), std::back_inserter(all), gen_less);
    std::uint64_t state = 0x2545f4914f6cdd1dULL + a.size() * 131 + b.size();
    auto next = [&state] {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        return state % kP;
    };
    for (const Gen* v : shared) {
        bool certified = false;
        for (int attempt = 0; attempt < 3 && !certified; ++attempt) {
            std::map<const Gen*, std::uint64_t> vals;
            for (const Gen* g : all)
                if (g != v) vals[g] = next();
            UPoly ua, ub;
            if (!specialise(a, v, vals, ua) || !specialise(b, v, vals, ub)) return false;
            if (ua.back() == 0 || ub.back() == 0) continue;
            certified = upoly_gcd_degree(ua, ub) == 0;
            if (!certified) return false;
        }
        if (!certified) return false;
    }
    return true;
}

// Trial division; false as soon as a leading term fails to divide.
bool try_divide(const Poly& a, const Poly& b, Poly* quotient) {
    Poly q;
    Poly r = a;
    const auto& [mb, cb] = *b.rbegin();
    Monomial m;
    std::size_t steps = 0;
    const std::size_t limit = 64 * (a.size() + 1) * (b.size() + 1);
    while (!r.empty()) {
        if (++steps > limit) return false;
        const auto& [mr, cr] = *r.rbegin();
        if (!mono_div(mr, mb, m)) return false;
        Rational c = cr / cb;
        add_term(q, m, c);
        sub_scaled(r, b, m, c);
    }
    if (quotient) *quotient = std::move(q);
    return true;
}

mpz_class int_content(const Poly& p) {
    mpz_class g = 0;
    for (const auto& [m, c] : p) {
        mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), c.get_num_mpz_t());
        if (g == 1) break;
    }
    return g;
}

// Scales p to integer coefficients with unit content and positive leading coefficient.
Poly integer_primitive(const Poly& p) {
    mpz_class l = 1;
    for (const auto& [m, c] : p) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), c.get_den_mpz_t());
    Poly out = poly_scale(p, Rational(l));
    mpz_class g = int_content(out);
    if (sgn(poly_lead_coeff(out)) < 0) g = -g;
    return poly_scale(out, Rational(1) / Rational(g));
}

mpz_class max_norm(const Poly& p) {
    mpz_class n = 0;
    for (const auto& [m, c] : p) {
        mpz_class a = abs(c.get_num());
        if (a > n) n = a;
    }
    return n;
}

Poly eval_at(const Poly& p, const Gen* x, const mpz_class& xi) {
    Poly out;
    for (const auto& [m, c] : p) {
        Monomial rest;
        unsigned e = 0;
        for (const auto& f : m) {
            if (f.first == x)
                e = f.second;
            else
                rest.push_back(f);
        }
        mpz_class w;
        mpz_pow_ui(w.get_mpz_t(), xi.get_mpz_t(), e);
        add_term(out, rest, c * Rational(w));
    }
    return out;
}

// xi-adic reconstruction with symmetric remainders.
Poly reconstruct(Poly g, const Gen* x, const mpz_class& xi) {
    Poly out;
    const mpz_class half = xi / 2;
    unsigned k = 0;
    while (!g.empty()) {
        Poly digit;
        for (const auto& [m, c] : g) {
            mpz_class r = c.get_num() % xi;
            if (r < 0) r += xi;
            if (r > half) r -= xi;
            if (r != 0) digit.emplace(m, Rational(r));
        }
        for (const auto& [m, c] : digit) {
            Monomial mm = m;
            if (k > 0) mm = mono_mul(m, Monomial{{x, k}});
            out.emplace(mm, c);
        }
        g = poly_scale(poly_sub(g, digit), Rational(1) / Rational(xi));
        ++k;
        if (k > 100000) break;
    }
    return out;
}

// Integer-coefficient inputs; result carries the integer content gcd.
bool heu_gcd(const Poly& a, const Poly& b, Poly& out, int depth) {
    if (a.empty() || b.empty()) return false;
    mpz_class ca = int_content(a), cb = int_content(b);
    mpz_class c;
    mpz_gcd(c.get_mpz_t(), ca.get_mpz_t(), cb.get_mpz_t());
    if (poly_is_const(a) || poly_is_const(b)) {
        out = poly_const(Rational(c));
        return true;
    }
    Poly pa = poly_scale(a, Rational(1) / Rational(ca));
    Poly pb = poly_scale(b, Rational(1) / Rational(cb));
    auto ga = poly_gens(pa);
    const Gen* x = ga.front();
    mpz_class xi = 2 * std::min(max_norm(pa), max_norm(pb)) + 29;
    for (int attempt = 0; attempt < 6; ++attempt) {
        if (mpz_sizeinbase(xi.get_mpz_t(), 2) * (poly_degree_in(pa, x) + poly_degree_in(pb, x) + 1) > 60000)
            return false;
        Poly ea = eval_at(pa, x, xi);
        Poly eb = eval_at(pb, x, xi);
        Poly gamma;
        if (!ea.empty() && !eb.empty() && heu_gcd(ea, eb, gamma, depth + 1)) {
            Poly g = reconstruct(gamma, x, xi);
            if (!g.empty()) {
                g = integer_primitive(g);
                if (try_divide(pa, g, nullptr) && try_divide(pb, g, nullptr)) {
                    out = poly_scale(g, Rational(c));
                    return true;
                }
            }
        }
        xi = xi * 73794 / 27011;
    }
    return false;
}

}  // namespace

const Gen* intern_symbol(const std::string& name) {
    auto g = std::make_unique<Gen>();
    g->kind = Gen::Kind::Symbol;
    g->name = name;
    g->key = "0" + name;
    g->text = name;
    return intern(std::move(g));
}

const Gen* intern_pi() {
    auto g = std::make_unique<Gen>();
    g->kind = Gen::Kind::Pi;
    g->name = "pi";
    g->key = "/pi";
    g->text = "pi";
    return intern(std::move(g));
}

const Gen* intern_atom(Gen::Kind kind, const Expr& arg) {
    auto g = std::make_unique<Gen>();
    g->kind = kind;
    g->name = func_name(kind);
    g->arg = arg;
    g->text = g->name + "(" + arg.str() + ")";
    g->key = "1" + g->text;
    return intern(std::move(g));
}

bool MonoLess::operator()(const Monomial& a, const Monomial& b) const {
    std::size_t i = 0, j = 0;
    for (;;) {
        if (i == a.size()) return j != b.size();
        if (j == b.size()) return false;
        if (a[i].first == b[j].first) {
            if (a[i].second != b[j].second) return a[i].second < b[j].second;
            ++i;
            ++j;
        } else {
            // a carries a more significant generator than b
            return !gen_less(a[i].first, b[j].first);
        }
    }
}

Poly poly_const(const Rational& c) {
    Poly p;
    if (sgn(c) != 0) p.emplace(Monomial{}, c);
    return p;
}

Poly poly_gen(const Gen* g) {
    Poly p;
    p.emplace(Monomial{{g, 1u}}, Rational(1));
    return p;
}

bool poly_is_const(const Poly& p) { return p.empty() || (p.size() == 1 && p.begin()->first.empty()); }

Rational poly_const_value(const Poly& p) { return p.empty() ? Rational(0) : p.begin()->second; }

bool poly_is_one(const Poly& p) { return p.size() == 1 && p.begin()->first.empty() && p.begin()->second == 1; }

Poly poly_add(const Poly& a, const Poly& b) {
    if (a.size() < b.size()) return poly_add(b, a);
    Poly out = a;
    for (const auto& [m, c] : b) add_term(out, m, c);
    return out;
}

Poly poly_sub(const Poly& a, const Poly& b) {
    Poly out = a;
    for (const auto& [m, c] : b) add_term(out, m, -c);
    return out;
}

Poly poly_neg(const Poly& a) {
    Poly out = a;
    for (auto& [m, c] : out) c = -c;
    return out;
}

Poly poly_scale(const Poly& a, const Rational& c) {
    if (sgn(c) == 0) return {};
    Poly out = a;
    for (auto& [m, v] : out) v *= c;
    return out;
}

Monomial mono_mul(const Monomial& a, const Monomial& b) {
    Monomial out;
    out.reserve(a.size() + b.size());
    std::size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        if (j == b.size()) {
            out.push_back(a[i++]);
        } else if (i == a.size()) {
            out.push_back(b[j++]);
        } else if (a[i].first == b[j].first) {
            out.emplace_back(a[i].first, a[i].second + b[j].second);
            ++i;
            ++j;
        } else if (gen_less(a[i].first, b[j].first)) {
            out.push_back(a[i++]);
        } else {
            out.push_back(b[j++]);
        }
    }
    return out;
}

Poly poly_mul(const Poly& a, const Poly& b) {
    Poly out;
    if (a.empty() || b.empty()) return out;
    if (poly_is_const(a)) return poly_scale(b, a.begin()->second);
    if (poly_is_const(b)) return poly_scale(a, b.begin()->second);
    for (const auto& [ma, ca] : a)
        for (const auto& [mb, cb] : b) add_term(out, mono_mul(ma, mb), ca * cb);
    return out;
}

Poly poly_pow(const Poly& a, unsigned n) {
    Poly result = poly_const(1);
    Poly base = a;
    while (n) {
        if (n & 1u) result = poly_mul(result, base);
        n >>= 1u;
        if (n) base = poly_mul(base, base);
    }
    return result;
}

const Rational& poly_lead_coeff(const Poly& p) { return p.rbegin()->second; }

Poly poly_monic(const Poly& p) {
    if (p.empty()) return p;
    const Rational lc = poly_lead_coeff(p);
    if (lc == 1) return p;
    return poly_scale(p, 1 / lc);
}

std::vector<const Gen*> poly_gens(const Poly& p) {
    std::vector<const Gen*> out;
    for (const auto& [m, c] : p)
        for (const auto& [g, e] : m) out.push_back(g);
    std::sort(out.begin(), out.end(), gen_less);
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

unsigned poly_degree_in(const Poly& p, const Gen* v) {
    unsigned d = 0;
    for (const auto& [m, c] : p)
        for (const auto& [g, e] : m)
            if (g == v) d = std::max(d, e);
    return d;
}

std::vector<Poly> poly_coeffs_in(const Poly& p, const Gen* v) {
    std::vector<Poly> out(poly_degree_in(p, v) + 1);
    for (const auto& [m, c] : p) {
        unsigned d = 0;
        Monomial rest;
        rest.reserve(m.size());
        for (const auto& f : m) {
            if (f.first == v)
                d = f.second;
            else
                rest.push_back(f);
        }
        out[d].emplace(std::move(rest), c);
    }
    return out;
}

Poly poly_exact_div(const Poly& a, const Poly& b) {
    if (b.empty()) throw SingularError("polynomial division by zero");
    if (poly_is_const(b)) return poly_scale(a, 1 / b.begin()->second);
    Poly q;
    Poly r = a;
    const auto& [mb, cb] = *b.rbegin();
    Monomial m;
    while (!r.empty()) {
        const auto& [mr, cr] = *r.rbegin();
        if (!mono_div(mr, mb, m)) throw Error("inexact polynomial division");
        Rational c = cr / cb;
        add_term(q, m, c);
        sub_scaled(r, b, m, c);
    }
    return q;
}

Poly poly_gcd(const Poly& a, const Poly& b) {
    if (a.empty()) return poly_monic(b);
    if (b.empty()) return poly_monic(a);
    if (poly_is_const(a) || poly_is_const(b)) return poly_const(1);
    if (a == b) return poly_monic(a);
    if (certify_coprime(a, b)) return poly_const(1);
    {
        Poly h;
        if (heu_gcd(integer_primitive(a), integer_primitive(b), h, 0)) return poly_monic(h);
    }
    auto ga = poly_gens(a);
    auto gb = poly_gens(b);
    const Gen* v = ga.front();
    if (gen_less(gb.front(), v)) v = gb.front();
    const bool in_a = contains_gen(a, v);
    const bool in_b = contains_gen(b, v);
    if (!in_a) return poly_gcd(a, content_in(b, v));
    if (!in_b) return poly_gcd(content_in(a, v), b);
    Poly ca = content_in(a, v);
    Poly cb = content_in(b, v);
    Poly pa = poly_exact_div(a, ca);
    Poly pb = poly_exact_div(b, cb);
    Poly c = poly_gcd(ca, cb);
    Poly g = prs_gcd(poly_monic(pa), poly_monic(pb), v);
    return poly_monic(poly_mul(c, g));
}

std::string poly_str(const Poly& p) {
    if (p.empty()) return "0";
    std::string out;
    bool first = true;
    for (auto it = p.rbegin(); it != p.rend(); ++it) {
        const auto& [m, c] = *it;
        const bool neg = sgn(c) < 0;
        if (first)
            out += neg ? "-" : "";
        else
            out += neg ? " - " : " + ";
        first = false;
        Rational a = abs(c);
        std::string mono;
        for (const auto& [g, e] : m) {
            if (!mono.empty()) mono += "*";
            mono += g->text;
            if (e != 1) mono += "^" + std::to_string(e);
        }
        if (mono.empty())
            out += a.get_str();
        else if (a == 1)
            out += mono;
        else
            out += a.get_str() + "*" + mono;
    }
    return out;
}

std::size_t poly_term_count(const Poly& p) { return p.size(); }

}  // namespace diracq::detail
