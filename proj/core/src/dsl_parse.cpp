#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "diracq/dsl.hpp"

namespace diracq {

namespace {

enum class Tok { Ident, Int, Plus, Minus, Star, Slash, Caret, Wedge, LParen, RParen, Comma, Semi, Eq, Newline, End };

struct Token {
    Tok kind;
    std::string text;
    std::size_t line;
    std::size_t col;
};

std::string describe(const Token& t) {
    switch (t.kind) {
        case Tok::Newline: return "end of line";
        case Tok::End: return "end of input";
        default: return "'" + t.text + "'";
    }
}

std::vector<Token> lex(const std::string& src) {
    std::vector<Token> out;
    std::size_t line = 1, col = 1, i = 0;
    int depth = 0;
    auto push = [&](Tok k, std::string text, std::size_t c) { out.push_back({k, std::move(text), line, c}); };
    while (i < src.size()) {
        const char ch = src[i];
        if (ch == '\n') {
            if (depth <= 0 && (out.empty() || out.back().kind != Tok::Newline)) push(Tok::Newline, "\n", col);
            ++line;
            col = 1;
            ++i;
            continue;
        }
        if (ch == ' ' || ch == '\t' || ch == '\r') {
            ++i;
            ++col;
            continue;
        }
        if (ch == '#') {
            while (i < src.size() && src[i] != '\n') ++i;
            continue;
        }
        const std::size_t start = col;
        if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
            std::size_t j = i;
            while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
            push(Tok::Ident, src.substr(i, j - i), start);
            col += j - i;
            i = j;
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(ch))) {
            std::size_t j = i;
            while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            push(Tok::Int, src.substr(i, j - i), start);
            col += j - i;
            i = j;
            continue;
        }
        if (ch == '/' && i + 1 < src.size() && src[i + 1] == '\\') {
            push(Tok::Wedge, "/\\", start);
            i += 2;
            col += 2;
            continue;
        }
        Tok k;
        switch (ch) {
            case '+': k = Tok::Plus; break;
            case '-': k = Tok::Minus; break;
            case '*': k = Tok::Star; break;
            case '/': k = Tok::Slash; break;
            case '^': k = Tok::Caret; break;
            case '(': k = Tok::LParen; ++depth; break;
            case ')': k = Tok::RParen; --depth; break;
            case ',': k = Tok::Comma; break;
            case ';': k = Tok::Semi; break;
            case '=': k = Tok::Eq; break;
            default: {
                std::string shown = static_cast<unsigned char>(ch) < 0x80 ? std::string(1, ch) : "non-ASCII byte";
                throw ParseError(line, col, "unexpected character " + shown);
            }
        }
        push(k, std::string(1, ch), start);
        ++i;
        ++col;
    }
    push(Tok::Newline, "\n", col);
    push(Tok::End, "", col);
    return out;
}

// Typed value of an expression; everything is complex until a consumer
// demands a real object.
struct Typed {
    enum Kind { Scalar, Form, Multi, Sect } kind = Scalar;
    ComplexExpr z;
    KForm fre, fim;
    KVector vre, vim;
    ComplexSection s;

    bool zero_scalar() const { return kind == Scalar && z.re().is_canonical_zero() && z.im().is_canonical_zero(); }
};

const char* kind_name(const Typed& v) {
    switch (v.kind) {
        case Typed::Scalar: return "scalar";
        case Typed::Form: return "form";
        case Typed::Multi: return "multivector";
        default: return "section";
    }
}

Typed scalar_value(ComplexExpr z) {
    Typed v;
    v.z = std::move(z);
    return v;
}
Typed form_value(KForm re, KForm im) {
    Typed v;
    v.kind = Typed::Form;
    v.fre = std::move(re);
    v.fim = std::move(im);
    return v;
}
Typed multi_value(KVector re, KVector im) {
    Typed v;
    v.kind = Typed::Multi;
    v.vre = std::move(re);
    v.vim = std::move(im);
    return v;
}
Typed section_value(ComplexSection s) {
    Typed v;
    v.kind = Typed::Sect;
    v.s = std::move(s);
    return v;
}

Typed scale(const ComplexExpr& z, const Typed& v) {
    const Expr &a = z.re(), &b = z.im();
    switch (v.kind) {
        case Typed::Scalar: return scalar_value(z * v.z);
        case Typed::Form: return form_value(a * v.fre - b * v.fim, a * v.fim + b * v.fre);
        case Typed::Multi: return multi_value(a * v.vre - b * v.vim, a * v.vim + b * v.vre);
        default: return section_value(z * v.s);
    }
}

ComplexExpr complex_pow(const ComplexExpr& z, long n) {
    if (z.is_real()) return ComplexExpr(z.re().pow(n));
    ComplexExpr r(1);
    for (long k = 0; k < std::labs(n); ++k) r = r * z;
    return n < 0 ? ComplexExpr(1) / r : r;
}

class Parser {
public:
    Parser(const std::string& text, Model& m) : toks_(lex(text)), m_(m) {}

    void parse_statements() {
        while (peek().kind != Tok::End) {
            if (peek().kind == Tok::Newline) {
                ++pos_;
                continue;
            }
            statement();
        }
        finish();
    }

    Typed expression_only() {
        Typed v = sum();
        skip_newlines();
        if (peek().kind != Tok::End) fail(peek(), "unexpected " + describe(peek()));
        return v;
    }

private:
    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    Model& m_;
    std::set<std::string> names_;
    std::size_t atlas_line_ = 0, atlas_col_ = 0;
    bool seen_model_ = false;

    const Token& peek() const { return toks_[pos_]; }
    const Token& next() { return toks_[pos_++]; }
    [[noreturn]] void fail(const Token& t, const std::string& msg) const { throw ParseError(t.line, t.col, msg); }
    bool accept(Tok k) {
        if (peek().kind != k) return false;
        ++pos_;
        return true;
    }
    const Token& expect(Tok k, const char* what) {
        if (peek().kind != k) fail(peek(), std::string("expected ") + what + ", found " + describe(peek()));
        return next();
    }
    std::string ident(const char* what) { return expect(Tok::Ident, what).text; }
    void keyword(const char* kw) {
        const Token& t = peek();
        if (t.kind != Tok::Ident || t.text != kw) fail(t, std::string("expected '") + kw + "', found " + describe(t));
        ++pos_;
    }
    void end_of_statement() {
        if (peek().kind != Tok::Newline && peek().kind != Tok::End) fail(peek(), "unexpected " + describe(peek()));
        accept(Tok::Newline);
    }
    void skip_newlines() {
        while (peek().kind == Tok::Newline) ++pos_;
    }

    const ChartPtr& chart(const Token& at) const {
        if (!m_.chart) fail(at, "no chart declared yet");
        return m_.chart;
    }

    void declare(const Token& t) {
        if (!names_.insert(t.text).second) fail(t, "name " + t.text + " already defined");
    }

    // ---- expressions

    Typed sum() {
        Typed v = term();
        while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
            const Token& op = next();
            Typed r = term();
            v = combine(op, v, r, op.kind == Tok::Minus);
        }
        return v;
    }

    Typed combine(const Token& at, const Typed& a, const Typed& b, bool minus) {
        Typed rhs = minus ? scale(ComplexExpr(-1), b) : b;
        if (a.zero_scalar()) return rhs;
        if (b.zero_scalar()) return a;
        if (a.kind == Typed::Sect || b.kind == Typed::Sect) return section_value(to_section(at, a) + to_section(at, rhs));
        if (a.kind != b.kind) fail(at, std::string("cannot add ") + kind_name(a) + " and " + kind_name(b));
        try {
            switch (a.kind) {
                case Typed::Scalar: return scalar_value(a.z + rhs.z);
                case Typed::Form: return form_value(a.fre + rhs.fre, a.fim + rhs.fim);
                default: return multi_value(a.vre + rhs.vre, a.vim + rhs.vim);
            }
        } catch (const Error& e) {
            fail(at, e.what());
        }
    }

    Typed term() {
        Typed v = wedge_level();
        while (peek().kind == Tok::Star || peek().kind == Tok::Slash) {
            const Token& op = next();
            Typed r = wedge_level();
            if (op.kind == Tok::Star) {
                if (v.kind == Typed::Scalar)
                    v = scale(v.z, r);
                else if (r.kind == Typed::Scalar)
                    v = scale(r.z, v);
                else
                    fail(op, std::string("cannot multiply ") + kind_name(v) + " by " + kind_name(r) + "; use /\\ for wedge");
            } else {
                if (r.kind != Typed::Scalar) fail(op, std::string("cannot divide by a ") + kind_name(r));
                if (r.zero_scalar()) fail(op, "division by zero");
                try {
                    v = scale(ComplexExpr(1) / r.z, v);
                } catch (const Error& e) {
                    fail(op, e.what());
                }
            }
        }
        return v;
    }

    Typed wedge_level() {
        Typed v = unary();
        while (peek().kind == Tok::Wedge) {
            const Token& op = next();
            Typed r = unary();
            if (v.kind == Typed::Form && r.kind == Typed::Form) {
                v = form_value(wedge(v.fre, r.fre) - wedge(v.fim, r.fim), wedge(v.fre, r.fim) + wedge(v.fim, r.fre));
            } else if (v.kind == Typed::Multi && r.kind == Typed::Multi) {
                v = multi_value(wedge(v.vre, r.vre) - wedge(v.vim, r.vim), wedge(v.vre, r.vim) + wedge(v.vim, r.vre));
            } else {
                fail(op, std::string("cannot wedge ") + kind_name(v) + " and " + kind_name(r));
            }
        }
        return v;
    }

    Typed unary() {
        if (accept(Tok::Minus)) return scale(ComplexExpr(-1), unary());
        if (accept(Tok::Plus)) return unary();
        return power();
    }

    Typed power() {
        Typed base = primary();
        if (peek().kind != Tok::Caret) return base;
        const Token& op = next();
        if (base.kind != Typed::Scalar) fail(op, std::string("cannot raise a ") + kind_name(base) + " to a power");
        bool paren = accept(Tok::LParen);
        bool neg = accept(Tok::Minus);
        const Token& n = peek();
        if (n.kind != Tok::Int) fail(n, "exponent must be an integer");
        ++pos_;
        if (paren) expect(Tok::RParen, "')'");
        long e;
        try {
            e = std::stol(n.text);
        } catch (const std::exception&) {
            fail(n, "exponent too large");
        }
        if (neg) e = -e;
        if (e < 0 && base.zero_scalar()) fail(op, "division by zero");
        return scalar_value(complex_pow(base.z, e));
    }

    Typed primary() {
        const Token& t = next();
        switch (t.kind) {
            case Tok::Int: return scalar_value(ComplexExpr(Expr(Rational(t.text))));
            case Tok::LParen: {
                Typed v = sum();
                if (accept(Tok::Semi)) {
                    Typed form = sum();
                    expect(Tok::RParen, "')'");
                    return section_value(pair_section(t, v, form));
                }
                expect(Tok::RParen, "')'");
                return v;
            }
            case Tok::Ident: return identifier(t);
            default: fail(t, "unexpected " + describe(t));
        }
    }

    Typed call_argument(const Token& fn) {
        expect(Tok::LParen, "'('");
        Typed v = sum();
        expect(Tok::RParen, "')'");
        (void)fn;
        return v;
    }

    Typed identifier(const Token& t) {
        const std::string& s = t.text;
        if (s == "exp" || s == "sin" || s == "cos") {
            Typed a = call_argument(t);
            if (a.kind != Typed::Scalar || !a.z.is_real()) fail(t, s + " needs a real scalar argument");
            const Expr& x = a.z.re();
            return scalar_value(ComplexExpr(s == "exp" ? exp(x) : s == "sin" ? sin(x) : cos(x)));
        }
        if (s == "d" && peek().kind == Tok::LParen) {
            Typed a = call_argument(t);
            const ChartPtr& c = chart(t);
            if (a.kind == Typed::Scalar) return form_value(differential(c, a.z.re()), differential(c, a.z.im()));
            if (a.kind == Typed::Form) return form_value(exterior_derivative(a.fre), exterior_derivative(a.fim));
            fail(t, std::string("cannot take d of a ") + kind_name(a));
        }
        if (s == "I") return scalar_value(ComplexExpr::i());
        if (s == "pi") return scalar_value(ComplexExpr(Expr::pi()));
        for (const auto& [n, e] : m_.scalars)
            if (n == s) return scalar_value(ComplexExpr(e));
        for (const auto& [n, f] : m_.forms)
            if (n == s) return form_value(f, KForm(f.chart(), f.degree()));
        for (const auto& [n, f] : m_.vectors)
            if (n == s) return multi_value(f, KVector(f.chart(), f.degree()));
        for (const auto& [n, f] : m_.sections)
            if (n == s) return section_value(f);
        if (m_.chart) {
            const ChartPtr& c = m_.chart;
            if (c->index_of(s) >= 0 || c->is_param(s)) return scalar_value(ComplexExpr(Expr::symbol(s)));
            if (s.size() > 2 && s.compare(0, 2, "d_") == 0 && c->index_of(s.substr(2)) >= 0) {
                KVector b = KVector::basis(c, {c->index_of(s.substr(2))});
                return multi_value(b, KVector(c, 1));
            }
            if (s.size() > 1 && s[0] == 'd' && c->index_of(s.substr(1)) >= 0) {
                KForm b = KForm::basis(c, {c->index_of(s.substr(1))});
                return form_value(b, KForm(c, 1));
            }
        }
        fail(t, "unknown symbol " + s);
    }

    // ---- coercions

    ComplexSection to_section(const Token& at, const Typed& v) const {
        const ChartPtr& c = chart(at);
        if (v.kind == Typed::Sect) return v.s;
        if (v.zero_scalar()) return ComplexSection(Section(c));
        if (v.kind == Typed::Multi && v.vre.degree() == 1)
            return {Section(to_field(v.vre), KForm(c, 1)), Section(to_field(v.vim), KForm(c, 1))};
        if (v.kind == Typed::Form && v.fre.degree() == 1)
            return {Section(VectorField(c), v.fre), Section(VectorField(c), v.fim)};
        fail(at, std::string("expected a section, found a ") + kind_name(v));
    }

    static VectorField to_field(const KVector& k) {
        VectorField x(k.chart());
        for (std::size_t i = 0; i < x.dim(); ++i) x[i] = k.get({static_cast<int>(i)});
        return x;
    }

    ComplexSection pair_section(const Token& at, const Typed& x, const Typed& xi) const {
        const ChartPtr& c = chart(at);
        ComplexSection vs = x.zero_scalar() ? ComplexSection(Section(c)) : ComplexSection();
        if (!x.zero_scalar()) {
            if (x.kind != Typed::Multi || x.vre.degree() != 1) fail(at, "first slot of a section must be a vector field");
            vs = to_section(at, x);
        }
        ComplexSection fs = xi.zero_scalar() ? ComplexSection(Section(c)) : ComplexSection();
        if (!xi.zero_scalar()) {
            if (xi.kind != Typed::Form || xi.fre.degree() != 1) fail(at, "second slot of a section must be a 1-form");
            fs = to_section(at, xi);
        }
        return vs + fs;
    }

    Expr real_scalar(const Token& at, const Typed& v) const {
        if (v.kind != Typed::Scalar) fail(at, std::string("expected a scalar, found a ") + kind_name(v));
        if (!v.z.is_real()) fail(at, "complex value not allowed here");
        return v.z.re();
    }
    ComplexExpr complex_scalar(const Token& at, const Typed& v) const {
        if (v.kind != Typed::Scalar) fail(at, std::string("expected a scalar, found a ") + kind_name(v));
        return v.z;
    }
    KForm real_form(const Token& at, const Typed& v, int degree) const {
        if (v.zero_scalar() && degree >= 0) return KForm(chart(at), degree);
        if (v.kind == Typed::Scalar && degree <= 0) return KForm::scalar(chart(at), real_scalar(at, v));
        if (v.kind != Typed::Form) fail(at, std::string("expected a form, found a ") + kind_name(v));
        if (!v.fim.is_zero()) fail(at, "complex value not allowed here");
        if (degree >= 0 && v.fre.degree() != degree)
            fail(at, "expected a " + std::to_string(degree) + "-form, found degree " + std::to_string(v.fre.degree()));
        return v.fre;
    }
    KVector real_multi(const Token& at, const Typed& v, int degree) const {
        if (v.zero_scalar() && degree >= 0) return KVector(chart(at), degree);
        if (v.kind != Typed::Multi) fail(at, std::string("expected a multivector, found a ") + kind_name(v));
        if (!v.vim.is_zero()) fail(at, "complex value not allowed here");
        if (degree >= 0 && v.vre.degree() != degree)
            fail(at, "expected a " + std::to_string(degree) + "-vector, found degree " + std::to_string(v.vre.degree()));
        return v.vre;
    }
    Section real_section(const Token& at, const Typed& v) const {
        ComplexSection s = to_section(at, v);
        if (!s.im.is_zero()) fail(at, "complex value not allowed here");
        return s.re;
    }

    // Comma separated arguments of name(...).
    std::vector<std::pair<Token, Typed>> arguments() {
        std::vector<std::pair<Token, Typed>> out;
        expect(Tok::LParen, "'('");
        if (accept(Tok::RParen)) return out;
        do {
            Token at = peek();
            out.emplace_back(at, sum());
        } while (accept(Tok::Comma));
        expect(Tok::RParen, "')' or ','");
        return out;
    }

    std::vector<ComplexSection> span_arguments() {
        keyword("span");
        std::vector<ComplexSection> out;
        for (const auto& [at, v] : arguments()) out.push_back(to_section(at, v));
        return out;
    }

    // ---- statements

    void statement() {
        const Token& kw = peek();
        if (kw.kind != Tok::Ident) fail(kw, "expected a statement, found " + describe(kw));
        ++pos_;
        const std::string& k = kw.text;
        if (k != "model" && k != "chart" && !m_.chart) fail(kw, "the chart must be declared first");
        if (k == "model") return model_stmt(kw);
        if (k == "chart") return chart_stmt(kw);
        if (k == "scalar" || k == "form" || k == "vector" || k == "section") return object_stmt(kw);
        if (k == "dirac") return dirac_stmt(kw);
        if (k == "complement") return complement_stmt(kw);
        if (k == "invariants") return invariants_stmt(kw);
        if (k == "atlas") return atlas_stmt(kw);
        if (k == "sigma") return sigma_stmt(kw);
        if (k == "cocycle" || k == "transition") return overlap_stmt(kw);
        if (k == "hermitian") {
            need_atlas(kw).hermitian = true;
            return end_of_statement();
        }
        if (k == "polarization") return polarization_stmt(kw);
        if (k == "halfdensity") return halfdensity_stmt(kw);
        if (k == "expect") return expect_stmt(kw);
        if (k == "check") return check_stmt(kw);
        fail(kw, "unknown statement " + k);
    }

    void model_stmt(const Token& kw) {
        if (seen_model_) fail(kw, "model name given twice");
        seen_model_ = true;
        m_.name = ident("model name");
        end_of_statement();
    }

    void chart_stmt(const Token& kw) {
        if (m_.chart) fail(kw, "only one chart per model");
        std::string name = ident("chart name");
        keyword("dim");
        const Token& dt = expect(Tok::Int, "dimension");
        keyword("coords");
        std::vector<std::string> coords, params;
        std::set<std::string> seen;
        auto collect = [&](std::vector<std::string>& into) {
            while (peek().kind == Tok::Ident && !(peek().text == "params" && &into == &coords)) {
                const Token& t = next();
                if (t.text == "I" || t.text == "pi" || t.text == "d" || t.text == "exp" || t.text == "sin" ||
                    t.text == "cos")
                    fail(t, "reserved name " + t.text);
                if (!seen.insert(t.text).second) fail(t, "duplicate name " + t.text);
                into.push_back(t.text);
            }
        };
        collect(coords);
        if (peek().kind == Tok::Ident && peek().text == "params") {
            ++pos_;
            collect(params);
        }
        end_of_statement();
        if (coords.empty()) fail(kw, "chart needs coordinates");
        if (std::to_string(coords.size()) != dt.text)
            fail(dt, "dimension mismatch: dim " + dt.text + " but " + std::to_string(coords.size()) + " coordinates");
        for (const auto& s : coords) names_.insert(s);
        for (const auto& s : params) names_.insert(s);
        for (const char* s : {"I", "pi", "d", "exp", "sin", "cos", "span", "components"}) names_.insert(s);
        for (const auto& s : coords) {
            names_.insert("d" + s);
            names_.insert("d_" + s);
        }
        m_.chart = make_chart(name, coords, params);
    }

    void object_stmt(const Token& kw) {
        const Token& nt = expect(Tok::Ident, "name");
        declare(nt);
        expect(Tok::Eq, "'='");
        Token at = peek();
        Typed v = sum();
        end_of_statement();
        if (kw.text == "scalar") {
            m_.scalars.emplace_back(nt.text, real_scalar(at, v));
        } else if (kw.text == "form") {
            m_.forms.emplace_back(nt.text, real_form(at, v, -1));
        } else if (kw.text == "vector") {
            if (v.kind == Typed::Scalar && !v.zero_scalar()) fail(at, "expected a multivector, found a scalar");
            m_.vectors.emplace_back(nt.text, v.zero_scalar() ? KVector(m_.chart, 1) : real_multi(at, v, -1));
        } else {
            m_.sections.emplace_back(nt.text, to_section(at, v));
        }
    }

    void dirac_stmt(const Token& kw) {
        if (m_.dirac) fail(kw, "only one dirac structure per model");
        const Token& nt = expect(Tok::Ident, "name");
        declare(nt);
        expect(Tok::Eq, "'='");
        const Token& kt = expect(Tok::Ident, "structure kind");
        DiracDecl d;
        d.name = nt.text;
        d.kind = kt.text;
        auto args = arguments();
        end_of_statement();
        const ChartPtr& c = m_.chart;
        auto one_arg = [&] {
            if (args.size() != 1) fail(kt, kt.text + " takes one argument");
        };
        try {
            if (d.kind == "graph_presymplectic") {
                one_arg();
                d.omega = real_form(args[0].first, args[0].second, 2);
                d.d = graph_presymplectic(d.omega);
            } else if (d.kind == "graph_poisson") {
                one_arg();
                d.pi = real_multi(args[0].first, args[0].second, 2);
                d.d = graph_poisson(d.pi);
            } else if (d.kind == "distribution") {
                for (const auto& [at, v] : args) {
                    Section s = real_section(at, v);
                    if (!s.xi().is_zero()) fail(at, "distribution generators must be vector fields");
                    d.fields.push_back(s.X());
                }
                d.d = regular_distribution(c, d.fields);
            } else if (d.kind == "frame") {
                for (const auto& [at, v] : args) d.frame.push_back(real_section(at, v));
                if (d.frame.size() != c->dim())
                    fail(kt, "dimension mismatch: frame has " + std::to_string(d.frame.size()) +
                                 " sections on a chart of dimension " + std::to_string(c->dim()));
                d.d = DiracStructure(c, d.frame, "frame");
            } else {
                fail(kt, "unknown structure kind " + d.kind);
            }
        } catch (const ParseError&) {
            throw;
        } catch (const Error& e) {
            fail(kt, e.what());
        }
        m_.dirac = std::move(d);
    }

    const DiracDecl& need_dirac(const Token& at) const {
        if (!m_.dirac) fail(at, at.text + " needs a dirac structure");
        return *m_.dirac;
    }
    AtlasDecl& need_atlas(const Token& at) {
        if (!m_.atlas) fail(at, at.text + " needs an atlas");
        return *m_.atlas;
    }

    void complement_stmt(const Token& kw) {
        const DiracDecl& d = need_dirac(kw);
        if (m_.complement) fail(kw, "only one complement per model");
        const Token& nt = expect(Tok::Ident, "name");
        declare(nt);
        expect(Tok::Eq, "'='");
        Token at = peek();
        std::vector<Section> secs;
        for (const auto& s : span_arguments()) {
            if (!s.im.is_zero()) fail(at, "complement sections must be real");
            secs.push_back(s.re);
        }
        end_of_statement();
        try {
            m_.complement = ComplementDecl{nt.text, ComplementH(d.d, secs)};
        } catch (const Error& e) {
            fail(at, e.what());
        }
    }

    void invariants_stmt(const Token&) {
        do {
            Token at = peek();
            m_.invariants.push_back(real_scalar(at, sum()));
        } while (accept(Tok::Comma));
        end_of_statement();
    }

    void atlas_stmt(const Token& kw) {
        need_dirac(kw);
        if (m_.atlas) fail(kw, "only one atlas per model");
        const Token& nt = expect(Tok::Ident, "name");
        declare(nt);
        keyword("patches");
        AtlasDecl a;
        a.name = nt.text;
        while (peek().kind == Tok::Ident) {
            const Token& p = next();
            declare(p);
            a.patches.push_back(p.text);
        }
        if (a.patches.empty()) fail(peek(), "atlas needs at least one patch");
        end_of_statement();
        a.sigma.resize(a.patches.size());
        atlas_line_ = kw.line;
        atlas_col_ = kw.col;
        m_.atlas = std::move(a);
    }

    std::size_t patch(const Token& t) const {
        const auto& ps = m_.atlas->patches;
        auto it = std::find(ps.begin(), ps.end(), t.text);
        if (it == ps.end()) fail(t, "unknown patch " + t.text);
        return static_cast<std::size_t>(it - ps.begin());
    }

    void sigma_stmt(const Token& kw) {
        AtlasDecl& a = need_atlas(kw);
        const Token& pt = expect(Tok::Ident, "patch");
        const std::size_t j = patch(pt);
        if (a.sigma[j]) fail(pt, "sigma for patch " + pt.text + " given twice");
        expect(Tok::Eq, "'='");
        SigmaDecl s;
        if (peek().kind == Tok::Ident && peek().text == "components") {
            const Token& ct = next();
            for (const auto& [at, v] : arguments()) s.components.push_back(complex_scalar(at, v));
            if (s.components.size() != m_.dirac->d.dim())
                fail(ct, "dimension mismatch: " + std::to_string(s.components.size()) + " components for a frame of " +
                             std::to_string(m_.dirac->d.dim()));
            s.by_components = true;
        } else {
            Token at = peek();
            Typed v = sum();
            if (v.zero_scalar()) {
                s.re = s.im = KForm(m_.chart, 1);
            } else {
                if (v.kind != Typed::Form || v.fre.degree() != 1) fail(at, "sigma must be a 1-form");
                s.re = v.fre;
                s.im = v.fim;
            }
        }
        end_of_statement();
        a.sigma[j] = std::move(s);
    }

    void overlap_stmt(const Token& kw) {
        AtlasDecl& a = need_atlas(kw);
        const Token& t1 = expect(Tok::Ident, "patch");
        const Token& t2 = expect(Tok::Ident, "patch");
        std::size_t j = patch(t1), k = patch(t2);
        if (j == k) fail(t2, "overlap needs two distinct patches");
        expect(Tok::Eq, "'='");
        Token at = peek();
        Typed v = sum();
        end_of_statement();
        const bool swapped = j > k;
        if (swapped) std::swap(j, k);
        if (kw.text == "cocycle") {
            Expr w = real_scalar(at, v);
            if (!a.cocycle.emplace(std::make_pair(j, k), swapped ? -w : w).second) fail(kw, "overlap given twice");
        } else {
            ComplexExpr g = complex_scalar(at, v);
            if (is_zero(g)) fail(at, "transition function vanishes");
            if (!a.transitions.emplace(std::make_pair(j, k), swapped ? ComplexExpr(1) / g : g).second)
                fail(kw, "overlap given twice");
        }
    }

    void polarization_stmt(const Token& kw) {
        need_dirac(kw);
        if (m_.polarization) fail(kw, "only one polarization per model");
        const Token& nt = expect(Tok::Ident, "name");
        declare(nt);
        expect(Tok::Eq, "'='");
        PolarizationDecl p;
        p.name = nt.text;
        p.frame = span_arguments();
        end_of_statement();
        m_.polarization = std::move(p);
    }

    void halfdensity_stmt(const Token& kw) {
        AtlasDecl& a = need_atlas(kw);
        const Token& nt = expect(Tok::Ident, "name");
        declare(nt);
        expect(Tok::Eq, "'='");
        Token at = peek();
        HalfDensityDecl h;
        h.name = nt.text;
        h.value = complex_scalar(at, sum());
        if (peek().kind == Tok::Ident && peek().text == "on") {
            ++pos_;
            h.patch = patch(expect(Tok::Ident, "patch"));
        }
        (void)a;
        end_of_statement();
        m_.halfdensities.push_back(std::move(h));
    }

    void expect_stmt(const Token& kw) {
        need_dirac(kw);
        const Token& kt = expect(Tok::Ident, "'hamiltonian' or 'bracket'");
        ExpectDecl e;
        e.kind = kt.text;
        std::size_t arity;
        if (e.kind == "hamiltonian")
            arity = 1;
        else if (e.kind == "bracket")
            arity = 2;
        else
            fail(kt, "unknown expectation " + e.kind);
        for (std::size_t i = 0; i < arity; ++i) {
            const Token& ft = expect(Tok::Ident, "scalar name");
            if (!m_.scalar(ft.text)) fail(ft, "unknown scalar " + ft.text);
            e.functions.push_back(ft.text);
        }
        expect(Tok::Eq, "'='");
        Token at = peek();
        Typed v = sum();
        end_of_statement();
        if (arity == 1)
            e.field = real_section(at, v).X();
        else
            e.value = real_scalar(at, v);
        if (arity == 1 && !to_section(at, v).re.xi().is_zero()) fail(at, "expected a vector field");
        m_.expects.push_back(std::move(e));
    }

    void check_stmt(const Token& kw) {
        if (peek().kind != Tok::Ident) fail(peek(), "expected a suite name");
        while (peek().kind == Tok::Ident) {
            const Token& t = next();
            const auto& all = suite_names();
            if (t.text == "all") {
                for (const auto& s : all)
                    if (std::find(m_.directives.begin(), m_.directives.end(), s) == m_.directives.end())
                        m_.directives.push_back(s);
                continue;
            }
            if (std::find(all.begin(), all.end(), t.text) == all.end()) fail(t, "unknown suite " + t.text);
            if (std::find(m_.directives.begin(), m_.directives.end(), t.text) == m_.directives.end())
                m_.directives.push_back(t.text);
        }
        (void)kw;
        end_of_statement();
    }

    void finish() {
        if (!m_.chart) throw ParseError(toks_.back().line, toks_.back().col, "no chart declared");
        if (m_.atlas) {
            const AtlasDecl& a = *m_.atlas;
            for (std::size_t j = 0; j < a.patches.size(); ++j)
                if (!a.sigma[j]) throw ParseError(atlas_line_, atlas_col_, "missing sigma for patch " + a.patches[j]);
            if (!a.cocycle.empty() && !a.transitions.empty())
                throw ParseError(atlas_line_, atlas_col_, "give either cocycle or transition data, not both");
        }
    }
};

}  // namespace

const Expr* Model::scalar(const std::string& n) const {
    for (const auto& [k, e] : scalars)
        if (k == n) return &e;
    return nullptr;
}

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> s{"dirac", "poisson", "prequant", "polarize", "quantize", "poincare"};
    return s;
}

Expr parse_expr(const std::string& text, const ChartPtr& chart) {
    Model m;
    m.chart = chart;
    Parser p(text, m);
    Typed v = p.expression_only();
    if (v.kind != Typed::Scalar) throw ParseError(1, 1, std::string("expected a scalar, found a ") + kind_name(v));
    if (!v.z.is_real()) throw ParseError(1, 1, "complex value not allowed here");
    return v.z.re();
}

Model parse_model(const std::string& text, const std::string& default_name) {
    Model m;
    m.name = default_name;
    Parser p(text, m);
    p.parse_statements();
    return m;
}

// ---- printing

namespace {

std::string complex_str(const ComplexExpr& z) { return z.str(); }

std::string complex_form_str(const KForm& re, const KForm& im) {
    if (im.is_zero()) return re.str();
    if (re.is_zero()) return "I*(" + im.str() + ")";
    return re.str() + " + I*(" + im.str() + ")";
}

std::string join_sections(const std::vector<ComplexSection>& v) {
    std::string out;
    for (const auto& s : v) out += (out.empty() ? "" : ", ") + s.str();
    return out;
}

}  // namespace

std::string print_model(const Model& m) {
    std::ostringstream o;
    o << "model " << m.name << "\n";
    const Chart& c = *m.chart;
    o << "chart " << c.name() << " dim " << c.dim() << " coords";
    for (const auto& s : c.coords()) o << " " << s;
    if (!c.params().empty()) {
        o << " params";
        for (const auto& s : c.params()) o << " " << s;
    }
    o << "\n";
    for (const auto& [n, e] : m.scalars) o << "scalar " << n << " = " << e.str() << "\n";
    for (const auto& [n, f] : m.forms) o << "form " << n << " = " << f.str() << "\n";
    for (const auto& [n, f] : m.vectors) o << "vector " << n << " = " << f.str() << "\n";
    for (const auto& [n, s] : m.sections) o << "section " << n << " = " << s.str() << "\n";
    if (m.dirac) {
        const DiracDecl& d = *m.dirac;
        o << "dirac " << d.name << " = " << d.kind << "(";
        if (d.kind == "graph_presymplectic") o << d.omega.str();
        if (d.kind == "graph_poisson") o << d.pi.str();
        if (d.kind == "distribution")
            for (std::size_t i = 0; i < d.fields.size(); ++i) o << (i ? ", " : "") << d.fields[i].str();
        if (d.kind == "frame")
            for (std::size_t i = 0; i < d.frame.size(); ++i) o << (i ? ", " : "") << d.frame[i].str();
        o << ")\n";
    }
    if (m.complement) {
        std::vector<ComplexSection> cs;
        for (const auto& s : m.complement->h.sections()) cs.emplace_back(s);
        o << "complement " << m.complement->name << " = span(" << join_sections(cs) << ")\n";
    }
    if (!m.invariants.empty()) {
        o << "invariants";
        for (std::size_t i = 0; i < m.invariants.size(); ++i) o << (i ? ", " : " ") << m.invariants[i].str();
        o << "\n";
    }
    if (m.atlas) {
        const AtlasDecl& a = *m.atlas;
        o << "atlas " << a.name << " patches";
        for (const auto& p : a.patches) o << " " << p;
        o << "\n";
        for (std::size_t j = 0; j < a.patches.size(); ++j) {
            const SigmaDecl& s = *a.sigma[j];
            o << "sigma " << a.patches[j] << " = ";
            if (s.by_components) {
                o << "components(";
                for (std::size_t i = 0; i < s.components.size(); ++i) o << (i ? ", " : "") << complex_str(s.components[i]);
                o << ")\n";
            } else {
                o << complex_form_str(s.re, s.im) << "\n";
            }
        }
        for (const auto& [jk, w] : a.cocycle)
            o << "cocycle " << a.patches[jk.first] << " " << a.patches[jk.second] << " = " << w.str() << "\n";
        for (const auto& [jk, g] : a.transitions)
            o << "transition " << a.patches[jk.first] << " " << a.patches[jk.second] << " = " << complex_str(g) << "\n";
        if (a.hermitian) o << "hermitian\n";
    }
    if (m.polarization)
        o << "polarization " << m.polarization->name << " = span(" << join_sections(m.polarization->frame) << ")\n";
    for (const auto& h : m.halfdensities)
        o << "halfdensity " << h.name << " = " << complex_str(h.value) << " on " << m.atlas->patches[h.patch] << "\n";
    for (const auto& e : m.expects) {
        o << "expect " << e.kind;
        for (const auto& f : e.functions) o << " " << f;
        o << " = " << (e.kind == "hamiltonian" ? e.field.str() : e.value.str()) << "\n";
    }
    if (!m.directives.empty()) {
        o << "check";
        for (const auto& d : m.directives) o << " " << d;
        o << "\n";
    }
    return o.str();
}

// ---- structural equality

namespace {

template <class Tag>
bool same(const Alternating<Tag>& a, const Alternating<Tag>& b) {
    return a.degree() == b.degree() && (a - b).is_zero();
}
bool same(const Expr& a, const Expr& b) { return equal(a, b); }
bool same(const ComplexExpr& a, const ComplexExpr& b) { return equal(a, b); }
bool same(const Section& a, const Section& b) { return equal(a, b); }
bool same(const VectorField& a, const VectorField& b) { return equal(a, b); }
bool same(const ComplexSection& a, const ComplexSection& b) { return equal(a, b); }

template <class T>
bool same(const std::vector<T>& a, const std::vector<T>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!same(a[i], b[i])) return false;
    return true;
}
template <class T>
bool same(const std::vector<std::pair<std::string, T>>& a, const std::vector<std::pair<std::string, T>>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i].first != b[i].first || !same(a[i].second, b[i].second)) return false;
    return true;
}
template <class K, class T>
bool same(const std::map<K, T>& a, const std::map<K, T>& b) {
    if (a.size() != b.size()) return false;
    for (auto i = a.begin(), j = b.begin(); i != a.end(); ++i, ++j)
        if (i->first != j->first || !same(i->second, j->second)) return false;
    return true;
}

bool same_sigma(const SigmaDecl& a, const SigmaDecl& b) {
    if (a.by_components != b.by_components) return false;
    if (a.by_components) return same(a.components, b.components);
    return same(a.re, b.re) && same(a.im, b.im);
}

}  // namespace

bool structurally_equal(const Model& a, const Model& b) {
    try {
        if (a.name != b.name || !a.chart || !b.chart || *a.chart != *b.chart) return false;
        if (!same(a.scalars, b.scalars) || !same(a.forms, b.forms) || !same(a.vectors, b.vectors) ||
            !same(a.sections, b.sections))
            return false;
        if (a.dirac.has_value() != b.dirac.has_value()) return false;
        if (a.dirac) {
            const DiracDecl &x = *a.dirac, &y = *b.dirac;
            if (x.name != y.name || x.kind != y.kind || !same(x.d.frame(), y.d.frame())) return false;
        }
        if (a.complement.has_value() != b.complement.has_value()) return false;
        if (a.complement && (a.complement->name != b.complement->name ||
                             !same(a.complement->h.sections(), b.complement->h.sections())))
            return false;
        if (!same(a.invariants, b.invariants)) return false;
        if (a.atlas.has_value() != b.atlas.has_value()) return false;
        if (a.atlas) {
            const AtlasDecl &x = *a.atlas, &y = *b.atlas;
            if (x.name != y.name || x.patches != y.patches || x.hermitian != y.hermitian) return false;
            if (!same(x.cocycle, y.cocycle) || !same(x.transitions, y.transitions)) return false;
            for (std::size_t j = 0; j < x.sigma.size(); ++j)
                if (!same_sigma(*x.sigma[j], *y.sigma[j])) return false;
        }
        if (a.polarization.has_value() != b.polarization.has_value()) return false;
        if (a.polarization &&
            (a.polarization->name != b.polarization->name || !same(a.polarization->frame, b.polarization->frame)))
            return false;
        if (a.halfdensities.size() != b.halfdensities.size()) return false;
        for (std::size_t i = 0; i < a.halfdensities.size(); ++i) {
            const auto &x = a.halfdensities[i], &y = b.halfdensities[i];
            if (x.name != y.name || x.patch != y.patch || !same(x.value, y.value)) return false;
        }
        if (a.expects.size() != b.expects.size()) return false;
        for (std::size_t i = 0; i < a.expects.size(); ++i) {
            const auto &x = a.expects[i], &y = b.expects[i];
            if (x.kind != y.kind || x.functions != y.functions) return false;
            if (x.kind == "hamiltonian" ? !same(x.field, y.field) : !same(x.value, y.value)) return false;
        }
        return a.directives == b.directives;
    } catch (const ChartMismatch&) {
        return false;
    }
}

}  // namespace diracq
