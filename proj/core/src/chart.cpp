#include "diracq/chart.hpp"

#include <algorithm>
#include <set>

namespace diracq {

Chart::Chart(std::string name, std::vector<std::string> coords, std::vector<std::string> params)
    : name_(std::move(name)), coords_(std::move(coords)), params_(std::move(params)) {
    if (coords_.empty()) throw DomainError("chart " + name_ + " needs at least one coordinate");
    std::set<std::string> seen;
    for (const auto& c : coords_)
        if (!seen.insert(c).second) throw DomainError("duplicate coordinate " + c + " in chart " + name_);
    for (const auto& p : params_)
        if (!seen.insert(p).second) throw DomainError("parameter " + p + " clashes with another symbol");
}

int Chart::index_of(const std::string& s) const {
    auto it = std::find(coords_.begin(), coords_.end(), s);
    return it == coords_.end() ? -1 : static_cast<int>(it - coords_.begin());
}

bool Chart::is_param(const std::string& s) const { return std::find(params_.begin(), params_.end(), s) != params_.end(); }

Expr Chart::differentiate_by(const Expr& e, const std::string& coordinate) const {
    if (index_of(coordinate) < 0) throw SymbolError("unknown coordinate '" + coordinate + "' in chart " + name_);
    return differentiate(e, coordinate);
}

void Chart::check(const Expr& e) const {
    for (const auto& s : e.free_symbols())
        if (index_of(s) < 0 && !is_param(s)) throw SymbolError("unknown symbol " + s);
}

Point Chart::point(const std::map<std::string, Rational>& values) const {
    std::size_t ncoords = 0;
    for (const auto& [k, v] : values) {
        if (index_of(k) >= 0)
            ++ncoords;
        else if (!is_param(k))
            throw SymbolError("unknown symbol " + k);
    }
    if (ncoords != coords_.size()) throw DomainError("point needs a value for every coordinate of " + name_);
    return Point{name_, values};
}

std::shared_ptr<const Chart> Chart::extended(const std::string& coordinate) const {
    auto c = coords_;
    c.push_back(coordinate);
    return std::make_shared<const Chart>(name_ + "x" + coordinate, std::move(c), params_);
}

ChartPtr make_chart(std::string name, std::vector<std::string> coords, std::vector<std::string> params) {
    return std::make_shared<const Chart>(std::move(name), std::move(coords), std::move(params));
}

void require_same_chart(const ChartPtr& a, const ChartPtr& b) {
    if (a == b) return;
    if (!a || !b || *a != *b)
        throw ChartMismatch("chart mismatch: " + (a ? a->name() : "?") + " vs " + (b ? b->name() : "?"));
}

int sort_with_sign(Multi& idx) {
    int sign = 1;
    for (std::size_t i = 1; i < idx.size(); ++i)
        for (std::size_t j = i; j > 0 && idx[j - 1] >= idx[j]; --j) {
            if (idx[j - 1] == idx[j]) return 0;
            std::swap(idx[j - 1], idx[j]);
            sign = -sign;
        }
    return sign;
}

std::vector<Multi> increasing_tuples(int n, int k) {
    std::vector<Multi> out;
    if (k < 0 || k > n) return out;
    Multi cur(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) cur[static_cast<std::size_t>(i)] = i;
    for (;;) {
        out.push_back(cur);
        int i = k - 1;
        while (i >= 0 && cur[static_cast<std::size_t>(i)] == n - k + i) --i;
        if (i < 0) break;
        ++cur[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < k; ++j) cur[static_cast<std::size_t>(j)] = cur[static_cast<std::size_t>(j - 1)] + 1;
    }
    return out;
}

VectorField::VectorField(ChartPtr chart) : chart_(std::move(chart)), c_(chart_->dim()) {}

VectorField::VectorField(ChartPtr chart, std::vector<Expr> components)
    : chart_(std::move(chart)), c_(std::move(components)) {
    if (c_.size() != chart_->dim()) throw DomainError("vector field needs " + std::to_string(chart_->dim()) + " components");
}

VectorField VectorField::basis(ChartPtr chart, std::size_t i) {
    VectorField v(std::move(chart));
    v.c_[i] = Expr(1);
    return v;
}

Expr VectorField::apply(const Expr& f) const {
    Expr out;
    for (std::size_t i = 0; i < c_.size(); ++i)
        if (!c_[i].is_canonical_zero()) out += c_[i] * chart_->partial(f, i);
    return out;
}

Expr VectorField::divergence() const {
    Expr out;
    for (std::size_t i = 0; i < c_.size(); ++i) out += chart_->partial(c_[i], i);
    return out;
}

bool VectorField::is_zero() const {
    return std::all_of(c_.begin(), c_.end(), [](const Expr& e) { return diracq::is_zero(e); });
}

std::string VectorField::str() const {
    std::string out;
    for (std::size_t i = 0; i < c_.size(); ++i) {
        if (c_[i].is_canonical_zero()) continue;
        std::string b = "d_" + chart_->coords()[i];
        std::string t = c_[i].is_one() ? b : "(" + c_[i].str() + ")*" + b;
        out += out.empty() ? t : " + " + t;
    }
    return out.empty() ? "0" : out;
}

VectorField VectorField::operator-() const {
    VectorField r = *this;
    for (auto& e : r.c_) e = -e;
    return r;
}

VectorField operator+(const VectorField& a, const VectorField& b) {
    require_same_chart(a.chart_, b.chart_);
    VectorField r = a;
    for (std::size_t i = 0; i < r.c_.size(); ++i) r.c_[i] += b.c_[i];
    return r;
}

VectorField operator-(const VectorField& a, const VectorField& b) { return a + (-b); }

VectorField operator*(const Expr& f, const VectorField& a) {
    VectorField r = a;
    for (auto& e : r.c_) e = f * e;
    return r;
}

VectorField lie_bracket(const VectorField& x, const VectorField& y) {
    require_same_chart(x.chart(), y.chart());
    VectorField r(x.chart());
    for (std::size_t i = 0; i < x.dim(); ++i) r[i] = x.apply(y[i]) - y.apply(x[i]);
    return r;
}

bool equal(const VectorField& a, const VectorField& b) { return (a - b).is_zero(); }

KForm exterior_derivative(const KForm& phi) {
    const auto& chart = phi.chart();
    const int n = static_cast<int>(chart->dim());
    KForm out(chart, phi.degree() + 1);
    if (phi.degree() >= n) return out;
    for (const auto& [idx, f] : phi.terms()) {
        for (int i = 0; i < n; ++i) {
            if (std::binary_search(idx.begin(), idx.end(), i)) continue;
            Expr df = chart->partial(f, static_cast<std::size_t>(i));
            if (df.is_canonical_zero()) continue;
            Multi m{i};
            m.insert(m.end(), idx.begin(), idx.end());
            out.add(std::move(m), df);
        }
    }
    return out;
}

namespace {

template <class T>
T wedge_impl(const T& a, const T& b) {
    require_same_chart(a.chart(), b.chart());
    T out(a.chart(), a.degree() + b.degree());
    if (out.degree() > static_cast<int>(a.chart()->dim())) return out;
    for (const auto& [i, x] : a.terms())
        for (const auto& [j, y] : b.terms()) {
            Multi m = i;
            m.insert(m.end(), j.begin(), j.end());
            out.add(std::move(m), x * y);
        }
    return out;
}

Expr det(std::vector<std::vector<Expr>> m) {
    const std::size_t k = m.size();
    if (k == 0) return Expr(1);
    if (k == 1) return m[0][0];
    if (k == 2) return m[0][0] * m[1][1] - m[0][1] * m[1][0];
    Expr out;
    for (std::size_t c = 0; c < k; ++c) {
        if (m[0][c].is_canonical_zero()) continue;
        std::vector<std::vector<Expr>> minor;
        for (std::size_t r = 1; r < k; ++r) {
            std::vector<Expr> row;
            for (std::size_t j = 0; j < k; ++j)
                if (j != c) row.push_back(m[r][j]);
            minor.push_back(std::move(row));
        }
        Expr t = m[0][c] * det(std::move(minor));
        out = (c % 2 == 0) ? out + t : out - t;
    }
    return out;
}

}  // namespace

KForm wedge(const KForm& a, const KForm& b) { return wedge_impl(a, b); }
KVector wedge(const KVector& a, const KVector& b) { return wedge_impl(a, b); }

KForm interior_product(const VectorField& x, const KForm& phi) {
    require_same_chart(x.chart(), phi.chart());
    if (phi.degree() == 0) throw DomainError("cannot contract 0-form");
    KForm out(phi.chart(), phi.degree() - 1);
    for (const auto& [idx, f] : phi.terms()) {
        for (std::size_t p = 0; p < idx.size(); ++p) {
            const Expr& xi = x[static_cast<std::size_t>(idx[p])];
            if (xi.is_canonical_zero()) continue;
            Multi rest = idx;
            rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(p));
            Expr v = xi * f;
            out.add(std::move(rest), p % 2 == 0 ? v : -v);
        }
    }
    return out;
}

KForm lie_derivative_form(const VectorField& x, const KForm& phi) {
    require_same_chart(x.chart(), phi.chart());
    if (phi.degree() == 0) return KForm::scalar(phi.chart(), x.apply(phi.get({})));
    KForm a = interior_product(x, exterior_derivative(phi));
    KForm b = exterior_derivative(interior_product(x, phi));
    return a + b;
}

KForm differential(const ChartPtr& chart, const Expr& f) { return exterior_derivative(KForm::scalar(chart, f)); }

KForm one_form(const ChartPtr& chart, std::vector<Expr> components) {
    if (components.size() != chart->dim()) throw DomainError("1-form needs one component per coordinate");
    KForm out(chart, 1);
    for (std::size_t i = 0; i < components.size(); ++i) out.add({static_cast<int>(i)}, components[i]);
    return out;
}

Expr pair(const KForm& xi, const VectorField& x) {
    require_same_chart(xi.chart(), x.chart());
    if (xi.degree() != 1) throw DomainError("pairing needs a 1-form");
    Expr out;
    for (const auto& [idx, f] : xi.terms()) {
        const Expr& c = x[static_cast<std::size_t>(idx[0])];
        if (!c.is_canonical_zero()) out += f * c;
    }
    return out;
}

Expr evaluate_form(const KForm& phi, const std::vector<VectorField>& xs) {
    if (static_cast<int>(xs.size()) != phi.degree()) throw DomainError("form evaluated on wrong number of vectors");
    for (const auto& x : xs) require_same_chart(x.chart(), phi.chart());
    Expr out;
    for (const auto& [idx, f] : phi.terms()) {
        std::vector<std::vector<Expr>> m(xs.size(), std::vector<Expr>(xs.size()));
        for (std::size_t a = 0; a < xs.size(); ++a)
            for (std::size_t b = 0; b < idx.size(); ++b) m[a][b] = xs[a][static_cast<std::size_t>(idx[b])];
        Expr d = det(std::move(m));
        if (!d.is_canonical_zero()) out += f * d;
    }
    return out;
}

Expr evaluate_kvector(const KVector& q, const std::vector<KForm>& alphas) {
    if (static_cast<int>(alphas.size()) != q.degree()) throw DomainError("k-vector evaluated on wrong number of covectors");
    for (const auto& a : alphas) require_same_chart(a.chart(), q.chart());
    Expr out;
    for (const auto& [idx, f] : q.terms()) {
        std::vector<std::vector<Expr>> m(alphas.size(), std::vector<Expr>(alphas.size()));
        for (std::size_t a = 0; a < alphas.size(); ++a)
            for (std::size_t b = 0; b < idx.size(); ++b) m[a][b] = alphas[a].get({idx[b]});
        Expr d = det(std::move(m));
        if (!d.is_canonical_zero()) out += f * d;
    }
    return out;
}

VectorField sharp(const KVector& pi, const KForm& alpha) {
    require_same_chart(pi.chart(), alpha.chart());
    if (pi.degree() != 2 || alpha.degree() != 1) throw DomainError("sharp needs a bivector and a 1-form");
    VectorField out(pi.chart());
    for (std::size_t i = 0; i < out.dim(); ++i) {
        Expr s;
        for (const auto& [idx, a] : alpha.terms()) {
            Expr p = pi.get({static_cast<int>(i), idx[0]});
            if (!p.is_canonical_zero()) s += p * a;
        }
        out[i] = s;
    }
    return out;
}

Expr contravariant_eval(const KVector& q, const std::vector<VectorField>& xs, const std::vector<KForm>& alphas) {
    const std::size_t m = alphas.size();
    if (xs.size() != m || static_cast<int>(m) != q.degree() + 1) throw DomainError("contravariant derivative arity mismatch");
    Expr total;
    for (std::size_t j = 0; j < m; ++j) {
        std::vector<KForm> rest;
        for (std::size_t a = 0; a < m; ++a)
            if (a != j) rest.push_back(alphas[a]);
        Expr t = xs[j].apply(evaluate_kvector(q, rest));
        total = (j % 2 == 0) ? total + t : total - t;
    }
    if (q.degree() == 0) return total;
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t k = j + 1; k < m; ++k) {
            KForm br = lie_derivative_form(xs[j], alphas[k]) - interior_product(xs[k], exterior_derivative(alphas[j]));
            std::vector<KForm> args{br};
            for (std::size_t a = 0; a < m; ++a)
                if (a != j && a != k) args.push_back(alphas[a]);
            Expr t = evaluate_kvector(q, args);
            total = ((j + k) % 2 == 0) ? total + t : total - t;
        }
    return total;
}

KVector contravariant_derivative(const KVector& pi, const KVector& q) {
    require_same_chart(pi.chart(), q.chart());
    const auto& chart = q.chart();
    const int n = static_cast<int>(chart->dim());
    KVector out(chart, q.degree() + 1);
    if (q.degree() >= n) return out;
    std::vector<KForm> dx;
    std::vector<VectorField> hx;
    for (int i = 0; i < n; ++i) {
        dx.push_back(KForm::basis(chart, {i}));
        hx.push_back(sharp(pi, dx.back()));
    }
    for (const Multi& idx : increasing_tuples(n, q.degree() + 1)) {
        std::vector<KForm> as;
        std::vector<VectorField> xs;
        for (int i : idx) {
            as.push_back(dx[static_cast<std::size_t>(i)]);
            xs.push_back(hx[static_cast<std::size_t>(i)]);
        }
        out.set(idx, contravariant_eval(q, xs, as));
    }
    return out;
}

AlphaDensity::AlphaDensity(ChartPtr c, Rational a, ComplexExpr f) : chart(std::move(c)), alpha(std::move(a)), coeff(std::move(f)) {
    if (sgn(alpha) <= 0) throw DomainError("density exponent must be positive");
}

std::string AlphaDensity::str() const { return "(" + coeff.str() + ")*|vol|^(" + alpha.get_str() + ")"; }

AlphaDensity tensor(const AlphaDensity& a, const AlphaDensity& b) {
    require_same_chart(a.chart, b.chart);
    return {a.chart, a.alpha + b.alpha, a.coeff * b.coeff};
}

AlphaDensity lie_derivative_density(const VectorField& x, const AlphaDensity& k) {
    require_same_chart(x.chart(), k.chart);
    const Expr div = x.divergence();
    const Expr a(k.alpha);
    ComplexExpr c(x.apply(k.coeff.re()) + a * k.coeff.re() * div, x.apply(k.coeff.im()) + a * k.coeff.im() * div);
    return {k.chart, k.alpha, c};
}

AlphaDensity lie_derivative_density(const VectorField& re, const VectorField& im, const AlphaDensity& k) {
    AlphaDensity r = lie_derivative_density(re, k);
    AlphaDensity i = lie_derivative_density(im, k);
    return {k.chart, k.alpha, r.coeff + ComplexExpr::i() * i.coeff};
}

bool equal(const AlphaDensity& a, const AlphaDensity& b) {
    return a.alpha == b.alpha && *a.chart == *b.chart && equal(a.coeff, b.coeff);
}

}  // namespace diracq
