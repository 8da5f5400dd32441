#include "diracq/algebroid.hpp"

namespace diracq {

namespace {

StructureFunctions zero_structure(std::size_t r) {
    return StructureFunctions(r, std::vector<std::vector<Expr>>(r, std::vector<Expr>(r)));
}

void require_same_presentation(const PresentationPtr& a, const PresentationPtr& b) {
    if (a != b) throw ChartMismatch("A-forms over different presentations");
}

std::string frame_name(std::size_t i) { return "e" + std::to_string(i + 1); }

// idx without positions j (and k).
Multi drop(const Multi& idx, std::size_t j, std::size_t k = static_cast<std::size_t>(-1)) {
    Multi out;
    for (std::size_t i = 0; i < idx.size(); ++i)
        if (i != j && i != k) out.push_back(idx[i]);
    return out;
}

}  // namespace

AlgebroidPresentation::AlgebroidPresentation(ChartPtr chart, std::string name, std::vector<VectorField> anchor,
                                             StructureFunctions c, std::vector<Section> realization)
    : chart_(std::move(chart)), name_(std::move(name)), anchor_(std::move(anchor)), c_(std::move(c)),
      realization_(std::move(realization)) {
    const std::size_t r = anchor_.size();
    if (c_.size() != r) throw DomainError("structure functions do not match the frame size");
    for (const auto& a : anchor_) require_same_chart(chart_, a.chart());
    for (const auto& row : c_) {
        if (row.size() != r) throw DomainError("structure functions do not match the frame size");
        for (const auto& col : row)
            if (col.size() != r) throw DomainError("structure functions do not match the frame size");
    }
    if (!realization_.empty() && realization_.size() != r) throw DomainError("realization does not match the frame");
}

PresentationReport AlgebroidPresentation::check() const {
    PresentationReport rep;
    const std::size_t r = rank();
    rep.antisymmetric = true;
    for (std::size_t i = 0; i < r && rep.antisymmetric; ++i)
        for (std::size_t j = i; j < r && rep.antisymmetric; ++j)
            for (std::size_t k = 0; k < r; ++k)
                if (!is_zero(c_[i][j][k] + c_[j][i][k])) {
                    rep.antisymmetric = false;
                    rep.witness = "c not skew at (" + frame_name(i) + "," + frame_name(j) + ")";
                    break;
                }
    rep.anchor_compatible = true;
    for (std::size_t i = 0; i < r && rep.anchor_compatible; ++i)
        for (std::size_t j = i + 1; j < r; ++j) {
            VectorField lhs(chart_);
            for (std::size_t k = 0; k < r; ++k)
                if (!c_[i][j][k].is_canonical_zero()) lhs = lhs + c_[i][j][k] * anchor_[k];
            VectorField diff = lhs - lie_bracket(anchor_[i], anchor_[j]);
            if (!diff.is_zero()) {
                rep.anchor_compatible = false;
                if (rep.witness.empty())
                    rep.witness = "anchor of [[" + frame_name(i) + "," + frame_name(j) + "]] off by " + diff.str();
                break;
            }
        }
    // coefficient of e_l in [[[[e_i,e_j]],e_k]]: sum_m c_ij^m c_mk^l - rho(e_k) c_ij^l
    auto term = [&](std::size_t i, std::size_t j, std::size_t k, std::size_t l) {
        Expr s = -anchor_[k].apply(c_[i][j][l]);
        for (std::size_t m = 0; m < r; ++m)
            if (!c_[i][j][m].is_canonical_zero() && !c_[m][k][l].is_canonical_zero()) s += c_[i][j][m] * c_[m][k][l];
        return s;
    };
    rep.jacobi = true;
    for (std::size_t i = 0; i < r && rep.jacobi; ++i)
        for (std::size_t j = i + 1; j < r && rep.jacobi; ++j)
            for (std::size_t k = j + 1; k < r && rep.jacobi; ++k)
                for (std::size_t l = 0; l < r; ++l) {
                    Expr v = term(i, j, k, l) + term(j, k, i, l) + term(k, i, j, l);
                    if (!is_zero(v)) {
                        rep.jacobi = false;
                        if (rep.witness.empty())
                            rep.witness = "Jacobi fails on (" + frame_name(i) + "," + frame_name(j) + "," +
                                          frame_name(k) + ")";
                        break;
                    }
                }
    return rep;
}

PresentationPtr tangent_algebroid(const ChartPtr& chart) {
    std::vector<VectorField> anchor;
    for (std::size_t i = 0; i < chart->dim(); ++i) anchor.push_back(VectorField::basis(chart, i));
    return std::make_shared<const AlgebroidPresentation>(chart, "tangent", std::move(anchor),
                                                         zero_structure(chart->dim()));
}

PresentationPtr cotangent_algebroid(const KVector& pi) {
    if (pi.degree() != 2) throw DomainError("cotangent algebroid needs a bivector");
    const ChartPtr& c = pi.chart();
    const std::size_t n = c->dim();
    std::vector<VectorField> anchor;
    for (std::size_t i = 0; i < n; ++i) anchor.push_back(sharp(pi, KForm::basis(c, {static_cast<int>(i)})));
    // {dx_i, dx_j} = L_{Pi# dx_i} dx_j - i_{Pi# dx_j} d dx_i = d(Pi(dx_j, dx_i))
    StructureFunctions s = zero_structure(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            Expr pji = pi.get({static_cast<int>(j), static_cast<int>(i)});
            for (std::size_t k = 0; k < n; ++k) s[i][j][k] = c->partial(pji, k);
        }
    return std::make_shared<const AlgebroidPresentation>(c, "cotangent", std::move(anchor), std::move(s));
}

PresentationPtr dirac_algebroid(const DiracStructure& d) {
    const std::size_t n = d.dim();
    const auto& f = d.frame();
    StructureFunctions s = zero_structure(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            Section br = courant_bracket(f[i], f[j]);
            MembershipCertificate m = membership(d, br);
            if (!m.member)
                throw DomainError("[[" + frame_name(i) + "," + frame_name(j) + "]] not in D: " + m.witness);
            for (std::size_t k = 0; k < n; ++k) {
                s[i][j][k] = m.coefficients[k];
                s[j][i][k] = -m.coefficients[k];
            }
        }
    std::vector<VectorField> anchor;
    for (const auto& e : f) anchor.push_back(e.X());
    return std::make_shared<const AlgebroidPresentation>(d.chart(), "dirac", std::move(anchor), std::move(s), f);
}

PresentationPtr pullback_over_line(const PresentationPtr& base, const std::string& t) {
    const ChartPtr& c0 = base->chart();
    if (c0->index_of(t) >= 0 || c0->is_param(t)) throw DomainError("line coordinate " + t + " already in use");
    ChartPtr c1 = c0->extended(t);
    const std::size_t n = c0->dim();
    const std::size_t r = base->rank();
    auto lift = [&](const VectorField& v) {
        std::vector<Expr> comps = v.components();
        comps.emplace_back();
        return VectorField(c1, std::move(comps));
    };
    std::vector<VectorField> anchor;
    for (std::size_t i = 0; i < r; ++i) anchor.push_back(lift(base->anchor(i)));
    anchor.push_back(VectorField::basis(c1, n));
    // lifted frame elements have constant coefficient 1, so d/dt brackets to zero
    StructureFunctions s = zero_structure(r + 1);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < r; ++j)
            for (std::size_t k = 0; k < r; ++k) s[i][j][k] = base->c(i, j, k);
    auto p = std::make_shared<AlgebroidPresentation>(c1, base->name() + "_pullback", std::move(anchor), std::move(s));
    p->base_ = base;
    p->line_ = t;
    return p;
}

PresentationPtr pullback_over_line(const DiracStructure& d, const std::string& t) {
    if (!d.report().passed()) throw DomainError("pull-back needs a verified Dirac structure");
    return pullback_over_line(dirac_algebroid(d), t);
}

AForm::AForm(PresentationPtr p, int degree) : p_(std::move(p)), degree_(degree) {
    if (degree_ < 0) throw DomainError("negative A-form degree");
}

AForm AForm::scalar(PresentationPtr p, const Expr& f) {
    AForm a(std::move(p), 0);
    a.add({}, f);
    return a;
}

AForm AForm::basis(PresentationPtr p, Multi idx) {
    AForm a(std::move(p), static_cast<int>(idx.size()));
    a.add(std::move(idx), Expr(1));
    return a;
}

Expr AForm::get(Multi idx) const {
    int s = sort_with_sign(idx);
    if (s == 0) return Expr();
    auto it = c_.find(idx);
    if (it == c_.end()) return Expr();
    return s > 0 ? it->second : -it->second;
}

void AForm::add(Multi idx, const Expr& v) {
    if (v.is_canonical_zero()) return;
    if (static_cast<int>(idx.size()) != degree_) throw DomainError("A-form index has wrong length");
    for (int i : idx)
        if (i < 0 || static_cast<std::size_t>(i) >= p_->rank()) throw DomainError("A-form index out of range");
    int s = sort_with_sign(idx);
    if (s == 0) return;
    Expr& slot = c_[idx];
    slot = s > 0 ? slot + v : slot - v;
    if (slot.is_canonical_zero()) c_.erase(idx);
}

bool AForm::is_zero() const {
    for (const auto& [k, v] : c_)
        if (!diracq::is_zero(v)) return false;
    return true;
}

std::string AForm::str() const {
    if (c_.empty()) return "0";
    std::string out;
    for (const auto& [idx, v] : c_) {
        std::string basis;
        for (int i : idx) {
            if (!basis.empty()) basis += "/\\";
            basis += frame_name(static_cast<std::size_t>(i)) + "*";
        }
        std::string term = basis.empty() ? v.str() : v.is_one() ? basis : "(" + v.str() + ")*" + basis;
        out += out.empty() ? term : " + " + term;
    }
    return out;
}

AForm AForm::operator-() const {
    AForm r = *this;
    for (auto& [k, v] : r.c_) v = -v;
    return r;
}

AForm operator+(const AForm& a, const AForm& b) {
    require_same_presentation(a.p_, b.p_);
    if (a.degree_ != b.degree_) throw DomainError("degree mismatch in sum");
    AForm r = a;
    for (const auto& [k, v] : b.c_) r.add(k, v);
    return r;
}

AForm operator*(const Expr& f, const AForm& a) {
    AForm r(a.p_, a.degree_);
    if (f.is_canonical_zero()) return r;
    for (const auto& [k, v] : a.c_) r.add(k, f * v);
    return r;
}

bool equal(const AForm& a, const AForm& b) { return (a - b).is_zero(); }

AForm d_A(const AForm& theta) {
    const PresentationPtr& p = theta.presentation();
    const int l = theta.degree();
    const int r = static_cast<int>(p->rank());
    AForm out(p, l + 1);
    if (l + 1 > r) return out;
    for (const Multi& idx : increasing_tuples(r, l + 1)) {
        Expr v;
        for (std::size_t j = 0; j < idx.size(); ++j) {
            Expr inner = theta.get(drop(idx, j));
            if (inner.is_canonical_zero()) continue;
            Expr t = p->anchor(static_cast<std::size_t>(idx[j])).apply(inner);
            v = j % 2 ? v - t : v + t;
        }
        for (std::size_t j = 0; j < idx.size(); ++j)
            for (std::size_t k = j + 1; k < idx.size(); ++k) {
                Multi rest = drop(idx, j, k);
                Expr t;
                for (int m = 0; m < r; ++m) {
                    const Expr& c = p->c(static_cast<std::size_t>(idx[j]), static_cast<std::size_t>(idx[k]),
                                         static_cast<std::size_t>(m));
                    if (c.is_canonical_zero()) continue;
                    Multi full{m};
                    full.insert(full.end(), rest.begin(), rest.end());
                    Expr th = theta.get(full);
                    if (!th.is_canonical_zero()) t += c * th;
                }
                v = (j + k) % 2 ? v - t : v + t;
            }
        out.add(idx, v);
    }
    return out;
}

AForm wedge(const AForm& a, const AForm& b) {
    require_same_presentation(a.presentation(), b.presentation());
    AForm out(a.presentation(), a.degree() + b.degree());
    if (static_cast<std::size_t>(out.degree()) > a.presentation()->rank()) return out;
    for (const auto& [i, u] : a.terms())
        for (const auto& [j, v] : b.terms()) {
            Multi idx = i;
            idx.insert(idx.end(), j.begin(), j.end());
            out.add(idx, u * v);
        }
    return out;
}

Expr evaluate_on(const AForm& theta, const std::vector<Expr>& coefficients) {
    if (theta.degree() != 1) throw DomainError("evaluate_on needs a degree-1 A-form");
    Expr v;
    for (std::size_t i = 0; i < coefficients.size(); ++i)
        if (!coefficients[i].is_canonical_zero()) v += coefficients[i] * theta.get({static_cast<int>(i)});
    return v;
}

Expr evaluate_on(const AForm& theta, const std::vector<Expr>& a, const std::vector<Expr>& b) {
    if (theta.degree() != 2) throw DomainError("evaluate_on needs a degree-2 A-form");
    Expr v;
    for (const auto& [idx, c] : theta.terms()) {
        const auto i = static_cast<std::size_t>(idx[0]);
        const auto j = static_cast<std::size_t>(idx[1]);
        v += c * (a[i] * b[j] - a[j] * b[i]);
    }
    return v;
}

std::string ComplexAForm::str() const {
    if (im.is_zero()) return re.str();
    return re.str() + " + I*(" + im.str() + ")";
}

bool equal(const ComplexAForm& a, const ComplexAForm& b) { return equal(a.re, b.re) && equal(a.im, b.im); }

ComplexAForm d_A(const ComplexAForm& theta) { return {d_A(theta.re), d_A(theta.im)}; }

ComplexAForm wedge(const ComplexAForm& a, const ComplexAForm& b) {
    return {wedge(a.re, b.re) - wedge(a.im, b.im), wedge(a.re, b.im) + wedge(a.im, b.re)};
}

namespace {

const std::vector<Section>& realization_of(const PresentationPtr& p) {
    if (p->realization().empty()) throw DomainError("presentation " + p->name() + " has no section realization");
    return p->realization();
}

}  // namespace

AForm pair_form(const KForm& phi, const KVector& q, const PresentationPtr& p) {
    if (phi.degree() != q.degree()) throw DomainError("degree mismatch between form and multivector");
    const auto& f = realization_of(p);
    AForm out(p, phi.degree());
    for (const Multi& idx : increasing_tuples(static_cast<int>(p->rank()), phi.degree())) {
        std::vector<VectorField> xs;
        std::vector<KForm> as;
        for (int i : idx) {
            xs.push_back(f[static_cast<std::size_t>(i)].X());
            as.push_back(f[static_cast<std::size_t>(i)].xi());
        }
        out.add(idx, evaluate_form(phi, xs) + evaluate_kvector(q, as));
    }
    return out;
}

AForm d_D_pair(const KForm& phi, const KVector& q, const PresentationPtr& p) {
    if (phi.degree() != q.degree()) throw DomainError("degree mismatch between form and multivector");
    const auto& f = realization_of(p);
    KForm dphi = exterior_derivative(phi);
    AForm out(p, phi.degree() + 1);
    for (const Multi& idx : increasing_tuples(static_cast<int>(p->rank()), phi.degree() + 1)) {
        std::vector<VectorField> xs;
        std::vector<KForm> as;
        for (int i : idx) {
            xs.push_back(f[static_cast<std::size_t>(i)].X());
            as.push_back(f[static_cast<std::size_t>(i)].xi());
        }
        out.add(idx, evaluate_form(dphi, xs) + contravariant_eval(q, xs, as));
    }
    return out;
}

AForm rho_pullback(const KForm& sigma, const PresentationPtr& p) {
    require_same_chart(sigma.chart(), p->chart());
    AForm out(p, sigma.degree());
    for (const Multi& idx : increasing_tuples(static_cast<int>(p->rank()), sigma.degree())) {
        std::vector<VectorField> xs;
        for (int i : idx) xs.push_back(p->anchor(static_cast<std::size_t>(i)));
        out.add(idx, evaluate_form(sigma, xs));
    }
    return out;
}

AForm pullback_form(const AForm& theta, const PresentationPtr& d1) {
    if (d1->base() != theta.presentation()) throw DomainError("form does not live on the base of this pull-back");
    AForm out(d1, theta.degree());
    for (const auto& [idx, v] : theta.terms()) out.add(idx, v);
    return out;
}

AForm restrict_to_zero(const AForm& theta) {
    const PresentationPtr& p = theta.presentation();
    if (!p->base()) throw DomainError("restriction needs a pull-back presentation");
    const int slot = static_cast<int>(p->line_slot());
    const std::map<std::string, Expr> at_zero{{p->line_coordinate(), Expr()}};
    AForm out(p->base(), theta.degree());
    for (const auto& [idx, v] : theta.terms()) {
        bool has_t = false;
        for (int i : idx) has_t = has_t || i == slot;
        if (!has_t) out.add(idx, substitute(v, at_zero));
    }
    return out;
}

AForm homotopy_S(const AForm& omega) {
    const PresentationPtr& p = omega.presentation();
    if (!p->base()) throw DomainError("homotopy operator needs a pull-back presentation");
    AForm out(p, std::max(omega.degree() - 1, 0));
    if (omega.degree() == 0) return out;
    const int slot = static_cast<int>(p->line_slot());
    const std::string& t = p->line_coordinate();
    const Expr tv = Expr::symbol(t);
    for (const auto& [idx, v] : omega.terms()) {
        if (idx.back() != slot) continue;
        std::vector<Expr> coeffs;
        try {
            coeffs = v.coefficients_in(t);
        } catch (const DomainError&) {
            throw DomainError("unsupported integrand: " + v.str());
        }
        Expr integral;
        for (std::size_t k = 0; k < coeffs.size(); ++k)
            if (!coeffs[k].is_canonical_zero())
                integral += coeffs[k] * tv.pow(static_cast<long>(k + 1)) / Expr(static_cast<long>(k + 1));
        // g dt/\gamma_J with gamma_J/\dt = (-1)^|J| dt/\gamma_J
        Multi j(idx.begin(), idx.end() - 1);
        out.add(j, j.size() % 2 ? -integral : integral);
    }
    return out;
}

std::vector<std::vector<ComplexAForm>> curvature(const AConnection& conn) {
    const std::size_t m = conn.bundle_rank();
    std::vector<std::vector<ComplexAForm>> k(m, std::vector<ComplexAForm>(m));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            ComplexAForm v = d_A(conn.theta[i][j]);
            for (std::size_t l = 0; l < m; ++l) v = v + wedge(conn.theta[i][l], conn.theta[l][j]);
            k[i][j] = v;
        }
    return k;
}

namespace {

using CSection = std::vector<ComplexExpr>;

CSection nabla(const AConnection& conn, std::size_t a, const CSection& s) {
    const VectorField& x = conn.presentation->anchor(a);
    const std::size_t m = conn.bundle_rank();
    CSection out(m);
    for (std::size_t j = 0; j < m; ++j) {
        ComplexExpr v(x.apply(s[j].re()), x.apply(s[j].im()));
        for (std::size_t k = 0; k < m; ++k) v += conn.theta[j][k].get({static_cast<int>(a)}) * s[k];
        out[j] = v;
    }
    return out;
}

}  // namespace

ComplexExpr curvature_operator(const AConnection& conn, std::size_t a, std::size_t b, std::size_t j, std::size_t k) {
    const std::size_t m = conn.bundle_rank();
    CSection eps(m, ComplexExpr(0));
    eps[k] = ComplexExpr(1);
    ComplexExpr v = nabla(conn, a, nabla(conn, b, eps))[j] - nabla(conn, b, nabla(conn, a, eps))[j];
    const PresentationPtr& p = conn.presentation;
    for (std::size_t c = 0; c < p->rank(); ++c) {
        const Expr& s = p->c(a, b, c);
        if (!s.is_canonical_zero()) v -= ComplexExpr(s) * nabla(conn, c, eps)[j];
    }
    return v;
}

}  // namespace diracq
