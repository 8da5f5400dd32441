#include "diracq/prequant.hpp"

#include <cmath>
#include <deque>

namespace diracq {

namespace {

using Pair = std::pair<std::size_t, std::size_t>;

ComplexExpr apply(const VectorField& x, const ComplexExpr& z) { return {x.apply(z.re()), x.apply(z.im())}; }

ComplexExpr apply(const VectorField& re, const VectorField& im, const ComplexExpr& z) {
    return apply(re, z) + ComplexExpr::i() * apply(im, z);
}

ComplexExpr value_on(const ComplexAForm& theta, const std::vector<ComplexExpr>& psi) {
    std::vector<Expr> re, im;
    for (const auto& z : psi) {
        re.push_back(z.re());
        im.push_back(z.im());
    }
    return ComplexExpr(evaluate_on(theta.re, re) - evaluate_on(theta.im, im),
                       evaluate_on(theta.re, im) + evaluate_on(theta.im, re));
}

ComplexExpr value_on(const ComplexAForm& theta, const std::vector<Expr>& a, const std::vector<Expr>& b) {
    return {evaluate_on(theta.re, a, b), evaluate_on(theta.im, a, b)};
}

std::vector<ComplexExpr> complexify(const std::vector<Expr>& c) { return {c.begin(), c.end()}; }

ComplexAForm d_scalar(const PresentationPtr& a, const ComplexExpr& z) {
    return {d_A(AForm::scalar(a, z.re())), d_A(AForm::scalar(a, z.im()))};
}

// (I / 2 pi) d_D g / g, one frame slot at a time.
ComplexAForm log_derivative(const PresentationPtr& a, const ComplexExpr& g) {
    ComplexAForm dg = d_scalar(a, g);
    const ComplexExpr factor(Expr(), Expr(1) / (Expr(2) * Expr::pi()));
    ComplexAForm out{AForm(a, 1), AForm(a, 1)};
    for (std::size_t i = 0; i < a->rank(); ++i) {
        ComplexExpr v = factor * (dg.get({static_cast<int>(i)}) / g);
        out.re.add({static_cast<int>(i)}, v.re());
        out.im.add({static_cast<int>(i)}, v.im());
    }
    return out;
}

std::string overlap_name(const BundleAtlas& b, std::size_t j, std::size_t k) {
    return b.patches()[j] + "," + b.patches()[k];
}

ComplexExpr conj(const ComplexExpr& z) { return z.conj(); }

}  // namespace

BundleAtlas::BundleAtlas(PresentationPtr a, std::vector<std::string> patches, std::vector<ComplexAForm> sigma,
                         std::map<Pair, ComplexExpr> transitions, bool hermitian)
    : a_(std::move(a)), patches_(std::move(patches)), sigma_(std::move(sigma)), hermitian_(hermitian) {
    if (a_->realization().empty()) throw DomainError("bundle atlas needs a Dirac presentation");
    d_ = DiracStructure(a_->chart(), a_->realization(), a_->name());
    if (patches_.empty()) throw DomainError("bundle atlas needs at least one patch");
    if (sigma_.size() != patches_.size()) throw DomainError("one connection 1-section per patch expected");
    for (const auto& s : sigma_) {
        if (s.re.presentation() != a_ || s.im.presentation() != a_)
            throw ChartMismatch("connection 1-section over a different presentation");
        if (s.re.degree() != 1 || s.im.degree() != 1) throw DomainError("connection 1-sections have degree 1");
    }
    for (auto& [jk, g] : transitions) {
        if (jk.first >= patches_.size() || jk.second >= patches_.size() || jk.first == jk.second)
            throw DomainError("transition between unknown patches");
        if (jk.first < jk.second)
            g_[jk] = g;
        else
            g_[{jk.second, jk.first}] = ComplexExpr(1) / g;
    }
}

std::size_t BundleAtlas::patch_index(const std::string& name) const {
    for (std::size_t j = 0; j < patches_.size(); ++j)
        if (patches_[j] == name) return j;
    throw SymbolError("unknown patch " + name);
}

bool BundleAtlas::overlaps(std::size_t j, std::size_t k) const {
    return j == k || g_.count({std::min(j, k), std::max(j, k)}) > 0;
}

ComplexExpr BundleAtlas::g(std::size_t j, std::size_t k) const {
    if (j == k) return ComplexExpr(1);
    auto it = g_.find({std::min(j, k), std::max(j, k)});
    if (it == g_.end()) throw DomainError("patches " + patches_[j] + " and " + patches_[k] + " do not overlap");
    return j < k ? it->second : ComplexExpr(1) / it->second;
}

BundleAtlas BundleAtlas::with_sigma(std::vector<ComplexAForm> sigma) const {
    BundleAtlas b(a_, patches_, std::move(sigma), g_, hermitian_);
    b.w = w;
    return b;
}

AtlasReport check_atlas(const BundleAtlas& b) {
    AtlasReport r;
    r.cocycle = true;
    r.compatible = true;
    r.real = true;
    const std::size_t n = b.patch_count();
    for (std::size_t j = 0; j < n; ++j)
        if (!b.sigma(j).im.is_zero()) r.real = false;
    for (std::size_t j = 0; j < n && r.cocycle; ++j)
        for (std::size_t k = j + 1; k < n && r.cocycle; ++k)
            for (std::size_t l = k + 1; l < n; ++l) {
                if (!b.overlaps(j, k) || !b.overlaps(k, l) || !b.overlaps(j, l)) continue;
                ComplexExpr res = b.g(j, k) * b.g(k, l) - b.g(j, l);
                if (!is_zero(res)) {
                    r.cocycle = false;
                    r.witness = "cocycle fails on " + overlap_name(b, j, k) + "," + b.patches()[l] + ": " + res.str();
                    break;
                }
            }
    for (const auto& [jk, g] : b.transitions()) {
        ComplexAForm res = b.sigma(jk.first) - b.sigma(jk.second) - log_derivative(b.presentation(), g);
        if (!res.is_zero()) {
            r.compatible = false;
            if (r.witness.empty())
                r.witness = "sigma_j - sigma_k != (I/2pi) d_D g/g on " + overlap_name(b, jk.first, jk.second) +
                            ": residual " + res.str();
            break;
        }
    }
    return r;
}

LineSection line_section(const BundleAtlas& b, std::size_t j, const ComplexExpr& sj) {
    const std::size_t n = b.patch_count();
    std::vector<std::optional<ComplexExpr>> s(n);
    s[j] = sj;
    std::deque<std::size_t> todo{j};
    while (!todo.empty()) {
        const std::size_t a = todo.front();
        todo.pop_front();
        for (std::size_t k = 0; k < n; ++k)
            if (!s[k] && b.overlaps(a, k)) {
                s[k] = b.g(k, a) * *s[a];
                todo.push_back(k);
            }
    }
    LineSection out;
    for (std::size_t k = 0; k < n; ++k) {
        if (!s[k]) throw DomainError("patch " + b.patches()[k] + " is not connected to " + b.patches()[j]);
        out.s.push_back(*s[k]);
    }
    return out;
}

std::string gluing_witness(const BundleAtlas& b, const LineSection& s) {
    for (const auto& [jk, g] : b.transitions()) {
        ComplexExpr res = s.s[jk.first] - g * s.s[jk.second];
        if (!is_zero(res)) return "s_j != g_jk s_k on " + overlap_name(b, jk.first, jk.second) + ": " + res.str();
    }
    return {};
}

ComplexAForm curvature_2section(const BundleAtlas& b) {
    AtlasReport r = check_atlas(b);
    if (!r.compatible) throw DomainError(r.witness);
    const auto& a = b.presentation();
    ComplexAForm tau = d_A(b.sigma(0));
    for (std::size_t j = 1; j < b.patch_count(); ++j) {
        ComplexAForm tj = d_A(b.sigma(j));
        if (!equal(tj, tau))
            throw DomainError("curvature differs between " + overlap_name(b, 0, j) + ": " + (tj - tau).str());
    }
    // The rank-1 operator curvature agrees with 2 pi I tau.
    for (std::size_t j = 0; j < b.patch_count(); ++j) {
        AConnection conn{a, {{ComplexExpr::two_pi_i() * b.sigma(j)}}};
        for (std::size_t i = 0; i < a->rank(); ++i)
            for (std::size_t k = i + 1; k < a->rank(); ++k) {
                ComplexExpr lhs = curvature_operator(conn, i, k, 0, 0);
                ComplexExpr rhs = ComplexExpr::two_pi_i() * tau.get({static_cast<int>(i), static_cast<int>(k)});
                if (!equal(lhs, rhs)) throw Error("curvature operator disagrees with d_D sigma on " + b.patches()[j]);
            }
    }
    if (b.hermitian() && !tau.im.is_zero()) throw DomainError("curvature 2-section is not real: " + tau.str());
    return tau;
}

ComplexAForm dirac_chern_check(const BundleAtlas& b1, const BundleAtlas& b2) {
    if (b1.presentation() != b2.presentation() || b1.patch_count() != b2.patch_count())
        throw DomainError("atlases over different data");
    for (const auto& [jk, g] : b1.transitions())
        if (!b2.overlaps(jk.first, jk.second) || !equal(g, b2.g(jk.first, jk.second)))
            throw DomainError("atlases have different transitions on " + overlap_name(b1, jk.first, jk.second));
    std::vector<ComplexAForm> delta;
    for (std::size_t j = 0; j < b1.patch_count(); ++j) delta.push_back(b2.sigma(j) - b1.sigma(j));
    for (const auto& [jk, g] : b1.transitions())
        if (!equal(delta[jk.first], delta[jk.second]))
            throw DomainError("sigma' - sigma is not global on " + overlap_name(b1, jk.first, jk.second));
    ComplexAForm diff = curvature_2section(b2) - curvature_2section(b1);
    if (!equal(diff, d_A(delta[0]))) throw Error("tau' - tau differs from d_D of sigma' - sigma");
    return delta[0];
}

LambdaForm lambda_Dform(const PresentationPtr& a) {
    const auto& f = a->realization();
    if (f.empty()) throw DomainError("Lambda needs a Dirac presentation");
    LambdaForm out;
    out.lambda = AForm(a, 2);
    for (std::size_t i = 0; i < f.size(); ++i)
        for (std::size_t j = i + 1; j < f.size(); ++j)
            out.lambda.add({static_cast<int>(i), static_cast<int>(j)}, pairing_minus(f[i], f[j]));
    AForm dl = d_A(out.lambda);
    out.closed = dl.is_zero();
    if (!out.closed) out.witness = "d_D Lambda = " + dl.str();
    out.matches_omega = true;
    for (std::size_t i = 0; i < f.size() && out.matches_omega; ++i)
        for (std::size_t j = 0; j < f.size(); ++j) {
            Expr om = pair(f[i].xi(), f[j].X());
            if (!equal(om, out.lambda.get({static_cast<int>(i), static_cast<int>(j)}))) {
                out.matches_omega = false;
                if (out.witness.empty())
                    out.witness = "Lambda(e" + std::to_string(i + 1) + ",e" + std::to_string(j + 1) + ") != Omega: " + om.str();
                break;
            }
        }
    return out;
}

PrequantCondition prequant_condition(const BundleAtlas& b) {
    PrequantCondition c;
    ComplexAForm tau = curvature_2section(b);
    c.residual = tau - ComplexAForm(lambda_Dform(b.presentation()).lambda);
    c.holds = c.residual.is_zero();
    if (!c.holds) c.witness = "tau - Lambda = " + c.residual.str();
    return c;
}

LineSection covariant_derivative(const BundleAtlas& b, const std::vector<ComplexExpr>& psi, const LineSection& s) {
    const auto& a = b.presentation();
    if (psi.size() != a->rank()) throw DomainError("section coefficients do not match the frame");
    VectorField re(a->chart()), im(a->chart());
    for (std::size_t i = 0; i < psi.size(); ++i) {
        if (!psi[i].re().is_canonical_zero()) re = re + psi[i].re() * a->anchor(i);
        if (!psi[i].im().is_canonical_zero()) im = im + psi[i].im() * a->anchor(i);
    }
    LineSection out;
    for (std::size_t j = 0; j < s.s.size(); ++j)
        out.s.push_back(apply(re, im, s.s[j]) + ComplexExpr::two_pi_i() * value_on(b.sigma(j), psi) * s.s[j]);
    return out;
}

std::vector<Expr> hamiltonian_section(const BundleAtlas& b, const ComplementH& h, const Expr& f) {
    VectorField hf = hamiltonian_H(b.dirac(), h, f);
    MembershipCertificate c = membership(b.dirac(), Section(hf, differential(b.dirac().chart(), f)));
    if (!c.member) throw Error("(H_f, df) left D: " + c.witness);
    return c.coefficients;
}

LineSection prequant_operator(const BundleAtlas& b, const ComplementH& h, const Expr& f, const LineSection& s) {
    LineSection n = covariant_derivative(b, complexify(hamiltonian_section(b, h, f)), s);
    for (std::size_t j = 0; j < n.s.size(); ++j) n.s[j] = -n.s[j] - ComplexExpr::two_pi_i() * f * s.s[j];
    return n;
}

LineSection commutator_residual(const BundleAtlas& b, const ComplementH& h, const Expr& f, const Expr& g,
                                const LineSection& s) {
    Expr fg = bracket_omega(b.dirac(), h, f, g);
    LineSection lhs = prequant_operator(b, h, fg, s);
    LineSection fgs = prequant_operator(b, h, f, prequant_operator(b, h, g, s));
    LineSection gfs = prequant_operator(b, h, g, prequant_operator(b, h, f, s));
    return lhs - (fgs - gfs);
}

LineSection predicted_commutator_residual(const BundleAtlas& b, const ComplementH& h, const Expr& f, const Expr& g,
                                          const LineSection& s) {
    ComplexAForm tau = curvature_2section(b);
    ComplexAForm diff = ComplexAForm(lambda_Dform(b.presentation()).lambda) - tau;
    ComplexExpr v = ComplexExpr::two_pi_i() * value_on(diff, hamiltonian_section(b, h, f), hamiltonian_section(b, h, g));
    LineSection out;
    for (const auto& z : s.s) out.s.push_back(v * z);
    return out;
}

bool is_zero(const LineSection& s) {
    for (const auto& z : s.s)
        if (!is_zero(z)) return false;
    return true;
}

bool equal(const LineSection& a, const LineSection& b) { return is_zero(a - b); }

LineSection operator-(const LineSection& a, const LineSection& b) {
    if (a.s.size() != b.s.size()) throw DomainError("line sections over different atlases");
    LineSection out;
    for (std::size_t j = 0; j < a.s.size(); ++j) out.s.push_back(a.s[j] - b.s[j]);
    return out;
}

namespace {

// Exact value of a constant at a sample point, trying a few points to avoid poles.
Value sample_constant(const Expr& f, const ChartPtr& chart) {
    for (int attempt = 0; attempt < 8; ++attempt) {
        Point pt{chart->name(), {}};
        int i = 0;
        for (const auto& v : f.free_symbols()) pt.values[v] = Rational(2 * i++ + 3 + attempt, 7);
        try {
            return evaluate(f, pt);
        } catch (const SingularError&) {
        }
    }
    throw SingularError("no regular sample point for " + f.str());
}

bool is_integer(const Value& v) {
    if (const auto* q = std::get_if<Rational>(&v)) return q->get_den() == 1;
    const Real& r = std::get<Real>(v);
    return boost::multiprecision::abs(r - boost::multiprecision::round(r)) < Real("1e-30");
}

std::string value_str(const Value& v) {
    if (const auto* q = std::get_if<Rational>(&v)) return q->get_str();
    return std::get<Real>(v).str(20);
}

}  // namespace

BundleAtlas build_prequantization(const PresentationPtr& a, std::vector<std::string> patches, std::vector<AForm> sigma,
                                  std::map<Pair, Expr> w) {
    if (sigma.size() != patches.size()) throw DomainError("one connection 1-section per patch expected");
    AForm lambda = lambda_Dform(a).lambda;
    for (std::size_t j = 0; j < sigma.size(); ++j) {
        AForm res = d_A(sigma[j]) - lambda;
        if (!res.is_zero()) throw DomainError("Lambda != d_D sigma on patch " + patches[j] + ": residual " + res.str());
    }
    std::map<Pair, Expr> ws;
    for (const auto& [jk, v] : w) {
        if (jk.first >= patches.size() || jk.second >= patches.size() || jk.first == jk.second)
            throw DomainError("cochain between unknown patches");
        Pair key{std::min(jk.first, jk.second), std::max(jk.first, jk.second)};
        ws[key] = jk.first < jk.second ? v : -v;
    }
    for (const auto& [jk, v] : ws) {
        AForm res = d_A(AForm::scalar(a, v)) - (sigma[jk.first] - sigma[jk.second]);
        if (!res.is_zero())
            throw DomainError("d_D w != sigma_j - sigma_k on " + patches[jk.first] + "," + patches[jk.second] +
                              ": residual " + res.str());
    }
    for (const auto& [jk, v] : ws)
        for (std::size_t l = jk.second + 1; l < patches.size(); ++l) {
            auto kl = ws.find({jk.second, l});
            auto jl = ws.find({jk.first, l});
            if (kl == ws.end() || jl == ws.end()) continue;
            Expr f = v + kl->second - jl->second;
            const std::string name = "f(" + patches[jk.first] + "," + patches[jk.second] + "," + patches[l] + ")";
            if (!d_A(AForm::scalar(a, f)).is_zero())
                throw DomainError("integrality obstruction: " + name + " = " + f.str() + " is not constant");
            Value val = sample_constant(f, a->chart());
            if (!is_integer(val))
                throw DomainError("integrality obstruction: " + name + " = " + value_str(val) + " is not an integer");
        }
    std::map<Pair, ComplexExpr> g;
    for (const auto& [jk, v] : ws) {
        Expr angle = Expr(2) * Expr::pi() * v;
        g[jk] = ComplexExpr(cos(angle), -sin(angle));
    }
    std::vector<ComplexAForm> cs;
    for (auto& s : sigma) cs.emplace_back(std::move(s));
    BundleAtlas b(a, std::move(patches), std::move(cs), std::move(g), true);
    b.w = ws;
    AtlasReport r = check_atlas(b);
    if (!r.passed()) throw Error("constructed atlas fails its invariants: " + r.witness);
    return b;
}

ComplexExpr hermitian_metric(const ComplexExpr& z1, const ComplexExpr& z2) { return conj(z1) * z2; }

ComplexExpr hermitian_check(const BundleAtlas& b, const ComplementH& h, const Expr& f, const LineSection& s1,
                            const LineSection& s2, std::size_t j) {
    std::vector<ComplexExpr> psi = complexify(hamiltonian_section(b, h, f));
    LineSection n1 = covariant_derivative(b, psi, s1);
    LineSection n2 = covariant_derivative(b, psi, s2);
    VectorField hf = hamiltonian_H(b.dirac(), h, f);
    return apply(hf, hermitian_metric(s1.s[j], s2.s[j])) - hermitian_metric(n1.s[j], s2.s[j]) -
           hermitian_metric(s1.s[j], n2.s[j]);
}

}  // namespace diracq
