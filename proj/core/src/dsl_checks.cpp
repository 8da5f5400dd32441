#include <algorithm>
#include <array>
#include <cctype>
#include <chrono>
#include <functional>
#include <memory>
#include <random>
#include <sstream>

#include "json.hpp"

#include "diracq/dsl.hpp"

namespace diracq {

namespace {

struct Outcome {
    std::string status;
    std::optional<std::string> witness;
};
Outcome pass() { return {"pass", std::nullopt}; }
Outcome fail(std::string w) { return {"fail", std::move(w)}; }
Outcome skip(std::string why) { return {"skipped", std::move(why)}; }

class Sampler {
public:
    explicit Sampler(std::uint64_t seed) : rng_(seed) {}

    int uniform(int lo, int hi) { return lo + static_cast<int>(rng_() % static_cast<std::uint64_t>(hi - lo + 1)); }
    Rational small_rational() {
        Rational q(uniform(-9, 9), uniform(1, 4));
        q.canonicalize();
        return q;
    }
    // Polynomial of degree <= max_degree in the given generators.
    Expr polynomial(const std::vector<Expr>& gens, int max_degree) {
        Expr p;
        const int terms = uniform(1, 3);
        for (int t = 0; t < terms; ++t) {
            Expr m(small_rational());
            const int deg = uniform(0, max_degree);
            for (int k = 0; k < deg; ++k) m *= gens[static_cast<std::size_t>(uniform(0, static_cast<int>(gens.size()) - 1))];
            p += m;
        }
        return p;
    }
    ComplexExpr complex_polynomial(const std::vector<Expr>& gens, int max_degree) {
        return {polynomial(gens, max_degree), polynomial(gens, max_degree)};
    }
    AForm aform(const PresentationPtr& p, int degree) {
        std::vector<Expr> gens;
        for (const auto& s : p->chart()->coords()) gens.push_back(Expr::symbol(s));
        AForm f(p, degree);
        for (const auto& idx : increasing_tuples(static_cast<int>(p->rank()), degree))
            if (uniform(0, 2) != 0) f.add(idx, polynomial(gens, 2));
        return f;
    }

private:
    std::mt19937_64 rng_;
};

std::vector<Expr> coordinate_exprs(const ChartPtr& c) {
    std::vector<Expr> v;
    for (std::size_t i = 0; i < c->dim(); ++i) v.push_back(c->coord(i));
    return v;
}

class Runner {
public:
    Runner(const Model& m, const RunOptions& opt, Report& rep) : m_(m), opt_(opt), rep_(rep) {}

    void suite(const std::string& name, std::size_t index) {
        rng_ = std::make_unique<Sampler>(opt_.seed * 1000003ULL + index);
        if (name == "dirac") return dirac();
        if (name == "poisson") return poisson();
        if (name == "prequant") return prequant();
        if (name == "polarize") return polarize();
        if (name == "quantize") return quantize();
        if (name == "poincare") return poincare();
    }

    void record(const std::string& name, const std::function<Outcome()>& f) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = f();
        } catch (const Error& e) {
            o = {"error", std::string(e.what())};
        }
        const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0);
        rep_.checks.push_back({name, o.status, o.witness, opt_.timing ? static_cast<long long>(ms.count()) : 0});
    }

private:
    const Model& m_;
    const RunOptions& opt_;
    Report& rep_;
    std::unique_ptr<Sampler> rng_;

    // cached per run
    std::optional<PresentationPtr> algebroid_;
    std::optional<ComplementH> h_;
    std::optional<std::vector<Expr>> generators_;
    std::optional<BundleAtlas> atlas_;
    std::string atlas_error_;
    bool atlas_tried_ = false;

    const DiracStructure& d() const { return m_.dirac->d; }
    const PresentationPtr& algebroid() {
        if (!algebroid_) algebroid_ = dirac_algebroid(d());
        return *algebroid_;
    }
    const ComplementH& complement() {
        if (!h_) h_ = m_.complement ? m_.complement->h : default_complement(d());
        return *h_;
    }

    // Generators of the admissible polynomials: the declared invariants, or
    // the admissible coordinates.
    const std::vector<Expr>& generators() {
        if (!generators_) {
            if (!m_.invariants.empty()) {
                generators_ = m_.invariants;
            } else {
                std::vector<Expr> g;
                for (const Expr& x : coordinate_exprs(m_.chart))
                    if (admissible_vector_field(d(), x).admissible) g.push_back(x);
                generators_ = g;
            }
        }
        return *generators_;
    }
    Expr admissible_sample() {
        if (generators().empty()) throw DomainError("no admissible generators; declare invariants");
        return rng_->polynomial(generators(), 3);
    }
    std::vector<Expr> admissible_samples(int n) {
        std::vector<Expr> v;
        for (int i = 0; i < n; ++i) v.push_back(admissible_sample());
        return v;
    }

    void skip_suite(const std::string& suite, const std::string& why) {
        rep_.checks.push_back({suite, "skipped", why, 0});
    }

    // ---- dirac

    void dirac() {
        if (!m_.dirac) return skip_suite("dirac", "model has no dirac structure");
        const DiracReport& r = verify_dirac(d());
        record("dirac.isotropic", [&] { return r.isotropic ? pass() : fail(r.isotropy_witness); });
        record("dirac.full_rank", [&] {
            if (r.full_rank) return pass();
            std::string w = "rank " + std::to_string(r.rank);
            for (const auto& s : r.degeneracy_locus) w += "; degenerate where " + s + " = 0";
            return fail(w);
        });
        record("dirac.involutive", [&] { return r.involutive ? pass() : fail(r.involutivity_witness); });
        record("dirac.lemma", [&] { return r.lemma_identity ? pass() : fail(r.lemma_witness); });
        record("dirac.omega", [&] {
            FrameTwoForm o = omega_on_frame(d());
            return o.antisymmetric && o.cocycle ? pass() : fail(o.witness);
        });
        record("dirac.pi_sharp", [&] {
            std::string w;
            return pi_sharp_morphism(d(), &w) ? pass() : fail(w);
        });
        record("dirac.algebroid", [&] {
            PresentationReport pr = algebroid()->check();
            return pr.passed() ? pass() : fail(pr.witness);
        });
    }

    // ---- poisson

    void poisson() {
        if (!m_.dirac) return skip_suite("poisson", "model has no dirac structure");
        std::vector<std::array<Expr, 3>> triples;
        record("poisson.samples", [&] {
            for (int t = 0; t < opt_.trials; ++t) {
                std::array<Expr, 3> tr{admissible_sample(), admissible_sample(), admissible_sample()};
                for (const Expr& f : tr) {
                    AdmissibleFunction a = admissible(d(), complement(), f);
                    if (!a.admissible) return fail(a.witness);
                }
                triples.push_back(tr);
            }
            return pass();
        });
        if (triples.size() < static_cast<std::size_t>(opt_.trials)) return;
        const ComplementH& h = complement();
        auto br = [&](const Expr& f, const Expr& g) { return bracket_omega(d(), h, f, g); };
        auto label = [](const std::array<Expr, 3>& t) {
            return "f = " + t[0].str() + ", g = " + t[1].str() + ", h = " + t[2].str();
        };
        record("poisson.antisymmetry", [&] {
            for (const auto& t : triples) {
                Expr r = br(t[0], t[1]) + br(t[1], t[0]);
                if (!is_zero(r)) return fail(label(t) + ": {f,g} + {g,f} = " + r.str());
            }
            return pass();
        });
        record("poisson.leibniz", [&] {
            for (const auto& t : triples) {
                Expr r = br(t[0], t[1] * t[2]) - br(t[0], t[1]) * t[2] - t[1] * br(t[0], t[2]);
                if (!is_zero(r)) return fail(label(t) + ": Leibniz residual " + r.str());
            }
            return pass();
        });
        std::vector<JacobiResidual> jac;
        for (const auto& t : triples) jac.push_back(jacobi_suite(d(), h, t[0], t[1], t[2]));
        record("poisson.jacobi", [&] {
            for (std::size_t i = 0; i < jac.size(); ++i)
                if (!is_zero(jac[i].jacobi)) return fail(label(triples[i]) + ": Jacobi residual " + jac[i].jacobi.str());
            return pass();
        });
        record("poisson.field", [&] {
            for (std::size_t i = 0; i < jac.size(); ++i)
                if (!jac[i].field.is_zero())
                    return fail(label(triples[i]) + ": [H_f,H_g] + H_{f,g} = " + jac[i].field.str());
            return pass();
        });
        record("poisson.prime", [&] {
            for (const auto& t : triples) {
                Expr r = bracket_prime(d(), t[0], t[1]) - br(t[0], t[1]);
                if (!is_zero(r)) return fail(label(t) + ": {f,g}' - {f,g} = " + r.str());
            }
            return pass();
        });
        for (const auto& e : m_.expects) {
            std::string name = "poisson.expect." + e.kind;
            for (const auto& f : e.functions) name += "." + f;
            record(name, [&] {
                if (e.kind == "hamiltonian") {
                    VectorField got = hamiltonian_H(d(), h, *m_.scalar(e.functions[0]));
                    return equal(got, e.field) ? pass() : fail("H_" + e.functions[0] + " = " + got.str());
                }
                Expr got = br(*m_.scalar(e.functions[0]), *m_.scalar(e.functions[1]));
                return equal(got, e.value) ? pass()
                                           : fail("{" + e.functions[0] + "," + e.functions[1] + "} = " + got.str());
            });
        }
    }

    // ---- prequant

    ComplexAForm sigma_form(const SigmaDecl& s) {
        const PresentationPtr& a = algebroid();
        if (!s.by_components) return {rho_pullback(s.re, a), rho_pullback(s.im, a)};
        AForm re(a, 1), im(a, 1);
        for (std::size_t i = 0; i < s.components.size(); ++i) {
            re.add({static_cast<int>(i)}, s.components[i].re());
            im.add({static_cast<int>(i)}, s.components[i].im());
        }
        return {re, im};
    }

    // Builds the atlas once; records the failure reason otherwise.
    const BundleAtlas* atlas() {
        if (atlas_tried_) return atlas_ ? &*atlas_ : nullptr;
        atlas_tried_ = true;
        const AtlasDecl& a = *m_.atlas;
        try {
            std::vector<ComplexAForm> sigma;
            for (const auto& s : a.sigma) sigma.push_back(sigma_form(*s));
            if (!a.cocycle.empty()) {
                std::vector<AForm> real;
                for (const auto& s : sigma) {
                    if (!s.im.is_zero()) throw DomainError("cocycle construction needs real sigma");
                    real.push_back(s.re);
                }
                atlas_ = build_prequantization(algebroid(), a.patches, real, a.cocycle);
            } else {
                atlas_ = BundleAtlas(algebroid(), a.patches, sigma, a.transitions, a.hermitian);
            }
        } catch (const Error& e) {
            atlas_error_ = e.what();
        }
        return atlas_ ? &*atlas_ : nullptr;
    }

    LineSection random_section(const BundleAtlas& b) {
        return line_section(b, 0, rng_->complex_polynomial(coordinate_exprs(m_.chart), 2));
    }

    void prequant() {
        if (!m_.dirac || !m_.atlas) return skip_suite("prequant", "model has no atlas");
        record("prequant.atlas", [&] {
            const BundleAtlas* b = atlas();
            if (!b) return fail(atlas_error_);
            AtlasReport r = check_atlas(*b);
            return r.passed() ? pass() : fail(r.witness);
        });
        const BundleAtlas* b = atlas();
        if (!b) return;
        record("prequant.lambda", [&] {
            LambdaForm l = lambda_Dform(b->presentation());
            return l.closed && l.matches_omega ? pass() : fail(l.witness);
        });
        record("prequant.condition", [&] {
            PrequantCondition c = prequant_condition(*b);
            return c.holds ? pass() : fail(c.witness);
        });
        record("prequant.commutator", [&] {
            for (int t = 0; t < opt_.trials; ++t) {
                Expr f = admissible_sample(), g = admissible_sample();
                LineSection s = random_section(*b);
                LineSection r = commutator_residual(*b, complement(), f, g, s);
                if (!is_zero(r))
                    return fail("f = " + f.str() + ", g = " + g.str() + ", s = " + s.s[0].str() +
                                ": residual " + r.s[0].str());
            }
            return pass();
        });
        if (!b->hermitian()) return record("prequant.hermitian", [] { return skip("atlas is not hermitian"); });
        record("prequant.hermitian", [&] {
            for (int t = 0; t < opt_.trials; ++t) {
                Expr f = admissible_sample();
                LineSection s1 = random_section(*b), s2 = random_section(*b);
                ComplexExpr r = hermitian_check(*b, complement(), f, s1, s2);
                if (!is_zero(r)) return fail("f = " + f.str() + ": residual " + r.str());
            }
            return pass();
        });
    }

    // ---- polarize

    Polarization polarization() { return {d(), complement(), m_.polarization->frame}; }

    void polarize() {
        if (!m_.dirac || !m_.polarization) return skip_suite("polarize", "model has no polarization");
        PolarizationReport r;
        record("polarize.check", [&] {
            r = polarization_check(polarization());
            return pass();
        });
        if (rep_.checks.back().status != "pass") return;
        rep_.checks.pop_back();
        record("polarize.in_H", [&] { return r.in_H ? pass() : fail(r.witness); });
        record("polarize.isotropic", [&] { return r.isotropic ? pass() : fail(r.in_H ? r.witness : "H test failed"); });
        record("polarize.involutive", [&] {
            return r.involutive ? pass() : fail(r.in_H && r.isotropic ? r.witness : "earlier test failed");
        });
        record("polarize.q_bundle", [&] {
            std::vector<Expr> probe = generators();
            for (const auto& [n, e] : m_.scalars) probe.push_back(e);
            for (int t = 0; t < opt_.trials && !generators().empty(); ++t) probe.push_back(admissible_sample());
            QBundle q = q_bundle(polarization(), probe);
            return q.projectable ? pass() : fail(q.witness);
        });
    }

    // ---- quantize

    std::vector<ComplexSection> quantize_frame() {
        if (m_.polarization) return m_.polarization->frame;
        std::vector<ComplexSection> v;
        for (const auto& s : d().frame()) v.emplace_back(s);
        return v;
    }

    HalfDensitySection halfdensity(const BundleAtlas& b, int t) {
        if (!m_.halfdensities.empty()) {
            const auto& h = m_.halfdensities[static_cast<std::size_t>(t) % m_.halfdensities.size()];
            if (t < static_cast<int>(m_.halfdensities.size()))
                return half_density(m_.chart, line_section(b, h.patch, h.value));
        }
        return half_density(m_.chart, random_section(b));
    }

    void quantize() {
        if (!m_.dirac || !m_.atlas) return skip_suite("quantize", "model has no atlas");
        const BundleAtlas* b = atlas();
        if (!b) return skip_suite("quantize", "atlas invalid: " + atlas_error_);
        record("quantize.residual", [&] {
            const auto frame = quantize_frame();
            for (int t = 0; t < opt_.trials; ++t) {
                Expr f = admissible_sample();
                HalfDensitySection v = halfdensity(*b, t);
                for (std::size_t a = 0; a < frame.size(); ++a) {
                    HalfDensitySection r = lemma51_residual(*b, complement(), frame[a], f, v);
                    if (!is_zero(r))
                        return fail("f = " + f.str() + ", psi = " + frame[a].str() + ", v = " + v.str() +
                                    ": residual " + r.str());
                }
            }
            return pass();
        });
        if (!b->hermitian()) return record("quantize.selfadjoint", [] { return skip("atlas is not hermitian"); });
        record("quantize.selfadjoint", [&] {
            for (int t = 0; t < opt_.trials; ++t) {
                Expr f = admissible_sample();
                HalfDensitySection v1 = halfdensity(*b, t), v2 = half_density(m_.chart, random_section(*b));
                for (std::size_t j = 0; j < b->patch_count(); ++j) {
                    AlphaDensity r = selfadjoint_integrand(*b, complement(), f, v1, v2, j);
                    if (!is_zero(r.coeff))
                        return fail("f = " + f.str() + ", v1 = " + v1.str() + ", v2 = " + v2.str() +
                                    ": integrand " + r.coeff.str());
                }
            }
            return pass();
        });
        if (!m_.polarization || m_.halfdensities.empty())
            return record("quantize.hzero", [] { return skip("needs a polarization and half-density sections"); });
        record("quantize.hzero", [&] {
            std::vector<Expr> fs;
            for (const auto& [n, e] : m_.scalars) fs.push_back(e);
            if (!generators().empty()) {
                auto more = admissible_samples(opt_.trials);
                fs.insert(fs.end(), more.begin(), more.end());
            }
            Polarization p = polarization();
            bool any = false;
            for (const auto& h : m_.halfdensities) {
                InvarianceProbe r = hzero_probe(p, *b, half_density(m_.chart, line_section(*b, h.patch, h.value)), fs);
                if (!r.applicable) continue;
                any = true;
                if (!r.passed) return fail(h.name + ": " + r.witness);
            }
            return any ? pass() : skip("no half-density section is polarized");
        });
    }

    // ---- poincare

    void poincare() {
        if (!m_.dirac) return skip_suite("poincare", "model has no dirac structure");
        std::string t = "t";
        while (m_.chart->index_of(t) >= 0 || m_.chart->is_param(t)) t += "_";
        record("poincare.d_squared", [&] {
            const PresentationPtr& a = algebroid();
            const int r = static_cast<int>(a->rank());
            for (int k = 0; k < opt_.trials; ++k) {
                AForm w = rng_->aform(a, rng_->uniform(0, std::max(0, r - 2)));
                AForm dd = d_A(d_A(w));
                if (!dd.is_zero()) return fail("w = " + w.str() + ": d d w = " + dd.str());
            }
            return pass();
        });
        record("poincare.homotopy", [&] {
            PresentationPtr d1 = pullback_over_line(algebroid(), t);
            const int r = static_cast<int>(d1->rank());
            for (int k = 0; k < opt_.trials; ++k) {
                const int l = rng_->uniform(0, r);
                AForm w = rng_->aform(d1, l);
                AForm lhs = l == 0 ? homotopy_S(d_A(w)) : d_A(homotopy_S(w)) + homotopy_S(d_A(w));
                AForm res = lhs - (w - pullback_form(restrict_to_zero(w), d1));
                if (!res.is_zero()) return fail("w = " + w.str() + ": residual " + res.str());
            }
            return pass();
        });
    }
};

}  // namespace

bool Report::ok() const {
    return std::none_of(checks.begin(), checks.end(),
                        [](const CheckRecord& c) { return c.status == "fail" || c.status == "error"; });
}

std::string Report::json() const {
    nlohmann::ordered_json j;
    j["model"] = model;
    j["seed"] = seed;
    j["checks"] = nlohmann::ordered_json::array();
    for (const auto& c : checks) {
        nlohmann::ordered_json r;
        r["name"] = c.name;
        r["status"] = c.status;
        r["witness"] = c.witness ? nlohmann::ordered_json(*c.witness) : nlohmann::ordered_json(nullptr);
        r["millis"] = c.millis;
        j["checks"].push_back(r);
    }
    return j.dump(2) + "\n";
}

std::string Report::text() const {
    std::ostringstream o;
    o << "model " << model << " (seed " << seed << ")\n";
    std::size_t failed = 0;
    for (const auto& c : checks) {
        std::string tag = c.status;
        std::transform(tag.begin(), tag.end(), tag.begin(), [](unsigned char ch) { return std::toupper(ch); });
        o << "  " << tag << " " << c.name;
        if (c.witness) o << ": " << *c.witness;
        if (c.millis) o << " (" << c.millis << " ms)";
        o << "\n";
        if (c.status == "fail" || c.status == "error") ++failed;
    }
    o << (failed ? std::to_string(failed) + " check(s) failed\n" : "all checks passed\n");
    return o.str();
}

Report run_checks(const Model& m, const std::vector<std::string>& suites, const RunOptions& opt) {
    Report rep;
    rep.model = m.name;
    rep.seed = opt.seed;
    Runner run(m, opt, rep);
    const auto& order = suite_names();
    for (std::size_t i = 0; i < order.size(); ++i) {
        const std::string& s = order[i];
        if (std::find(suites.begin(), suites.end(), s) == suites.end()) continue;
        if (std::find(m.directives.begin(), m.directives.end(), s) == m.directives.end()) {
            rep.checks.push_back({s, "skipped", std::string("not requested by the model"), 0});
            continue;
        }
        run.suite(s, i);
    }
    return rep;
}

}  // namespace diracq
