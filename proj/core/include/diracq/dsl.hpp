#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "diracq/polarization.hpp"

namespace diracq {

// Diagnostic with a 1-based source location.
struct ParseError : Error {
    std::size_t line;
    std::size_t column;
    std::string message;
    ParseError(std::size_t l, std::size_t c, std::string msg)
        : Error("line " + std::to_string(l) + ", column " + std::to_string(c) + ": " + msg),
          line(l),
          column(c),
          message(std::move(msg)) {}
};

// Parses one expression over the chart's coordinates and parameters.
Expr parse_expr(const std::string& text, const ChartPtr& chart);

struct DiracDecl {
    std::string name;
    std::string kind;  // graph_presymplectic | graph_poisson | distribution | frame
    KForm omega;
    KVector pi;
    std::vector<VectorField> fields;
    std::vector<Section> frame;
    DiracStructure d;
};

struct ComplementDecl {
    std::string name;
    ComplementH h;
};

// sigma_j is either rho^*(re + I im) or given by its values on the D frame.
struct SigmaDecl {
    bool by_components = false;
    KForm re;
    KForm im;
    std::vector<ComplexExpr> components;
};

struct AtlasDecl {
    std::string name;
    std::vector<std::string> patches;
    std::vector<std::optional<SigmaDecl>> sigma;
    std::map<std::pair<std::size_t, std::size_t>, Expr> cocycle;
    std::map<std::pair<std::size_t, std::size_t>, ComplexExpr> transitions;
    bool hermitian = false;
};

struct PolarizationDecl {
    std::string name;
    std::vector<ComplexSection> frame;
};

struct HalfDensityDecl {
    std::string name;
    std::size_t patch = 0;
    ComplexExpr value;
};

// `expect hamiltonian f = X` or `expect bracket f g = e`.
struct ExpectDecl {
    std::string kind;
    std::vector<std::string> functions;
    VectorField field;
    Expr value;
};

struct Model {
    std::string name = "model";
    ChartPtr chart;
    std::vector<std::pair<std::string, Expr>> scalars;
    std::vector<std::pair<std::string, KForm>> forms;
    std::vector<std::pair<std::string, KVector>> vectors;
    std::vector<std::pair<std::string, ComplexSection>> sections;
    std::optional<DiracDecl> dirac;
    std::optional<ComplementDecl> complement;
    std::vector<Expr> invariants;
    std::optional<AtlasDecl> atlas;
    std::optional<PolarizationDecl> polarization;
    std::vector<HalfDensityDecl> halfdensities;
    std::vector<ExpectDecl> expects;
    std::vector<std::string> directives;

    const Expr* scalar(const std::string& n) const;
};

// Throws ParseError.
Model parse_model(const std::string& text, const std::string& default_name = "model");
std::string print_model(const Model& m);
bool structurally_equal(const Model& a, const Model& b);

const std::vector<std::string>& suite_names();

struct CheckRecord {
    std::string name;
    std::string status;  // pass | fail | error | skipped
    std::optional<std::string> witness;
    long long millis = 0;
};

struct Report {
    std::string model;
    std::uint64_t seed = 0;
    std::vector<CheckRecord> checks;

    bool ok() const;
    std::string json() const;
    std::string text() const;
};

struct RunOptions {
    std::uint64_t seed = 7;
    int trials = 20;
    bool timing = false;
};

// Runs the requested suites that the model's check directives enable; the
// rest are reported as skipped.
Report run_checks(const Model& m, const std::vector<std::string>& suites, const RunOptions& opt = {});

}  // namespace diracq
