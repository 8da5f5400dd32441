#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "diracq/dsl.hpp"

namespace {

int check(const std::string& file, const std::string& suite, bool json, std::uint64_t seed, int trials, bool timing) {
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        std::cerr << file << ": cannot open\n";
        return 2;
    }
    std::stringstream buf;
    buf << in.rdbuf();

    diracq::Model m;
    try {
        m = diracq::parse_model(buf.str(), std::filesystem::path(file).stem().string());
    } catch (const diracq::ParseError& e) {
        std::cerr << file << ":" << e.line << ":" << e.column << ": error: " << e.message << "\n";
        return 2;
    } catch (const diracq::Error& e) {
        std::cerr << file << ": error: " << e.what() << "\n";
        return 2;
    }

    std::vector<std::string> suites;
    if (suite == "all")
        suites = diracq::suite_names();
    else
        suites.push_back(suite);

    diracq::RunOptions opt;
    opt.seed = seed;
    opt.trials = trials;
    opt.timing = timing;
    diracq::Report r = diracq::run_checks(m, suites, opt);
    std::cout << (json ? r.json() : r.text());
    return r.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Verification suites for Dirac structures and their quantization data"};
    app.require_subcommand(1);

    std::string file, suite = "all";
    bool json = false, timing = false;
    std::uint64_t seed = 7;
    int trials = 20;

    CLI::App* chk = app.add_subcommand("check", "Parse a model file and run its check suites");
    chk->add_option("file", file, "Model file")->required();
    std::vector<std::string> choices = diracq::suite_names();
    choices.push_back("all");
    chk->add_option("--suite", suite, "Suite to run")->check(CLI::IsMember(choices));
    chk->add_flag("--json", json, "Emit the JSON report");
    chk->add_option("--seed", seed, "Random seed");
    chk->add_option("--trials", trials, "Random trials per property")->check(CLI::PositiveNumber);
    chk->add_flag("--timing", timing, "Record per-check wall time");

    CLI::App* fmt = app.add_subcommand("format", "Pretty-print a model file");
    fmt->add_option("file", file, "Model file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    if (*chk) return check(file, suite, json, seed, trials, timing);

    std::ifstream in(file, std::ios::binary);
    if (!in) {
        std::cerr << file << ": cannot open\n";
        return 2;
    }
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        std::cout << diracq::print_model(diracq::parse_model(buf.str(), std::filesystem::path(file).stem().string()));
    } catch (const diracq::ParseError& e) {
        std::cerr << file << ":" << e.line << ":" << e.column << ": error: " << e.message << "\n";
        return 2;
    }
    return 0;
}
