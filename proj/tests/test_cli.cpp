#include "doctest.h"

#include <array>
#include <cstdio>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include "json.hpp"

namespace {

struct Run {
    int code;
    std::string out;
};

Run run(const std::string& args) {
    std::string cmd = std::string(DIRACQ_CLI) + " " + args + " 2>&1";
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p);
    std::string out;
    std::array<char, 4096> buf;
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) out.append(buf.data(), n);
    int status = pclose(p);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string model(const char* name) { return std::string(DIRACQ_MODELS_DIR) + "/" + name; }

}  // namespace

TEST_CASE("exit codes") {
    CHECK(run("check " + model("standard_r2.dq")).code == 0);
    CHECK(run("check " + model("perturbed_sigma.dq")).code == 1);
    CHECK(run("check " + model("cech_integrality.dq")).code == 1);
    CHECK(run("check " + model("perturbed_sigma.dq") + " --suite dirac").code == 0);
    CHECK(run("check /nonexistent/model.dq").code == 2);
    CHECK(run("check " + model("standard_r2.dq") + " --suite nope").code == 2);
    CHECK(run("").code == 2);
}

TEST_CASE("parse errors carry a location") {
    char path[] = "/tmp/diracq_cli_XXXXXX";
    int fd = mkstemp(path);
    REQUIRE(fd >= 0);
    const std::string text = "chart M dim 2 coords q p\nscalar f = q^2 + k*(p)\n";
    REQUIRE(write(fd, text.data(), text.size()) == static_cast<ssize_t>(text.size()));
    close(fd);
    Run r = run(std::string("check ") + path);
    std::remove(path);
    CHECK(r.code == 2);
    CHECK(r.out.find(":2:18: error: unknown symbol k") != std::string::npos);
}

TEST_CASE("JSON report schema") {
    Run r = run("check " + model("perturbed_sigma.dq") + " --json --seed 3 --trials 4");
    CHECK(r.code == 1);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["model"] == "perturbed_sigma");
    CHECK(j["seed"] == 3);
    REQUIRE(j["checks"].is_array());
    bool failed = false;
    for (const auto& c : j["checks"]) {
        CHECK(c["name"].is_string());
        CHECK(c["witness"].is_null() != (c["status"] != "pass"));
        CHECK(c["millis"] == 0);
        if (c["name"] == "prequant.condition") failed = c["status"] == "fail";
    }
    CHECK(failed);
}

TEST_CASE("same seed, same bytes") {
    const std::string args = "check " + model("standard_r2.dq") + " --suite all --json --seed 7";
    Run a = run(args), b = run(args);
    CHECK(a.out == b.out);
    CHECK(run(args + " --timing").code == 0);
}
