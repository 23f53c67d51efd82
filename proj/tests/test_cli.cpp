// Drives the built command-line binary and checks outputs plus the exit-code
// contract on a scripted matrix of good and bad invocations.
#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace {

std::string g_binary;

struct RunResult {
    int code;
    std::string out;
};

RunResult run(const std::string& args) {
    const std::string cmd = g_binary + " " + args + " 2>/tmp/locc_cli_err.txt";
    std::array<char, 4096> buf{};
    std::string out;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    size_t got;
    while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), got);
    const int status = pclose(pipe);
    return {WEXITSTATUS(status), out};
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string tok;
    while (std::getline(in, tok, sep)) out.push_back(tok);
    return out;
}

}  // namespace

TEST_CASE("bound: optimal run emits one record and exits 0") {
    RunResult r = run("bound --ensemble trine --method global --eps 1e-8");
    CHECK(r.code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["kind"] == "upper");
    CHECK(j["status"] == "optimal");
    CHECK(std::abs(j["value"].get<double>() - 0.9714045) < 1e-5);
    CHECK(j["gap"].get<double>() < 1e-6);
    // all record fields present
    for (const char* f : {"ensemble", "method", "m", "k", "direction", "kind", "value", "gap",
                          "wall_time_s", "seed"})
        CHECK(j.contains(f));
}

TEST_CASE("bound: ppt on the ququart ensemble is perfect") {
    RunResult r = run("bound --ensemble ququart --method ppt --eps 1e-7");
    CHECK(r.code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(std::abs(j["value"].get<double>() - 1.0) < 1e-5);
}

TEST_CASE("exit codes for bad invocations") {
    CHECK(run("bound --method bogus").code == 64);
    CHECK(run("nonsense").code == 64);
    CHECK(run("bound --ensemble file:/nonexistent.json --method global").code == 1);
    CHECK(run("certify --certificate /nonexistent.json --ensemble trine --variant 1r").code ==
          65);
}

TEST_CASE("seesaw: seeded runs are identical and strategies certify") {
    const std::string args =
        "seesaw --ensemble trine --variant 1r --m 2 --restarts 3 --seed 0 "
        "--dump-strategy /tmp/locc_cli_strategy.json";
    RunResult a = run(args);
    RunResult b = run(args);
    CHECK(a.code == 0);
    auto ja = nlohmann::json::parse(a.out);
    auto jb = nlohmann::json::parse(b.out);
    CHECK(ja["value"].get<double>() == jb["value"].get<double>());
    CHECK(ja["kind"] == "lower");

    RunResult c = run(
        "certify --certificate /tmp/locc_cli_strategy.json --ensemble trine --variant 1r "
        "--tol 1e-8");
    CHECK(c.code == 0);
    auto jc = nlohmann::json::parse(c.out);
    CHECK(jc["verdict"] == "pass");
}

TEST_CASE("certify: corrupted certificate fails with exit 3") {
    run("seesaw --ensemble trine --variant 1r --m 2 --restarts 1 --seed 1 "
        "--dump-strategy /tmp/locc_cli_cert.json");
    auto j = nlohmann::json::parse(std::ifstream("/tmp/locc_cli_cert.json"));
    j["entries"][0]["op"][0][0][0] = 5.0;  // corrupt the normalization
    std::ofstream("/tmp/locc_cli_bad.json") << j.dump();
    RunResult r = run(
        "certify --certificate /tmp/locc_cli_bad.json --ensemble trine --variant 1r --tol 1e-6");
    CHECK(r.code == 3);

    // missing index tuple: schema error
    j["entries"].erase(0);
    std::ofstream("/tmp/locc_cli_missing.json") << j.dump();
    RunResult r2 = run(
        "certify --certificate /tmp/locc_cli_missing.json --ensemble trine --variant 1r");
    CHECK(r2.code == 65);
}

TEST_CASE("sweep: header is bit-exact and rows validate as records") {
    RunResult r = run("sweep --tau-grid 0:0.5:3 --methods ppt,analytic --m 2 --k 1 "
                      "--with-tangle --eps 1e-7");
    CHECK(r.code == 0);
    auto lines = split(r.out, '\n');
    REQUIRE(lines.size() >= 2);
    CHECK(lines[0] == "tau,method,m,k,direction,kind,value,gap");
    // 3 tau points x (1 ppt + 2 analytic + 1 tangle) rows
    int rows = 0;
    for (size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        ++rows;
        auto cells = split(lines[i], ',');
        REQUIRE(cells.size() == 8);
        // every row revalidates through the record schema
        nlohmann::json j;
        j["tau"] = std::stod(cells[0]);
        j["method"] = cells[1];
        j["m"] = cells[2].empty() ? nlohmann::json(nullptr) : nlohmann::json(std::stoi(cells[2]));
        j["k"] = cells[3].empty() ? nlohmann::json(nullptr) : nlohmann::json(std::stoi(cells[3]));
        j["direction"] = cells[4];
        j["kind"] = cells[5];
        j["value"] = std::stod(cells[6]);
        j["gap"] = std::stod(cells[7]);
        CHECK((j["kind"] == "upper" || j["kind"] == "lower" || j["kind"] == "analytic"));
        const double v = j["value"].get<double>();
        CHECK(v >= -1e-9);
        CHECK(v <= 1.0 + 1e-6);
    }
    CHECK(rows == 12);
    // the tau=0 ppt row sits at (1+cos 0)/2 = 1
    bool found = false;
    for (size_t i = 1; i < lines.size(); ++i) {
        auto cells = split(lines[i], ',');
        if (cells.size() == 8 && cells[0] == "0" && cells[1] == "ppt") {
            CHECK(std::abs(std::stod(cells[6]) - 1.0) < 1e-4);
            found = true;
        }
    }
    CHECK(found);
}

TEST_CASE("angles on the command line are given in units of pi") {
    RunResult r = run("bound --ensemble bell:0.25,0.5,0.5 --method global --eps 1e-7");
    CHECK(r.code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(std::abs(j["value"].get<double>() - 1.0) < 1e-5);
}

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: test_cli <path-to-locc_bounds>\n");
        return 2;
    }
    g_binary = argv[1];
    doctest::Context ctx;
    ctx.applyCommandLine(1, argv);
    return ctx.run();
}
