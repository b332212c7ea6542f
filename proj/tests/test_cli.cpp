#include <catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "surfchaos/config.hpp"
#include "surfchaos/errors.hpp"
#include "surfchaos/output.hpp"

using namespace surfchaos;
using Catch::Matchers::WithinRel;
namespace fs = std::filesystem;

namespace {

std::string cli() {
    const char* p = std::getenv("SURFCHAOS_CLI");
    return p ? p : "surfchaos";
}

fs::path scratch(const std::string& name) {
    const auto d = fs::temp_directory_path() / ("surfchaos_cli_" + name);
    fs::remove_all(d);
    return d;
}

int run(const std::string& args) {
    const int rc = std::system((cli() + " " + args + " > /dev/null 2>&1").c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::vector<std::vector<std::string>> rows(const std::string& csv) {
    std::vector<std::vector<std::string>> out;
    std::stringstream ss(csv);
    std::string line;
    while (std::getline(ss, line)) {
        out.emplace_back();
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) out.back().push_back(cell);
    }
    return out;
}

}  // namespace

TEST_CASE("range and list parsing") {
    CHECK(parse_range("5") == std::vector<double>{5});
    CHECK(parse_range("4:6:0.5") == std::vector<double>{4, 4.5, 5, 5.5, 6});
    CHECK(parse_range("0.1:0.3:0.1").size() == 3);
    CHECK(parse_list("1, 0.5,0.25") == std::vector<double>{1, 0.5, 0.25});
    CHECK_THROWS_AS(parse_range("6:4:1"), ConfigError);
    CHECK_THROWS_AS(parse_range("4:6:0"), ConfigError);
    CHECK_THROWS_AS(parse_range("4:6"), ConfigError);
    CHECK_THROWS_AS(parse_list("1,x"), ConfigError);
    CHECK_THROWS_AS(parse_list(""), ConfigError);
}

TEST_CASE("config file parsing") {
    const auto c = parse_config("[model]\nnuI0 = 5:6:1\nepsilon = 0.5\n[run]\nkmax = 3\n[physical]\nr = 0.05\n");
    CHECK(c.nuI0 == std::vector<double>{5, 6});
    CHECK(c.epsilon == std::vector<double>{0.5});
    CHECK(c.kmax == 3);
    CHECK(c.physical.corrugation.cosines == std::vector<double>{0.05});
    CHECK(c.physical.corrugation.sines == std::vector<double>{0.0});
    CHECK_THROWS_AS(parse_config("[run]\nspeed = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[extra]\nx = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[run]\nkmax = 2.5\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[run\nkmax = 2\n"), ConfigError);
    RunConfig bad;
    bad.k = 7;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("csv numbers carry 17 significant digits") {
    CHECK(csv_number(0.1) == "1.0000000000000001e-01");
    Csv c({"a", "b"});
    c.row({1.0, -2.5});
    CHECK(c.str() == "a,b\n1.0000000000000000e+00,-2.5000000000000000e+00\n");
    CHECK_THROWS(c.row({1.0}));
}

TEST_CASE("artifacts are committed with a manifest") {
    const auto d = scratch("artifacts");
    Artifacts a;
    a.add("x.csv", "a\n1\n");
    RunManifest m;
    m.command = "test";
    a.commit(d.string(), m);
    CHECK(slurp(d / "x.csv") == "a\n1\n");
    const auto j = nlohmann::json::parse(slurp(d / "manifest.json"));
    CHECK(j["outputs"][0]["name"] == "x.csv");
    char hex[9];
    std::snprintf(hex, sizeof hex, "%08x", crc32("a\n1\n"));
    CHECK(j["outputs"][0]["crc32"] == hex);
    for (const auto& e : fs::directory_iterator(d)) CHECK(e.path().filename().string().front() != '.');
}

TEST_CASE("melnikov subcommand") {
    const auto d = scratch("melnikov");
    REQUIRE(run("melnikov --nuI0 5 --kmax 2 --out " + d.string()) == 0);
    const auto r = rows(slurp(d / "melnikov.csv"));
    REQUIRE(r.size() == 3);
    CHECK(r[0] == std::vector<std::string>{"k", "nuI0", "closed_re", "closed_im", "quad_re", "quad_im", "rel_err"});
    CHECK_THAT(std::stod(r[1][2]), WithinRel(-9.52529e-4, 1e-4));
    CHECK(std::stod(r[1][6]) < 1e-8);
    CHECK(std::stod(r[2][6]) < 1e-8);
    for (const auto& cell : r[1]) CHECK(cell.size() >= 22);
}

TEST_CASE("reruns are byte identical") {
    const auto a = scratch("rerun_a"), b = scratch("rerun_b");
    REQUIRE(run("melnikov --nuI0 4:6:1 --kmax 3 --out " + a.string()) == 0);
    REQUIRE(run("melnikov --nuI0 4:6:1 --kmax 3 --out " + b.string()) == 0);
    CHECK(slurp(a / "melnikov.csv") == slurp(b / "melnikov.csv"));
    const auto ja = nlohmann::json::parse(slurp(a / "manifest.json"));
    const auto jb = nlohmann::json::parse(slurp(b / "manifest.json"));
    CHECK(ja["outputs"] == jb["outputs"]);
    CHECK(ja["config"] == jb["config"]);
}

TEST_CASE("flags override the config file") {
    const auto d = scratch("precedence");
    fs::create_directories(d);
    std::ofstream(d / "run.ini") << "[model]\nnuI0 = 6\n[run]\nkmax = 3\n";
    const auto out = d / "out";
    REQUIRE(run("melnikov --config " + (d / "run.ini").string() + " --kmax 1 --out " + out.string()) == 0);
    const auto r = rows(slurp(out / "melnikov.csv"));
    REQUIRE(r.size() == 2);
    CHECK(std::stod(r[1][1]) == 6.0);
    const auto j = nlohmann::json::parse(slurp(out / "manifest.json"));
    CHECK(j["config"]["run.kmax"] == "1");
    CHECK(j["config"]["model.nuI0"] == "6");
}

TEST_CASE("bad input exits with status 2 and writes nothing") {
    const auto d = scratch("bad");
    CHECK(run("melnikov --bogus --out " + d.string()) == 2);
    CHECK(run("melnikov --kmax 0 --out " + d.string()) == 2);
    CHECK(run("melnikov --nuI0 6:4:1 --out " + d.string()) == 2);
    CHECK(run("sweep --nuI0 4:5:1 --out " + d.string()) == 2);
    CHECK(run("--out " + d.string()) == 2);
    CHECK_FALSE(fs::exists(d));
    const auto cfg = scratch("bad_cfg");
    fs::create_directories(cfg);
    std::ofstream(cfg / "bad.ini") << "[run]\nwarp = 9\n";
    CHECK(run("melnikov --config " + (cfg / "bad.ini").string() + " --out " + d.string()) == 2);
    CHECK(run("melnikov --config " + (cfg / "missing.ini").string() + " --out " + d.string()) == 2);
    CHECK_FALSE(fs::exists(d));
}
