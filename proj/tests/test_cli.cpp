#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
    const std::string cmd = std::string(TRIEIG_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("trieig_cli_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

} // namespace

TEST_CASE("perron subcommand writes curve and optimum") {
    const fs::path d = fresh_dir("perron");
    REQUIRE(run_cli("--out " + d.string() + " perron --samples 250") == 0);
    CHECK(fs::exists(d / "perron_curve.csv"));
    const std::string j = slurp(d / "perron.json");
    CHECK(j.find("\"alpha_star\"") != std::string::npos);
    CHECK(j.find("interior-max") != std::string::npos);
}

TEST_CASE("floquet subcommand") {
    const fs::path d = fresh_dir("floquet");
    REQUIRE(run_cli("--out " + d.string() + " floquet --control square --theta 1 "
                    "--eps-sweep -0.2 0 0.2")
            == 0);
    CHECK(fs::exists(d / "floquet.json"));
    CHECK(fs::exists(d / "floquet_eps_sweep.csv"));
}

TEST_CASE("hypotheses subcommand") {
    const fs::path d = fresh_dir("hypo");
    REQUIRE(run_cli("--out " + d.string() + " hypotheses") == 0);
    const std::string j = slurp(d / "hypotheses.json");
    CHECK(j.find("\"all_pass\": true") != std::string::npos);
    CHECK(fs::exists(d / "h4_criterion.csv"));
}

TEST_CASE("config file plumbing and exit codes") {
    const fs::path d = fresh_dir("cfg");

    SECTION("valid config accepted") {
        const fs::path cfgp = d / "config.json";
        std::ofstream(cfgp) << R"({"model":{"kind":"running-example","tau1":0.5,"tau2":5},)"
                            << R"("bounds":{"a":1,"A":6},)"
                            << R"("numerics":{"dy":0.02,"dt":0.001,"T":2}})";
        CHECK(run_cli("--config " + cfgp.string() + " --out " + d.string()
                      + " perron --samples 200")
              == 0);
    }

    SECTION("malformed config exits 2") {
        const fs::path bad = d / "bad.json";
        std::ofstream(bad) << "{ not json";
        CHECK(run_cli("--config " + bad.string() + " perron") == 2);
    }

    SECTION("invalid model exits 2") {
        const fs::path bad = d / "badmodel.json";
        std::ofstream(bad) << R"({"model":{"kind":"running-example","tau1":-1}})";
        CHECK(run_cli("--config " + bad.string() + " perron") == 2);
    }

    SECTION("CFL violation exits 5") {
        const fs::path cfgp = d / "cfl.json";
        std::ofstream(cfgp) << R"({"numerics":{"dy":0.05,"dt":0.1,"T":2}})";
        CHECK(run_cli("--config " + cfgp.string() + " --out " + d.string() + " hjb") == 5);
    }
}

TEST_CASE("determinism: identical config and seed give identical bytes") {
    const fs::path d1 = fresh_dir("det1");
    const fs::path d2 = fresh_dir("det2");
    const std::string args = "--seed 7 geometry --probe 3";
    // coarser, faster settings via config
    const fs::path cfgp = fs::temp_directory_path() / "trieig_det_cfg.json";
    std::ofstream(cfgp) << R"({"numerics":{"delta":0.1,"seed":7}})";
    REQUIRE(run_cli("--config " + cfgp.string() + " --out " + d1.string() + " " + args) == 0);
    REQUIRE(run_cli("--config " + cfgp.string() + " --out " + d2.string() + " " + args) == 0);
    for (const char* f : {"phi0.csv", "z0_gamma_a_A.csv", "z_minus.csv", "entry_times.csv",
                          "geometry.json"}) {
        CHECK(slurp(d1 / f) == slurp(d2 / f));
        CHECK_FALSE(slurp(d1 / f).empty());
    }
}
