#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "doctest.h"
#include "maxlow/cli.hpp"

using namespace maxlow;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run cli(std::vector<std::string> args) {
    args.insert(args.begin(), "maxlow");
    std::vector<const char*> argv;
    for (auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path temp_path(const std::string& name) { return fs::temp_directory_path() / ("maxlow_test_" + name); }

const std::string sample = std::string(MAXLOW_DATA_DIR) + "/meshes/sample_unstructured.m2d";
const fs::path golden = fs::path(MAXLOW_TESTS_DIR) / "golden";

}  // namespace

TEST_CASE("configuration errors exit with 2 and write nothing") {
    fs::path out = temp_path("k0.json");
    fs::remove(out);
    Run r = cli({"bounds", "-k", "0", "--out", out.string()});
    CHECK(r.code == exit_config_error);
    CHECK(r.out.empty());
    CHECK_FALSE(fs::exists(out));
    CHECK(r.err.find("k") != std::string::npos);

    r = cli({"evp", "--mesh", "/nonexistent/mesh.m2d", "--out", out.string()});
    CHECK(r.code == exit_config_error);
    CHECK(r.err.find("cannot open mesh file") != std::string::npos);
    CHECK_FALSE(fs::exists(out));

    CHECK(cli({"bounds", "--levels", "3..1"}).code == exit_config_error);
    CHECK(cli({"bounds", "--levels", "x"}).code == exit_config_error);
    CHECK(cli({"bounds", "--domain", "circle"}).code == exit_config_error);
    CHECK(cli({"bounds", "--c1div", "-1"}).code == exit_config_error);
    CHECK(cli({"bounds", "--mesh", sample, "--domain", "square"}).code == exit_config_error);
    CHECK(cli({"frobnicate"}).code == exit_config_error);
    CHECK(cli({}).code == exit_config_error);
}

TEST_CASE("malformed mesh files are configuration errors with line numbers") {
    fs::path bad = temp_path("bad.m2d");
    {
        std::ofstream o(bad);
        o << "mesh2d v1\n3 0 1\n0 0\n1 0\n0 1\n0 1 7\n";
    }
    Run r = cli({"kappa", "--mesh", bad.string()});
    CHECK(r.code == exit_config_error);
    CHECK(r.err.find("line 6") != std::string::npos);
    fs::remove(bad);
}

TEST_CASE("--out writes the same bytes as stdout") {
    fs::path out = temp_path("kappa.csv");
    Run a = cli({"kappa", "--levels", "1..2", "--format", "csv"});
    Run b = cli({"kappa", "--levels", "1..2", "--format", "csv", "--out", out.string()});
    CHECK(a.code == exit_ok);
    CHECK(b.code == exit_ok);
    CHECK(b.out.empty());
    CHECK(slurp(out) == a.out);
    fs::remove(out);
}

TEST_CASE("JSON documents follow the versioned schemas") {
    using nlohmann::json;
    json b = json::parse(cli({"bounds", "--levels", "1", "-k", "2", "--format", "json"}).out);
    CHECK(b["schema"] == "maxlow.bounds");
    CHECK(b["schema_version"] == 1);
    CHECK(b["complete"] == true);
    for (const char* key : {"level", "vertices", "edges", "triangles", "h_max", "h_over_sqrt2", "kappa", "c_hat",
                            "C1_div", "C_OL", "m_hat", "lambda", "lower_bound", "status"})
        CHECK_MESSAGE(b["rows"][0].contains(key), key);
    CHECK(b["rows"][0]["lambda"].size() == 2);

    json c = json::parse(cli({"constants", "--levels", "2", "--format", "json"}).out);
    CHECK(c["schema"] == "maxlow.constants");
    for (const char* key : {"tilde_c", "C1yT", "C_QT", "C_S", "c_M", "C_M1", "C1_Curl", "C2_Curl", "C1_div", "C_OL", "C_RD"})
        CHECK_MESSAGE(c["rows"][0].contains(key), key);
    CHECK(c["rows"][0]["C_OL"] == 13);

    json e = json::parse(cli({"evp", "--levels", "1", "-k", "3", "--format", "json"}).out);
    CHECK(e["schema"] == "maxlow.evp");
    CHECK(e["rows"][0]["lambda"].size() == 3);
    CHECK_FALSE(e["rows"][0].contains("lower_bound"));

    json k = json::parse(cli({"kappa", "--levels", "1", "--format", "json"}).out);
    CHECK(k["schema"] == "maxlow.kappa");
    CHECK(k["rows"][0]["kappa"].get<double>() == doctest::Approx(0.1443375687));
}

TEST_CASE("validate reports properties and fails on an injected fault") {
    using nlohmann::json;
    Run ok = cli({"validate", "--levels", "1", "--samples", "20", "--format", "json"});
    CHECK(ok.code == exit_ok);
    json j = json::parse(ok.out);
    CHECK(j["schema"] == "maxlow.validate");
    CHECK(j["all_pass"] == true);
    CHECK(j["levels"][0]["properties"].size() >= 10);

    Run bad = cli({"validate", "--levels", "1", "--samples", "20", "--format", "json", "--inject-fault", "curl-sign"});
    CHECK(bad.code == exit_validation_failed);
    json jb = json::parse(bad.out);
    CHECK(jb["all_pass"] == false);
    bool sign_failed = false;
    for (const auto& p : jb["levels"][0]["properties"])
        if (p["name"] == "dual_sign_audit") sign_failed = p["pass"] == false;
    CHECK(sign_failed);
}

TEST_CASE("markdown tables") {
    Run r = cli({"bounds", "--levels", "1", "-k", "2", "--format", "md"});
    CHECK(r.code == exit_ok);
    CHECK(r.out.rfind("| h/√2 | κ_h | M̂_h |", 0) == 0);
    CHECK(r.out.find("λ_h^(2)") != std::string::npos);
}

TEST_CASE("outputs match the golden files") {
    struct Case {
        std::vector<std::string> args;
        const char* file;
    };
    std::vector<Case> cases = {
        {{"bounds", "--levels", "1..2", "-k", "2", "--format", "json"}, "bounds_square_1_2.json"},
        {{"bounds", "--domain", "lshape", "--refinement", "longest-edge", "--levels", "1", "-k", "3", "--format", "csv"},
         "bounds_lshape_le_1.csv"},
        {{"constants", "--levels", "2", "--format", "csv"}, "constants_square_2.csv"},
        {{"evp", "--mesh", sample, "-k", "3", "--format", "csv"}, "evp_sample.csv"},
        {{"kappa", "--levels", "1..3", "--format", "md"}, "kappa_square_1_3.md"},
    };
    for (const auto& c : cases) {
        Run r = cli(c.args);
        CHECK(r.code == exit_ok);
        CHECK_MESSAGE(r.out == slurp(golden / c.file), c.file);
    }
}

TEST_CASE("thread count does not change the output") {
    auto args = std::vector<std::string>{"bounds", "--levels", "1..2", "-k", "2", "--format", "json"};
    Run one = cli(args);
    args.insert(args.end(), {"--threads", "3"});
    Run three = cli(args);
    CHECK(one.out == three.out);
}
