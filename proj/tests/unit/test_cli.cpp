#include "vbr/app/commands.hpp"
#include "vbr/app/report.hpp"
#include "vbr/app/reproduce.hpp"
#include "vbr/error.hpp"
#include "vbr/resum.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace vbr;
using namespace vbr::app;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args) {
    args.insert(args.begin(), "vbr");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    Run r;
    r.code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("vbr_cli_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("scan of the prototype at N=2") {
    const auto r = cli({"scan", "--builtin", "prototype", "--N", "2", "--lambda0", "1", "--json"});
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    REQUIRE(j["records"].size() == 1);
    CHECK(j["records"][0]["p"].get<double>() == doctest::Approx(2.65).epsilon(0.05));
    CHECK(j["records"][0]["kind"] == "global_min");
    CHECK(j["provenance"]["version"] == VBR_VERSION);

    const auto text = cli({"scan", "--builtin", "prototype", "--N", "2"});
    CHECK(text.code == 0);
    CHECK(text.out.find("global_min") != std::string::npos);
}

TEST_CASE("eval of the geometric series") {
    const auto r = cli({"eval", "--builtin", "geometric", "--N", "4", "--lambda", "0.8", "--p", "5", "--json"});
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(j["evaluation"]["value"].get<double>() == doctest::Approx(0.512).epsilon(0.01));
    CHECK(j["evaluation"]["terms"].size() == 5);
}

TEST_CASE("eval of an auxiliary series reports the reconstructed curve") {
    const auto r = cli({"eval", "--builtin", "beta_polymer", "--aux", "--N", "6", "--lambda", "1.4", "--p", "0.25",
                        "--json"});
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(j["curve"].get<double>() == doctest::Approx(1.4 * j["evaluation"]["value"].get<double>()));
}

TEST_CASE("sequence of an all-positive series has no extrema") {
    const auto dir = scratch("positive");
    {
        std::ofstream f(dir / "my_series.json");
        f << R"({"name":"positive","coefficients":[1, 1, 2, 6, 24]})";
    }
    const auto r = cli({"sequence", "--file", (dir / "my_series.json").string(), "--N-range", "2..4", "--json"});
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(j["verdict"]["direction"] == "inconclusive");
    CHECK(j["verdict"]["reason"] == "no extrema");
    for (const auto& e : j["sequence"]["entries"]) CHECK(e["solution"].is_null());
}

TEST_CASE("sequence and diagnose on builtins") {
    auto r = cli({"sequence", "--builtin", "euler_heisenberg", "--N-range", "2..7", "--json"});
    REQUIRE(r.code == 0);
    auto j = json::parse(r.out);
    CHECK(j["verdict"]["direction"] == "upper_bound");
    CHECK_FALSE(j["verdict"]["caveats"].empty());
    CHECK(j["scan"]["lambda0"].get<double>() == 10.0);

    r = cli({"sequence", "--builtin", "prototype", "--N-range", "2..7", "--rule", "fixed_point_branch", "--json"});
    REQUIRE(r.code == 0);
    j = json::parse(r.out);
    CHECK(j["fixed_point"]["limit_estimate"].get<double>() == doctest::Approx(1.05).epsilon(0.05));

    r = cli({"diagnose", "--builtin", "pv_model", "--N-range", "2..6", "--json"});
    REQUIRE(r.code == 0);
    j = json::parse(r.out);
    CHECK(j["diagnostics"]["cn"]["strictly_decreasing"] == true);
    CHECK(j["diagnostics"]["magic_sign_consistent"] == true);
}

TEST_CASE("exit codes") {
    SUBCASE("config errors") {
        CHECK(cli({"scan", "--N", "2"}).code == exit_code::config);
        CHECK(cli({"scan", "--builtin", "prototype", "--file", "x.json", "--N", "2"}).code == exit_code::config);
        CHECK(cli({"scan", "--builtin", "prototype"}).code == exit_code::config);
        CHECK(cli({"scan", "--builtin", "nope", "--N", "2"}).code == exit_code::config);
        CHECK(cli({"sequence", "--builtin", "prototype", "--N-range", "4..2"}).code == exit_code::config);
        CHECK(cli({"sequence", "--builtin", "prototype", "--N-range", "2..x"}).code == exit_code::config);
        CHECK(cli({"sequence", "--builtin", "beta_polymer", "--N-range", "2..9"}).code == exit_code::config);
        CHECK(cli({"sequence", "--builtin", "prototype", "--rule", "nearest"}).code == exit_code::config);
        CHECK(cli({"scan", "--builtin", "prototype", "--N", "2", "--p-min", "5", "--p-max", "1"}).code ==
              exit_code::config);
        CHECK(cli({"eval", "--file", "/nonexistent/series.json", "--N", "1", "--lambda", "1", "--p", "1"}).code ==
              exit_code::config);
        CHECK(cli({"reproduce", "sec99"}).code == exit_code::config);
        CHECK(cli({}).code == exit_code::config);
    }
    SUBCASE("numerical failure") {
        const auto r = cli({"sequence", "--builtin", "geometric", "--rule", "fixed_point_branch"});
        CHECK(r.code == exit_code::numerical);
        CHECK(r.err.find("no fixed point detected") != std::string::npos);
    }
    SUBCASE("help") { CHECK(cli({"--help"}).code == exit_code::ok); }
}

TEST_CASE("export writes curves and a series that reads back identically") {
    const auto dir = scratch("export");
    const auto r = cli({"export", "--builtin", "prototype", "--N-range", "2..4", "--points", "20", "--out",
                        dir.string()});
    REQUIRE(r.code == 0);
    const auto csv = slurp(dir / "curves.csv");
    CHECK(csv.rfind("lambda,S_2,S_3,S_4,exact\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 21);

    const auto reread = load_series_file((dir / "series.csv").string());
    const auto original = builtin_series(BuiltinModel::prototype, 7);
    REQUIRE(reread.order() == original.order());
    for (int N : {2, 5, 7}) {
        for (double l : {0.3, 1.0}) {
            for (double p : {0.7, 4.0}) {
                CHECK(resum_eval(reread, N, l, p).value == resum_eval(original, N, l, p).value);
            }
        }
    }
}

TEST_CASE("export of a figure dataset") {
    const auto dir = scratch("figure");
    const auto r = cli({"export", "--figure", "fig1a", "--points", "10", "--out", dir.string()});
    REQUIRE(r.code == 0);
    const auto csv = slurp(dir / "fig1a.csv");
    CHECK(csv.rfind("lambda,hatS_2,hatS_3,hatS_4,hatS_5,exact\n", 0) == 0);
    CHECK_FALSE(fs::exists(dir / "fig1b.csv"));
    CHECK(cli({"export", "--figure", "fig9"}).code == exit_code::config);
}

TEST_CASE("output directory from the environment") {
    const auto dir = scratch("env");
    ::setenv("VBR_OUTPUT_DIR", dir.string().c_str(), 1);
    const auto r = cli({"scan", "--builtin", "geometric", "--N", "3"});
    ::unsetenv("VBR_OUTPUT_DIR");
    REQUIRE(r.code == 0);
    CHECK(fs::exists(dir / "scan.json"));

    const auto other = scratch("env_flag");
    ::setenv("VBR_OUTPUT_DIR", dir.string().c_str(), 1);
    CHECK(cli({"scan", "--builtin", "geometric", "--N", "2", "--out", other.string()}).code == 0);
    ::unsetenv("VBR_OUTPUT_DIR");
    CHECK(fs::exists(other / "scan.json"));
}

TEST_CASE("identical configs give byte-identical summaries") {
    const auto a = scratch("det_a");
    const auto b = scratch("det_b");
    for (const auto& d : {a, b}) {
        REQUIRE(cli({"sequence", "--builtin", "pv_model", "--N-range", "2..5", "--out", d.string()}).code == 0);
    }
    CHECK(slurp(a / "sequence.json") == slurp(b / "sequence.json"));
    CHECK(slurp(a / "sequence.json").find("timestamp") == std::string::npos);
}

TEST_CASE("reproduce pass/fail table and exit status") {
    const auto dir = scratch("reproduce");
    auto r = cli({"reproduce", "sec31", "--out", dir.string()});
    CHECK(r.code == exit_code::ok);
    CHECK(r.out.find("FAIL") == std::string::npos);
    CHECK(fs::exists(dir / "reproduce_sec31.json"));
    for (const char* f : {"fig1a.csv", "fig1b.csv", "fig1c.csv"}) CHECK(fs::exists(dir / f));

    r = cli({"reproduce", "sec32", "--out", dir.string()});
    CHECK(r.code == exit_code::acceptance);
    CHECK(r.err.find("sec32:p_2") != std::string::npos);
    const auto summary = json::parse(slurp(dir / "reproduce_sec32.json"));
    CHECK(summary["pass"] == false);
    CHECK(summary["failing_rows"] == json::array({"sec32:p_2"}));

    const auto bad = dir / "bad_manifest.json";
    {
        std::ofstream f(bad);
        f << R"({"rows":[{"section":"sec31","quantity":"p_2","mode":"approximately","expected":2.65}]})";
    }
    CHECK(cli({"reproduce", "sec31", "--manifest", bad.string()}).code == exit_code::config);
}

TEST_CASE("manifest") {
    const auto m = load_manifest(std::nullopt);
    CHECK(m.rows.size() > 50);
    for (const auto& id : section_ids()) {
        CHECK(std::any_of(m.rows.begin(), m.rows.end(), [&](const ManifestRow& r) { return r.section == id; }));
    }
    CHECK_THROWS_AS(parse_manifest("{}"), ParseError);
    CHECK_THROWS_AS(parse_manifest("not json"), ParseError);
    CHECK_THROWS_AS(parse_manifest(R"({"rows":[{"section":"a","quantity":"b","mode":"absolute","expected":1,
                                      "tolerance":-1}]})"),
                    ParseError);
}

TEST_CASE("compare_row modes") {
    ManifestRow row{"s", "q", "q", ToleranceMode::absolute, 1.0, 0.1};
    CHECK(compare_row(row, 1.05).pass);
    CHECK_FALSE(compare_row(row, 1.2).pass);
    CHECK_FALSE(compare_row(row, nullptr).pass);
    CHECK_FALSE(compare_row(row, "1.0").pass);
    row.mode = ToleranceMode::relative;
    row.expected = -10.0;
    CHECK(compare_row(row, -10.9).pass);
    CHECK_FALSE(compare_row(row, -11.1).pass);
    row.mode = ToleranceMode::equals;
    row.expected = "inflexion";
    CHECK(compare_row(row, "inflexion").pass);
    CHECK_FALSE(compare_row(row, "local_max").pass);
    row.expected = 3;
    CHECK(compare_row(row, 3u).pass);
    row.mode = ToleranceMode::at_most;
    row.expected = 1e-10;
    CHECK(compare_row(row, 0.0).pass);
    CHECK_FALSE(compare_row(row, 1e-9).pass);
    row.mode = ToleranceMode::report;
    CHECK(compare_row(row, nullptr).pass);
}

TEST_CASE("atomic writes and curve sets") {
    const auto dir = scratch("atomic");
    const auto target = dir / "nested" / "file.txt";
    write_file_atomic(target, "one");
    write_file_atomic(target, "two");
    CHECK(slurp(target) == "two");
    CHECK_FALSE(fs::exists(target.string() + ".tmp"));

    CurveSet set;
    set.lambdas = uniform_grid(1.0, 4);
    CHECK(set.lambdas.back() == 1.0);
    set.add("sq", [](double l) { return l * l; });
    CHECK_THROWS_AS(set.add("short", std::vector<double>{1.0}), DomainError);
    CHECK(set.to_csv() == "lambda,sq\n0.25,0.0625\n0.5,0.25\n0.75,0.5625\n1,1\n");
    CHECK_THROWS_AS(uniform_grid(0.0, 4), DomainError);
    CHECK(linear_grid(1.0, 2.0, 3) == std::vector<double>{1.0, 1.5, 2.0});
}
