#include "doctest.h"

#include "affinorm/cli.hpp"
#include "affinorm/families.hpp"
#include "affinorm/poly_io.hpp"

#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace affinorm;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args)
{
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch_dir()
{
    const fs::path dir = fs::temp_directory_path() / ("affinorm_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    return dir;
}

std::string write_file(const fs::path& p, const std::string& text)
{
    std::ofstream(p) << text;
    return p.string();
}

} // namespace

TEST_CASE("list parsing")
{
    CHECK(cli::parse_list("3..6") == std::vector<std::size_t>{3, 4, 5, 6});
    CHECK(cli::parse_list("50,100,200") == std::vector<std::size_t>{50, 100, 200});
    CHECK(cli::parse_list("7") == std::vector<std::size_t>{7});
    CHECK_THROWS(cli::parse_list("6..3"));
    CHECK_THROWS(cli::parse_list("a,b"));
    CHECK_THROWS(cli::parse_list(""));
}

TEST_CASE("direction on a sphere file")
{
    const auto dir = scratch_dir();
    const std::string poly = dir / "sphere.json";
    write_polynomial_json(sphere(3), poly);

    auto r = run({"direction", "--poly", poly, "--point", "1,0,0"});
    REQUIRE(r.code == cli::kOk);
    CHECK(r.out.rfind("direction_unit: -1 0 0", 0) == 0);

    r = run({"direction", "--poly", poly, "--point", "1,0,0", "--json"});
    REQUIRE(r.code == cli::kOk);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["direction_unit"][0] == -1.0);
    CHECK(j["counts"]["third"] == 2);
    for (const char* key : {"mode", "direction", "direction_unit", "u", "grad_norm", "counts", "lambda_used"}) {
        CHECK(j.contains(key));
    }

    const std::string point_file = write_file(dir / "point.txt", "0 2 0\n");
    r = run({"direction", "--poly", poly, "--point", point_file});
    CHECK(r.code == cli::kOk);
    CHECK(r.out.rfind("direction_unit: 0 -1 0", 0) == 0);
}

TEST_CASE("hutchinson direction output is byte-identical across runs")
{
    const auto dir = scratch_dir();
    const std::string poly = dir / "q.json";
    write_polynomial_json(quartic_family({12}), poly);
    const std::vector<std::string> args{"direction", "--poly", poly, "--point",
                                        "0.5,0.6,0.7,0.8,0.9,1,0.9,0.8,0.7,0.6,0.5,0.4",
                                        "--mode", "hutchinson", "--seed", "7", "--json"};
    const auto a = run(args), b = run(args);
    REQUIRE(a.code == cli::kOk);
    CHECK(a.out == b.out);
    auto par = args;
    par.push_back("--parallel");
    CHECK(run(par).out == a.out);
}

TEST_CASE("usage and numerical errors")
{
    const auto dir = scratch_dir();
    const std::string bad = write_file(
        dir / "bad.json", R"({"dim": 2, "terms": [{"coeff": 1, "exps": [[0, 1]]}, {"coeff": 1, "exps": [[1, 1], [0, 1]]}]})");
    auto r = run({"direction", "--poly", bad, "--point", "1,1"});
    CHECK(r.code == cli::kUsageError);
    CHECK(r.err.find("term 1") != std::string::npos);

    const std::string poly = dir / "s.json";
    write_polynomial_json(sphere(3), poly);
    CHECK(run({"direction", "--poly", poly, "--point", "1,0"}).code == cli::kUsageError);
    CHECK(run({"direction", "--poly", poly, "--point", "1,0,0", "--bogus"}).code == cli::kUsageError);
    CHECK(run({"direction", "--poly", poly, "--point", "1,0,0", "--mode", "magic"}).code == cli::kUsageError);
    CHECK(run({"direction", "--poly", (dir / "missing.json").string(), "--point", "1"}).code == cli::kUsageError);
    CHECK(run({"frobnicate"}).code == cli::kUsageError);
    CHECK(run({}).code == cli::kUsageError);

    r = run({"direction", "--poly", poly, "--point", "0,0,0"});
    CHECK(r.code == cli::kNumericalError);
    CHECK(r.err.find("ZeroGradient") != std::string::npos);

    const std::string saddle = write_file(
        dir / "saddle.json",
        R"({"dim": 3, "terms": [{"coeff": 1, "exps": [[0, 2]]}, {"coeff": -1, "exps": [[1, 2]]}, {"coeff": 1, "exps": [[2, 1]]}]})");
    // tangent block diag(2, -2): lambda escalates 0 -> 1e-6 -> ... -> 1 and stays indefinite
    r = run({"direction", "--poly", saddle, "--point", "0,0,1", "--lambda", "0"});
    CHECK(r.code == cli::kNumericalError);
    CHECK(r.err.find("IndefiniteOperator") != std::string::npos);
    // starting higher, the escalation reaches 100 and succeeds
    r = run({"direction", "--poly", saddle, "--point", "0,0,1", "--lambda", "0.01"});
    CHECK(r.code == cli::kOk);
    CHECK(r.out.find("lambda_used: 100") != std::string::npos);
}

TEST_CASE("gen round-trips through direction")
{
    const auto dir = scratch_dir();
    const std::string f = (dir / "f.json").string();
    auto r = run({"gen", "--family", "quartic", "--dim", "5", "--out", f});
    REQUIRE(r.code == cli::kOk);
    const auto poly = read_polynomial_json(f);
    CHECK(poly.num_terms() == quartic_family({5}).num_terms());
    r = run({"direction", "--poly", f, "--point", "0.6,0.7,0.8,0.9,1.0"});
    CHECK(r.code == cli::kOk);

    r = run({"gen", "--family", "random", "--dim", "20", "--m", "50", "--seed", "3"});
    REQUIRE(r.code == cli::kOk);
    CHECK(parse_polynomial_json(r.out).num_terms() == 70);
    CHECK(run({"gen", "--family", "random", "--dim", "20", "--m", "50", "--seed", "3"}).out == r.out);
}

TEST_CASE("verify subcommand")
{
    auto r = run({"verify", "--dims", "3..8", "--points", "3"});
    REQUIRE(r.code == cli::kOk);
    std::istringstream lines(r.out);
    std::string line;
    int rows = -1;
    while (std::getline(lines, line)) {
        ++rows;
    }
    CHECK(rows == 18);
    CHECK(r.err.find("max_err=") != std::string::npos);

    const auto dir = scratch_dir();
    const std::string out = (dir / "v.json").string();
    r = run({"verify", "--dims", "3,4", "--points", "2", "--format", "json", "--out", out});
    REQUIRE(r.code == cli::kOk);
    CHECK(r.out.find("max_err=") != std::string::npos);
    std::ifstream in(out);
    const auto j = nlohmann::json::parse(in);
    CHECK(j.size() == 4);
}

TEST_CASE("bench-dim writes CSV with a slope line")
{
    auto r = run({"bench-dim", "--dims", "50,100,200", "--m-factor", "10", "--probes", "2", "--max-iter", "5",
                  "--reps", "1", "--points", "1", "--min-time", "0"});
    REQUIRE(r.code == cli::kOk);
    CHECK(r.out.rfind("d,m,avg_support,ms,", 0) == 0);
    CHECK(r.out.find("\n# slope=") != std::string::npos);
    CHECK(r.err.find("slope=") != std::string::npos);

    r = run({"bench-sparsity", "--dim", "40", "--m-list", "40,80", "--reps", "1", "--points", "1", "--min-time",
             "0", "--format", "json"});
    REQUIRE(r.code == cli::kOk);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j.size() == 3);
    CHECK(j[2].contains("slope"));

    r = run({"bench-probes", "--dims", "8", "--q-list", "2,4", "--seeds", "2", "--points", "1", "--min-time", "0"});
    REQUIRE(r.code == cli::kOk);
    CHECK(r.out.find("\n8,") != std::string::npos);
}
