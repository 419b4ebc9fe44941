#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "cli.hpp"

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace spectra;
using namespace spectra::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const char* root = std::getenv("SPECTRA_TEST_TMP");
    fs::path dir = root ? fs::path(root) : fs::temp_directory_path() / "spectra_cli_tests";
    dir /= name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args)
{
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::vector<std::string> lines(const std::string& text)
{
    std::vector<std::string> result;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
        result.push_back(line);
    }
    return result;
}

nlohmann::json read_json(const fs::path& path)
{
    return nlohmann::json::parse(slurp(path));
}

} // namespace

TEST_CASE("parsers")
{
    CHECK(parse_ensemble("exp").kind() == EntryDistribution::Kind::ShiftedExponential);
    CHECK(parse_ensemble("bion").kind() == EntryDistribution::Kind::Rademacher);
    CHECK_THROWS_AS(parse_ensemble("normal"), std::invalid_argument);

    CHECK(std::holds_alternative<IdentityPopulation>(parse_population("identity", 4)));
    const auto diag = std::get<DiagonalPopulation>(parse_population("diagonal:1@0.5,2@0.5", 4));
    CHECK(diag.measure.atoms().size() == 2);
    CHECK(diag.measure.atoms()[1].location == 2.0);
    const auto w = std::get<WishartPopulation>(parse_population("wishart:bion:4", 50));
    CHECK(w.n2 == 200);
    CHECK(w.entry.name() == "bion");
    CHECK_THROWS_AS(parse_population("diagonal:1@0.5,2@0.4", 4), std::invalid_argument);
    CHECK_THROWS_AS(parse_population("diagonal:1", 4), std::invalid_argument);
    CHECK_THROWS_AS(parse_population("wishart:bion:0.5", 4), std::invalid_argument);
    CHECK_THROWS_AS(parse_population("toeplitz", 4), std::invalid_argument);

    CHECK(std::holds_alternative<DefaultBandwidth>(parse_bandwidth("default")));
    CHECK(std::get<FixedBandwidth>(parse_bandwidth("fixed:0.1")).h == 0.1);
    const auto power = std::get<PowerBandwidth>(parse_bandwidth("power:1:0.4"));
    CHECK(power.coef == 1.0);
    CHECK(power.exponent == 0.4);
    CHECK_THROWS_AS(parse_bandwidth("fixed:abc"), std::invalid_argument);

    const auto grid = parse_grid("0:2:5");
    CHECK(grid == std::vector<double>{0.0, 0.5, 1.0, 1.5, 2.0});
    CHECK_THROWS_AS(parse_grid("2:0:5"), std::invalid_argument);
    CHECK_THROWS_AS(parse_grid("0:2"), std::invalid_argument);
}

TEST_CASE("format_number and fnv1a")
{
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(2.0) == "2");
    CHECK(format_number(7.34e-5) == "7.34e-05");
    for (double v : {0.1 + 0.2, 1.0 / 3.0, 6.02214076e23, -1e-300}) {
        CHECK(std::stod(format_number(v)) == v);
    }
    CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("density: identity population writes estimate, limit and manifest")
{
    const auto dir = scratch("density_identity");
    const auto r = run({"density", "--ensemble", "exp", "--population", "identity", "--p", "50", "--n", "200",
                        "--seed", "1", "--out", dir.string()});
    REQUIRE(r.code == 0);
    const auto est = lines(slurp(dir / "density_estimate.csv"));
    const auto lim = lines(slurp(dir / "density_limit.csv"));
    REQUIRE(est.size() == 402);
    CHECK(est.front() == "x,f_estimate");
    CHECK(lim.front() == "x,f_limit");
    CHECK(lim.size() == est.size());
    const auto manifest = read_json(dir / "manifest.json");
    CHECK(manifest["command"] == "density");
    CHECK(manifest["seed"] == 1);
    CHECK(manifest["outputs"].size() == 2);
    CHECK(manifest["config_digest"].get<std::string>().size() == 16);
    CHECK(slurp(dir / "density_estimate.csv").find('\r') == std::string::npos);
}

TEST_CASE("density: Wishart population has no limit file")
{
    const auto dir = scratch("density_wishart");
    const auto r = run({"density", "--population", "wishart:bion:4", "--p", "40", "--n", "160", "--out",
                        dir.string()});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("limit law has no closed form") != std::string::npos);
    CHECK(fs::exists(dir / "density_estimate.csv"));
    CHECK_FALSE(fs::exists(dir / "density_limit.csv"));
}

TEST_CASE("usage errors exit with 2 and name the field")
{
    const auto dir = scratch("usage");
    auto r = run({"density", "--n", "200", "--out", dir.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("p required") != std::string::npos);

    r = run({"mse", "--p", "20", "--n", "80", "--replicates", "0", "--out", dir.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("replicates") != std::string::npos);

    r = run({"density", "--p", "abc", "--n", "80", "--out", dir.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("p") != std::string::npos);

    r = run({"density", "--p", "20", "--n", "80", "--bandwidth", "fixed:-1", "--out", dir.string()});
    CHECK(r.code == 2);

    r = run({"density", "--p", "20", "--n", "80", "--ensemble", "normal", "--out", dir.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("ensemble") != std::string::npos);

    r = run({"frobnicate"});
    CHECK(r.code == 2);
    r = run({});
    CHECK(r.code == 2);
    r = run({"density", "--bogus", "1"});
    CHECK(r.code == 2);

    r = run({"--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("density") != std::string::npos);
}

TEST_CASE("mse: ten rows with mode column")
{
    const auto dir = scratch("mse");
    auto r = run({"mse", "--p", "20", "--n", "80", "--replicates", "5", "--out", dir.string()});
    REQUIRE(r.code == 0);
    auto rows = lines(slurp(dir / "mse.csv"));
    REQUIRE(rows.size() == 11);
    CHECK(rows.front() == "x,mse,mode,replicates");
    CHECK(rows[1].rfind("0.3,", 0) == 0);
    CHECK(rows[1].find(",vs_limit,5") != std::string::npos);

    const auto dir2 = scratch("mse_avg");
    r = run({"mse", "--p", "20", "--n", "80", "--replicates", "5", "--population", "wishart:bion:4", "--out",
             dir2.string()});
    REQUIRE(r.code == 0);
    rows = lines(slurp(dir2 / "mse.csv"));
    CHECK(rows[1].find(",vs_average,5") != std::string::npos);
}

TEST_CASE("recover: identity population and c guard")
{
    const auto dir = scratch("recover");
    auto r = run({"recover", "--p", "100", "--n", "400", "--out", dir.string()});
    REQUIRE(r.code == 0);
    const auto report = read_json(dir / "recover.json");
    CHECK(std::abs(report["m1"].get<double>() - 1.0) <= 0.02);
    CHECK(report["oracle_tr_t2_over_n"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(report.contains("diagnostics"));

    const auto dir2 = scratch("recover_diag");
    r = run({"recover", "--population", "diagonal:1@0.5,2@0.5", "--p", "200", "--n", "800", "--out",
             dir2.string()});
    REQUIRE(r.code == 0);
    const auto diag = read_json(dir2 / "recover.json");
    CHECK(diag["relative_error"].get<double>() <= 0.1);

    r = run({"recover", "--p", "400", "--n", "400", "--out", dir.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("recovery requires c in (0,1)") != std::string::npos);
}

TEST_CASE("sir: guards and p1 linearity")
{
    const auto dir = scratch("sir");
    auto r = run({"sir", "--p", "50", "--n", "200", "--sigma2", "0", "--out", dir.string()});
    CHECK(r.code == 2);

    r = run({"sir", "--p", "50", "--n", "200", "--sigma2", "1", "--p1", "1", "--out", dir.string()});
    REQUIRE(r.code == 0);
    const auto one = read_json(dir / "sir.json");
    r = run({"sir", "--p", "50", "--n", "200", "--sigma2", "1", "--p1", "2", "--out", dir.string()});
    REQUIRE(r.code == 0);
    const auto two = read_json(dir / "sir.json");
    CHECK(two["kernel_estimate"].get<double>() == 2.0 * one["kernel_estimate"].get<double>());
    CHECK(two["limit"].get<double>() == 2.0 * one["limit"].get<double>());
    CHECK(std::abs(one["kernel_estimate"].get<double>() - one["limit"].get<double>()) <= 0.05);
}

TEST_CASE("rate: CSV schema")
{
    const auto dir = scratch("rate");
    const auto r = run({"rate", "--p", "25", "--n", "100", "--replicates", "3", "--n-values", "100,200,400",
                        "--out", dir.string()});
    REQUIRE(r.code == 0);
    const auto rows = lines(slurp(dir / "rate.csv"));
    REQUIRE(rows.size() == 4);
    CHECK(rows.front() == "n,mean_distance");
    CHECK(rows[1].rfind("100,", 0) == 0);
    CHECK(r.out.find("fitted_exponent=") != std::string::npos);

    const auto bad = run({"rate", "--p", "25", "--n", "100", "--n-values", "100,200", "--out", dir.string()});
    CHECK(bad.code == 2);
}

TEST_CASE("seeded runs are byte-for-byte reproducible; digest tracks the config")
{
    const auto a = scratch("repro_a");
    const auto b = scratch("repro_b");
    const std::vector<std::string> base{"mse", "--p", "20", "--n", "80", "--replicates", "4", "--seed", "9"};
    auto args_a = base;
    args_a.insert(args_a.end(), {"--out", a.string()});
    auto args_b = base;
    args_b.insert(args_b.end(), {"--out", b.string()});
    REQUIRE(run(args_a).code == 0);
    REQUIRE(run(args_b).code == 0);
    CHECK(slurp(a / "mse.csv") == slurp(b / "mse.csv"));
    CHECK(slurp(a / "manifest.json") == slurp(b / "manifest.json"));

    const std::string digest = read_json(a / "manifest.json")["config_digest"];
    for (const auto& change : std::vector<std::vector<std::string>>{
             {"--seed", "10"}, {"--replicates", "5"}, {"--bandwidth", "power:1:0.4"}, {"--sigma2", "2"}}) {
        const auto c = scratch("repro_c");
        auto args = base;
        args.insert(args.end(), change.begin(), change.end());
        args.insert(args.end(), {"--out", c.string()});
        REQUIRE(run(args).code == 0);
        CHECK(read_json(c / "manifest.json")["config_digest"] != digest);
    }
}

TEST_CASE("config file with command-line override")
{
    const auto dir = scratch("config");
    const auto file = dir / "run.conf";
    {
        std::ofstream cfg(file);
        cfg << "p=20\nn=80\nreplicates=3\nseed=4\nout=" << (dir / "from_file").string() << "\n";
    }
    auto r = run({"mse", "--config", file.string()});
    REQUIRE(r.code == 0);
    CHECK(lines(slurp(dir / "from_file" / "mse.csv"))[1].find(",3") != std::string::npos);

    r = run({"mse", "--config", file.string(), "--replicates", "2"});
    REQUIRE(r.code == 0);
    CHECK(lines(slurp(dir / "from_file" / "mse.csv"))[1].find(",vs_limit,2") != std::string::npos);

    r = run({"mse", "--config", (dir / "missing.conf").string()});
    CHECK(r.code == 2);
}

TEST_CASE("unwritable output directory exits with 4")
{
    const auto dir = scratch("io");
    {
        std::ofstream blocker(dir / "file");
        blocker << "x";
    }
    const auto r = run({"density", "--p", "20", "--n", "80", "--out", (dir / "file" / "sub").string()});
    CHECK(r.code == 4);
}
