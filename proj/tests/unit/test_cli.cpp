#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "degenctrl/cli.hpp"

using namespace degenctrl;
using namespace degenctrl::cli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / "degenctrl_test_cli" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

int run(const std::vector<std::string>& args) {
    std::vector<const char*> argv{"degenctrl"};
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

fs::path write_config(const fs::path& dir, const std::string& text) {
    const fs::path p = dir / "config.json";
    std::ofstream(p, std::ios::binary) << text;
    return p;
}

}  // namespace

TEST_CASE("minimal config gets defaults") {
    const auto rc = parse_config("hum", json{{"alpha", 0.5}, {"T_horizon", 1.0}});
    CHECK(rc.model.n_r == 64);
    CHECK(rc.options.at("eps").get<double>() == 1e-6);
    const auto r = rc.resolved();
    CHECK(r.at("grid_power").get<double>() == doctest::Approx(2.0 / 1.5));
    CHECK(r.at("theta_quad_points").get<int>() == 4 * 4 + 8);
    CHECK(r.at("seed").get<std::uint64_t>() == 0);
    CHECK(parse_config("hum", json::object(), 42).seed == 42);
}

TEST_CASE("config errors") {
    CHECK_THROWS_AS(parse_config("hum", json{{"alpha", "0.5"}}), ConfigError);
    CHECK_THROWS_AS(parse_config("hum", json{{"beta", 1}}), ConfigError);
    CHECK_THROWS_AS(parse_config("hum", json{{"count", 5}}), ConfigError);
    CHECK_THROWS_AS(parse_config("hum", json{{"n_r", 64.5}}), ConfigError);
    CHECK_THROWS_AS(parse_config("hum", json{{"alpha", 1.2}}), ConfigError);
    CHECK_THROWS_AS(parse_config("nope", json::object()), ConfigError);
    CHECK_THROWS_AS(parse_config("hum", json::array()), ConfigError);
}

TEST_CASE("exit codes") {
    const fs::path dir = scratch("codes");
    const auto bad_type = write_config(dir, R"({"alpha": "0.5"})");
    CHECK(run({"hum", "--config", bad_type.string(), "--out", (dir / "a").string()}) == kUsageError);
    CHECK(fs::exists(dir / "a" / "manifest.json"));
    const auto extra = write_config(dir, R"({"beta": 1})");
    CHECK(run({"hum", "--config", extra.string(), "--out", (dir / "b").string()}) == kUsageError);
    const auto ok = write_config(dir, R"({})");
    CHECK(run({"frobnicate", "--config", ok.string(), "--out", (dir / "c").string()}) == kUsageError);
    CHECK(run({"hum", "--config", (dir / "missing.json").string(), "--out", (dir / "d").string()}) == kMissingFile);
    CHECK(run({"hum", "--out", (dir / "e").string()}) == kUsageError);
    const auto broken = write_config(dir, R"({"alpha": )");
    CHECK(run({"hum", "--config", broken.string(), "--out", (dir / "f").string()}) == kUsageError);

    // n_r = 64 misses a 1e-6 Bessel tolerance: invariant failure, manifest still written
    const auto coarse = write_config(dir, R"({"n_r": 64, "max_rel_error": 1e-6})");
    CHECK(run({"spectrum", "--config", coarse.string(), "--out", (dir / "g").string()}) == kInvariantFailure);
    const auto m = json::parse(slurp(dir / "g" / "manifest.json"));
    CHECK(m.at("exit_code").get<int>() == kInvariantFailure);
    CHECK(m.at("artifacts").size() == 1);

    const auto no_conv = write_config(dir, R"({"n_r": 32, "n_time": 20, "max_iter": 2, "cg_tol": 1e-14})");
    CHECK(run({"hum", "--config", no_conv.string(), "--out", (dir / "h").string()}) == kNotConverged);
}

TEST_CASE("density-seq on the full interval") {
    const fs::path dir = scratch("density");
    const auto cfg = write_config(dir, R"({"E_intervals": [[0, 1]], "ell": 0.5, "q": 0.5, "m_max": 4, "ell_1": 0.9})");
    REQUIRE(run({"density-seq", "--config", cfg.string(), "--out", (dir / "out").string()}) == kOk);
    const std::string csv = slurp(dir / "out" / "density_seq.csv");
    CHECK(csv.find('\r') == std::string::npos);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "m,ell_m,gap,fraction");
    std::vector<double> ell;
    while (std::getline(in, line)) ell.push_back(std::stod(line.substr(line.find(',') + 1)));
    REQUIRE(ell.size() == 4);
    CHECK(ell[0] == doctest::Approx(0.9));
    CHECK(ell[1] == doctest::Approx(0.7));
    CHECK(ell[2] == doctest::Approx(0.6));
    CHECK(ell[3] == doctest::Approx(0.55));
}

TEST_CASE("spectrum artifact and manifest hashes") {
    const fs::path dir = scratch("spectrum");
    const auto cfg = write_config(dir, R"({"alpha": 0.5, "n_r": 1000})");
    REQUIRE(run({"spectrum", "--config", cfg.string(), "--out", (dir / "out").string()}) == kOk);
    const auto m = json::parse(slurp(dir / "out" / "manifest.json"));
    CHECK(m.at("command") == "spectrum");
    CHECK(m.at("config").at("n_r") == 1000);
    for (const auto& a : m.at("artifacts"))
        CHECK(a.at("sha256").get<std::string>() == sha256_file(dir / "out" / a.at("file").get<std::string>()));
    std::istringstream in(slurp(dir / "out" / "spectrum.csv"));
    std::string line;
    std::getline(in, line);
    CHECK(line == "k,lambda_discrete,lambda_bessel,rel_error");
    int rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        CHECK(std::stod(line.substr(line.rfind(',') + 1)) < 5e-3);
    }
    CHECK(rows == 5);
}

TEST_CASE("repeat runs give identical artifacts") {
    const fs::path dir = scratch("repeat");
    const auto cfg = write_config(dir, R"({"n_r": 32, "n_time": 40, "family_size": 6, "low_modes": 2})");
    REQUIRE(run({"measurable", "--config", cfg.string(), "--out", (dir / "a").string(), "--seed", "5"}) == kOk);
    REQUIRE(run({"measurable", "--config", cfg.string(), "--out", (dir / "b").string(), "--seed", "5"}) == kOk);
    REQUIRE(run({"measurable", "--config", cfg.string(), "--out", (dir / "c").string(), "--seed", "6"}) == kOk);
    CHECK(slurp(dir / "a" / "measurable.json") == slurp(dir / "b" / "measurable.json"));
    CHECK(slurp(dir / "a" / "measurable.json") != slurp(dir / "c" / "measurable.json"));
}

TEST_CASE("sha256 and number formatting") {
    const fs::path dir = scratch("sha");
    std::ofstream(dir / "abc.txt", std::ios::binary) << "abc";
    CHECK(sha256_file(dir / "abc.txt") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(-2.5e-300) == "-2.5e-300");
}
