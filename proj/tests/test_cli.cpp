#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gplab/cli.hpp"
#include "gplab/report_io.hpp"

using namespace gplab;

namespace {

struct Outcome {
    int code;
    std::string out, err;
};

Outcome call(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("gplab_cli_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::filesystem::path write(const std::filesystem::path& p, const std::string& text) {
    std::ofstream(p) << text;
    return p;
}

}  // namespace

TEST_CASE("no arguments prints usage and fails") {
    auto r = call({});
    CHECK(r.code == 1);
    CHECK(r.err.find("Usage") != std::string::npos);
    CHECK(r.err.find("fock-check") != std::string::npos);
}

TEST_CASE("unknown subcommand or option") {
    CHECK(call({"bogus"}).code == 1);
    CHECK(call({"gp", "--frobnicate"}).code == 1);
    CHECK(call({"fock-check", "--tol", "ccr"}).code == 1);
}

TEST_CASE("scattering subcommand reports a0") {
    auto dir = scratch("scattering");
    auto r = call({"scattering", "--potential", "soft_ball:2,1", "--out", dir.string()});
    REQUIRE(r.code == 0);
    auto j = io::Json::parse(r.out);
    CHECK(std::abs(j["a0"].get<double>() - (1.0 - std::tanh(1.0))) < 1e-9);
    CHECK(j.contains("a0_integral"));
    CHECK(j.contains("tail_fit_residual"));
    CHECK(j["steps"].get<int>() > 0);
    CHECK(slurp(dir / "report.json") == r.out);
    CHECK(slurp(dir / "config.normalized.toml").find("spec = \"soft_ball:2,1\"") != std::string::npos);
    CHECK(call({"scattering", "--out", dir.string()}).code == 1);
}

TEST_CASE("fock-check on a small space passes every check") {
    auto dir = scratch("fock");
    auto r = call({"fock-check", "--modes", "2", "--nmax", "8", "--out", dir.string()});
    CHECK(r.code == 0);
    auto j = io::Json::parse(slurp(dir / "report.json"));
    CHECK(j["all_pass"] == true);
    REQUIRE(j["checks"].size() == 5);
    for (const auto& c : j["checks"]) {
        CHECK(c["pass"] == true);
        CHECK(c["max_deviation"].get<double>() <= c["tolerance"].get<double>());
    }
    auto strict = call({"fock-check", "--modes", "2", "--nmax", "8", "--tol", "bogoliubov_action=1e-30", "--out",
                        dir.string()});
    CHECK(strict.code == 2);
    CHECK(call({"fock-check", "--tol", "nonsense=1", "--out", dir.string()}).code == 1);
}

TEST_CASE("config errors exit 1 and name the key") {
    auto dir = scratch("bad_config");
    auto cfg = write(dir / "bad.toml", "[grid]\ndim = 1\npointz = 64\n[gp]\na0 = 0.1\ndt = -1\n");
    auto r = call({"gp", "--config", cfg.string(), "--out", (dir / "out").string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("grid.pointz") != std::string::npos);
    CHECK(r.err.find("gp.dt") != std::string::npos);
    CHECK_FALSE(std::filesystem::exists(dir / "out" / "report.json"));

    auto noref = write(dir / "noref.toml", "[grid]\ndim = 1\npoints = 64\n");
    auto r2 = call({"gp", "--config", noref.string(), "--out", (dir / "out").string()});
    CHECK(r2.code == 1);
    CHECK(r2.err.find("missing scattering reference") != std::string::npos);
    CHECK(call({"gp", "--config", (dir / "absent.toml").string()}).code == 1);
}

TEST_CASE("gp run writes a reproducible series") {
    auto dir = scratch("gp");
    auto cfg = write(dir / "gp.toml",
                     "[grid]\ndim = 1\npoints = 128\nbox_length = 20.0\n[gp]\na0 = 0.2\nt = 0.2\nwidth = 1.0\n"
                     "record_every = 20\ndump = true\n");
    REQUIRE(call({"gp", "-c", cfg.string(), "-o", (dir / "a").string()}).code == 0);
    REQUIRE(call({"gp", "-c", cfg.string(), "-o", (dir / "b").string()}).code == 0);
    REQUIRE(call({"gp", "-c", (dir / "a" / "config.normalized.toml").string(), "-o", (dir / "c").string()}).code ==
            0);
    const std::string series = slurp(dir / "a" / "series.csv");
    CHECK(series.rfind("t,norm,energy,distance\n", 0) == 0);
    CHECK(std::count(series.begin(), series.end(), '\n') == 1 + 11);
    for (const char* f : {"series.csv", "report.json", "final_field.c64", "final_field.json"}) {
        CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
        CHECK(slurp(dir / "a" / f) == slurp(dir / "c" / f));
    }
}

TEST_CASE("ground-state and modgp-compare") {
    auto dir = scratch("gs");
    auto gs = write(dir / "gs.toml",
                    "[grid]\ndim = 1\npoints = 128\nbox_length = 16.0\n[gp]\na0 = 0.0\ntrap = \"harmonic:1.0\"\n");
    REQUIRE(call({"ground-state", "-c", gs.string(), "-o", (dir / "gs").string()}).code == 0);
    auto j = io::Json::parse(slurp(dir / "gs" / "report.json"));
    CHECK(j["energy"].get<double>() == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(slurp(dir / "gs" / "ground_state.csv").rfind("tau,energy\n", 0) == 0);

    auto mg = write(dir / "mg.toml",
                    "[grid]\npoints = 16\nbox_length = 1.5\n[potential]\nspec = \"soft_ball:0.5,1\"\n"
                    "[gp]\nt = 0.02\nwidth = 0.25\nn_list = [4, 8]\n");
    REQUIRE(call({"modgp-compare", "-c", mg.string(), "-o", (dir / "mg").string()}).code == 0);
    auto m = io::Json::parse(slurp(dir / "mg" / "report.json"));
    CHECK(m["runs"].size() == 2);
    for (const auto& run : m["runs"]) CHECK(run["kernel_ratio"].get<double>() == doctest::Approx(1.0).epsilon(0.01));
    CHECK(std::filesystem::exists(dir / "mg" / "modgp_N4.csv"));
    CHECK(std::filesystem::exists(dir / "mg" / "gp_series.csv"));
}

TEST_CASE("sweep subcommands write the CSV schema and gate truncation") {
    auto dir = scratch("sweep");
    auto ok = write(dir / "ok.toml",
                    "[grid]\npoints = 16\n[potential]\nspec = \"soft_ball:0.5,1\"\n[fock]\nmodes = 2\nn_max = 16\n"
                    "[sweep]\nn_list = [2, 4]\nt_final = 0.02\ntimes = [0.02]\ndump = true\n");
    auto r = call({"fluctuations", "-c", ok.string(), "-o", (dir / "f").string()});
    REQUIRE(r.code == 0);
    const std::string csv = slurp(dir / "f" / "sweep.csv");
    CHECK(csv.rfind("N,t,trace_dist,fluct_number,energy_residual,norm_loss\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
    CHECK(std::filesystem::exists(dir / "f" / "fluctuation_N2.c64"));
    auto j = io::Json::parse(slurp(dir / "f" / "report.json"));
    CHECK(j["records"].size() == 2);

    // converge insists on three values of N.
    CHECK(call({"converge", "-c", ok.string(), "-o", (dir / "c").string()}).code == 1);

    auto tight = write(dir / "tight.toml",
                       "[grid]\npoints = 16\n[potential]\nspec = \"soft_ball:0.5,1\"\n[fock]\nmodes = 2\nn_max = 8\n"
                       "[sweep]\nn_list = [4]\nt_final = 0.02\ntimes = [0.02]\n");
    auto g = call({"fluctuations", "-c", tight.string(), "-o", (dir / "t").string()});
    CHECK(g.code == 2);
    CHECK(g.err.find("truncation loss") != std::string::npos);
}
