// Acceptance run: one PASS/FAIL line per criterion, tolerances pinned below.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "gplab/cli.hpp"
#include "gplab/config.hpp"
#include "gplab/experiments.hpp"
#include "gplab/fock_checks.hpp"
#include "gplab/gp.hpp"
#include "gplab/report_io.hpp"
#include "gplab/scattering.hpp"

using namespace gplab;
namespace fs = std::filesystem;
constexpr double kPi = std::numbers::pi;

namespace tol {
constexpr double scattering_rel = 1e-5;
constexpr double scattering_consistency = 1e-5;
constexpr double scattering_seconds = 1.0;
constexpr int born_samples = 20;
constexpr double born_seconds = 10.0;
constexpr double mass_drift = 1e-9;
constexpr double energy_drift = 1e-6;
constexpr double order_lo = 3.5, order_hi = 4.5;
constexpr double conservation_seconds = 5.0;
constexpr double kernel_rel = 0.01;
constexpr double modgp_seconds = 120.0;
constexpr double identity = 1e-5;
constexpr double ccr = 1e-12;
constexpr double symplectic = 1e-10;
constexpr double identity_seconds = 30.0;
constexpr double squeeze = 1e-6;
constexpr double sector = 1e-10;
constexpr double fit_residual = 0.2;
constexpr double sweep_seconds = 600.0;
constexpr double band = 3.0;
constexpr double initial_fluctuation = 1e-12;
}  // namespace tol

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", x);
    return buf;
}

struct Verdict {
    int id;
    std::string title;
    bool pass;
    std::string detail;
};

std::vector<Verdict> verdicts;

void report(int id, const std::string& title, bool pass, const std::string& detail) {
    verdicts.push_back({id, title, pass, detail});
    std::cout << "criterion " << (id < 10 ? "0" : "") << id << " " << (pass ? "PASS" : "FAIL") << " | " << title
              << " | " << detail << std::endl;
}

void guarded(int id, const std::string& title, const std::function<void()>& body) {
    try {
        body();
    } catch (const std::exception& e) {
        report(id, title, false, std::string("exception: ") + e.what());
    }
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    if (code != 0) std::cerr << "gplab " << args.front() << " exited " << code << ": " << err.str();
    return code;
}

void criterion_1() {
    const auto t0 = Clock::now();
    auto sol = scattering::solve_zero_energy(scattering::RadialPotential::soft_ball(2.0, 1.0));
    const double secs = seconds_since(t0);
    const double exact = 1.0 - std::tanh(1.0);
    const double rel = std::abs(sol.a0 - exact) / exact;
    const double cons = std::abs(sol.a0 - sol.a0_integral) / exact;
    report(1, "scattering oracle", rel < tol::scattering_rel && cons < tol::scattering_consistency &&
                                       secs < tol::scattering_seconds,
           "a0=" + io::format_double(sol.a0) + " rel_err=" + fmt(rel) + " (tol " + fmt(tol::scattering_rel) +
               ") integral_vs_tail=" + fmt(cons) + " runtime=" + fmt(secs) + "s");
}

void criterion_2() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> strength(0.05, 20.0), range(0.2, 2.0);
    double min_margin = INFINITY, min_a0 = INFINITY;
    bool ok = true;
    for (int i = 0; i < tol::born_samples; ++i) {
        const double v0 = strength(rng), r = range(rng);
        auto v = i % 2 == 0 ? scattering::RadialPotential::soft_ball(v0, r)
                            : scattering::RadialPotential::gaussian(v0, 0.5 * r);
        const double a0 = scattering::solve_zero_energy(v).a0;
        const double born = v.integral() / (8.0 * kPi);
        const double margin = (born - a0) / born;
        ok &= a0 >= 0.0 && a0 <= born;
        min_margin = std::min(min_margin, margin);
        min_a0 = std::min(min_a0, a0);
    }
    const double secs = seconds_since(t0);
    report(2, "Born bound", ok && secs < tol::born_seconds,
           std::to_string(tol::born_samples) + " potentials, min a0=" + fmt(min_a0) +
               " min relative margin (born-a0)/born=" + fmt(min_margin) + " runtime=" + fmt(secs) + "s");
}

void criterion_3() {
    const auto t0 = Clock::now();
    PeriodicGrid grid(1, 256, 20.0);
    auto phi0 = gp::gaussian_packet(grid, 2.0, {1.0, 0.0, 0.0});
    gp::GPParams p(1.0 - std::tanh(1.0));
    gp::EvolveOptions opts;
    opts.record_every = 1;
    auto coarse = gp::evolve_gp(phi0, p, 1.0, 1e-3, opts);
    auto fine = gp::evolve_gp(phi0, p, 1.0, 5e-4, opts);
    const double secs = seconds_since(t0);
    const double ratio = coarse.max_energy_drift / fine.max_energy_drift;
    report(3, "GP conservation",
           coarse.max_norm_drift < tol::mass_drift && coarse.max_energy_drift < tol::energy_drift &&
               ratio >= tol::order_lo && ratio <= tol::order_hi && secs < tol::conservation_seconds,
           "mass_drift=" + fmt(coarse.max_norm_drift) + " energy_drift=" + fmt(coarse.max_energy_drift) +
               " halving_ratio=" + fmt(ratio) + " runtime=" + fmt(secs) + "s");
}

void criterion_4(const experiments::ExperimentConfig& exp) {
    auto pot = scattering::RadialPotential::from_spec(exp.potential);
    auto sol = scattering::solve_zero_energy(pot);
    const double target = 8.0 * kPi * sol.a0;
    double worst = 0.0;
    std::string per_n;
    for (double n : {4.0, 8.0, 16.0, 32.0}) {
        auto k = gp::build_convolution_kernel(exp.grid, sol, pot, n);
        const double rel = std::abs(k.integral - target) / target;
        worst = std::max(worst, rel);
        per_n += " N" + std::to_string(static_cast<int>(n)) + ":" + fmt(rel);
    }
    report(4, "kernel normalization", worst < tol::kernel_rel,
           "grid 32^3 L=2pi, " + exp.potential + ", relative error" + per_n);
}

void criterion_5(const fs::path& configs, const fs::path& work) {
    const auto t0 = Clock::now();
    const fs::path out = work / "modgp";
    if (run_cli({"modgp-compare", "--config", (configs / "modgp.toml").string(), "--out", out.string()}) != 0)
        throw std::runtime_error("modgp-compare failed");
    const double secs = seconds_since(t0);
    auto j = io::Json::parse(slurp(out / "report.json"));
    std::vector<double> d;
    std::string text;
    for (const auto& r : j["runs"]) {
        d.push_back(r["distance"].get<double>());
        text += " N" + std::to_string(static_cast<int>(r["n"].get<double>())) + ":" + fmt(d.back());
    }
    bool decreasing = d.size() == 4;
    for (std::size_t i = 1; i < d.size(); ++i) decreasing &= d[i] < d[i - 1];
    report(5, "modified GP to GP", decreasing && secs < tol::modgp_seconds,
           "L2 distance at t=" + io::format_double(j["t"].get<double>()) + text + " runtime=" + fmt(secs) + "s");
}

void criterion_6() {
    const auto t0 = Clock::now();
    auto ccr = fock::ccr_check(2, 12, tol::ccr);
    auto weyl = fock::weyl_shift_check(fock::default_shift(2, 3.0), 12, tol::identity);
    const fock::Dense k = fock::default_kernel(2, 1.0);
    auto bog = fock::bogoliubov_action_check(k, 12, tol::identity);
    auto sym = fock::symplectic_check(k, tol::symplectic);
    const double secs = seconds_since(t0);
    report(6, "Fock identity suite", ccr.pass && weyl.pass && bog.pass && sym.pass && secs < tol::identity_seconds,
           "M=2 n_max=12 ccr=" + fmt(ccr.max_deviation) + " weyl=" + fmt(weyl.max_deviation) + " (working cutoff " +
               std::to_string(weyl.working_cutoff) + ", same-cutoff " + fmt(weyl.same_cutoff_deviation) +
               ") bogoliubov=" + fmt(bog.max_deviation) + " (working cutoff " + std::to_string(bog.working_cutoff) +
               ", same-cutoff " + fmt(bog.same_cutoff_deviation) + ") symplectic=" + fmt(sym.max_deviation) +
               " runtime=" + fmt(secs) + "s");
}

void criterion_7() {
    bool ok = true;
    std::string text;
    for (double r : {0.25, 0.5, 1.0}) {
        auto c = fock::squeeze_check(r, 40, tol::squeeze);
        ok &= c.pass;
        text += " r=" + io::format_double(r) + ":" + fmt(c.max_deviation) + " (same-cutoff " +
                fmt(c.same_cutoff_deviation) + ", cutoff " + std::to_string(c.working_cutoff) + ")";
    }
    report(7, "single-mode squeeze", ok, "|<N> - sinh^2 r|" + text);
}

void criterion_8(const experiments::ExperimentConfig& exp) {
    auto pot = scattering::RadialPotential::from_spec(exp.potential);
    double worst = 0.0;
    bool ok = true;
    for (int m : {2, 4})
        for (double n : {2.0, 8.0}) {
            auto c = fock::sector_check(fock::ModeBasis::plane_waves(exp.grid, m), pot, n, tol::sector);
            ok &= c.pass;
            worst = std::max(worst, c.max_deviation);
        }
    report(8, "sector restriction", ok, "M in {2,4}, N in {2,8}, max deviation=" + fmt(worst));
}

void criteria_9_to_11(const experiments::ExperimentConfig& exp) {
    const auto t0 = Clock::now();
    experiments::ExperimentReport rep;
    try {
        rep = experiments::convergence_sweep(exp);
    } catch (const std::exception& e) {
        for (int id : {9, 10, 11}) report(id, "sweep", false, std::string("exception: ") + e.what());
        return;
    }
    const double secs = seconds_since(t0);

    std::string text;
    for (const auto& r : rep.records)
        text += " N" + std::to_string(static_cast<int>(r.n)) + ":" + fmt(r.energy.residual_over_n);
    report(9, "energy expansion trend", rep.residual_over_n_decreasing,
           "residual/N" + text + " (M=" + std::to_string(exp.modes) + ", n_max=" + std::to_string(exp.n_max) + ")");

    text.clear();
    for (std::size_t i = 0; i < rep.records.size(); ++i)
        text += " N" + std::to_string(static_cast<int>(rep.records[i].n)) + ":" + fmt(rep.fit_distances[i]);
    const bool fit_ok = !rep.fit.skipped && rep.fit.alpha > 0.0 && rep.fit.residual < tol::fit_residual;
    report(10, "convergence sweep trend", rep.distances_decreasing && fit_ok && secs < tol::sweep_seconds,
           "trace distance at t=" + io::format_double(exp.t_final) + text + " alpha=" + fmt(rep.fit.alpha) +
               " fit_residual=" + fmt(rep.fit.residual) + " runtime=" + fmt(secs) + "s");

    double worst0 = 0.0;
    for (const auto& r : rep.records) worst0 = std::max(worst0, r.initial_fluctuation_number);
    text.clear();
    for (double t : exp.times) {
        text += " t=" + io::format_double(t) + ":";
        for (const auto& r : rep.records)
            for (const auto& p : r.points)
                if (p.t == t) text += " " + fmt(p.fluctuation_number);
    }
    report(11, "fluctuation boundedness", rep.fluctuation_band <= tol::band && worst0 <= tol::initial_fluctuation,
           "band=" + fmt(rep.fluctuation_band) + " (limit " + fmt(tol::band) + ") <N>_0 max=" + fmt(worst0) +
               " <N>_t" + text);
}

void criterion_12(const fs::path& configs, const fs::path& work) {
    const std::vector<std::pair<std::string, std::string>> runs{
        {"scattering", "scattering.toml"},       {"gp", "gp_1d.toml"},
        {"ground-state", "ground_state.toml"},   {"modgp-compare", "modgp.toml"},
        {"fock-check", "fock_check.toml"},       {"fluctuations", "fluctuations_small.toml"},
        {"converge", "converge_small.toml"}};
    bool ok = true;
    int files = 0;
    std::string mismatched;
    for (const auto& [sub, cfg] : runs) {
        std::vector<fs::path> dirs{work / "determinism" / (sub + "_a"), work / "determinism" / (sub + "_b")};
        for (const auto& d : dirs) {
            fs::remove_all(d);
            if (run_cli({sub, "--config", (configs / cfg).string(), "--out", d.string()}) != 0) {
                ok = false;
                mismatched += " " + sub + "(exit)";
            }
        }
        std::set<std::string> names;
        for (const auto& d : dirs)
            if (fs::exists(d))
                for (const auto& e : fs::directory_iterator(d)) names.insert(e.path().filename().string());
        for (const auto& n : names) {
            ++files;
            if (!fs::exists(dirs[0] / n) || !fs::exists(dirs[1] / n) || slurp(dirs[0] / n) != slurp(dirs[1] / n)) {
                ok = false;
                mismatched += " " + sub + "/" + n;
            }
        }
    }
    report(12, "determinism", ok,
           std::to_string(runs.size()) + " subcommands run twice, " + std::to_string(files) + " files compared" +
               (mismatched.empty() ? ", all byte-identical" : ", differing:" + mismatched));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gplab acceptance run"};
    std::string configs = "configs", work = "acceptance_work";
    std::vector<int> known_fail;
    std::vector<int> only;
    app.add_option("--configs", configs, "directory with the shipped TOML configs");
    app.add_option("--work", work, "scratch directory for CLI outputs");
    app.add_option("--known-fail", known_fail, "criteria expected to fail; they do not affect the exit code");
    app.add_option("--only", only, "run only these criteria");
    CLI11_PARSE(app, argc, argv);
    fs::create_directories(work);

    auto cfg = config::validate_config(fs::path(configs) / "experiment.toml", config::Purpose::sweep);
    if (!cfg.ok()) {
        for (const auto& e : cfg.errors) std::cerr << e << "\n";
        return 1;
    }
    const auto exp = cfg.config.experiment();
    auto want = [&](int id) { return only.empty() || std::find(only.begin(), only.end(), id) != only.end(); };

    if (want(1)) guarded(1, "scattering oracle", criterion_1);
    if (want(2)) guarded(2, "Born bound", criterion_2);
    if (want(3)) guarded(3, "GP conservation", criterion_3);
    if (want(4)) guarded(4, "kernel normalization", [&] { criterion_4(exp); });
    if (want(5)) guarded(5, "modified GP to GP", [&] { criterion_5(configs, work); });
    if (want(6)) guarded(6, "Fock identity suite", criterion_6);
    if (want(7)) guarded(7, "single-mode squeeze", criterion_7);
    if (want(8)) guarded(8, "sector restriction", [&] { criterion_8(exp); });
    if (want(9) || want(10) || want(11)) criteria_9_to_11(exp);
    if (want(12)) guarded(12, "determinism", [&] { criterion_12(configs, work); });

    int unexpected = 0, passed = 0;
    for (const auto& v : verdicts) {
        passed += v.pass;
        const bool known = std::find(known_fail.begin(), known_fail.end(), v.id) != known_fail.end();
        if (!v.pass && !known) ++unexpected;
    }
    std::cout << "summary: " << passed << "/" << verdicts.size() << " criteria pass";
    if (!known_fail.empty()) {
        std::cout << "; known failures:";
        for (int id : known_fail) std::cout << " " << id;
    }
    std::cout << "; unexpected failures: " << unexpected << std::endl;
    return unexpected == 0 ? 0 : 1;
}
