#include "gplab/scattering.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "gplab/error.hpp"

namespace gplab::scattering {

namespace {

std::vector<double> parse_numbers(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            require(used == item.size(), "bad number '" + item + "' in potential spec");
        } catch (const std::logic_error&) {
            throw ValidationError("bad number '" + item + "' in potential spec");
        }
    }
    return out;
}

}  // namespace

RadialPotential::RadialPotential(std::vector<double> r_samples, std::vector<double> v_samples)
    : r_(std::move(r_samples)), v_(std::move(v_samples)) {
    require(r_.size() == v_.size(), "potential: r and v sample counts differ");
    require(r_.size() >= 2, "potential: need at least two samples");
    require(r_.front() == 0.0, "potential: first radius must be 0");
    for (std::size_t i = 0; i < r_.size(); ++i) {
        require(std::isfinite(r_[i]) && std::isfinite(v_[i]), "potential: non-finite sample");
        require(v_[i] >= 0.0, "potential: V must be non-negative (repulsive)");
        if (i > 0) require(r_[i] > r_[i - 1], "potential: radii must be strictly increasing");
    }
    // V vanishes from the first sample after the last positive value onwards.
    r_support_ = 0.0;
    for (std::size_t i = r_.size(); i-- > 0;) {
        if (v_[i] > 0.0) {
            r_support_ = (i + 1 < r_.size()) ? r_[i + 1] : r_[i];
            break;
        }
    }
}

RadialPotential RadialPotential::soft_ball(double v0, double radius) {
    require(v0 >= 0.0 && radius > 0.0, "soft_ball: need V0 >= 0 and R > 0");
    return RadialPotential({0.0, radius, radius * (1.0 + 1e-10)}, {v0, v0, 0.0});
}

RadialPotential RadialPotential::gaussian(double v0, double sigma, double cutoff, int samples) {
    require(v0 >= 0.0 && sigma > 0.0 && cutoff > 0.0 && samples >= 3, "gaussian: bad parameters");
    std::vector<double> r(samples), v(samples);
    for (int i = 0; i < samples; ++i) {
        r[i] = cutoff * sigma * i / (samples - 1);
        v[i] = v0 * std::exp(-0.5 * r[i] * r[i] / (sigma * sigma));
    }
    v.back() = 0.0;
    return RadialPotential(std::move(r), std::move(v));
}

RadialPotential RadialPotential::zero() { return RadialPotential({0.0, 1.0}, {0.0, 0.0}); }

RadialPotential RadialPotential::from_spec(const std::string& spec) {
    if (spec == "zero") return zero();
    auto colon = spec.find(':');
    require(colon != std::string::npos, "potential spec must look like kind:p1,p2 (got '" + spec + "')");
    std::string kind = spec.substr(0, colon);
    if (kind == "csv") return from_csv(spec.substr(colon + 1));
    auto args = parse_numbers(spec.substr(colon + 1));
    if (kind == "soft_ball") {
        require(args.size() == 2, "soft_ball takes V0,R");
        return soft_ball(args[0], args[1]);
    }
    if (kind == "gaussian") {
        require(args.size() == 2, "gaussian takes V0,sigma");
        return gaussian(args[0], args[1]);
    }
    throw ValidationError("unknown potential kind '" + kind + "'");
}

RadialPotential RadialPotential::from_csv(const std::string& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), "cannot open potential file " + path);
    std::string line;
    std::getline(in, line);
    line.erase(std::remove_if(line.begin(), line.end(), ::isspace), line.end());
    require(line == "r,v", "potential CSV must start with header r,v");
    std::vector<double> r, v;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto nums = parse_numbers(line);
        require(nums.size() == 2, path + ":" + std::to_string(lineno) + ": expected two columns");
        r.push_back(nums[0]);
        v.push_back(nums[1]);
    }
    return RadialPotential(std::move(r), std::move(v));
}

double RadialPotential::operator()(double r) const {
    if (r <= 0.0) return v_.front();
    if (r >= r_.back()) return 0.0;
    auto it = std::upper_bound(r_.begin(), r_.end(), r);
    std::size_t i = static_cast<std::size_t>(it - r_.begin());
    double t = (r - r_[i - 1]) / (r_[i] - r_[i - 1]);
    return v_[i - 1] + t * (v_[i] - v_[i - 1]);
}

double RadialPotential::integral() const {
    // 4 pi \int (a + b r) r^2 dr per segment.
    double s = 0.0;
    for (std::size_t i = 1; i < r_.size(); ++i) {
        double r0 = r_[i - 1], r1 = r_[i];
        double b = (v_[i] - v_[i - 1]) / (r1 - r0);
        double a = v_[i - 1] - b * r0;
        s += a * (std::pow(r1, 3) - std::pow(r0, 3)) / 3.0 + b * (std::pow(r1, 4) - std::pow(r0, 4)) / 4.0;
    }
    return 4.0 * std::numbers::pi * s;
}

RadialPotential RadialPotential::scaled(double lambda) const {
    require(lambda > 0.0, "scale factor must be positive");
    std::vector<double> r(r_), v(v_);
    for (auto& x : r) x /= lambda;
    for (auto& x : v) x *= lambda * lambda;
    return RadialPotential(std::move(r), std::move(v));
}

double ScatteringSolution::f(double r) const {
    if (r <= 0.0) return f_values.front();
    if (r >= r_max) return 1.0 - a0 / r;
    auto it = std::upper_bound(r_grid.begin(), r_grid.end(), r);
    std::size_t i = static_cast<std::size_t>(it - r_grid.begin());
    if (i >= r_grid.size()) return 1.0 - a0 / r;
    // Cubic Hermite on u, which is smooth where f = u / r is not evaluated at 0.
    double r0 = r_grid[i - 1], r1 = r_grid[i];
    double h = r1 - r0;
    double t = (r - r0) / h;
    double h00 = (1 + 2 * t) * (1 - t) * (1 - t);
    double h10 = t * (1 - t) * (1 - t);
    double h01 = t * t * (3 - 2 * t);
    double h11 = t * t * (t - 1);
    double u = h00 * u_values[i - 1] + h10 * h * du_values[i - 1] + h01 * u_values[i] + h11 * h * du_values[i];
    return u / r;
}

ScatteringSolution solve_zero_energy(const RadialPotential& v, const SolveOptions& opts) {
    const double support = v.support();
    double r_max = opts.r_max > 0.0 ? opts.r_max : (support > 0.0 ? 10.0 * support : 10.0);
    require(opts.steps >= 16, "scattering: steps must be >= 16");
    require(r_max > 2.0 * support, "scattering: r_max must exceed 2 * r_support");
    const double h0 = r_max / opts.steps;
    require(support == 0.0 || h0 < support / 100.0, "scattering: step must be below r_support / 100; raise steps");

    // Step nodes: every potential knot inside [0, r_max] is a node, each segment has an even
    // number of equal substeps of length <= h0.
    std::vector<double> knots;
    for (double r : v.r_samples())
        if (r < r_max) knots.push_back(r);
    knots.push_back(r_max);

    ScatteringSolution sol;
    sol.r_max = r_max;
    std::vector<double>& rg = sol.r_grid;
    std::vector<double>& u = sol.u_values;
    std::vector<double>& du = sol.du_values;
    rg.push_back(0.0);
    u.push_back(0.0);
    du.push_back(1.0);

    auto rhs = [&v](double r, double uu) { return 0.5 * v(r) * uu; };
    for (std::size_t s = 1; s < knots.size(); ++s) {
        double a = knots[s - 1], b = knots[s];
        int m = std::max(2, static_cast<int>(std::ceil((b - a) / h0 - 1e-9)));
        if (m % 2) ++m;
        double h = (b - a) / m;
        for (int j = 0; j < m; ++j) {
            double r = a + j * h;
            double y0 = u.back(), y1 = du.back();
            // V is sampled from inside the segment so that knot discontinuities never leak.
            auto vr = [&](double x) { return rhs(std::clamp(x, a, b), 1.0); };
            double k1u = y1, k1v = vr(r) * y0;
            double k2u = y1 + 0.5 * h * k1v, k2v = vr(r + 0.5 * h) * (y0 + 0.5 * h * k1u);
            double k3u = y1 + 0.5 * h * k2v, k3v = vr(r + 0.5 * h) * (y0 + 0.5 * h * k2u);
            double k4u = y1 + h * k3v, k4v = vr(r + h) * (y0 + h * k3u);
            double nu = y0 + h / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u);
            double nd = y1 + h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
            if (!std::isfinite(nu) || !std::isfinite(nd))
                throw NumericalError("scattering: non-finite ODE state (pathological potential)");
            rg.push_back(j + 1 == m ? b : r + h);
            u.push_back(nu);
            du.push_back(nd);
        }
    }
    sol.steps = static_cast<int>(rg.size()) - 1;

    // Affine least squares u = A r + B on [2 r_support, r_max].
    const double lo = 2.0 * support;
    double sn = 0, sr = 0, su = 0;
    for (std::size_t i = 0; i < rg.size(); ++i) {
        if (rg[i] < lo) continue;
        sn += 1;
        sr += rg[i];
        su += u[i];
    }
    require(sn >= 2, "scattering: tail fit window is empty");
    const double rbar = sr / sn, ubar = su / sn;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < rg.size(); ++i) {
        if (rg[i] < lo) continue;
        sxx += (rg[i] - rbar) * (rg[i] - rbar);
        sxy += (rg[i] - rbar) * (u[i] - ubar);
    }
    double slope = sxy / sxx;
    double icpt = ubar - slope * rbar;
    if (!(slope > 0.0) || !std::isfinite(slope)) throw NumericalError("scattering: degenerate tail fit");
    sol.a0 = -icpt / slope;
    // For V >= 0 the exact a0 is non-negative; a negative value at rounding level is zero.
    if (sol.a0 < 0.0 && sol.a0 > -1e-10 * r_max) sol.a0 = 0.0;
    for (auto& x : u) x /= slope;
    for (auto& x : du) x /= slope;
    double resid = 0.0;
    for (std::size_t i = 0; i < rg.size(); ++i)
        if (rg[i] >= lo) resid = std::max(resid, std::abs(u[i] - (rg[i] - sol.a0)));
    sol.tail_fit_residual = resid;
    if (resid > opts.residual_tol * std::max(1.0, r_max))
        throw NumericalError("scattering: tail is not affine (residual " + std::to_string(resid) +
                             "); increase r_max");

    sol.f_values.resize(rg.size());
    sol.f_values[0] = du[0];
    for (std::size_t i = 1; i < rg.size(); ++i) sol.f_values[i] = u[i] / rg[i];

    sol.a0_integral = scattering_length_integral(sol, v);
    double tol = opts.consistency_tol * std::max(std::abs(sol.a0), 1e-8) + 1e-11;
    if (std::abs(sol.a0 - sol.a0_integral) > tol)
        throw NumericalError("scattering: tail-fit and integral scattering lengths disagree (" +
                             std::to_string(sol.a0) + " vs " + std::to_string(sol.a0_integral) + ")");
    return sol;
}

double scattering_length_integral(const ScatteringSolution& sol, const RadialPotential& v) {
    const auto& rg = sol.r_grid;
    require(rg.size() >= 3 && sol.f_values.size() == rg.size(), "scattering integral: empty solution");
    require(v.support() <= sol.r_max, "scattering integral: potential support exceeds solution grid");
    // Segment boundaries are the potential knots; each must be a node of the solution grid.
    std::vector<std::size_t> bounds{0};
    const double eps = 1e-12 * sol.r_max;
    for (double k : v.r_samples()) {
        if (k <= 0.0 || k >= sol.r_max) continue;
        auto it = std::lower_bound(rg.begin(), rg.end(), k - eps);
        if (it == rg.end() || std::abs(*it - k) > eps)
            throw ValidationError("scattering integral: potential knot not on the solution grid");
        bounds.push_back(static_cast<std::size_t>(it - rg.begin()));
    }
    bounds.push_back(rg.size() - 1);
    double total = 0.0;
    for (std::size_t s = 1; s < bounds.size(); ++s) {
        std::size_t a = bounds[s - 1], b = bounds[s];
        if (b <= a) continue;
        double lo = rg[a], hi = rg[b];
        if (lo >= v.support()) break;
        auto g = [&](std::size_t i) {
            double r = std::clamp(rg[i], lo, hi);
            // Evaluate V from inside the segment (one-sided at knots).
            double rin = (i == a) ? lo + 1e-14 * (hi - lo) : (i == b ? hi - 1e-14 * (hi - lo) : r);
            return sol.f_values[i] * v(rin) * r * r;
        };
        if ((b - a) % 2)
            throw ValidationError("scattering integral: odd substep count in a segment");
        for (std::size_t i = a; i < b; i += 2) {
            double h = rg[i + 2] - rg[i];
            total += h / 6.0 * (g(i) + 4.0 * g(i + 1) + g(i + 2));
        }
    }
    return 0.5 * total;
}

std::vector<double> scaled_scattering_profile(const ScatteringSolution& sol, double n,
                                              std::span<const double> radii) {
    require(n >= 1.0, "scaled profile: N must be >= 1");
    std::vector<double> out(radii.size());
    for (std::size_t i = 0; i < radii.size(); ++i) {
        require(radii[i] >= 0.0, "scaled profile: negative radius");
        out[i] = sol.f(n * radii[i]);
    }
    return out;
}

}  // namespace gplab::scattering
