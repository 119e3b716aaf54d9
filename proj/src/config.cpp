#include "gplab/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <toml.hpp>

#include "gplab/error.hpp"
#include "gplab/report_io.hpp"

namespace gplab::config {

namespace {

std::string where(const toml::node& n) {
    const auto& src = n.source();
    if (!src.begin) return "";
    return " (line " + std::to_string(src.begin.line) + ")";
}

class Reader {
public:
    std::vector<std::string> errors;
    std::size_t unknown_keys = 0;

    using Handler = std::function<void(const std::string& key, const toml::node&)>;

    /// Visits the keys of [section]; unknown keys become errors naming the key.
    void section(const toml::table& root, const std::string& name, const std::map<std::string, Handler>& keys) {
        const toml::node* node = root.get(name);
        if (!node) return;
        const toml::table* tbl = node->as_table();
        if (!tbl) {
            errors.push_back("[" + name + "] must be a table" + where(*node));
            return;
        }
        for (const auto& [k, v] : *tbl) {
            const std::string key(k.str());
            auto it = keys.find(key);
            if (it == keys.end()) {
                ++unknown_keys;
                errors.push_back("unknown key '" + name + "." + key + "'" + where(v));
                continue;
            }
            it->second(name + "." + key, v);
        }
    }

    Handler real(double& out) {
        return [this, &out](const std::string& key, const toml::node& v) {
            if (auto d = v.value_exact<double>())
                out = *d;
            else if (auto i = v.value_exact<int64_t>())
                out = static_cast<double>(*i);
            else
                errors.push_back(key + " must be a number" + where(v));
        };
    }
    Handler optional_real(std::optional<double>& out) {
        return [this, &out](const std::string& key, const toml::node& v) {
            double d = 0.0;
            real(d)(key, v);
            out = d;
        };
    }
    Handler integer(int& out) {
        return [this, &out](const std::string& key, const toml::node& v) {
            auto i = v.value_exact<int64_t>();
            if (!i || *i < INT32_MIN || *i > INT32_MAX)
                errors.push_back(key + " must be an integer" + where(v));
            else
                out = static_cast<int>(*i);
        };
    }
    Handler string(std::string& out) {
        return [this, &out](const std::string& key, const toml::node& v) {
            if (auto s = v.value_exact<std::string>())
                out = *s;
            else
                errors.push_back(key + " must be a string" + where(v));
        };
    }
    Handler boolean(bool& out) {
        return [this, &out](const std::string& key, const toml::node& v) {
            if (auto b = v.value_exact<bool>())
                out = *b;
            else
                errors.push_back(key + " must be true or false" + where(v));
        };
    }
    Handler reals(std::vector<double>& out) {
        return [this, &out](const std::string& key, const toml::node& v) {
            const toml::array* arr = v.as_array();
            if (!arr) {
                errors.push_back(key + " must be an array of numbers" + where(v));
                return;
            }
            std::vector<double> vals;
            for (const auto& e : *arr) {
                if (auto d = e.value_exact<double>())
                    vals.push_back(*d);
                else if (auto i = e.value_exact<int64_t>())
                    vals.push_back(static_cast<double>(*i));
                else {
                    errors.push_back(key + " must contain only numbers" + where(e));
                    return;
                }
            }
            out = std::move(vals);
        };
    }
    template <typename T, std::size_t K>
    Handler triple(std::array<T, K>& out) {
        return [this, &out](const std::string& key, const toml::node& v) {
            std::vector<double> vals;
            reals(vals)(key, v);
            if (vals.size() != K) {
                errors.push_back(key + " must have exactly " + std::to_string(K) + " entries" + where(v));
                return;
            }
            for (std::size_t i = 0; i < K; ++i) {
                if constexpr (std::is_integral_v<T>) {
                    if (vals[i] != std::floor(vals[i])) {
                        errors.push_back(key + " must contain integers" + where(v));
                        return;
                    }
                }
                out[i] = static_cast<T>(vals[i]);
            }
        };
    }
};

bool parses_trap_harmonic(const std::string& s) {
    if (s == "none") return true;
    if (s.rfind("harmonic:", 0) != 0) return false;
    try {
        std::size_t used = 0;
        const std::string rest = s.substr(9);
        double w = std::stod(rest, &used);
        return used == rest.size() && w > 0.0 && std::isfinite(w);
    } catch (...) {
        return false;
    }
}

bool finite_positive(double x) { return std::isfinite(x) && x > 0.0; }

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + "\"";
}

template <typename T>
std::string array_text(const T& xs) {
    std::string out = "[";
    bool first = true;
    for (const auto& x : xs) {
        if (!first) out += ", ";
        first = false;
        if constexpr (std::is_integral_v<std::decay_t<decltype(x)>>)
            out += std::to_string(x);
        else
            out += io::format_double(x);
    }
    return out + "]";
}

}  // namespace

scattering::SolveOptions Config::solve_options() const {
    scattering::SolveOptions o;
    o.r_max = potential.r_max;
    o.steps = potential.steps;
    o.consistency_tol = potential.consistency_tol;
    return o;
}

experiments::ExperimentConfig Config::experiment() const {
    experiments::ExperimentConfig e;
    e.grid = periodic_grid();
    e.modes = fock.modes;
    e.n_max = fock.n_max;
    e.n_list = sweep.n_list;
    e.t_final = sweep.t_final;
    e.dt = sweep.dt;
    e.times = sweep.times;
    e.potential = potential.spec;
    e.phi = fock.phi;
    e.trap = fock.trap;
    e.dimension_cap = static_cast<std::size_t>(std::max(fock.dimension_cap, 0));
    e.loss_gate = fock.loss_gate;
    e.fit_floor = sweep.fit_floor;
    e.krylov_dim = fock.krylov_dim;
    e.krylov_tol = fock.krylov_tol;
    return e;
}

std::vector<std::string> check(const Config& cfg, Purpose purpose) {
    std::vector<std::string> errs;
    auto need = [&errs](bool ok, const std::string& what) {
        if (!ok) errs.push_back(what);
    };
    const auto& g = cfg.grid;
    need(g.dim >= 1 && g.dim <= 3, "grid.dim must be 1, 2 or 3");
    need(g.points >= 8 && g.points <= 4096 && (g.points & (g.points - 1)) == 0,
         "grid.points must be a power of two in [8, 4096]");
    need(finite_positive(g.box_length), "grid.box_length must be > 0");

    const auto& p = cfg.potential;
    if (!p.spec.empty()) {
        try {
            scattering::RadialPotential::from_spec(p.spec);
        } catch (const std::exception& e) {
            errs.push_back(std::string("potential.spec: ") + e.what());
        }
    }
    need(std::isfinite(p.r_max) && p.r_max >= 0.0, "potential.r_max must be >= 0 (0 selects automatically)");
    need(p.steps >= 100, "potential.steps must be >= 100");
    need(finite_positive(p.consistency_tol), "potential.consistency_tol must be > 0");

    const auto& gp = cfg.gp;
    if (gp.a0) need(std::isfinite(*gp.a0) && *gp.a0 >= 0.0, "gp.a0 must be >= 0");
    need(std::isfinite(gp.t) && gp.t >= 0.0, "gp.t must be >= 0");
    need(finite_positive(gp.dt), "gp.dt must be > 0");
    need(gp.initial == "gaussian" || gp.initial == "constant" || gp.initial == "plane",
         "gp.initial must be gaussian, constant or plane");
    need(finite_positive(gp.width), "gp.width must be > 0");
    for (double m : gp.momentum) need(std::isfinite(m), "gp.momentum entries must be finite");
    for (int a = 0; a < 3; ++a) {
        if (a >= g.dim) need(gp.plane_mode[a] == 0 && gp.momentum[a] == 0.0,
                             "gp.plane_mode and gp.momentum must vanish beyond grid.dim");
        need(std::abs(gp.plane_mode[a]) < g.points / 2, "gp.plane_mode entries must satisfy |m| < grid.points / 2");
    }
    need(parses_trap_harmonic(gp.trap), "gp.trap must be none or harmonic:omega with omega > 0");
    need(gp.record_every >= 0, "gp.record_every must be >= 0");
    need(!gp.n_list.empty(), "gp.n_list must not be empty");
    for (std::size_t i = 0; i < gp.n_list.size(); ++i) {
        need(std::isfinite(gp.n_list[i]) && gp.n_list[i] >= 1.0, "gp.n_list entries must be >= 1");
        if (i > 0) need(gp.n_list[i] > gp.n_list[i - 1], "gp.n_list must be strictly ascending");
    }
    need(finite_positive(gp.norm_gate), "gp.norm_gate must be > 0");
    need(finite_positive(gp.tol), "gp.tol must be > 0");
    need(finite_positive(gp.dtau), "gp.dtau must be > 0");
    need(gp.max_iterations >= 1, "gp.max_iterations must be >= 1");

    const bool have_a0 = gp.a0.has_value() || !p.spec.empty();
    switch (purpose) {
        case Purpose::scattering:
            need(!p.spec.empty(), "potential.spec is required (no scattering potential given)");
            break;
        case Purpose::gp:
            need(have_a0, "missing scattering reference: set gp.a0 or potential.spec");
            break;
        case Purpose::ground_state:
            need(have_a0, "missing scattering reference: set gp.a0 or potential.spec");
            need(gp.trap != "none" || !gp.a0 || *gp.a0 > 0.0,
                 "ground-state needs a trap or a0 > 0 (otherwise the minimiser is the constant field)");
            break;
        case Purpose::modgp_compare:
            need(!p.spec.empty(), "missing scattering reference: modgp-compare needs potential.spec");
            need(g.dim == 3, "modgp-compare needs grid.dim = 3");
            break;
        case Purpose::fock_check: {
            const auto& f = cfg.fock;
            need(f.modes >= 1 && f.modes <= 8, "fock.modes must be in [1, 8]");
            need(f.n_max >= 3 && f.n_max <= 64, "fock.n_max must be in [3, 64] for the identity checks");
            need(!p.spec.empty(), "missing scattering reference: fock-check needs potential.spec");
            need(g.dim == 3, "fock-check needs grid.dim = 3");
            need(!cfg.sweep.n_list.empty() && cfg.sweep.n_list.front() >= 1.0,
                 "sweep.n_list must start with N >= 1");
            break;
        }
        case Purpose::sweep: {
            need(!p.spec.empty(), "missing scattering reference: the sweep needs potential.spec");
            // Spec parse errors are already reported above as potential.spec; a bad grid as grid.*.
            try {
                for (auto& e : experiments::validate(cfg.experiment()))
                    if (e.rfind("potential: ", 0) != 0) errs.push_back(e);
            } catch (const ValidationError&) {
            }
            break;
        }
        case Purpose::any:
            break;
    }
    return errs;
}

Validated parse(const std::string& text, Purpose purpose) {
    Validated out;
    toml::table root;
    try {
        root = toml::parse(text);
    } catch (const toml::parse_error& e) {
        std::ostringstream msg;
        msg << "TOML syntax error: " << e.description() << " (line " << e.source().begin.line << ")";
        out.errors.push_back(msg.str());
        return out;
    }
    static const std::set<std::string> sections{"grid", "potential", "gp", "fock", "sweep"};
    for (const auto& [k, v] : root) {
        const std::string key(k.str());
        if (!sections.count(key)) {
            if (v.is_table())
                out.errors.push_back("unknown section '[" + key + "]'" + where(v));
            else
                out.errors.push_back("unknown key '" + key + "' outside any section" + where(v));
        }
    }

    Reader r;
    Config& c = out.config;
    r.section(root, "grid", {{"dim", r.integer(c.grid.dim)},
                             {"points", r.integer(c.grid.points)},
                             {"box_length", r.real(c.grid.box_length)}});
    r.section(root, "potential", {{"spec", r.string(c.potential.spec)},
                                  {"r_max", r.real(c.potential.r_max)},
                                  {"steps", r.integer(c.potential.steps)},
                                  {"consistency_tol", r.real(c.potential.consistency_tol)}});
    r.section(root, "gp", {{"a0", r.optional_real(c.gp.a0)},
                           {"t", r.real(c.gp.t)},
                           {"dt", r.real(c.gp.dt)},
                           {"initial", r.string(c.gp.initial)},
                           {"width", r.real(c.gp.width)},
                           {"momentum", r.triple(c.gp.momentum)},
                           {"plane_mode", r.triple(c.gp.plane_mode)},
                           {"trap", r.string(c.gp.trap)},
                           {"record_every", r.integer(c.gp.record_every)},
                           {"n_list", r.reals(c.gp.n_list)},
                           {"norm_gate", r.real(c.gp.norm_gate)},
                           {"tol", r.real(c.gp.tol)},
                           {"dtau", r.real(c.gp.dtau)},
                           {"max_iterations", r.integer(c.gp.max_iterations)},
                           {"dump", r.boolean(c.gp.dump)}});
    r.section(root, "fock", {{"modes", r.integer(c.fock.modes)},
                             {"n_max", r.integer(c.fock.n_max)},
                             {"phi", r.reals(c.fock.phi)},
                             {"trap", r.string(c.fock.trap)},
                             {"loss_gate", r.real(c.fock.loss_gate)},
                             {"krylov_dim", r.integer(c.fock.krylov_dim)},
                             {"krylov_tol", r.real(c.fock.krylov_tol)},
                             {"dimension_cap", r.integer(c.fock.dimension_cap)}});
    r.section(root, "sweep", {{"n_list", r.reals(c.sweep.n_list)},
                              {"t_final", r.real(c.sweep.t_final)},
                              {"dt", r.real(c.sweep.dt)},
                              {"times", r.reals(c.sweep.times)},
                              {"fit_floor", r.real(c.sweep.fit_floor)},
                              {"dump", r.boolean(c.sweep.dump)}});
    out.errors.insert(out.errors.end(), r.errors.begin(), r.errors.end());
    // Range checks only make sense once the types are right.
    if (r.errors.size() == r.unknown_keys)
        for (auto& e : check(c, purpose)) out.errors.push_back(std::move(e));
    return out;
}

Validated validate_config(const std::filesystem::path& path, Purpose purpose) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        Validated v;
        v.errors.push_back("cannot read config file " + path.string());
        return v;
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), purpose);
}

std::string normalized_toml(const Config& c) {
    using io::format_double;
    std::ostringstream o;
    o << "[grid]\n";
    o << "dim = " << c.grid.dim << "\n";
    o << "points = " << c.grid.points << "\n";
    o << "box_length = " << format_double(c.grid.box_length) << "\n\n";

    o << "[potential]\n";
    o << "spec = " << quote(c.potential.spec) << "\n";
    o << "r_max = " << format_double(c.potential.r_max) << "\n";
    o << "steps = " << c.potential.steps << "\n";
    o << "consistency_tol = " << format_double(c.potential.consistency_tol) << "\n\n";

    o << "[gp]\n";
    if (c.gp.a0)
        o << "a0 = " << format_double(*c.gp.a0) << "\n";
    else
        o << "# a0 is computed from [potential]\n";
    o << "t = " << format_double(c.gp.t) << "\n";
    o << "dt = " << format_double(c.gp.dt) << "\n";
    o << "initial = " << quote(c.gp.initial) << "\n";
    o << "width = " << format_double(c.gp.width) << "\n";
    o << "momentum = " << array_text(c.gp.momentum) << "\n";
    o << "plane_mode = " << array_text(c.gp.plane_mode) << "\n";
    o << "trap = " << quote(c.gp.trap) << "\n";
    o << "record_every = " << c.gp.record_every << "\n";
    o << "n_list = " << array_text(c.gp.n_list) << "\n";
    o << "norm_gate = " << format_double(c.gp.norm_gate) << "\n";
    o << "tol = " << format_double(c.gp.tol) << "\n";
    o << "dtau = " << format_double(c.gp.dtau) << "\n";
    o << "max_iterations = " << c.gp.max_iterations << "\n";
    o << "dump = " << (c.gp.dump ? "true" : "false") << "\n\n";

    o << "[fock]\n";
    o << "modes = " << c.fock.modes << "\n";
    o << "n_max = " << c.fock.n_max << "\n";
    o << "phi = " << array_text(c.fock.phi) << "\n";
    o << "trap = " << quote(c.fock.trap) << "\n";
    o << "loss_gate = " << format_double(c.fock.loss_gate) << "\n";
    o << "krylov_dim = " << c.fock.krylov_dim << "\n";
    o << "krylov_tol = " << format_double(c.fock.krylov_tol) << "\n";
    o << "dimension_cap = " << c.fock.dimension_cap << "\n\n";

    o << "[sweep]\n";
    o << "n_list = " << array_text(c.sweep.n_list) << "\n";
    o << "t_final = " << format_double(c.sweep.t_final) << "\n";
    o << "dt = " << format_double(c.sweep.dt) << "\n";
    o << "times = " << array_text(c.sweep.times) << "\n";
    o << "fit_floor = " << format_double(c.sweep.fit_floor) << "\n";
    o << "dump = " << (c.sweep.dump ? "true" : "false") << "\n";
    return o.str();
}

}  // namespace gplab::config
