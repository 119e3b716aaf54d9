#include "gplab/fock.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <tuple>

#include "gplab/error.hpp"
#include "gplab/kernels.hpp"

namespace gplab::fock {

namespace {

using Triplet = Eigen::Triplet<cd>;

constexpr int kMaxModes = 8;

void enumerate_shell(int modes, int n, std::vector<std::uint8_t>& cur, int pos, std::vector<std::uint8_t>& out) {
    if (pos == modes - 1) {
        cur[pos] = static_cast<std::uint8_t>(n);
        out.insert(out.end(), cur.begin(), cur.end());
        return;
    }
    for (int v = n; v >= 0; --v) {
        cur[pos] = static_cast<std::uint8_t>(v);
        enumerate_shell(modes, n - v, cur, pos + 1, out);
    }
}

Sparse from_triplets(std::size_t dim, const std::vector<Triplet>& t) {
    Sparse m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    m.setFromTriplets(t.begin(), t.end());
    m.makeCompressed();
    return m;
}

double max_abs(const Dense& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

Action apply_generator(const Sparse& gen, const FockVector& v, const linalg::ExpmvOptions& opts) {
    // exp(G) v = exp(-i H) v with H = i G Hermitian.
    const double bound = linalg::norm_bound(gen);
    Vec x = v.amplitudes;
    linalg::expmv_hermitian([&gen](const Vec& in, Vec& out) { out.noalias() = cd(0.0, 1.0) * (gen * in); }, bound, x,
                            1.0, opts);
    Action a{FockVector(v.basis, std::move(x)), 0.0};
    a.boundary_weight = boundary_weight(a.state);
    return a;
}

double unitarity_defect(const Dense& u) {
    return max_abs(u.adjoint() * u - Dense::Identity(u.rows(), u.cols()));
}

}  // namespace

// FockBasis ---------------------------------------------------------------------------------

std::size_t FockBasis::count(int modes, int n_max) {
    // C(M + n_max, n_max)
    long double c = 1.0L;
    for (int i = 1; i <= n_max; ++i) c = c * (modes + i) / i;
    return static_cast<std::size_t>(std::llround(static_cast<double>(c)));
}

FockBasis::FockBasis(int modes, int n_max) : modes_(modes), n_max_(n_max) {
    require(modes >= 1 && modes <= kMaxModes, "Fock basis: modes must be in [1, 8]");
    require(n_max >= 0 && n_max <= 255, "Fock basis: n_max must be in [0, 255]");
    require(count(modes, n_max) <= 5'000'000, "Fock basis: dimension too large");
    std::vector<std::uint8_t> cur(modes);
    shells_.push_back(0);
    for (int n = 0; n <= n_max; ++n) {
        enumerate_shell(modes, n, cur, 0, occ_);
        shells_.push_back(occ_.size() / modes);
    }
    const std::size_t dim = occ_.size() / modes;
    totals_.resize(dim);
    lookup_.reserve(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        auto o = occupation(i);
        int s = 0;
        for (auto x : o) s += x;
        totals_[i] = s;
        lookup_.emplace(key(o), i);
    }
}

std::uint64_t FockBasis::key(std::span<const std::uint8_t> occ) const {
    std::uint64_t k = 0;
    for (auto x : occ) k = (k << 8) | x;
    return k;
}

std::optional<std::size_t> FockBasis::index(std::span<const std::uint8_t> occ) const {
    if (occ.size() != static_cast<std::size_t>(modes_)) return std::nullopt;
    auto it = lookup_.find(key(occ));
    if (it == lookup_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::size_t> FockBasis::index(std::span<const int> occ) const {
    if (occ.size() != static_cast<std::size_t>(modes_)) return std::nullopt;
    std::array<std::uint8_t, kMaxModes> o{};
    int s = 0;
    for (std::size_t i = 0; i < occ.size(); ++i) {
        if (occ[i] < 0 || occ[i] > n_max_) return std::nullopt;
        o[i] = static_cast<std::uint8_t>(occ[i]);
        s += occ[i];
    }
    if (s > n_max_) return std::nullopt;
    return index(std::span<const std::uint8_t>(o.data(), occ.size()));
}

// Vectors and operators ---------------------------------------------------------------------

FockVector::FockVector(BasisPtr b, Vec a) : basis(std::move(b)), amplitudes(std::move(a)) {
    require(basis != nullptr, "Fock vector needs a basis");
    require(static_cast<std::size_t>(amplitudes.size()) == basis->size(), "Fock vector size does not match basis");
}

FockVector FockVector::vacuum(BasisPtr b) {
    Vec a = Vec::Zero(static_cast<Eigen::Index>(b->size()));
    a(0) = 1.0;
    return FockVector(std::move(b), std::move(a));
}

Dense FockOperator::to_dense() const {
    if (is_sparse()) return Dense(sparse());
    return dense();
}

Vec FockOperator::apply(const Vec& v) const {
    if (is_sparse()) return sparse() * v;
    return dense() * v;
}

FockVector FockOperator::apply(const FockVector& v) const {
    require(v.basis->size() == basis_->size(), "operator and vector bases differ");
    return FockVector(v.basis, apply(v.amplitudes));
}

// Ladder algebra ----------------------------------------------------------------------------

Sparse annihilator(const FockBasis& basis, int mode) {
    require(mode >= 0 && mode < basis.modes(), "mode index out of range");
    std::vector<Triplet> t;
    std::vector<std::uint8_t> o(basis.modes());
    for (std::size_t s = 0; s < basis.size(); ++s) {
        auto occ = basis.occupation(s);
        if (occ[mode] == 0) continue;
        std::copy(occ.begin(), occ.end(), o.begin());
        o[mode] -= 1;
        auto r = basis.index(std::span<const std::uint8_t>(o));
        t.emplace_back(static_cast<int>(*r), static_cast<int>(s), std::sqrt(static_cast<double>(occ[mode])));
    }
    return from_triplets(basis.size(), t);
}

std::vector<std::pair<FockOperator, FockOperator>> ladder_ops(const BasisPtr& basis) {
    std::vector<std::pair<FockOperator, FockOperator>> out;
    for (int i = 0; i < basis->modes(); ++i) {
        Sparse a = annihilator(*basis, i);
        Sparse ad = a.adjoint();
        out.emplace_back(FockOperator(basis, std::move(a)), FockOperator(basis, std::move(ad)));
    }
    return out;
}

Sparse number_matrix(const FockBasis& basis) {
    std::vector<Triplet> t;
    for (std::size_t s = 0; s < basis.size(); ++s)
        if (basis.total(s) > 0) t.emplace_back(static_cast<int>(s), static_cast<int>(s), basis.total(s));
    return from_triplets(basis.size(), t);
}

FockOperator number_operator(const BasisPtr& basis) { return FockOperator(basis, number_matrix(*basis)); }

Sparse one_body(const FockBasis& basis, const Dense& h) {
    const int m = basis.modes();
    require(h.rows() == m && h.cols() == m, "one-body matrix has the wrong shape");
    std::vector<Triplet> t;
    std::vector<std::uint8_t> o(m);
    for (std::size_t s = 0; s < basis.size(); ++s) {
        auto occ = basis.occupation(s);
        for (int j = 0; j < m; ++j) {
            if (occ[j] == 0) continue;
            for (int i = 0; i < m; ++i) {
                cd c = h(i, j);
                if (c == 0.0) continue;
                std::copy(occ.begin(), occ.end(), o.begin());
                o[j] -= 1;
                o[i] += 1;
                auto r = basis.index(std::span<const std::uint8_t>(o));
                t.emplace_back(static_cast<int>(*r), static_cast<int>(s),
                               c * std::sqrt(static_cast<double>(occ[j])) * std::sqrt(static_cast<double>(o[i])));
            }
        }
    }
    return from_triplets(basis.size(), t);
}

Sparse weyl_generator(const FockBasis& basis, const Vec& g) {
    require(g.size() == basis.modes(), "Weyl argument has the wrong number of modes");
    Sparse gen(static_cast<Eigen::Index>(basis.size()), static_cast<Eigen::Index>(basis.size()));
    for (int i = 0; i < basis.modes(); ++i) {
        if (g(i) == 0.0) continue;
        Sparse a = annihilator(basis, i);
        Sparse ad = a.adjoint();
        gen += g(i) * ad - std::conj(g(i)) * a;
    }
    gen.makeCompressed();
    return gen;
}

Sparse bogoliubov_generator(const FockBasis& basis, const Dense& k) {
    const int m = basis.modes();
    require(k.rows() == m && k.cols() == m, "Bogoliubov kernel has the wrong shape");
    std::vector<Triplet> t;
    std::vector<std::uint8_t> o(m);
    for (std::size_t s = 0; s < basis.size(); ++s) {
        if (basis.total(s) + 2 > basis.n_max()) continue;
        auto occ = basis.occupation(s);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
                cd c = 0.5 * k(i, j);
                if (c == 0.0) continue;
                std::copy(occ.begin(), occ.end(), o.begin());
                double f = std::sqrt(o[j] + 1.0);
                o[j] += 1;
                f *= std::sqrt(o[i] + 1.0);
                o[i] += 1;
                auto r = basis.index(std::span<const std::uint8_t>(o));
                t.emplace_back(static_cast<int>(*r), static_cast<int>(s), c * f);
            }
    }
    Sparse create = from_triplets(basis.size(), t);
    Sparse ann = create.adjoint();
    Sparse gen = create - ann;
    gen.makeCompressed();
    return gen;
}

FockOperator weyl(const Vec& g, const BasisPtr& basis, const UnitaryOptions& opts) {
    if (opts.check_preconditions)
        require(g.squaredNorm() <= basis->n_max() / 4.0 + 1e-12, "weyl: ||g||^2 exceeds n_max / 4");
    Dense gen(weyl_generator(*basis, g));
    Dense u = gen.exp();
    if (unitarity_defect(u) > opts.unitarity_gate) throw NumericalError("weyl: unitarity defect above gate");
    return FockOperator(basis, std::move(u));
}

FockOperator bogoliubov(const Dense& k, const BasisPtr& basis, const UnitaryOptions& opts) {
    if (opts.check_preconditions) require(k.norm() <= 2.0, "bogoliubov: kernel HS norm exceeds 2");
    Dense gen(bogoliubov_generator(*basis, k));
    Dense u = gen.exp();
    if (unitarity_defect(u) > opts.unitarity_gate) throw NumericalError("bogoliubov: unitarity defect above gate");
    return FockOperator(basis, std::move(u));
}

FockOperator bogoliubov(const CorrelationKernel& k, const BasisPtr& basis, const UnitaryOptions& opts) {
    return bogoliubov(k.mode_matrix, basis, opts);
}

Action apply_weyl(const Vec& g, const FockVector& v, const linalg::ExpmvOptions& opts) {
    return apply_generator(weyl_generator(*v.basis, g), v, opts);
}

Action apply_bogoliubov(const Dense& k, const FockVector& v, const linalg::ExpmvOptions& opts) {
    return apply_generator(bogoliubov_generator(*v.basis, k), v, opts);
}

std::pair<Dense, Dense> cosh_sinh(const Dense& k) {
    require(k.rows() == k.cols(), "cosh_sinh: kernel must be square");
    const auto m = k.rows();
    Dense kk = k * k.conjugate();
    kk = 0.5 * (kk + kk.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Dense> es(kk);
    Dense u = es.eigenvectors();
    Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
    Eigen::VectorXcd ch(m), sh(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        double s = std::sqrt(lam(i));
        ch(i) = std::cosh(s);
        // sinh(s)/s with its series near 0.
        sh(i) = s > 1e-6 ? std::sinh(s) / s : 1.0 + s * s / 6.0;
    }
    Dense c = u * ch.asDiagonal() * u.adjoint();
    Dense sn = u * sh.asDiagonal() * u.adjoint() * k;
    return {c, sn};
}

double boundary_weight(const FockVector& v) {
    const auto& b = *v.basis;
    const auto lo = static_cast<Eigen::Index>(b.shell_begin(std::max(0, b.n_max() - 1)));
    const auto hi = static_cast<Eigen::Index>(b.shell_end(b.n_max()));
    return v.amplitudes.segment(lo, hi - lo).squaredNorm();
}

cd expectation(const FockVector& v, const Sparse& op) { return v.amplitudes.dot(op * v.amplitudes); }

// Modes -------------------------------------------------------------------------------------

ModeBasis ModeBasis::from_momenta(const PeriodicGrid& grid, std::vector<std::array<int, 3>> momenta) {
    require(!momenta.empty(), "mode basis needs at least one mode");
    ModeBasis mb;
    mb.grid = grid;
    mb.momenta = std::move(momenta);
    const double c = 1.0 / std::sqrt(grid.volume());
    const double q = 2.0 * std::numbers::pi / grid.box_length;
    for (const auto& k : mb.momenta) {
        for (int d = 0; d < 3; ++d) {
            require(d < grid.dim || k[d] == 0, "mode momentum has components beyond the grid dimension");
            require(std::abs(k[d]) < grid.points / 2, "mode momentum beyond the grid's resolved band");
        }
        WaveField f(grid);
        for (std::size_t i = 0; i < f.values.size(); ++i) {
            auto x = grid.position(i);
            double ph = 0.0;
            for (int d = 0; d < grid.dim; ++d) ph += q * k[d] * x[d];
            f.values[i] = std::polar(c, ph);
        }
        mb.fields.push_back(std::move(f));
    }
    // Kinetic matrix from spectral gradients.
    const int m = mb.size();
    const auto k2 = grid.k_squared();
    std::vector<std::vector<cd>> spec(m);
    for (int i = 0; i < m; ++i) {
        spec[i] = mb.fields[i].values;
        fft_for(grid).forward(spec[i]);
    }
    mb.kinetic = Dense::Zero(m, m);
    const double scale = grid.cell_volume() / static_cast<double>(grid.size());
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            cd s = 0.0;
            for (std::size_t p = 0; p < k2.size(); ++p) s += k2[p] * std::conj(spec[i][p]) * spec[j][p];
            mb.kinetic(i, j) = s * scale;
        }
    for (int i = 0; i < m; ++i) mb.kinetic_diag.push_back(mb.kinetic(i, i).real());
    return mb;
}

ModeBasis ModeBasis::plane_waves(const PeriodicGrid& grid, int m) {
    require(m >= 1, "mode count must be >= 1");
    const int lim = grid.points / 2 - 1;
    using Key = std::tuple<int, int, int, int, int, int, int>;
    std::vector<std::pair<Key, std::array<int, 3>>> cand;
    const int ry = grid.dim >= 2 ? lim : 0, rz = grid.dim >= 3 ? lim : 0;
    for (int x = -lim; x <= lim; ++x)
        for (int y = -ry; y <= ry; ++y)
            for (int z = -rz; z <= rz; ++z) {
                Key key{x * x + y * y + z * z, -std::abs(x), -std::abs(y), -std::abs(z), x, y, z};
                cand.push_back({key, {x, y, z}});
            }
    require(static_cast<std::size_t>(m) <= cand.size(), "more modes requested than the grid resolves");
    std::sort(cand.begin(), cand.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<std::array<int, 3>> mom;
    for (int i = 0; i < m; ++i) mom.push_back(cand[i].second);
    return from_momenta(grid, std::move(mom));
}

Vec ModeBasis::coefficients(const WaveField& phi) const {
    require(phi.grid == grid, "field and mode basis grids differ");
    Vec c(size());
    for (int i = 0; i < size(); ++i) c(i) = inner(fields[i], phi);
    return c;
}

WaveField ModeBasis::synthesize(const Vec& c) const {
    require(c.size() == size(), "coefficient count does not match the mode basis");
    WaveField f(grid);
    for (int i = 0; i < size(); ++i)
        for (std::size_t p = 0; p < f.values.size(); ++p) f.values[p] += c(i) * fields[i].values[p];
    return f;
}

double ModeBasis::gram_defect() const {
    double d = 0.0;
    for (int i = 0; i < size(); ++i)
        for (int j = 0; j < size(); ++j)
            d = std::max(d, std::abs(inner(fields[i], fields[j]) - (i == j ? 1.0 : 0.0)));
    return d;
}

// Kernels and Hamiltonian -------------------------------------------------------------------

CorrelationKernel build_correlation_kernel(const WaveField& phi, const scattering::ScatteringSolution& sol,
                                           const scattering::RadialPotential& v, double n, const ModeBasis& modes) {
    require(phi.grid == modes.grid, "field and mode basis grids differ");
    const auto& grid = modes.grid;
    const int m = modes.size();
    const double dv = grid.cell_volume();
    auto w = kernels::pair_correlation(grid, sol, v, n);

    CorrelationKernel out;
    out.mode_matrix = Dense::Zero(m, m);
    std::vector<cd> h(grid.size());
    for (int j = 0; j < m; ++j) {
        for (std::size_t p = 0; p < h.size(); ++p) h[p] = std::conj(modes.fields[j].values[p]) * phi.values[p];
        auto conv = periodic_convolve(grid, w, h);
        for (int i = 0; i < m; ++i) {
            cd s = 0.0;
            for (std::size_t p = 0; p < h.size(); ++p)
                s += std::conj(modes.fields[i].values[p]) * phi.values[p] * conv[p];
            out.mode_matrix(i, j) = -s * dv;
        }
    }

    auto w2 = kernels::pair_correlation_squared(grid, sol, v, n);
    std::vector<cd> rho(grid.size());
    for (std::size_t p = 0; p < rho.size(); ++p) rho[p] = std::norm(phi.values[p]);
    auto conv = periodic_convolve(grid, w2, rho);
    double hs2 = 0.0;
    for (std::size_t p = 0; p < rho.size(); ++p) hs2 += rho[p].real() * conv[p].real();
    out.hs_norm = std::sqrt(std::max(0.0, hs2 * dv));
    return out;
}

std::vector<cd> interaction_tensor(const ModeBasis& modes, std::span<const double> kernel) {
    const auto& grid = modes.grid;
    const int m = modes.size();
    const double dv = grid.cell_volume();
    std::vector<cd> out(static_cast<std::size_t>(m) * m * m * m);
    std::vector<cd> pair(grid.size());
    for (int j = 0; j < m; ++j)
        for (int l = 0; l < m; ++l) {
            for (std::size_t p = 0; p < pair.size(); ++p)
                pair[p] = std::conj(modes.fields[j].values[p]) * modes.fields[l].values[p];
            auto conv = periodic_convolve(grid, kernel, pair);
            for (int i = 0; i < m; ++i)
                for (int k = 0; k < m; ++k) {
                    cd s = 0.0;
                    for (std::size_t p = 0; p < pair.size(); ++p)
                        s += std::conj(modes.fields[i].values[p]) * modes.fields[k].values[p] * conv[p];
                    out[((static_cast<std::size_t>(i) * m + j) * m + k) * m + l] = s * dv;
                }
        }
    return out;
}

std::vector<cd> interaction_tensor(const ModeBasis& modes, const scattering::RadialPotential& v, double n) {
    auto kernel = kernels::scaled_potential(modes.grid, v, n);
    return interaction_tensor(modes, kernel);
}

FockOperator assemble_hamiltonian(const ModeBasis& modes, std::span<const cd> tensor, double n,
                                  const BasisPtr& basis) {
    const int m = modes.size();
    require(basis->modes() == m, "Fock basis and mode basis disagree on M");
    require(tensor.size() == static_cast<std::size_t>(m) * m * m * m, "interaction tensor has the wrong size");
    require(n > 0.0, "N must be positive");
    double vmax = 0.0;
    for (const auto& x : tensor) vmax = std::max(vmax, std::abs(x));
    const double cut = 1e-15 * vmax;

    std::vector<Triplet> t;
    std::vector<std::uint8_t> o(m);
    const double pref = 0.5 / n;
    for (std::size_t s = 0; s < basis->size(); ++s) {
        auto occ = basis->occupation(s);
        if (basis->total(s) < 2) continue;
        for (int k = 0; k < m; ++k) {
            if (occ[k] == 0) continue;
            for (int l = 0; l < m; ++l) {
                std::copy(occ.begin(), occ.end(), o.begin());
                double f = std::sqrt(static_cast<double>(o[k]));
                o[k] -= 1;
                if (o[l] == 0) continue;
                f *= std::sqrt(static_cast<double>(o[l]));
                o[l] -= 1;
                for (int j = 0; j < m; ++j)
                    for (int i = 0; i < m; ++i) {
                        cd vijkl = tensor[((static_cast<std::size_t>(i) * m + j) * m + k) * m + l];
                        if (std::abs(vijkl) <= cut) continue;
                        std::array<std::uint8_t, kMaxModes> q{};
                        std::copy(o.begin(), o.end(), q.begin());
                        double g = std::sqrt(q[j] + 1.0);
                        q[j] += 1;
                        g *= std::sqrt(q[i] + 1.0);
                        q[i] += 1;
                        auto r = basis->index(std::span<const std::uint8_t>(q.data(), m));
                        t.emplace_back(static_cast<int>(*r), static_cast<int>(s), pref * vijkl * f * g);
                    }
            }
        }
    }
    Sparse h = from_triplets(basis->size(), t);
    h += one_body(*basis, modes.kinetic);
    h.makeCompressed();
    Sparse diff = h - Sparse(h.adjoint());
    double herm = 0.0;
    for (int r = 0; r < diff.outerSize(); ++r)
        for (Sparse::InnerIterator it(diff, r); it; ++it) herm = std::max(herm, std::abs(it.value()));
    if (herm > 1e-10) throw NumericalError("Hamiltonian is not Hermitian (defect " + std::to_string(herm) + ")");
    return FockOperator(basis, std::move(h));
}

FockOperator assemble_hamiltonian(const ModeBasis& modes, const scattering::RadialPotential& v, double n,
                                  const BasisPtr& basis) {
    auto tensor = interaction_tensor(modes, v, n);
    return assemble_hamiltonian(modes, tensor, n, basis);
}

FockOperator trap_operator(const ModeBasis& modes, std::span<const double> trap, const BasisPtr& basis) {
    const auto& grid = modes.grid;
    require(trap.size() == grid.size(), "trap size does not match grid");
    const int m = modes.size();
    Dense u(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            cd s = 0.0;
            for (std::size_t p = 0; p < trap.size(); ++p)
                s += std::conj(modes.fields[i].values[p]) * trap[p] * modes.fields[j].values[p];
            u(i, j) = s * grid.cell_volume();
        }
    return FockOperator(basis, one_body(*basis, u));
}

SqueezedCoherent squeezed_coherent(const Vec& phi_coeffs, const Dense& k, const FockVector& chi, double n,
                                   double loss_gate, const linalg::ExpmvOptions& opts) {
    const auto& basis = chi.basis;
    require(n >= 0.0, "N must be >= 0");
    require(n <= basis->n_max() / 2.0, "squeezed_coherent: N exceeds n_max / 2");
    SqueezedCoherent out;
    auto t = apply_bogoliubov(k, chi, opts);
    out.truncation_loss += t.boundary_weight;
    FockVector cur = std::move(t.state);
    if (n > 0.0) {
        auto w = apply_weyl(std::sqrt(n) * phi_coeffs, cur, opts);
        out.truncation_loss += w.boundary_weight;
        cur = std::move(w.state);
    }
    out.state = std::move(cur);
    if (out.truncation_loss > loss_gate)
        throw NumericalError("squeezed_coherent: truncation loss " + std::to_string(out.truncation_loss) +
                             " above gate; raise n_max");
    if (std::abs(out.state.norm() - chi.norm()) > 1e-6) throw NumericalError("squeezed_coherent: norm not preserved");
    return out;
}

Dense reduced_density(const FockVector& psi) {
    const auto& b = *psi.basis;
    const int m = b.modes();
    Dense g = Dense::Zero(m, m);
    std::vector<std::uint8_t> o(m);
    const auto& a = psi.amplitudes;
    for (std::size_t s = 0; s < b.size(); ++s) {
        if (a(s) == 0.0) continue;
        auto occ = b.occupation(s);
        for (int i = 0; i < m; ++i) {
            if (occ[i] == 0) continue;
            for (int j = 0; j < m; ++j) {
                std::copy(occ.begin(), occ.end(), o.begin());
                double f = std::sqrt(static_cast<double>(o[i]));
                o[i] -= 1;
                f *= std::sqrt(o[j] + 1.0);
                o[j] += 1;
                auto r = b.index(std::span<const std::uint8_t>(o));
                g(i, j) += std::conj(a(*r)) * a(s) * f;
            }
        }
    }
    cd tr = g.trace();
    if (!(tr.real() > 1e-300)) throw ValidationError("reduced_density: state has no particles");
    return g / tr.real();
}

double trace_norm_distance(const Dense& gamma, const Vec& phi) {
    require(gamma.rows() == gamma.cols() && gamma.rows() == phi.size(), "trace_norm_distance: shape mismatch");
    require(std::abs(phi.norm() - 1.0) < 1e-8, "trace_norm_distance: phi must be a unit vector");
    Dense d = gamma - phi * phi.adjoint();
    d = 0.5 * (d + d.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Dense> es(d, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum();
}

}  // namespace gplab::fock
