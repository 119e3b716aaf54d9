#include "gplab/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "gplab/error.hpp"

namespace gplab {

PeriodicGrid::PeriodicGrid(int dim_, int points_, double box_length_)
    : dim(dim_), points(points_), box_length(box_length_) {
    require(dim >= 1 && dim <= 3, "grid.dim must be 1, 2 or 3");
    require(points >= 8 && (points & (points - 1)) == 0, "grid.points must be a power of two >= 8");
    require(std::isfinite(box_length) && box_length > 0.0, "grid.box_length must be positive");
}

std::size_t PeriodicGrid::size() const {
    std::size_t n = 1;
    for (int d = 0; d < dim; ++d) n *= static_cast<std::size_t>(points);
    return n;
}

double PeriodicGrid::cell_volume() const { return std::pow(spacing(), dim); }
double PeriodicGrid::volume() const { return std::pow(box_length, dim); }

double PeriodicGrid::wavenumber(int j) const {
    return 2.0 * std::numbers::pi / box_length * frequency(j);
}

std::array<int, 3> PeriodicGrid::unflatten(std::size_t idx) const {
    std::array<int, 3> out{0, 0, 0};
    for (int d = dim - 1; d >= 0; --d) {
        out[d] = static_cast<int>(idx % points);
        idx /= points;
    }
    return out;
}

std::size_t PeriodicGrid::flatten(const std::array<int, 3>& ijk) const {
    std::size_t idx = 0;
    for (int d = 0; d < dim; ++d) {
        int j = ((ijk[d] % points) + points) % points;
        idx = idx * points + static_cast<std::size_t>(j);
    }
    return idx;
}

std::array<double, 3> PeriodicGrid::position(std::size_t idx) const {
    auto ijk = unflatten(idx);
    std::array<double, 3> x{0.0, 0.0, 0.0};
    for (int d = 0; d < dim; ++d) x[d] = coordinate(ijk[d]);
    return x;
}

double PeriodicGrid::wrapped_radius(std::size_t idx) const {
    auto x = position(idx);
    double r2 = 0.0;
    for (int d = 0; d < dim; ++d) {
        double v = x[d];
        if (v >= 0.5 * box_length) v -= box_length;
        if (v < -0.5 * box_length) v += box_length;
        r2 += v * v;
    }
    return std::sqrt(r2);
}

std::vector<double> PeriodicGrid::k_squared() const {
    std::vector<double> k2(size());
    for (std::size_t i = 0; i < k2.size(); ++i) {
        auto ijk = unflatten(i);
        double s = 0.0;
        for (int d = 0; d < dim; ++d) {
            double k = wavenumber(ijk[d]);
            s += k * k;
        }
        k2[i] = s;
    }
    return k2;
}

WaveField::WaveField(const PeriodicGrid& g, std::vector<cd> v) : grid(g), values(std::move(v)) {
    require(values.size() == grid.size(), "wave field size does not match grid");
}

double WaveField::inner_norm_sq() const {
    double s = 0.0;
    for (const auto& z : values) s += std::norm(z);
    return s * grid.cell_volume();
}

double WaveField::norm() const { return std::sqrt(inner_norm_sq()); }

void WaveField::normalize() {
    double n = norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw NumericalError("cannot normalize a zero or non-finite field");
    for (auto& z : values) z /= n;
}

cd inner(const WaveField& a, const WaveField& b) {
    require(a.grid == b.grid, "inner product of fields on different grids");
    cd s{};
    for (std::size_t i = 0; i < a.values.size(); ++i) s += std::conj(a.values[i]) * b.values[i];
    return s * a.grid.cell_volume();
}

Fft::Fft(const PeriodicGrid& grid) : size_(grid.size()) {
    std::vector<cd> scratch(size_);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    int n[3] = {grid.points, grid.points, grid.points};
    unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    forward_ = fftw_plan_dft(grid.dim, n, buf, buf, FFTW_FORWARD, flags);
    backward_ = fftw_plan_dft(grid.dim, n, buf, buf, FFTW_BACKWARD, flags);
    if (!forward_ || !backward_) throw NumericalError("FFTW plan creation failed");
}

Fft::~Fft() {
    if (forward_) fftw_destroy_plan(static_cast<fftw_plan>(forward_));
    if (backward_) fftw_destroy_plan(static_cast<fftw_plan>(backward_));
}

void Fft::forward(std::span<cd> data) const {
    require(data.size() == size_, "fft size mismatch");
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(static_cast<fftw_plan>(forward_), p, p);
}

void Fft::backward(std::span<cd> data) const {
    require(data.size() == size_, "fft size mismatch");
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(static_cast<fftw_plan>(backward_), p, p);
}

const Fft& fft_for(const PeriodicGrid& grid) {
    static std::mutex mu;
    static std::map<std::pair<int, int>, std::unique_ptr<Fft>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[{grid.dim, grid.points}];
    if (!slot) slot = std::make_unique<Fft>(grid);
    return *slot;
}

std::vector<cd> kernel_spectrum(const PeriodicGrid& grid, std::span<const double> centred_kernel) {
    require(centred_kernel.size() == grid.size(), "kernel size does not match grid");
    std::vector<cd> k0(grid.size());
    const int half = grid.points / 2;
    for (std::size_t i = 0; i < k0.size(); ++i) {
        auto ijk = grid.unflatten(i);
        for (int d = 0; d < grid.dim; ++d) ijk[d] -= half;
        k0[grid.flatten(ijk)] = centred_kernel[i];
    }
    fft_for(grid).forward(k0);
    const double dv = grid.cell_volume();
    for (auto& z : k0) z *= dv;
    return k0;
}

std::vector<cd> periodic_convolve(const PeriodicGrid& grid, std::span<const double> centred_kernel,
                                  std::span<const cd> field) {
    require(field.size() == grid.size(), "field size does not match grid");
    auto spec = kernel_spectrum(grid, centred_kernel);
    std::vector<cd> f(field.begin(), field.end());
    const auto& fft = fft_for(grid);
    fft.forward(f);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] *= spec[i];
    fft.backward(f);
    const double inv = 1.0 / static_cast<double>(f.size());
    for (auto& z : f) z *= inv;
    return f;
}

}  // namespace gplab
