#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace gplab {

using cd = std::complex<double>;

/// Periodic box [-L/2, L/2)^dim sampled with `points` per axis.
struct PeriodicGrid {
    int dim = 1;
    int points = 256;
    double box_length = 20.0;

    PeriodicGrid() = default;
    PeriodicGrid(int dim, int points, double box_length);

    std::size_t size() const;
    double spacing() const { return box_length / points; }
    double cell_volume() const;
    double volume() const;

    /// Coordinate of sample j along any axis.
    double coordinate(int j) const { return -0.5 * box_length + j * spacing(); }
    /// Angular wavenumber of FFT bin j (standard ordering, Nyquist negative).
    double wavenumber(int j) const;
    /// Integer frequency of FFT bin j.
    int frequency(int j) const { return j < points / 2 ? j : j - points; }

    std::array<int, 3> unflatten(std::size_t idx) const;
    std::size_t flatten(const std::array<int, 3>& ijk) const;

    /// Position of a flattened sample (unused axes are 0).
    std::array<double, 3> position(std::size_t idx) const;
    /// Minimum-image distance of sample idx from the origin sample.
    double wrapped_radius(std::size_t idx) const;

    std::vector<double> k_squared() const;

    bool operator==(const PeriodicGrid& o) const {
        return dim == o.dim && points == o.points && box_length == o.box_length;
    }
};

/// Complex one-particle field on a periodic grid.
struct WaveField {
    PeriodicGrid grid;
    std::vector<cd> values;

    WaveField() = default;
    explicit WaveField(const PeriodicGrid& g) : grid(g), values(g.size(), cd{}) {}
    WaveField(const PeriodicGrid& g, std::vector<cd> v);

    double norm() const;
    void normalize();
    double inner_norm_sq() const;
};

/// Discrete L2 inner product <a, b> with cell-volume weight.
cd inner(const WaveField& a, const WaveField& b);

/// Thin RAII wrapper around an FFTW complex plan pair for one grid shape.
/// Transforms are unnormalized in both directions.
class Fft {
public:
    explicit Fft(const PeriodicGrid& grid);
    ~Fft();
    Fft(const Fft&) = delete;
    Fft& operator=(const Fft&) = delete;

    void forward(std::span<cd> data) const;
    void backward(std::span<cd> data) const;
    std::size_t size() const { return size_; }

private:
    void* forward_ = nullptr;
    void* backward_ = nullptr;
    std::size_t size_ = 0;
};

/// Shared plan for the grid shape (created once per shape).
const Fft& fft_for(const PeriodicGrid& grid);

/// Periodic convolution (kernel * field)(x) = sum_y kernel(x - y) field(y) dV,
/// with the kernel stored with its origin at the centre sample of the grid.
std::vector<cd> periodic_convolve(const PeriodicGrid& grid, std::span<const double> centred_kernel,
                                  std::span<const cd> field);

/// Spectrum of a centred real kernel, scaled so that multiplying a field spectrum by it and
/// transforming back (with 1/size) yields the convolution including the dV weight.
std::vector<cd> kernel_spectrum(const PeriodicGrid& grid, std::span<const double> centred_kernel);

}  // namespace gplab
