#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace mkdv {

using cplx = std::complex<double>;

/// Uniform periodic grid on [-L, L) with n (a power of two) collocation
/// nodes and cached FFT plans. Cheap to copy; all state is immutable
/// after construction, so a Grid may be shared freely across threads.
class Grid {
public:
    Grid(double half_length, std::size_t n);

    double half_length() const noexcept;
    std::size_t size() const noexcept;
    double spacing() const noexcept;
    std::span<const double> nodes() const noexcept;
    /// Wavenumbers pi*m/L in FFT ordering (m = 0..n/2-1, -n/2..-1).
    std::span<const double> wavenumbers() const noexcept;
    double node(std::size_t j) const;
    /// Index of the node closest to x (x must lie in [-L, L)).
    std::size_t nearest_index(double x) const;

    /// Unnormalized forward DFT and 1/n-normalized inverse.
    void forward_fft(std::span<const cplx> in, std::span<cplx> out) const;
    void inverse_fft(std::span<const cplx> in, std::span<cplx> out) const;

    friend bool operator==(const Grid& a, const Grid& b) noexcept;

private:
    struct Impl;
    std::shared_ptr<const Impl> impl_;
};

/// Complex-valued samples on a Grid. Value type: copies are independent.
class Field {
public:
    explicit Field(Grid grid);
    Field(Grid grid, std::vector<cplx> values);

    static Field sample(const Grid& g, const std::function<cplx(double)>& f);
    static Field sample_real(const Grid& g, const std::function<double(double)>& f);

    const Grid& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return values_.size(); }
    std::span<const cplx> values() const noexcept { return values_; }
    std::span<cplx> values() noexcept { return values_; }
    cplx operator[](std::size_t j) const { return values_[j]; }
    cplx& operator[](std::size_t j) { return values_[j]; }

    bool all_finite() const noexcept;

    Field& operator+=(const Field& rhs);
    Field& operator-=(const Field& rhs);
    Field& operator*=(cplx s);

private:
    Grid grid_;
    std::vector<cplx> values_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(cplx s, Field a);
Field operator-(Field a);
/// Pointwise product.
Field hadamard(const Field& a, const Field& b);
Field conj(const Field& a);
Field real_part(const Field& a);
Field imag_part(const Field& a);

double max_abs(const Field& f);
double max_abs_imag(const Field& f);

/// Spectral derivative of the given order (1..4). Exact for band-limited
/// data; the Nyquist mode is zeroed for odd orders.
Field derivative(const Field& f, int order = 1);

/// Trapezoid quadrature dx * sum(values); spectrally accurate for smooth
/// data that decays to a common value at both window ends. Throws
/// std::runtime_error("non-decaying integrand") when the endpoint mismatch
/// exceeds endpoint_tol * (1 + max|f|).
cplx integrate(const Field& f, double endpoint_tol = 1e-5);

/// Antiderivative F with F_x = f and F(anchor) = 0 (anchor snapped to the
/// nearest node). The mean of f becomes an explicit linear term so kinks
/// are handled without periodicity artifacts.
Field cumulative(const Field& f, double anchor);

/// s = 0: L2 norm; s = 1: H1 norm, with the derivative taken spectrally.
double sobolev_norm(const Field& f, int s);

/// Sobolev norm restricted to nodes x >= a (derivative computed globally,
/// then restricted). halfline_norm(f, -L, s) == sobolev_norm(f, s) exactly.
double halfline_norm(const Field& f, double a, int s);

} // namespace mkdv
