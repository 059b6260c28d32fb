#include "mkdvlab/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mkdv {

namespace {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }
const fftw_complex* as_fftw(const cplx* p) {
    return reinterpret_cast<const fftw_complex*>(p);
}

} // namespace

struct Grid::Impl {
    double half_length;
    std::size_t n;
    double dx;
    std::vector<double> nodes;
    std::vector<double> wavenumbers;
    fftw_plan plan_fwd;
    fftw_plan plan_bwd;

    Impl(double L, std::size_t n_) : half_length(L), n(n_), dx(2.0 * L / double(n_)) {
        nodes.resize(n);
        for (std::size_t j = 0; j < n; ++j) nodes[j] = -L + dx * double(j);
        wavenumbers.resize(n);
        const double k0 = std::numbers::pi / L;
        for (std::size_t j = 0; j < n; ++j) {
            const auto m = (j < n / 2) ? double(j) : double(j) - double(n);
            wavenumbers[j] = k0 * m;
        }
        // FFTW_UNALIGNED lets the plans run on any caller buffer.
        std::vector<cplx> scratch(n);
        plan_fwd = fftw_plan_dft_1d(int(n), as_fftw(scratch.data()), as_fftw(scratch.data()),
                                    FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
        plan_bwd = fftw_plan_dft_1d(int(n), as_fftw(scratch.data()), as_fftw(scratch.data()),
                                    FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    }
    ~Impl() {
        fftw_destroy_plan(plan_fwd);
        fftw_destroy_plan(plan_bwd);
    }
    Impl(const Impl&) = delete;
    Impl& operator=(const Impl&) = delete;
};

Grid::Grid(double half_length, std::size_t n) {
    if (!(half_length > 0.0)) throw std::invalid_argument("grid half_length must be positive");
    if (n < 16 || !is_power_of_two(n))
        throw std::invalid_argument("grid size must be a power of two >= 16");
    impl_ = std::make_shared<const Impl>(half_length, n);
}

double Grid::half_length() const noexcept { return impl_->half_length; }
std::size_t Grid::size() const noexcept { return impl_->n; }
double Grid::spacing() const noexcept { return impl_->dx; }
std::span<const double> Grid::nodes() const noexcept { return impl_->nodes; }
std::span<const double> Grid::wavenumbers() const noexcept { return impl_->wavenumbers; }
double Grid::node(std::size_t j) const { return impl_->nodes.at(j); }

std::size_t Grid::nearest_index(double x) const {
    const auto& im = *impl_;
    if (x < -im.half_length || x >= im.half_length)
        throw std::invalid_argument("point outside [-L, L)");
    const double j = (x + im.half_length) / im.dx;
    auto idx = std::size_t(std::llround(j));
    if (idx >= im.n) idx = im.n - 1;
    return idx;
}

void Grid::forward_fft(std::span<const cplx> in, std::span<cplx> out) const {
    fftw_execute_dft(impl_->plan_fwd, const_cast<fftw_complex*>(as_fftw(in.data())),
                     as_fftw(out.data()));
}

void Grid::inverse_fft(std::span<const cplx> in, std::span<cplx> out) const {
    fftw_execute_dft(impl_->plan_bwd, const_cast<fftw_complex*>(as_fftw(in.data())),
                     as_fftw(out.data()));
    const double s = 1.0 / double(impl_->n);
    for (auto& v : out) v *= s;
}

bool operator==(const Grid& a, const Grid& b) noexcept {
    if (a.impl_ == b.impl_) return true;
    return a.impl_->n == b.impl_->n && a.impl_->half_length == b.impl_->half_length;
}

Field::Field(Grid grid) : grid_(std::move(grid)), values_(grid_.size(), cplx(0.0)) {}

Field::Field(Grid grid, std::vector<cplx> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_.size())
        throw std::invalid_argument("field length does not match grid");
}

Field Field::sample(const Grid& g, const std::function<cplx(double)>& f) {
    Field out(g);
    auto xs = g.nodes();
    for (std::size_t j = 0; j < g.size(); ++j) out[j] = f(xs[j]);
    return out;
}

Field Field::sample_real(const Grid& g, const std::function<double(double)>& f) {
    Field out(g);
    auto xs = g.nodes();
    for (std::size_t j = 0; j < g.size(); ++j) out[j] = cplx(f(xs[j]), 0.0);
    return out;
}

bool Field::all_finite() const noexcept {
    for (const auto& v : values_)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
}

Field& Field::operator+=(const Field& rhs) {
    for (std::size_t j = 0; j < values_.size(); ++j) values_[j] += rhs.values_[j];
    return *this;
}
Field& Field::operator-=(const Field& rhs) {
    for (std::size_t j = 0; j < values_.size(); ++j) values_[j] -= rhs.values_[j];
    return *this;
}
Field& Field::operator*=(cplx s) {
    for (auto& v : values_) v *= s;
    return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(cplx s, Field a) { return a *= s; }
Field operator-(Field a) { return a *= cplx(-1.0); }

Field hadamard(const Field& a, const Field& b) {
    Field out = a;
    for (std::size_t j = 0; j < out.size(); ++j) out[j] *= b[j];
    return out;
}

Field conj(const Field& a) {
    Field out = a;
    for (auto& v : out.values()) v = std::conj(v);
    return out;
}

Field real_part(const Field& a) {
    Field out = a;
    for (auto& v : out.values()) v = cplx(v.real(), 0.0);
    return out;
}

Field imag_part(const Field& a) {
    Field out = a;
    for (auto& v : out.values()) v = cplx(v.imag(), 0.0);
    return out;
}

double max_abs(const Field& f) {
    double m = 0.0;
    for (const auto& v : f.values()) m = std::max(m, std::abs(v));
    return m;
}

double max_abs_imag(const Field& f) {
    double m = 0.0;
    for (const auto& v : f.values()) m = std::max(m, std::abs(v.imag()));
    return m;
}

Field derivative(const Field& f, int order) {
    if (order < 1 || order > 4) throw std::invalid_argument("derivative order must be 1..4");
    if (!f.all_finite()) throw std::invalid_argument("derivative: non-finite input");
    const Grid& g = f.grid();
    const std::size_t n = g.size();
    std::vector<cplx> hat(n);
    g.forward_fft(f.values(), hat);
    auto ks = g.wavenumbers();
    for (std::size_t j = 0; j < n; ++j) {
        cplx ik(0.0, ks[j]);
        cplx mult(1.0);
        for (int p = 0; p < order; ++p) mult *= ik;
        hat[j] *= mult;
    }
    if (order % 2 == 1) hat[n / 2] = 0.0; // Nyquist has no signed derivative
    Field out(g);
    g.inverse_fft(hat, out.values());
    return out;
}

cplx integrate(const Field& f, double endpoint_tol) {
    const std::size_t n = f.size();
    const double mis = std::abs(f[0] - f[n - 1]);
    if (mis > endpoint_tol * (1.0 + max_abs(f)))
        throw std::runtime_error("non-decaying integrand");
    cplx s(0.0);
    for (const auto& v : f.values()) s += v;
    return s * f.grid().spacing();
}

Field cumulative(const Field& f, double anchor) {
    const Grid& g = f.grid();
    const std::size_t n = g.size();
    const double L = g.half_length();
    cplx sum(0.0);
    for (const auto& v : f.values()) sum += v;
    const cplx mean = sum * g.spacing() / (2.0 * L);

    std::vector<cplx> hat(n);
    {
        Field tmp = f;
        for (auto& v : tmp.values()) v -= mean;
        g.forward_fft(tmp.values(), hat);
    }
    auto ks = g.wavenumbers();
    hat[0] = 0.0;
    for (std::size_t j = 1; j < n; ++j) hat[j] /= cplx(0.0, ks[j]);
    hat[n / 2] = 0.0;

    Field out(g);
    g.inverse_fft(hat, out.values());
    auto xs = g.nodes();
    for (std::size_t j = 0; j < n; ++j) out[j] += mean * xs[j];
    const cplx at_anchor = out[g.nearest_index(anchor)];
    for (auto& v : out.values()) v -= at_anchor;
    return out;
}

double sobolev_norm(const Field& f, int s) {
    if (s != 0 && s != 1) throw std::invalid_argument("sobolev_norm: s must be 0 or 1");
    double acc = 0.0;
    for (const auto& v : f.values()) acc += std::norm(v);
    if (s == 1) {
        Field fx = derivative(f, 1);
        for (const auto& v : fx.values()) acc += std::norm(v);
    }
    return std::sqrt(acc * f.grid().spacing());
}

double halfline_norm(const Field& f, double a, int s) {
    if (s != 0 && s != 1) throw std::invalid_argument("halfline_norm: s must be 0 or 1");
    const Grid& g = f.grid();
    auto xs = g.nodes();
    double acc = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j)
        if (xs[j] >= a) acc += std::norm(f[j]);
    if (s == 1) {
        Field fx = derivative(f, 1);
        for (std::size_t j = 0; j < g.size(); ++j)
            if (xs[j] >= a) acc += std::norm(fx[j]);
    }
    return std::sqrt(acc * g.spacing());
}

} // namespace mkdv
