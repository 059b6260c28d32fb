#include "mkdvlab/grid.hpp"
#include "mkdvlab/profiles.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace mkdv;

namespace {
constexpr double kPi = std::numbers::pi;
} // namespace

TEST_CASE("construction rejects bad sizes") {
    CHECK_THROWS(Grid(40.0, 15));
    CHECK_THROWS(Grid(40.0, 1000)); // not a power of two
    CHECK_THROWS(Grid(-1.0, 256));
    Grid g(40.0, 16);
    CHECK(g.spacing() == doctest::Approx(5.0));
    CHECK(g.node(0) == doctest::Approx(-40.0));
}

TEST_CASE("derivative of a single Fourier mode is exact") {
    Grid g(40.0, 1024);
    const double L = g.half_length();
    Field f = Field::sample_real(g, [&](double x) { return std::sin(kPi * x / L); });
    Field fx = derivative(f, 1);
    double err = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j)
        err = std::max(err, std::abs(fx[j] - (kPi / L) * std::cos(kPi * g.node(j) / L)));
    CHECK(err < 1e-12);

    Field c = Field::sample_real(g, [](double) { return 3.25; });
    CHECK(max_abs(derivative(c, 1)) < 1e-12);

    CHECK_THROWS(derivative(f, 5));
}

TEST_CASE("second derivative of sech matches the analytic form") {
    Grid g(40.0, 1024);
    Field f = Field::sample_real(g, [](double x) { return 1.0 / std::cosh(x); });
    Field fxx = derivative(f, 2);
    double err = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
        const double x = g.node(j);
        const double s = 1.0 / std::cosh(x), t = std::tanh(x);
        err = std::max(err, std::abs(fxx[j] - s * (t * t - s * s)));
    }
    CHECK(err < 1e-10);
}

TEST_CASE("quadrature: sech^2 integrates to 2") {
    Grid g(40.0, 1024);
    Field f = Field::sample_real(g, [](double x) {
        const double s = 1.0 / std::cosh(x);
        return s * s;
    });
    CHECK(std::abs(integrate(f) - 2.0) < 1e-12);
    CHECK(std::abs(integrate(Field(g))) == 0.0);
}

TEST_CASE("quadrature: complex soliton half mass") {
    SolitonParams p{1.0, 2.0, 0.0, 0.0};
    Grid g = default_grid(p.beta);
    Field q = soliton(p, g);
    Field f = hadamard(q, q);
    f *= 0.5;
    CHECK(std::abs(integrate(f) - cplx(4.0, 2.0)) < 1e-10); // 2(beta + i alpha)
}

TEST_CASE("quadrature rejects non-decaying integrands") {
    Grid g(40.0, 1024);
    Field f = Field::sample_real(g, [](double x) { return x; });
    CHECK_THROWS_WITH(integrate(f), doctest::Contains("non-decaying"));
}

TEST_CASE("cumulative: single mode with anchor at the left edge") {
    Grid g(40.0, 1024);
    const double L = g.half_length();
    Field f = Field::sample_real(g, [&](double x) { return std::cos(kPi * x / L); });
    Field F = cumulative(f, -L);
    double err = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
        // antiderivative (L/pi) sin(pi x / L) already vanishes at -L
        const double expect = (L / kPi) * std::sin(kPi * g.node(j) / L);
        err = std::max(err, std::abs(F[j] - expect));
    }
    CHECK(err < 1e-11);
    CHECK(max_abs(cumulative(Field(g), 0.0)) < 1e-14);
}

TEST_CASE("cumulative of the breather matches its closed-form kink") {
    BreatherParams p{1.0, 1.0, 0.0, 0.0};
    Grid g = default_grid(p.beta);
    Field B = breather(p, g);
    Field K = cumulative(B, -g.half_length());
    Field K_exact = breather_kink(p, g);
    // both vanish at -L, so no additive constant to strip
    Field diff = K - K_exact;
    CHECK(max_abs(diff) < 1e-9);
}

TEST_CASE("sobolev norms") {
    Grid g(40.0, 1024);
    CHECK(sobolev_norm(Field(g), 0) == 0.0);
    Field f = Field::sample_real(g, [](double x) {
        return std::sqrt(2.0) / std::cosh(x);
    });
    CHECK(sobolev_norm(f, 0) == doctest::Approx(2.0).epsilon(1e-10));

    SolitonParams p{1.0, 1.0, 0.0, 0.0};
    Field q = soliton(p, default_grid(1.0));
    const double h1 = sobolev_norm(q, 1);
    CHECK(std::isfinite(h1));
    CHECK(h1 > 0.0);
}

TEST_CASE("half-line norms") {
    Grid g(40.0, 1024);
    Field f = Field::sample_real(g, [](double x) { return 1.0 / std::cosh(x); });
    // int_0^inf sech^2 = 1
    CHECK(halfline_norm(f, 0.0, 0) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(halfline_norm(f, -g.half_length(), 0) == sobolev_norm(f, 0));
    CHECK(halfline_norm(f, -g.half_length(), 1) == sobolev_norm(f, 1));

    Field left = Field::sample_real(g, [](double x) {
        return x < 0.0 ? 1.0 / std::cosh(x + 20.0) : std::exp(-x - 20.0);
    });
    CHECK(halfline_norm(left, 1.0, 0) < 1e-8);
}

TEST_CASE("derivative then cumulative round trip") {
    Grid g(40.0, 1024);
    Field f = Field::sample_real(g, [](double x) {
        return std::exp(-0.1 * x * x) * std::cos(x);
    });
    Field round = derivative(cumulative(f, 0.0), 1);
    Field diff = round - f;
    CHECK(max_abs(diff) < 1e-9);
    CHECK(std::abs(integrate(derivative(f, 1))) < 1e-9);
}

TEST_CASE("Parseval consistency of the L2 norm") {
    Grid g(40.0, 1024);
    Field f = Field::sample(g, [](double x) {
        return cplx(std::exp(-0.2 * x * x), std::sin(x) * std::exp(-0.3 * x * x));
    });
    const double phys = sobolev_norm(f, 0);
    std::vector<cplx> hat(g.size());
    g.forward_fft(f.values(), hat);
    double acc = 0.0;
    for (const auto& v : hat) acc += std::norm(v);
    const double spec = std::sqrt(acc * g.spacing() / double(g.size()));
    CHECK(phys == doctest::Approx(spec).epsilon(1e-10));
}
