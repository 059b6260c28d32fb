#include "mkdvlab/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mkdv {

namespace {

constexpr double kPi = std::numbers::pi;
const double kRt2 = std::sqrt(2.0);

// arctan(e^w) on the branch continuous in Re w; |exp| arguments kept <= 1.
cplx atan_exp(cplx w) {
    if (w.real() > 0.0) return kPi / 2.0 - std::atan(std::exp(-w));
    return std::atan(std::exp(w));
}

// tanh with a guard against sinh/cosh overflow far in the tails.
cplx tanh_safe(cplx w) {
    if (w.real() > 350.0) return cplx(1.0, 0.0);
    if (w.real() < -350.0) return cplx(-1.0, 0.0);
    return std::tanh(w);
}

// log(1 + e^{2w}) evaluated without overflow; caller unwraps the branch.
cplx log1p_exp2(cplx w) {
    if (w.real() > 0.0) return 2.0 * w + std::log(1.0 + std::exp(-2.0 * w));
    return std::log(1.0 + std::exp(2.0 * w));
}

// Make the sampled values continuous by pi-jumps of the real part
// (period of arctan) or 2*pi (log branch), scanning from the left node.
void unwrap_real(std::vector<cplx>& v, double period) {
    double off = 0.0;
    for (std::size_t j = 1; j < v.size(); ++j) {
        const double cand = v[j].real() + off;
        off += period * std::round((v[j - 1].real() - cand) / period);
        v[j] += off;
    }
}

void unwrap_imag(std::vector<cplx>& v, double period) {
    double off = 0.0;
    for (std::size_t j = 1; j < v.size(); ++j) {
        const double cand = v[j].imag() + off;
        off += period * std::round((v[j - 1].imag() - cand) / period);
        v[j] += cplx(0.0, off);
    }
}

struct BreatherTables {
    std::vector<double> s1, c1, sh, ch, N, D;
};

BreatherTables breather_tables(const BreatherParams& p, const Grid& g) {
    BreatherTables t;
    const std::size_t n = g.size();
    t.s1.resize(n); t.c1.resize(n); t.sh.resize(n); t.ch.resize(n);
    t.N.resize(n); t.D.resize(n);
    auto xs = g.nodes();
    for (std::size_t j = 0; j < n; ++j) {
        const double y1 = xs[j] + p.x1, y2 = xs[j] + p.x2;
        t.s1[j] = std::sin(p.alpha * y1);
        t.c1[j] = std::cos(p.alpha * y1);
        t.sh[j] = std::sinh(p.beta * y2);
        t.ch[j] = std::cosh(p.beta * y2);
        t.N[j] = p.alpha * p.beta * (p.alpha * t.c1[j] * t.ch[j] - p.beta * t.s1[j] * t.sh[j]);
        t.D[j] = p.alpha * p.alpha * t.ch[j] * t.ch[j] + p.beta * p.beta * t.s1[j] * t.s1[j];
    }
    return t;
}

void require_not_singular(const SolitonParams& p) {
    auto rep = blowup_report(p);
    if (rep.is_singular)
        throw std::runtime_error("profile undefined at x = -x2 (singular shift lattice)");
}

} // namespace

void BreatherParams::validate() const {
    if (!(alpha > 0.0) || !(beta > 0.0))
        throw std::invalid_argument("breather parameters require alpha > 0, beta > 0");
}

void SolitonParams::validate() const {
    if (!(beta > 0.0) || alpha == 0.0)
        throw std::invalid_argument("soliton parameters require beta > 0, alpha != 0");
}

double default_half_length(double beta_min) { return 40.0 / std::min(1.0, beta_min); }

Grid default_grid(double beta_min, std::size_t n) {
    return Grid(default_half_length(beta_min), n);
}

double default_singular_window(const SolitonParams& p) {
    const double L = default_half_length(p.beta);
    return 10.0 * (2.0 * L / 2048.0);
}

BlowupReport blowup_report(const SolitonParams& p) {
    return blowup_report(p, default_singular_window(p));
}

BlowupReport blowup_report(const SolitonParams& p, double window) {
    p.validate();
    const double step = kPi / std::abs(p.alpha);
    const double d = p.x1 - p.x2;
    const long k = std::lround(d / step - 0.5);
    double best = std::abs(d - step * (double(k) + 0.5));
    long bestk = k;
    for (long kk : {k - 1, k + 1}) {
        const double cand = std::abs(d - step * (double(kk) + 0.5));
        if (cand < best) { best = cand; bestk = kk; }
    }
    return {best < window, bestk, best};
}

std::vector<double> blowup_times(double alpha_s, double beta_s, double x1, double x2,
                                 double t_lo, double t_hi) {
    if (t_hi < t_lo) std::swap(t_lo, t_hi);
    const double dg = -2.0 * (alpha_s * alpha_s + beta_s * beta_s); // delta* - gamma*
    const double step = kPi / alpha_s;
    std::vector<double> out;
    // t_k = [step*(k + 1/2) - (x1 - x2)] / dg; dg < 0 so k decreases with t
    const double a = (t_lo * dg + (x1 - x2)) / step - 0.5;
    const double b = (t_hi * dg + (x1 - x2)) / step - 0.5;
    const long klo = long(std::ceil(std::min(a, b) - 1e-12));
    const long khi = long(std::floor(std::max(a, b) + 1e-12));
    for (long k = klo; k <= khi; ++k)
        out.push_back((step * (double(k) + 0.5) - (x1 - x2)) / dg);
    std::sort(out.begin(), out.end());
    return out;
}

Field breather_kink(const BreatherParams& p, const Grid& g) {
    p.validate();
    Field out(g);
    auto xs = g.nodes();
    for (std::size_t j = 0; j < g.size(); ++j) {
        const double y1 = xs[j] + p.x1, y2 = xs[j] + p.x2;
        out[j] = 2.0 * kRt2 *
                 std::atan((p.beta / p.alpha) * std::sin(p.alpha * y1) / std::cosh(p.beta * y2));
    }
    return out;
}

Field breather(const BreatherParams& p, const Grid& g) {
    p.validate();
    auto t = breather_tables(p, g);
    Field out(g);
    for (std::size_t j = 0; j < g.size(); ++j) out[j] = 2.0 * kRt2 * t.N[j] / t.D[j];
    return out;
}

BreatherShiftDerivs breather_shift_derivs(const BreatherParams& p, const Grid& g) {
    p.validate();
    auto t = breather_tables(p, g);
    const double a = p.alpha, b = p.beta;
    Field b1(g), b2(g), k1(g), k2(g);
    for (std::size_t j = 0; j < g.size(); ++j) {
        const double s1 = t.s1[j], c1 = t.c1[j], sh = t.sh[j], ch = t.ch[j];
        const double N = t.N[j], D = t.D[j];
        k1[j] = 2.0 * kRt2 * a * a * b * c1 * ch / D;
        k2[j] = -2.0 * kRt2 * a * b * b * s1 * sh / D;
        const double N1 = -a * a * b * (a * s1 * ch + b * c1 * sh);
        const double N2 = a * b * b * (a * c1 * sh - b * s1 * ch);
        const double D1 = 2.0 * a * b * b * s1 * c1;
        const double D2 = 2.0 * a * a * b * ch * sh;
        b1[j] = 2.0 * kRt2 * (N1 * D - N * D1) / (D * D);
        b2[j] = 2.0 * kRt2 * (N2 * D - N * D2) / (D * D);
    }
    return {std::move(b1), std::move(b2), std::move(k1), std::move(k2)};
}

BreatherJet breather_jet(const BreatherParams& p, const Grid& g) {
    p.validate();
    auto t = breather_tables(p, g);
    const double a = p.alpha, b = p.beta;
    Field B(g), B1(g), B2(g), B11(g), B12(g), B22(g);
    for (std::size_t j = 0; j < g.size(); ++j) {
        const double s1 = t.s1[j], c1 = t.c1[j], sh = t.sh[j], ch = t.ch[j];
        const double N = t.N[j], D = t.D[j];
        const double F = N / D;
        const double N1 = -a * a * b * (a * s1 * ch + b * c1 * sh);
        const double N2 = a * b * b * (a * c1 * sh - b * s1 * ch);
        const double N11 = -a * a * a * b * (a * c1 * ch - b * s1 * sh);
        const double N12 = -a * a * b * b * (a * s1 * sh + b * c1 * ch);
        const double N22 = a * b * b * b * (a * c1 * ch - b * s1 * sh);
        const double D1 = 2.0 * a * b * b * s1 * c1;
        const double D2 = 2.0 * a * a * b * ch * sh;
        const double D11 = 2.0 * a * a * b * b * (c1 * c1 - s1 * s1);
        const double D22 = 2.0 * a * a * b * b * (ch * ch + sh * sh);
        const double F1 = (N1 - F * D1) / D;
        const double F2 = (N2 - F * D2) / D;
        const double F11 = (N11 - 2.0 * F1 * D1 - F * D11) / D;
        const double F12 = (N12 - F1 * D2 - F2 * D1) / D;
        const double F22 = (N22 - 2.0 * F2 * D2 - F * D22) / D;
        B[j] = 2.0 * kRt2 * F;
        B1[j] = 2.0 * kRt2 * F1;
        B2[j] = 2.0 * kRt2 * F2;
        B11[j] = 2.0 * kRt2 * F11;
        B12[j] = 2.0 * kRt2 * F12;
        B22[j] = 2.0 * kRt2 * F22;
    }
    return {std::move(B), std::move(B1), std::move(B2),
            std::move(B11), std::move(B12), std::move(B22)};
}

double breather_residual(const BreatherParams& p, const Grid& g) {
    auto d = breather_shift_derivs(p, g);
    Field B = breather(p, g);
    Field Bxx = derivative(B, 2);
    Field res = p.delta() * d.kink1 + p.gamma() * d.kink2 + Bxx;
    for (std::size_t j = 0; j < g.size(); ++j) res[j] += B[j] * B[j] * B[j];
    return max_abs(res);
}

Field soliton_kink(const SolitonParams& p, const Grid& g) {
    p.validate();
    require_not_singular(p);
    const std::size_t n = g.size();
    std::vector<cplx> v(n);
    auto xs = g.nodes();
    for (std::size_t j = 0; j < n; ++j) {
        const cplx w(p.beta * (xs[j] + p.x2), p.alpha * (xs[j] + p.x1));
        v[j] = atan_exp(w);
    }
    unwrap_real(v, kPi);
    Field out(g, std::move(v));
    return 2.0 * kRt2 * out;
}

Field soliton(const SolitonParams& p, const Grid& g) {
    p.validate();
    require_not_singular(p);
    Field out(g);
    auto xs = g.nodes();
    const cplx m = p.scale();
    for (std::size_t j = 0; j < g.size(); ++j) {
        const cplx w(p.beta * (xs[j] + p.x2), p.alpha * (xs[j] + p.x1));
        out[j] = kRt2 * m / std::cosh(w);
    }
    return out;
}

Field soliton_t(const SolitonParams& p, const Grid& g) {
    const cplx m = p.scale();
    return (-m * m) * soliton(p, g);
}

Field partial_mass_soliton(const SolitonParams& p, const Grid& g) {
    p.validate();
    require_not_singular(p);
    Field out(g);
    auto xs = g.nodes();
    const cplx m = p.scale();
    for (std::size_t j = 0; j < g.size(); ++j) {
        const cplx w(p.beta * (xs[j] + p.x2), p.alpha * (xs[j] + p.x1));
        out[j] = m * (1.0 + tanh_safe(w));
    }
    return out;
}

Field partial_mass_breather(const BreatherParams& p, const Grid& g) {
    p.validate();
    const double a = p.alpha, b = p.beta;
    Field out(g);
    auto xs = g.nodes();
    for (std::size_t j = 0; j < g.size(); ++j) {
        const double y1 = xs[j] + p.x1, y2 = xs[j] + p.x2;
        const double u = 2.0 * b * y2;
        if (u > 350.0) { out[j] = 4.0 * b; continue; }
        if (u < -350.0) { out[j] = 0.0; continue; }
        const double D2 = a * a + b * b - b * b * std::cos(2.0 * a * y1) + a * a * std::cosh(u);
        out[j] = 2.0 * b +
                 2.0 * a * b * (a * std::sinh(u) + b * std::sin(2.0 * a * y1)) / D2;
    }
    return out;
}

LogIntegrals log_integrals(const BreatherParams& p_b, const SolitonParams& p_s, const Grid& g) {
    p_b.validate();
    p_s.validate();
    require_not_singular(p_s);
    const double a = p_s.alpha, b = p_s.beta;
    const std::size_t n = g.size();
    const std::size_t j0 = g.nearest_index(0.0);
    auto xs = g.nodes();

    // int_0^x N = log(1 + e^{2w}) - L1 on the continuous branch
    std::vector<cplx> lg(n);
    for (std::size_t j = 0; j < n; ++j) {
        const cplx w(b * (xs[j] + p_s.x2), a * (xs[j] + p_s.x1));
        lg[j] = log1p_exp2(w);
    }
    unwrap_imag(lg, 2.0 * kPi);
    Field intN(g, lg);
    const cplx L1 = intN[j0];
    for (auto& v : intN.values()) v -= L1;

    // int_0^x M = 2 beta x + log D2 - L0 (real log, positive argument)
    Field intM(g);
    std::vector<double> logD2(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double y1 = xs[j] + p_b.x1, y2 = xs[j] + p_b.x2;
        const double u = 2.0 * p_b.beta * y2;
        double ld;
        if (std::abs(u) > 350.0) {
            // log(a^2 cosh u + ...) -> |u| + log(a^2/2)
            ld = std::abs(u) + std::log(p_b.alpha * p_b.alpha / 2.0);
        } else {
            ld = std::log(p_b.alpha * p_b.alpha + p_b.beta * p_b.beta -
                          p_b.beta * p_b.beta * std::cos(2.0 * p_b.alpha * y1) +
                          p_b.alpha * p_b.alpha * std::cosh(u));
        }
        logD2[j] = ld;
        intM[j] = 2.0 * p_b.beta * xs[j] + ld;
    }
    const cplx L0 = intM[j0];
    for (auto& v : intM.values()) v -= L0;

    // -(beta - i alpha) int_0^x cos((Btilde+Qtilde)/sqrt2)
    //   = (beta + i alpha) x + log D2 - log(1 + e^{2w}) - L0 + L1
    Field cosSum(g);
    const cplx mc(b, a);
    for (std::size_t j = 0; j < n; ++j)
        cosSum[j] = mc * xs[j] + logD2[j] - lg[j];
    const cplx C0 = cosSum[j0];
    for (auto& v : cosSum.values()) v -= C0;

    return {std::move(intM), std::move(intN), std::move(cosSum)};
}

Field mu_factor(const BreatherParams& p, const Grid& g) {
    p.validate();
    SolitonParams q{p.alpha, p.beta, p.x1, p.x2};
    require_not_singular(q);
    auto t = breather_tables(p, g);
    const double a = p.alpha, b = p.beta;
    Field out(g);
    for (std::size_t j = 0; j < g.size(); ++j)
        out[j] = 2.0 * kRt2 * a * a * b * b *
                 cplx(t.ch[j] * t.c1[j], t.sh[j] * t.s1[j]) / t.D[j];
    return out;
}

Field mu_inverse(const BreatherParams& p, const Grid& g) {
    Field mu = mu_factor(p, g);
    Field out(g);
    for (std::size_t j = 0; j < g.size(); ++j) {
        const double m = std::abs(mu[j]);
        if (m < 1e-280) {
            throw std::runtime_error(
                "window too large for mu^-1; retry with half_length <= " +
                std::to_string(0.5 * g.half_length()));
        }
        out[j] = 1.0 / mu[j];
    }
    return out;
}

} // namespace mkdv
