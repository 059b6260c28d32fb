#include "mkdvlab/modulation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace mkdv {

namespace {

double real_trapz(const Field& a, const Field& b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j)
        s += (a[j] * b[j]).real();
    return s * a.grid().spacing();
}

struct FitCore {
    double x1, x2, f1, f2;
    int iterations;
    bool converged;
    bool degenerate;
};

FitCore fit_core(const Field& u, double alpha_s, double beta_s, double t,
                 double x1, double x2) {
    const Grid& g = u.grid();
    const double dlt = alpha_s * alpha_s - 3.0 * beta_s * beta_s;
    const double gmm = 3.0 * alpha_s * alpha_s - beta_s * beta_s;
    double f1 = 0.0, f2 = 0.0;
    for (int it = 0; it < 10; ++it) {
        BreatherParams p{alpha_s, beta_s, dlt * t + x1, gmm * t + x2};
        auto jet = breather_jet(p, g);
        Field z = u - jet.b;
        f1 = real_trapz(z, jet.b1);
        f2 = real_trapz(z, jet.b2);
        if (std::abs(f1) < 1e-10 && std::abs(f2) < 1e-10)
            return {x1, x2, f1, f2, it, true, false};
        const double j11 = -real_trapz(jet.b1, jet.b1) + real_trapz(z, jet.b11);
        const double j12 = -real_trapz(jet.b2, jet.b1) + real_trapz(z, jet.b12);
        const double j21 = -real_trapz(jet.b1, jet.b2) + real_trapz(z, jet.b12);
        const double j22 = -real_trapz(jet.b2, jet.b2) + real_trapz(z, jet.b22);
        const double det = j11 * j22 - j12 * j21;
        const double scale = std::abs(j11) + std::abs(j12) + std::abs(j21) + std::abs(j22);
        if (std::abs(det) < 1e-10 * scale * scale)
            return {x1, x2, f1, f2, it, false, true};
        x1 -= (j22 * f1 - j12 * f2) / det;
        x2 -= (-j21 * f1 + j11 * f2) / det;
    }
    return {x1, x2, f1, f2, 10, false, false};
}

} // namespace

ShiftFit fit_shifts(const Field& u, double alpha_s, double beta_s, double t,
                    std::pair<double, double> guess) {
    auto r = fit_core(u, alpha_s, beta_s, t, guess.first, guess.second);
    if (r.degenerate) throw std::runtime_error("fit_shifts: degenerate Jacobian");
    if (!r.converged) {
        std::ostringstream os;
        os << "fit_shifts: Newton did not converge; last iterate (" << r.x1 << ", " << r.x2
           << "), residuals (" << r.f1 << ", " << r.f2 << ")";
        throw std::runtime_error(os.str());
    }
    return {r.x1, r.x2, std::max(std::abs(r.f1), std::abs(r.f2)), r.iterations, true};
}

ModulationTrack track(const Trajectory& traj, double alpha_s, double beta_s) {
    ModulationTrack out;
    out.drift_bound = 0.0;
    double g1 = 0.0, g2 = 0.0;
    const double dlt = alpha_s * alpha_s - 3.0 * beta_s * beta_s;
    const double gmm = 3.0 * alpha_s * alpha_s - beta_s * beta_s;
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const double t = traj.times[i];
        FitCore r = fit_core(traj.states[i], alpha_s, beta_s, t, g1, g2);
        if (!r.converged) {
            std::ostringstream os;
            os << "track: shift fit failed at t = " << t;
            throw std::runtime_error(os.str());
        }
        out.times.push_back(t);
        out.x1.push_back(r.x1);
        out.x2.push_back(r.x2);
        out.ortho_residual.push_back(std::max(std::abs(r.f1), std::abs(r.f2)));
        BreatherParams p{alpha_s, beta_s, dlt * t + r.x1, gmm * t + r.x2};
        Field z = traj.states[i] - breather(p, traj.states[i].grid());
        out.tube_distance.push_back(sobolev_norm(z, 1));
        g1 = r.x1;
        g2 = r.x2;
    }
    for (std::size_t i = 1; i + 1 < out.times.size(); ++i) {
        const double h = out.times[i + 1] - out.times[i - 1];
        if (h <= 0.0) continue;
        const double d1 = (out.x1[i + 1] - out.x1[i - 1]) / h;
        const double d2 = (out.x2[i + 1] - out.x2[i - 1]) / h;
        out.drift_bound = std::max(out.drift_bound, std::abs(d1) + std::abs(d2));
    }
    return out;
}

double tube_distance(const Field& u, double alpha_s, double beta_s) {
    FitCore r = fit_core(u, alpha_s, beta_s, 0.0, 0.0, 0.0);
    BreatherParams p{alpha_s, beta_s, r.x1, r.x2};
    Field z = u - breather(p, u.grid());
    return sobolev_norm(z, 1);
}

double weight_value(double xi, double steepness) {
    return (2.0 / std::numbers::pi) * std::atan(std::exp(xi / steepness));
}

Field weight_profile(const Grid& g, const WeightConfig& w, double t) {
    Field out(g);
    auto xs = g.nodes();
    const double shift = -w.c0 * w.t0 + 0.5 * w.c0 * (w.t0 - t);
    for (std::size_t j = 0; j < g.size(); ++j)
        out[j] = weight_value(xs[j] + shift, w.steepness);
    return out;
}

std::pair<std::vector<double>, std::vector<double>>
weighted_functionals(const Trajectory& traj, const WeightConfig& w) {
    std::vector<double> I, J;
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const Field& u = traj.states[i];
        Field phi = weight_profile(u.grid(), w, traj.times[i]);
        Field ux = derivative(u, 1);
        double Ival = 0.0, Jval = 0.0;
        for (std::size_t j = 0; j < u.size(); ++j) {
            const double u2 = std::norm(u[j]);
            const double p = phi[j].real();
            Ival += 0.5 * u2 * p;
            Jval += (0.5 * std::norm(ux[j]) - 0.25 * u2 * u2 + 0.5 * u2) * p;
        }
        I.push_back(Ival * u.grid().spacing());
        J.push_back(Jval * u.grid().spacing());
    }
    return {std::move(I), std::move(J)};
}

HalflineSeries halfline_decay(const Trajectory& traj, double base_alpha, double base_beta,
                              const DecompositionRecord& rec, const WeightConfig& w) {
    (void)base_alpha;
    (void)base_beta;
    HalflineSeries out;
    const double as = rec.alpha_star, bs = rec.beta_star;
    const double dlt = rec.delta_star(), gmm = rec.gamma_star();
    auto tks = blowup_times(as, bs, 0.0, 0.0,
                            traj.times.front() - 1.0, traj.times.back() + 1.0);
    double g1 = 0.0, g2 = 0.0;
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const double t = traj.times[i];
        bool skip = false;
        for (double tk : tks) skip = skip || std::abs(t - tk) < 0.05;
        out.times.push_back(t);
        out.skipped.push_back(skip);
        if (skip) {
            out.u_minus_bstar.push_back(0.0);
            continue;
        }
        FitCore r = fit_core(traj.states[i], as, bs, t, g1, g2);
        g1 = r.x1;
        g2 = r.x2;
        BreatherParams p{as, bs, dlt * t + r.x1, gmm * t + r.x2};
        Field z = traj.states[i] - breather(p, traj.states[i].grid());
        const double a = w.c0 * t;
        const double L = traj.states[i].grid().half_length();
        out.u_minus_bstar.push_back(
            halfline_norm(z, std::clamp(a, -L, L - traj.states[i].grid().spacing()), 1));
    }
    return out;
}

InelasticityProbe inelasticity_probe(const Field& u0, const BreatherParams& base,
                                     const DecompositionRecord& rec) {
    Field z = u0 - breather(base, u0.grid());
    const double ell0 = sobolev_norm(z, 1);
    const double shift = std::abs(rec.beta_star - base.beta) +
                         std::abs(rec.alpha_star - base.alpha);
    return {ell0, shift, ell0 > 0.0 ? shift / ell0 : 0.0};
}

} // namespace mkdv
