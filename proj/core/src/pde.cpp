#include "mkdvlab/pde.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace mkdv {

namespace {

constexpr double kPi = std::numbers::pi;

struct Spectral {
    const Grid& g;
    std::size_t n;
    std::vector<cplx> e_half, e_full;  // exp(i k^3 dt/2), exp(i k^3 dt)
    std::vector<double> mask;          // 2/3-rule dealiasing
    std::vector<double> k;

    Spectral(const Grid& grid, double dt) : g(grid), n(grid.size()) {
        auto ks = grid.wavenumbers();
        k.assign(ks.begin(), ks.end());
        e_half.resize(n);
        e_full.resize(n);
        mask.resize(n);
        double kmax = 0.0;
        for (double kk : k) kmax = std::max(kmax, std::abs(kk));
        for (std::size_t j = 0; j < n; ++j) {
            const double k3 = k[j] * k[j] * k[j];
            e_half[j] = std::exp(cplx(0.0, k3 * dt / 2.0));
            e_full[j] = std::exp(cplx(0.0, k3 * dt));
            mask[j] = (std::abs(k[j]) <= (2.0 / 3.0) * kmax) ? 1.0 : 0.0;
        }
    }

    // nonlinear term in Fourier space: -ik * dealias((u^3)^)
    void nonlinear(const std::vector<cplx>& vhat, std::vector<cplx>& out,
                   std::vector<cplx>& phys) const {
        g.inverse_fft(vhat, phys);
        for (auto& w : phys) w = w * w * w;
        g.forward_fft(phys, out);
        for (std::size_t j = 0; j < n; ++j) out[j] *= mask[j] * cplx(0.0, -k[j]);
    }
};

void if_rk4_step(const Spectral& sp, std::vector<cplx>& v, double dt) {
    const std::size_t n = sp.n;
    std::vector<cplx> k1(n), k2(n), k3(n), k4(n), tmp(n), phys(n);
    sp.nonlinear(v, k1, phys);
    for (std::size_t j = 0; j < n; ++j) tmp[j] = sp.e_half[j] * (v[j] + 0.5 * dt * k1[j]);
    sp.nonlinear(tmp, k2, phys);
    for (std::size_t j = 0; j < n; ++j) tmp[j] = sp.e_half[j] * v[j] + 0.5 * dt * k2[j];
    sp.nonlinear(tmp, k3, phys);
    for (std::size_t j = 0; j < n; ++j) tmp[j] = sp.e_full[j] * v[j] + dt * sp.e_half[j] * k3[j];
    sp.nonlinear(tmp, k4, phys);
    for (std::size_t j = 0; j < n; ++j)
        v[j] = sp.e_full[j] * v[j] +
               dt / 6.0 * (sp.e_full[j] * k1[j] + 2.0 * sp.e_half[j] * (k2[j] + k3[j]) + k4[j]);
}

struct EtdWeights {
    std::vector<cplx> e_half, e_full, q, f1, f2, f3;
};

// phi-function weights by the contour-average recipe; robust for the
// purely imaginary spectrum of the dispersive term.
EtdWeights etd_weights(const Grid& g, double dt) {
    const std::size_t n = g.size();
    auto ks = g.wavenumbers();
    EtdWeights w;
    w.e_half.resize(n); w.e_full.resize(n);
    w.q.resize(n); w.f1.resize(n); w.f2.resize(n); w.f3.resize(n);
    const int M = 32;
    for (std::size_t j = 0; j < n; ++j) {
        const cplx L(0.0, ks[j] * ks[j] * ks[j]);
        const cplx z0 = L * dt;
        w.e_half[j] = std::exp(z0 / 2.0);
        w.e_full[j] = std::exp(z0);
        cplx q(0.0), f1(0.0), f2(0.0), f3(0.0);
        for (int m = 0; m < M; ++m) {
            // full unit circle: L is imaginary, so no conjugate shortcut
            const cplx z = z0 + std::exp(cplx(0.0, 2.0 * kPi * (m + 0.5) / M));
            const cplx ez = std::exp(z);
            const cplx z2 = z * z, z3 = z2 * z;
            q += (std::exp(z / 2.0) - 1.0) / z;
            f1 += (-4.0 - z + ez * (4.0 - 3.0 * z + z2)) / z3;
            f2 += (2.0 + z + ez * (-2.0 + z)) / z3;
            f3 += (-4.0 - 3.0 * z - z2 + ez * (4.0 - z)) / z3;
        }
        w.q[j] = dt * q / double(M);
        w.f1[j] = dt * f1 / double(M);
        w.f2[j] = dt * f2 / double(M);
        w.f3[j] = dt * f3 / double(M);
    }
    return w;
}

void etd_rk4_step(const Spectral& sp, const EtdWeights& w, std::vector<cplx>& v, double dt) {
    (void)dt;
    const std::size_t n = sp.n;
    std::vector<cplx> Nu(n), Na(n), Nb(n), Nc(n), a(n), b(n), c(n), phys(n);
    sp.nonlinear(v, Nu, phys);
    for (std::size_t j = 0; j < n; ++j) a[j] = w.e_half[j] * v[j] + w.q[j] * Nu[j];
    sp.nonlinear(a, Na, phys);
    for (std::size_t j = 0; j < n; ++j) b[j] = w.e_half[j] * v[j] + w.q[j] * Na[j];
    sp.nonlinear(b, Nb, phys);
    for (std::size_t j = 0; j < n; ++j)
        c[j] = w.e_half[j] * a[j] + w.q[j] * (2.0 * Nb[j] - Nu[j]);
    sp.nonlinear(c, Nc, phys);
    for (std::size_t j = 0; j < n; ++j)
        v[j] = w.e_full[j] * v[j] + w.f1[j] * Nu[j] + 2.0 * w.f2[j] * (Na[j] + Nb[j]) +
               w.f3[j] * Nc[j];
}

cplx trapz(const Field& f) {
    cplx s(0.0);
    for (const auto& v : f.values()) s += v;
    return s * f.grid().spacing();
}

bool finite(const std::vector<cplx>& v) {
    for (const auto& x : v)
        if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) return false;
    return true;
}

double h1_of_hat(const Grid& g, const std::vector<cplx>& vhat) {
    // Parseval: ||u||_H1^2 = (dx/n) * sum (1 + k^2) |vhat|^2
    auto ks = g.wavenumbers();
    double acc = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j)
        acc += (1.0 + ks[j] * ks[j]) * std::norm(vhat[j]);
    return std::sqrt(acc * g.spacing() / double(g.size()));
}

} // namespace

Field step(const Field& u, double dt, const EvolutionConfig& cfg) {
    if (!u.all_finite()) throw std::invalid_argument("step: non-finite input");
    const Grid& g = u.grid();
    Spectral sp(g, dt);
    std::vector<cplx> v(g.size());
    g.forward_fft(u.values(), v);
    if (cfg.scheme == Scheme::etd_rk4) {
        auto w = etd_weights(g, dt);
        etd_rk4_step(sp, w, v, dt);
    } else {
        if_rk4_step(sp, v, dt);
    }
    Field out(g);
    g.inverse_fft(v, out.values());
    if (!out.all_finite())
        throw std::runtime_error("step: instability produced non-finite values");
    return out;
}

Trajectory evolve(const Field& u0, const EvolutionConfig& cfg) {
    if (!u0.all_finite()) throw std::invalid_argument("evolve: non-finite initial data");
    if (cfg.dt <= 0.0) throw std::invalid_argument("evolve: dt must be positive");
    const Grid& g = u0.grid();
    const double direction = (cfg.t_final < 0.0) ? -1.0 : 1.0;
    const double span = std::abs(cfg.t_final);
    const long nsteps = std::max(1L, std::lround(span / cfg.dt));
    const double dt = direction * span / double(nsteps);

    Spectral sp(g, dt);
    EtdWeights w;
    const bool etd = cfg.scheme == Scheme::etd_rk4;
    if (etd) w = etd_weights(g, dt);

    std::vector<cplx> v(g.size());
    g.forward_fft(u0.values(), v);
    const double h1_0 = h1_of_hat(g, v);
    const double h1_cap = cfg.blowup_threshold * h1_0;

    Trajectory traj;
    auto record = [&](double t, const std::vector<cplx>& vhat) {
        Field u(g);
        g.inverse_fft(vhat, u.values());
        traj.times.push_back(t);
        traj.mass_series.push_back(0.5 * trapz(hadamard(u, u)));
        Field ux = derivative(u, 1);
        cplx e = 0.5 * trapz(hadamard(ux, ux));
        Field u2 = hadamard(u, u);
        e -= 0.25 * trapz(hadamard(u2, u2));
        traj.energy_series.push_back(e);
        traj.states.push_back(std::move(u));
    };
    record(0.0, v);

    auto do_step = [&](std::vector<cplx>& vv) {
        if (etd)
            etd_rk4_step(sp, w, vv, dt);
        else
            if_rk4_step(sp, vv, dt);
    };

    std::vector<cplx> prev = v;
    double t = 0.0, t_prev = 0.0;
    double last_h1 = h1_0;
    for (long i = 1; i <= nsteps; ++i) {
        prev = v;
        t_prev = t;
        do_step(v);
        t = direction * span * double(i) / double(nsteps);
        const bool bad = !finite(v);
        const double h1 = bad ? std::numeric_limits<double>::infinity() : h1_of_hat(g, v);
        if (bad || h1 > h1_cap) {
            if (bad && last_h1 < 0.5 * h1_cap)
                throw std::runtime_error("evolve: instability (non-finite values without "
                                         "norm growth)");
            // sharpen the event time by step halving from the last good state
            std::vector<cplx> s = prev;
            double ts = t_prev;
            double dt_c = dt / 2.0;
            double h1_event = h1;
            while (std::abs(dt_c) >= cfg.dt_min) {
                std::vector<cplx> trial = s;
                Spectral sp_c(g, dt_c);
                EtdWeights w_c;
                if (etd) w_c = etd_weights(g, dt_c);
                if (etd)
                    etd_rk4_step(sp_c, w_c, trial, dt_c);
                else
                    if_rk4_step(sp_c, trial, dt_c);
                const bool tb = !finite(trial);
                const double th1 = tb ? std::numeric_limits<double>::infinity()
                                      : h1_of_hat(g, trial);
                if (tb || th1 > h1_cap) {
                    h1_event = th1;
                    dt_c /= 2.0;
                } else {
                    s = std::move(trial);
                    ts += dt_c;
                }
            }
            traj.blowup_event = BlowupEvent{ts, std::isfinite(h1_event) ? h1_event : h1_cap};
            record(ts, s);
            return traj;
        }
        last_h1 = h1;
        if (i % cfg.snapshot_stride == 0 || i == nsteps) record(t, v);
    }
    return traj;
}

cplx mass(const Field& u) { return 0.5 * integrate(hadamard(u, u)); }

cplx energy(const Field& u) {
    Field ux = derivative(u, 1);
    Field u2 = hadamard(u, u);
    return 0.5 * integrate(hadamard(ux, ux)) - 0.25 * integrate(hadamard(u2, u2));
}

std::pair<double, double> claw_checks(const Field& u_b, double y_a0_mass,
                                      double y_a0_energy, cplx m) {
    const cplx mg = mass(u_b) - (y_a0_mass + 2.0 * m);
    const cplx eg = energy(u_b) - (y_a0_energy - (2.0 / 3.0) * m * m * m);
    return {std::abs(mg), std::abs(eg)};
}

Field v_density(const Field& u) {
    if (!u.all_finite()) throw std::invalid_argument("v_density: non-finite input");
    Field uxx = derivative(u, 2);
    Field out = -uxx;
    for (std::size_t j = 0; j < u.size(); ++j) out[j] -= u[j] * u[j] * u[j];
    return out;
}

ChainState evolve_chain(const DecompositionRecord& rec, double t_final,
                        const EvolutionConfig& cfg, std::vector<ChainState>* samples) {
    const Grid& g = rec.y_a0.grid();
    const double as = rec.alpha_star, bs = rec.beta_star;
    const double ds = rec.delta_star(), gs = rec.gamma_star();

    const double lo = std::min(0.0, t_final), hi = std::max(0.0, t_final);
    for (double tk : blowup_times(as, bs, 0.0, 0.0, lo, hi))
        if (tk > lo + 1e-12 && tk < hi - 1e-12)
            throw std::runtime_error(
                "chain transport cannot cross a blow-up time of the starred soliton");

    BreatherParams pb0{rec.alpha, rec.beta, 0.0, 0.0};
    SolitonParams ps0{rec.alpha, rec.beta, 0.0, 0.0};
    BreatherParams pbs0{as, bs, 0.0, 0.0};
    SolitonParams pss0{as, bs, 0.0, 0.0};
    Field S0 = soliton_kink(ps0, g) - soliton_kink(pss0, g) + rec.correction_kink_q;
    Field T0 = (breather_kink(pb0, g) + soliton_kink(ps0, g)) -
               (breather_kink(pbs0, g) + soliton_kink(pss0, g)) + rec.correction_kink_bq;

    const double direction = (t_final < 0.0) ? -1.0 : 1.0;
    const double span = std::abs(t_final);
    const long nsteps = std::max(1L, std::lround(span / cfg.dt));
    const double dt = direction * span / double(nsteps);
    const std::size_t n = g.size();

    Spectral sp(g, dt);
    std::vector<cplx> y(n), S(n), T(n);
    g.forward_fft(rec.y_a0.values(), y);
    g.forward_fft(S0.values(), S);
    g.forward_fft(T0.values(), T);

    auto profile_pair = [&](double t) {
        SolitonParams ps{as, bs, ds * t, gs * t};
        BreatherParams pbt{as, bs, ds * t, gs * t};
        return std::make_pair(soliton(ps, g), breather(pbt, g));
    };

    std::vector<cplx> py(n), pS(n), pT(n), wk(n);
    auto nl = [&](const std::vector<cplx>& yh, const std::vector<cplx>& Sh,
                  const std::vector<cplx>& Th, const std::pair<Field, Field>& prof,
                  std::vector<cplx>& Ny, std::vector<cplx>& NS, std::vector<cplx>& NT) {
        const Field& Qs = prof.first;
        const Field& Bs = prof.second;
        g.inverse_fft(yh, py);
        for (std::size_t j = 0; j < n; ++j) wk[j] = Sh[j] * cplx(0.0, sp.k[j]);
        g.inverse_fft(wk, pS); // S_x
        for (std::size_t j = 0; j < n; ++j) wk[j] = Th[j] * cplx(0.0, sp.k[j]);
        g.inverse_fft(wk, pT); // T_x
        std::vector<cplx> f1(n), f2(n), f3(n);
        for (std::size_t j = 0; j < n; ++j) {
            const cplx ya = py[j];
            const cplx ua1 = Qs[j] + pS[j] - ya;
            const cplx ub2 = ua1;
            const cplx ua2 = Bs[j] + Qs[j] + pT[j] - ub2;
            f1[j] = ya * ya * ya;
            f2[j] = Qs[j] * Qs[j] * Qs[j] - ua1 * ua1 * ua1 - f1[j];
            f3[j] = Bs[j] * Bs[j] * Bs[j] + Qs[j] * Qs[j] * Qs[j] - ua2 * ua2 * ua2 -
                    ub2 * ub2 * ub2;
        }
        g.forward_fft(f1, Ny);
        g.forward_fft(f2, NS);
        g.forward_fft(f3, NT);
        for (std::size_t j = 0; j < n; ++j) {
            Ny[j] *= sp.mask[j] * cplx(0.0, -sp.k[j]);
            NS[j] *= sp.mask[j];
            NT[j] *= sp.mask[j];
        }
    };

    std::vector<cplx> a1(n), b1(n), c1(n), a2(n), b2(n), c2(n), a3(n), b3(n), c3(n),
        a4(n), b4(n), c4(n), ty(n), tS(n), tT(n);
    auto prof_full = profile_pair(0.0);
    double t = 0.0;
    auto push_sample = [&](double tt) {
        if (!samples) return;
        ChainState st{tt, Field(g), Field(g), Field(g)};
        g.inverse_fft(y, st.y_a.values());
        g.inverse_fft(S, st.s_kink.values());
        g.inverse_fft(T, st.t_kink.values());
        samples->push_back(std::move(st));
    };
    push_sample(0.0);

    for (long i = 1; i <= nsteps; ++i) {
        const double th = t + dt / 2.0;
        const double tf = direction * span * double(i) / double(nsteps);
        auto prof_half = profile_pair(th);
        auto prof_next = profile_pair(tf);

        nl(y, S, T, prof_full, a1, b1, c1);
        for (std::size_t j = 0; j < n; ++j) {
            ty[j] = sp.e_half[j] * (y[j] + 0.5 * dt * a1[j]);
            tS[j] = sp.e_half[j] * (S[j] + 0.5 * dt * b1[j]);
            tT[j] = sp.e_half[j] * (T[j] + 0.5 * dt * c1[j]);
        }
        nl(ty, tS, tT, prof_half, a2, b2, c2);
        for (std::size_t j = 0; j < n; ++j) {
            ty[j] = sp.e_half[j] * y[j] + 0.5 * dt * a2[j];
            tS[j] = sp.e_half[j] * S[j] + 0.5 * dt * b2[j];
            tT[j] = sp.e_half[j] * T[j] + 0.5 * dt * c2[j];
        }
        nl(ty, tS, tT, prof_half, a3, b3, c3);
        for (std::size_t j = 0; j < n; ++j) {
            ty[j] = sp.e_full[j] * y[j] + dt * sp.e_half[j] * a3[j];
            tS[j] = sp.e_full[j] * S[j] + dt * sp.e_half[j] * b3[j];
            tT[j] = sp.e_full[j] * T[j] + dt * sp.e_half[j] * c3[j];
        }
        nl(ty, tS, tT, prof_next, a4, b4, c4);
        for (std::size_t j = 0; j < n; ++j) {
            y[j] = sp.e_full[j] * y[j] + dt / 6.0 * (sp.e_full[j] * a1[j] +
                   2.0 * sp.e_half[j] * (a2[j] + a3[j]) + a4[j]);
            S[j] = sp.e_full[j] * S[j] + dt / 6.0 * (sp.e_full[j] * b1[j] +
                   2.0 * sp.e_half[j] * (b2[j] + b3[j]) + b4[j]);
            T[j] = sp.e_full[j] * T[j] + dt / 6.0 * (sp.e_full[j] * c1[j] +
                   2.0 * sp.e_half[j] * (c2[j] + c3[j]) + c4[j]);
        }
        t = tf;
        prof_full = std::move(prof_next);
        if (!finite(y) || !finite(S) || !finite(T))
            throw std::runtime_error("evolve_chain: non-finite values");
        if (samples && (i % cfg.snapshot_stride == 0 || i == nsteps) && i != nsteps)
            push_sample(t);
    }

    ChainState out{t_final, Field(g), Field(g), Field(g)};
    g.inverse_fft(y, out.y_a.values());
    g.inverse_fft(S, out.s_kink.values());
    g.inverse_fft(T, out.t_kink.values());
    if (samples) samples->push_back(out);
    return out;
}

} // namespace mkdv
