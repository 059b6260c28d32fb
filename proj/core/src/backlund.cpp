#include "mkdvlab/backlund.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace mkdv {

namespace {

constexpr double kPi = std::numbers::pi;
const double kRt2 = std::sqrt(2.0);

// Local 8th-order first derivative (6th-order one-sided at the window
// edges). Used inside the inversion loops: correction kinks can carry a
// small torus-wrap mismatch at the seam, which a periodic spectral
// derivative would smear over the whole window.
Field fd_derivative(const Field& f) {
    const Grid& g = f.grid();
    const std::size_t n = g.size();
    const double dx = g.spacing();
    Field out(g);
    static const double c[4] = {4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0};
    for (std::size_t j = 4; j + 4 < n; ++j) {
        cplx acc(0.0);
        for (int s = 1; s <= 4; ++s) acc += c[s - 1] * (f[j + s] - f[j - s]);
        out[j] = acc / dx;
    }
    static const double fwd[7] = {-49.0 / 20.0, 6.0, -15.0 / 2.0, 20.0 / 3.0,
                                  -15.0 / 4.0, 6.0 / 5.0, -1.0 / 6.0};
    for (std::size_t j = 0; j < 4; ++j) {
        cplx a(0.0), b(0.0);
        for (int s = 0; s < 7; ++s) {
            a += fwd[s] * f[j + s];
            b += fwd[s] * f[n - 1 - j - s];
        }
        out[j] = a / dx;
        out[n - 1 - j] = -b / dx;
    }
    return out;
}

// Running trapezoid antiderivative with F[0] = 0.
std::vector<cplx> cumtrap(const Field& f) {
    const double dx = f.grid().spacing();
    std::vector<cplx> F(f.size());
    F[0] = 0.0;
    for (std::size_t j = 1; j < f.size(); ++j)
        F[j] = F[j - 1] + 0.5 * dx * (f[j - 1] + f[j]);
    return F;
}

// w with (mu w)_x = mu rhs and w -> 0 at both ends, for mu decaying at
// both ends. The left half integrates from -L; the right half uses the
// backward tail so the quotient never divides a cancelled sum by a tiny mu.
Field solve_decaying(const Field& mu, const Field& rhs) {
    const Grid& g = mu.grid();
    const std::size_t n = g.size();
    Field h = hadamard(mu, rhs);
    auto F = cumtrap(h);
    const cplx total = F[n - 1];
    Field w(g);
    const std::size_t j0 = n / 2;
    for (std::size_t j = 0; j < j0; ++j) w[j] = F[j] / mu[j];
    for (std::size_t j = j0; j < n; ++j) w[j] = (F[j] - total) / mu[j];
    return w;
}

// w with (mu1 w)_x = mu1 rhs and w(0) = s0, for mu1 growing at both ends;
// integration runs outward from the center node.
Field solve_growing(const Field& mu1, const Field& rhs, cplx s0) {
    const Grid& g = mu1.grid();
    const std::size_t n = g.size();
    const double dx = g.spacing();
    const std::size_t j0 = g.nearest_index(0.0);
    Field h = hadamard(mu1, rhs);
    std::vector<cplx> c(n);
    c[j0] = 0.0;
    for (std::size_t j = j0 + 1; j < n; ++j) c[j] = c[j - 1] + 0.5 * dx * (h[j - 1] + h[j]);
    for (std::size_t j = j0; j-- > 0;) c[j] = c[j + 1] - 0.5 * dx * (h[j] + h[j + 1]);
    Field w(g);
    const cplx anchor = mu1[j0] * s0;
    for (std::size_t j = 0; j < n; ++j) w[j] = (anchor + c[j]) / mu1[j];
    return w;
}

Field sin_scaled(const Field& kink) {
    Field out = kink;
    for (auto& v : out.values()) v = std::sin(v / kRt2);
    return out;
}

Field cos_scaled(const Field& kink) {
    Field out = kink;
    for (auto& v : out.values()) v = std::cos(v / kRt2);
    return out;
}

cplx trapz(const Field& f) {
    cplx s(0.0);
    for (const auto& v : f.values()) s += v;
    return s * f.grid().spacing();
}

// Continuity unwrap of atan values (period pi in the real part).
void unwrap_pi(std::vector<cplx>& v) {
    double off = 0.0;
    for (std::size_t j = 1; j < v.size(); ++j) {
        const double cand = v[j].real() + off;
        off += kPi * std::round((v[j - 1].real() - cand) / kPi);
        v[j] += off;
    }
}

double h1_distance(const Field& a, const Field& b) {
    Field d = a;
    d -= b;
    return sobolev_norm(d, 1);
}

} // namespace

std::pair<Field, Field> g_residual(const BacklundState& s) {
    if (!(s.m.real() > 0.0)) throw std::invalid_argument("g_residual: Re m must be positive");
    const Grid& g = s.u_a.grid();
    Field kink = s.combined_kink ? *s.combined_kink
                                 : cumulative(s.u_a + s.u_b, s.kink_anchor);
    Field sn = sin_scaled(kink);
    Field cs = cos_scaled(kink);
    Field g1(g), g2(g);
    Field ua_x = derivative(s.u_a, 1);
    Field ub_x = derivative(s.u_b, 1);
    for (std::size_t j = 0; j < g.size(); ++j) {
        g1[j] = (s.u_a[j] - s.u_b[j]) / kRt2 - s.m * sn[j];
        g2[j] = s.v_a[j] - s.v_b[j] +
                s.m * ((ua_x[j] + ub_x[j]) * cs[j] +
                       (s.u_a[j] * s.u_a[j] + s.u_b[j] * s.u_b[j]) / kRt2 * sn[j]);
    }
    return {std::move(g1), std::move(g2)};
}

ForwardInversion invert_forward(const Field& base_a, const Field& base_b,
                                const Field& base_kink, const Field& mu0, cplx m0,
                                const Field& u_a, const InversionConfig& cfg) {
    const Grid& g = base_a.grid();
    const std::size_t n = g.size();
    if (!u_a.all_finite()) throw std::invalid_argument("invert_forward: non-finite input");

    double mu_min = 1e300;
    for (const auto& v : mu0.values()) mu_min = std::min(mu_min, std::abs(v));
    if (mu_min == 0.0) throw std::runtime_error("invert_forward: vanishing integrating factor");

    Field sin0 = sin_scaled(base_kink);
    Field cos0 = cos_scaled(base_kink);
    const cplx denom = trapz(hadamard(mu0, sin0));
    if (std::abs(denom) < 1e-8)
        throw std::runtime_error("degenerate solvability: solvability integral too small");

    const bool warned = h1_distance(u_a, base_a) > cfg.radius_warn;

    Field uc0 = base_a + base_b;
    Field tuc(g);
    cplx m = m0;
    std::vector<double> history;
    double res = 0.0;

    for (int it = 0; it <= cfg.max_iterations; ++it) {
        Field uc = fd_derivative(tuc);
        Field R(g);
        for (std::size_t j = 0; j < n; ++j) {
            const cplx kj = base_kink[j] + tuc[j];
            R[j] = (2.0 * u_a[j] - uc0[j] - uc[j]) / kRt2 - m * std::sin(kj / kRt2);
        }
        res = max_abs(R);
        history.push_back(res);
        if (res < cfg.tolerance) {
            Field u_b = uc0 + uc - u_a;
            return {std::move(u_b), m, res, it, std::move(history), std::move(tuc), warned};
        }
        if (it == cfg.max_iterations) break;
        const cplx dm = trapz(hadamard(mu0, R)) / denom;
        Field rhs(g);
        for (std::size_t j = 0; j < n; ++j) rhs[j] = kRt2 * (R[j] - dm * sin0[j]);
        Field dtuc = solve_decaying(mu0, rhs);
        for (std::size_t j = 0; j < n; ++j) tuc[j] += cfg.damping * dtuc[j];
        m += cfg.damping * dm;
    }
    std::ostringstream os;
    os << "invert_forward did not converge: residuals";
    for (double r : history) os << " " << r;
    throw std::runtime_error(os.str());
}

namespace {

struct BackwardAttempt {
    Field tuc;
    Field u_a;
    cplx orth;
    double residual;
    int iterations;
};

BackwardAttempt backward_solve_for_constant(const Grid& g, const Field& uc0,
                                            const Field& base_kink, const Field& mu1,
                                            cplx m, const Field& u_b,
                                            const InversionConfig& cfg, cplx s0,
                                            const Field* initial_kink,
                                            const Field& dinv_mu1) {
    const std::size_t n = g.size();
    const std::size_t j0 = g.nearest_index(0.0);
    Field tuc(g);
    if (initial_kink) {
        tuc = *initial_kink;
        const cplx shift = s0 - tuc[j0];
        // shift along the homogeneous direction 1/mu1 to hit tuc(0) = s0
        for (std::size_t j = 0; j < n; ++j) tuc[j] += shift * mu1[j0] / mu1[j];
    } else if (s0 != 0.0) {
        for (std::size_t j = 0; j < n; ++j) tuc[j] = s0 * mu1[j0] / mu1[j];
    }
    double res = 0.0;
    int it = 0;
    for (; it <= cfg.max_iterations; ++it) {
        Field uc = fd_derivative(tuc);
        Field R(g);
        for (std::size_t j = 0; j < n; ++j) {
            const cplx kj = base_kink[j] + tuc[j];
            R[j] = (uc0[j] + uc[j] - 2.0 * u_b[j]) / kRt2 - m * std::sin(kj / kRt2);
        }
        res = max_abs(R);
        if (res < cfg.tolerance || it == cfg.max_iterations) break;
        Field rhs(g);
        for (std::size_t j = 0; j < n; ++j) rhs[j] = -kRt2 * R[j];
        Field dtuc = solve_growing(mu1, rhs, 0.0);
        for (std::size_t j = 0; j < n; ++j) tuc[j] += cfg.damping * dtuc[j];
    }
    Field u_a = uc0 + fd_derivative(tuc) - u_b;
    Field prod(g);
    for (std::size_t j = 0; j < n; ++j) prod[j] = (u_a[j] - u_b[j]) * dinv_mu1[j];
    return {std::move(tuc), std::move(u_a), trapz(prod), res, it};
}

} // namespace

BackwardInversion invert_backward(const Field& base_a, const Field& base_b,
                                  const Field& base_kink, const Field& mu1, cplx m,
                                  const Field& u_b, const InversionConfig& cfg,
                                  const std::optional<cplx>& pin_kink_at_zero,
                                  const Field* initial_kink) {
    const Grid& g = base_a.grid();
    if (!u_b.all_finite()) throw std::invalid_argument("invert_backward: non-finite input");
    Field uc0 = base_a + base_b;
    Field inv_mu1(g);
    for (std::size_t j = 0; j < g.size(); ++j) inv_mu1[j] = 1.0 / mu1[j];
    Field dinv = derivative(inv_mu1, 1);

    auto attempt = [&](cplx s0) {
        return backward_solve_for_constant(g, uc0, base_kink, mu1, m, u_b, cfg, s0,
                                           initial_kink, dinv);
    };

    BackwardAttempt best = attempt(pin_kink_at_zero ? *pin_kink_at_zero : cplx(0.0));
    if (!pin_kink_at_zero) {
        // the orthogonality functional is affine in the constant to leading
        // order; secant settles it in a couple of steps
        cplx s_prev(0.0), F_prev = best.orth;
        cplx s_cur(1e-3, 0.0);
        BackwardAttempt cur = attempt(s_cur);
        for (int k = 0; k < 8; ++k) {
            if (std::abs(cur.orth) < 1e-13) break;
            const cplx dF = cur.orth - F_prev;
            if (std::abs(dF) < 1e-30) break;
            const cplx s_next = s_cur - cur.orth * (s_cur - s_prev) / dF;
            s_prev = s_cur;
            F_prev = cur.orth;
            s_cur = s_next;
            cur = attempt(s_cur);
        }
        if (std::abs(cur.orth) < std::abs(best.orth)) best = std::move(cur);
    }

    if (best.residual >= cfg.tolerance && best.iterations >= cfg.max_iterations) {
        std::ostringstream os;
        os << "invert_backward did not converge: residual " << best.residual;
        throw std::runtime_error(os.str());
    }
    const double edge = std::max(std::abs(best.tuc[0]), std::abs(best.tuc[g.size() - 1]));
    if (edge > 1e-3 * (1.0 + max_abs(best.tuc)))
        throw std::runtime_error("non-decaying inverse branch");
    return {std::move(best.u_a), best.residual, best.orth, best.iterations,
            std::move(best.tuc)};
}

DecompositionRecord decompose_double(double alpha, double beta, const Field& u0,
                                     const InversionConfig& cfg) {
    const Grid& g = u0.grid();
    BreatherParams pb{alpha, beta, 0.0, 0.0};
    SolitonParams ps{alpha, beta, 0.0, 0.0};
    Field B0 = breather(pb, g);
    Field Bt0 = breather_kink(pb, g);
    Field Q0 = soliton(ps, g);
    Field Qt0 = soliton_kink(ps, g);
    Field mu0 = mu_factor(pb, g);

    auto fwd1 = invert_forward(B0, Q0, Bt0 + Qt0, mu0, cplx(beta, -alpha), u0, cfg);
    const cplx p0 = fwd1.m - cplx(beta, -alpha);
    Field z_b0 = fwd1.u_b - Q0;

    auto fwd2 = invert_forward(Q0, Field(g), Qt0, Q0, cplx(beta, alpha), fwd1.u_b, cfg);
    const cplx q0 = fwd2.m - cplx(beta, alpha);
    Field y_a0 = fwd2.u_b;

    DecompositionRecord rec{
        std::move(z_b0),
        p0,
        std::move(y_a0),
        q0,
        alpha + q0.imag(),
        beta + q0.real(),
        {fwd1.residual, fwd2.residual},
        alpha,
        beta,
        u0 - B0,
        std::move(fwd1.correction_kink),
        std::move(fwd2.correction_kink),
        0.0,
        true,
    };
    rec.max_imag_y = max_abs_imag(rec.y_a0);
    rec.realness_ok = rec.max_imag_y < 1e2 * cfg.tolerance + 1e-8;
    return rec;
}

Reconstruction reconstruct_double(const DecompositionRecord& rec, const Field& y_a_t,
                                  double t, std::pair<double, double> shifts,
                                  const InversionConfig& cfg, const ChainState* chain,
                                  double exclusion_window) {
    const Grid& g = y_a_t.grid();
    const double as = rec.alpha_star, bs = rec.beta_star;
    const double ds = rec.delta_star(), gs = rec.gamma_star();
    const cplx m2 = cplx(rec.beta, rec.alpha) + rec.q0;  // = beta* + i alpha*
    const cplx m1 = cplx(rec.beta, -rec.alpha) + rec.p0;

    for (double tk : blowup_times(as, bs, shifts.first, shifts.second,
                                  t - 10.0 * exclusion_window, t + 10.0 * exclusion_window))
        if (std::abs(t - tk) < exclusion_window)
            throw std::runtime_error("inside blow-up exclusion window");

    SolitonParams ps{as, bs, ds * t + shifts.first, gs * t + shifts.second};
    BreatherParams pbs{as, bs, ds * t + shifts.first, gs * t + shifts.second};
    Field Qs = soliton(ps, g);
    Field Qts = soliton_kink(ps, g);
    Field Bs = breather(pbs, g);
    Field Bts = breather_kink(pbs, g);

    if (chain) {
        if (std::abs(chain->time - t) > 1e-9)
            throw std::invalid_argument("chain state time does not match t");
        Field s_x = derivative(chain->s_kink, 1);
        Field t_x = derivative(chain->t_kink, 1);
        Field u_b = Qs + s_x - y_a_t;
        Field u_a = Bs + Qs + t_x - u_b;
        Field R1(g), R2(g);
        for (std::size_t j = 0; j < g.size(); ++j) {
            R1[j] = (u_b[j] - y_a_t[j]) / kRt2 -
                    m2 * std::sin((Qts[j] + chain->s_kink[j]) / kRt2);
            R2[j] = (u_a[j] - u_b[j]) / kRt2 -
                    m1 * std::sin((Bts[j] + Qts[j] + chain->t_kink[j]) / kRt2);
        }
        Field dinv1 = derivative(Qs, 1);
        Field prod1(g);
        for (std::size_t j = 0; j < g.size(); ++j) prod1[j] = (u_b[j] - y_a_t[j]) * dinv1[j];
        Field mus = mu_factor(pbs, g);
        Field dinv2 = derivative(mus, 1);
        Field prod2(g);
        for (std::size_t j = 0; j < g.size(); ++j) prod2[j] = (u_a[j] - u_b[j]) * dinv2[j];
        return {std::move(u_b), std::move(u_a), max_abs(R1), max_abs(R2),
                trapz(prod1), trapz(prod2)};
    }

    Field inv_q(g);
    for (std::size_t j = 0; j < g.size(); ++j) inv_q[j] = 1.0 / Qs[j];
    auto stage1 = invert_backward(Qs, Field(g), Qts, inv_q, m2, y_a_t, cfg);

    Field mus = mu_factor(pbs, g);
    Field inv_mus(g);
    for (std::size_t j = 0; j < g.size(); ++j) inv_mus[j] = 1.0 / mus[j];
    auto stage2 = invert_backward(Bs, Qs, Bts + Qts, inv_mus, m1, stage1.u_a, cfg);

    return {std::move(stage1.u_a), std::move(stage2.u_a), stage1.residual,
            stage2.residual, stage1.orthogonality, stage2.orthogonality};
}

Field permutability_map(const Field& u0_kink, const Field& u1_kink, const Field& u12_kink,
                        cplx kappa1, cplx kappa2) {
    const Grid& g = u0_kink.grid();
    const double scale = std::abs(kappa1) + std::abs(kappa2);
    if (std::abs(kappa1 - kappa2) < 1e-12 * scale || std::abs(kappa1 + kappa2) < 1e-12 * scale)
        throw std::invalid_argument("permutability_map: degenerate parameter pair");
    const cplx ratio = (kappa1 - kappa2) / (kappa1 + kappa2);
    const std::size_t n = g.size();
    std::vector<cplx> at(n);
    for (std::size_t j = 0; j < n; ++j) {
        const cplx arg = (u12_kink[j] - u0_kink[j]) / (2.0 * kRt2);
        const cplx c = std::cos(arg);
        if (std::abs(c) < 1e-6) {
            std::ostringstream os;
            os << "branch pole near x = " << g.node(j);
            throw std::runtime_error(os.str());
        }
        at[j] = std::atan(ratio * std::sin(arg) / c);
    }
    unwrap_pi(at);
    Field out(g);
    for (std::size_t j = 0; j < n; ++j) out[j] = u1_kink[j] - 2.0 * kRt2 * at[j];
    return out;
}

double realness_formula_check(const DecompositionRecord& rec, const Grid& g) {
    BreatherParams pb{rec.alpha, rec.beta, 0.0, 0.0};
    SolitonParams ps{rec.alpha, rec.beta, 0.0, 0.0};
    Field Bt0 = breather_kink(pb, g);
    Field Qt0 = soliton_kink(ps, g);
    Field zta = cumulative(rec.z_a0, -g.half_length());
    Field ztb = cumulative(rec.z_b0, -g.half_length());
    Field yta = cumulative(rec.y_a0, -g.half_length());
    const double pref = -(rec.beta + rec.p0.real()) / (rec.alpha - rec.p0.imag());
    double worst = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
        const cplx arg = (Bt0[j] + zta[j] - yta[j]) / (2.0 * kRt2);
        const cplx c = std::cos(arg);
        if (std::abs(c) < 1e-6) continue; // poles excluded from the check
        const cplx lhs = std::sin(arg) / c;
        const double rhs = pref * std::tanh((Qt0[j] + ztb[j]).imag() / kRt2);
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    return worst;
}

double theta_identity_residual(const BreatherParams& p_b, const SolitonParams& p_s,
                               const Grid& g, cplx factor_perturbation) {
    p_b.validate();
    p_s.validate();
    if (p_b.alpha != std::abs(p_s.alpha) || p_b.beta != p_s.beta ||
        p_b.x1 != p_s.x1 || p_b.x2 != p_s.x2)
        throw std::invalid_argument("theta_identity_residual: parameter sets must match");
    auto rep = blowup_report(p_s);
    if (rep.is_singular) throw std::runtime_error("theta_identity_residual: singular shifts");

    const double a = p_b.alpha, b = p_b.beta;
    const cplx f = cplx(b, -a) + factor_perturbation;
    auto xs = g.nodes();
    double worst = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
        const double y1 = xs[j] + p_b.x1, y2 = xs[j] + p_b.x2;
        const double s1 = std::sin(a * y1), c1 = std::cos(a * y1);
        const double sh = std::sinh(b * y2), ch = std::cosh(b * y2);
        const cplx th1 = (b / a) * s1 / ch;
        const cplx th2 = std::exp(cplx(b * y2, a * y1));
        const cplx th1x = b * (a * c1 * ch - b * s1 * sh) / (a * ch * ch);
        const cplx P0 = th1x - f * th1;
        const cplx P1 = -(cplx(b, a) + f) + th1 * th1 * (f - cplx(b, a));
        const cplx P2 = th1x + f * th1;
        const cplx lhs = P0 + th2 * (P1 + th2 * P2);
        const double scale = 1.0 + std::abs(P0) + std::abs(th2) * std::abs(P1) +
                             std::abs(th2) * std::abs(th2) * std::abs(P2);
        worst = std::max(worst, std::abs(lhs) / scale);
    }
    return worst;
}

} // namespace mkdv
