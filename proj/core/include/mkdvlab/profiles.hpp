#pragma once

#include "mkdvlab/grid.hpp"

#include <vector>

namespace mkdv {

/// Scaling pair and shifts of the oscillatory bound state. The velocities
/// delta, gamma are always derived, never stored.
struct BreatherParams {
    double alpha;
    double beta;
    double x1 = 0.0;
    double x2 = 0.0;

    double delta() const noexcept { return alpha * alpha - 3.0 * beta * beta; }
    double gamma() const noexcept { return 3.0 * alpha * alpha - beta * beta; }
    void validate() const;
};

/// Complex-soliton parameters. A negative alpha encodes the conjugate
/// profile; the complex scaling is m = beta + i*alpha with Re m > 0.
struct SolitonParams {
    double alpha;
    double beta;
    double x1 = 0.0;
    double x2 = 0.0;

    cplx scale() const noexcept { return {beta, alpha}; }
    void validate() const;
};

struct BlowupReport {
    bool is_singular;
    long nearest_k;
    double distance;
};

/// Window defaults chosen so the e^{-beta|x|} tails are far below solver
/// tolerances: L = 40/min(1, beta), n = 2048.
double default_half_length(double beta_min);
Grid default_grid(double beta_min, std::size_t n = 2048);
double default_singular_window(const SolitonParams& p);

/// Distance of x1 - x2 to the singular lattice (pi/alpha)(k + 1/2).
BlowupReport blowup_report(const SolitonParams& p);
BlowupReport blowup_report(const SolitonParams& p, double window);

/// Singular times of the starred soliton with constant shifts:
/// t_k = [(pi/alpha)(k + 1/2) - (x1 - x2)] / (delta - gamma).
std::vector<double> blowup_times(double alpha_s, double beta_s, double x1, double x2,
                                 double t_lo, double t_hi);

Field breather_kink(const BreatherParams& p, const Grid& g);
Field breather(const BreatherParams& p, const Grid& g);

struct BreatherShiftDerivs {
    Field b1;     // d B / d x1
    Field b2;     // d B / d x2
    Field kink1;  // d Btilde / d x1
    Field kink2;  // d Btilde / d x2
};
BreatherShiftDerivs breather_shift_derivs(const BreatherParams& p, const Grid& g);

/// B with first and second shift derivatives; used by the modulation
/// Newton solve.
struct BreatherJet {
    Field b, b1, b2, b11, b12, b22;
};
BreatherJet breather_jet(const BreatherParams& p, const Grid& g);

/// max-norm of Btilde_t + B_xx + B^3 with Btilde_t = delta*Btilde_1 +
/// gamma*Btilde_2 and B_xx spectral; the static form of the evolution
/// equation for the profile.
double breather_residual(const BreatherParams& p, const Grid& g);

/// Continuity-unwrapped complex kink, 0 at -infinity and sqrt(2)*pi at
/// +infinity. Throws for parameters on the singular lattice.
Field soliton_kink(const SolitonParams& p, const Grid& g);
Field soliton(const SolitonParams& p, const Grid& g);
/// Time-derivative potential of the kink: -(beta + i alpha)^2 * Q.
Field soliton_t(const SolitonParams& p, const Grid& g);

/// Partial mass (1/2) int_{-inf}^x Q^2 in closed form.
Field partial_mass_soliton(const SolitonParams& p, const Grid& g);
/// Partial mass (1/2) int_{-inf}^x B^2 in closed form; 0 at -infinity,
/// 4*beta at +infinity.
Field partial_mass_breather(const BreatherParams& p, const Grid& g);

struct LogIntegrals {
    Field int_mass_breather;  // int_0^x M
    Field int_mass_soliton;   // int_0^x N
    Field cos_sum;            // -(beta - i alpha) int_0^x cos((Btilde+Qtilde)/sqrt2)
};
/// Closed-form antiderivatives anchored at x = 0; logs taken on the
/// continuity-unwrapped branch. Parameters of p_b and p_s must match.
LogIntegrals log_integrals(const BreatherParams& p_b, const SolitonParams& p_s, const Grid& g);

/// Integrating factor mu = beta*Btilde_1 - i*alpha*Btilde_2; decays at
/// both window ends and has no zeros off the singular lattice.
Field mu_factor(const BreatherParams& p, const Grid& g);
/// Reciprocal 1/mu, exponentially growing at the window ends. Throws
/// "window too large for mu^-1" when the values would overflow.
Field mu_inverse(const BreatherParams& p, const Grid& g);

} // namespace mkdv
