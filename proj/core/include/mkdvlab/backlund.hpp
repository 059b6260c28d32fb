#pragma once

#include "mkdvlab/grid.hpp"
#include "mkdvlab/profiles.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace mkdv {

/// The quintuple the transformation functional acts on. v_a, v_b hold the
/// time-derivative potentials (realized as -(u_xx + u^3) for solutions).
/// combined_kink, when present, supplies the closed-form antiderivative of
/// u_a + u_b; otherwise it is recovered with cumulative().
struct BacklundState {
    Field u_a;
    Field u_b;
    Field v_a;
    Field v_b;
    cplx m;
    double kink_anchor;
    std::optional<Field> combined_kink;
};

struct InversionConfig {
    double tolerance = 1e-10;
    int max_iterations = 50;
    double damping = 1.0;
    /// H1 distance from the base above which results are flagged, not refused.
    double radius_warn = 0.2;
};

/// Pointwise residuals of both components of the transformation relations.
std::pair<Field, Field> g_residual(const BacklundState& s);

struct ForwardInversion {
    Field u_b;
    cplx m;
    double residual;
    int iterations;
    std::vector<double> history;
    /// Decaying correction kink (antiderivative of u_a + u_b - base sum).
    Field correction_kink;
    bool radius_warning;
};

/// Solve the first relation for (u_b, m) given u_a near the base pair, by
/// the integrating-factor fixed point with the solvability condition
/// selecting the m-correction at each step. mu0 must decay at both window
/// ends and vanish nowhere.
ForwardInversion invert_forward(const Field& base_a, const Field& base_b,
                                const Field& base_kink, const Field& mu0, cplx m0,
                                const Field& u_a, const InversionConfig& cfg);

struct BackwardInversion {
    Field u_a;
    double residual;
    cplx orthogonality;
    int iterations;
    Field correction_kink;
};

/// Solve the first relation for u_a given u_b with m fixed, integrating
/// outward from x = 0 with the growing factor mu1. The free constant is
/// fixed by secant on the orthogonality functional, or pinned to
/// *pin_kink_at_zero when given (used by the transported reconstruction).
BackwardInversion invert_backward(const Field& base_a, const Field& base_b,
                                  const Field& base_kink, const Field& mu1, cplx m,
                                  const Field& u_b, const InversionConfig& cfg,
                                  const std::optional<cplx>& pin_kink_at_zero = std::nullopt,
                                  const Field* initial_kink = nullptr);

struct DecompositionRecord {
    Field z_b0;
    cplx p0;
    Field y_a0;
    cplx q0;
    double alpha_star;
    double beta_star;
    std::pair<double, double> residuals;

    // context carried for reconstruction and diagnostics
    double alpha;
    double beta;
    Field z_a0;
    Field correction_kink_bq;  // forward correction at the (B, Q) base
    Field correction_kink_q;   // forward correction at the (Q, 0) base
    double max_imag_y;
    bool realness_ok;

    double delta_star() const noexcept {
        return alpha_star * alpha_star - 3.0 * beta_star * beta_star;
    }
    double gamma_star() const noexcept {
        return 3.0 * alpha_star * alpha_star - beta_star * beta_star;
    }
};

/// Two forward inversions: first at the (breather, soliton) base with
/// mu = beta*Btilde_1 - i*alpha*Btilde_2, then at the (soliton, 0) base
/// with mu = Q. Asserts p0 = conj(q0) and realness of the seed.
DecompositionRecord decompose_double(double alpha, double beta, const Field& u0,
                                     const InversionConfig& cfg);

/// Kink corrections transported along the flow: s_kink = ztilde_b +
/// ytilde_a relative to the starred soliton, t_kink = ztilde_a + ztilde_b
/// relative to the starred (breather + soliton) pair. Produced by
/// evolve_chain() in the pde module.
struct ChainState {
    double time;
    Field y_a;
    Field s_kink;
    Field t_kink;
};

struct Reconstruction {
    Field u_b_t;
    Field u_a_t;
    double residual_b;
    double residual_a;
    cplx orthogonality_b;
    cplx orthogonality_a;
};

/// Rebuild the complex solution Q* + z_b and the breather-side solution
/// B* + z_a at time t from the evolved seed. Without a chain state the
/// free constants come from the orthogonality normalization (exact at
/// t = 0); with one, the transported kinks anchor the dynamically
/// continued branch. Throws inside the blow-up exclusion window.
Reconstruction reconstruct_double(const DecompositionRecord& rec, const Field& y_a_t,
                                  double t, std::pair<double, double> shifts,
                                  const InversionConfig& cfg,
                                  const ChainState* chain = nullptr,
                                  double exclusion_window = 0.05);

/// Composition map of the permutability theorem: from the kinks of u_0,
/// u_1, u_12 and the two parameters, produce the kink of the fourth
/// vertex u_3 (equal to u_2 by permutability).
Field permutability_map(const Field& u0_kink, const Field& u1_kink, const Field& u12_kink,
                        cplx kappa1, cplx kappa2);

/// max-norm discrepancy of the tan/tanh realness identity satisfied by a
/// completed decomposition.
double realness_formula_check(const DecompositionRecord& rec, const Grid& g);

/// Scale-normalized residual of the rational trig identity behind the
/// profile relation (independent algebraic route, no sampling of kinks).
/// factor_perturbation shifts the (beta - i alpha) coefficient; nonzero
/// values serve as a negative control.
double theta_identity_residual(const BreatherParams& p_b, const SolitonParams& p_s,
                               const Grid& g, cplx factor_perturbation = 0.0);

} // namespace mkdv
