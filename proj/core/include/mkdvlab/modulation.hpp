#pragma once

#include "mkdvlab/backlund.hpp"
#include "mkdvlab/grid.hpp"
#include "mkdvlab/pde.hpp"
#include "mkdvlab/profiles.hpp"

#include <utility>
#include <vector>

namespace mkdv {

struct ShiftFit {
    double x1;
    double x2;
    double residual;   // larger of the two orthogonality integrals
    int iterations;
    bool converged;
};

/// Newton solve for the shifts making u - B(.; alpha, beta, delta*t + x1,
/// gamma*t + x2) orthogonal to both shift directions. Throws after 10
/// diverging iterations or on a near-singular Jacobian.
ShiftFit fit_shifts(const Field& u, double alpha_s, double beta_s, double t,
                    std::pair<double, double> guess);

struct ModulationTrack {
    std::vector<double> times;
    std::vector<double> x1;
    std::vector<double> x2;
    std::vector<double> tube_distance;
    std::vector<double> ortho_residual;
    double drift_bound;  // max |x1'| + |x2'| by centered differences
};

/// Sequential fits over a trajectory, warm-started from the previous
/// sample. Fit failures propagate with the failing time attached.
ModulationTrack track(const Trajectory& traj, double alpha_s, double beta_s);

/// H1 distance to the breather family at the fitted shifts (an upper
/// bound realization of the tube infimum). Falls back to the best
/// iterate when the fit does not converge.
double tube_distance(const Field& u, double alpha_s, double beta_s);

struct WeightConfig {
    double steepness = 10.0;  // K
    double c0 = 0.05;
    double t0 = 0.0;
};

/// Smoothed step (2/pi) arctan(e^{xi/K}); 0 at -infinity, 1 at +infinity,
/// phi' > 0 and phi''' <= phi'/K^2.
double weight_value(double xi, double steepness);
/// phi(x - c0 t0 + (1/2) c0 (t0 - t)) sampled on the grid.
Field weight_profile(const Grid& g, const WeightConfig& w, double t);

/// I(t) = (1/2) int u^2 phi and J(t) with the H1-type integrand, sampled
/// along a real-valued trajectory with the moving weight.
std::pair<std::vector<double>, std::vector<double>>
weighted_functionals(const Trajectory& traj, const WeightConfig& w);

struct HalflineSeries {
    std::vector<double> times;
    std::vector<double> u_minus_bstar;  // H1(x >= c0 t) at fitted shifts
    std::vector<bool> skipped;          // inside a blow-up exclusion window
};

/// ||u(t) - B(.; alpha*, beta*, fitted shifts)||_{H1(x >= c0 t)} along a
/// trajectory; samples near a starred blow-up time are marked skipped.
HalflineSeries halfline_decay(const Trajectory& traj, double base_alpha, double base_beta,
                              const DecompositionRecord& rec, const WeightConfig& w);

struct InelasticityProbe {
    double ell0;         // H1 size of the seed perturbation
    double param_shift;  // |beta* - beta| + |alpha* - alpha|
    double ratio;        // param_shift / ell0
};

InelasticityProbe inelasticity_probe(const Field& u0, const BreatherParams& base,
                                     const DecompositionRecord& rec);

} // namespace mkdv
