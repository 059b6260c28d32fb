#pragma once

#include "mkdvlab/backlund.hpp"
#include "mkdvlab/grid.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace mkdv {

enum class Scheme { integrating_factor_rk4, etd_rk4 };

struct EvolutionConfig {
    double dt = 1e-4;
    double t_final = 1.0;
    Scheme scheme = Scheme::integrating_factor_rk4;
    /// H1 multiple of the initial norm that ends a run as a blow-up event.
    double blowup_threshold = 10.0;
    int snapshot_stride = 100;
    /// Step-halving floor used to sharpen the recorded blow-up time.
    double dt_min = 1e-7;
};

struct BlowupEvent {
    double time;
    double h1_norm;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<Field> states;
    std::vector<cplx> mass_series;
    std::vector<cplx> energy_series;
    std::optional<BlowupEvent> blowup_event;
};

/// One step of u_t + (u_xx + u^3)_x = 0. The dispersive part is handled
/// exactly in Fourier space; the cubic term is dealiased by the 2/3 rule.
Field step(const Field& u, double dt, const EvolutionConfig& cfg);

/// March to cfg.t_final (negative values run backwards), recording
/// snapshots and the mass/energy monitors every snapshot_stride steps.
/// Complex data may end early with a blowup_event; a NaN without norm
/// growth throws an instability error instead.
Trajectory evolve(const Field& u0, const EvolutionConfig& cfg);

/// (1/2) int u^2 -- u^2, not |u|^2, so complex-valued for complex data.
cplx mass(const Field& u);
/// (1/2) int u_x^2 - (1/4) int u^4.
cplx energy(const Field& u);

/// Gaps of the transported conservation identities:
///   |mass(u_b) - (y_mass + 2m)| and |energy(u_b) - (y_energy - (2/3)m^3)|.
std::pair<double, double> claw_checks(const Field& u_b, double y_a0_mass,
                                      double y_a0_energy, cplx m);

/// -(u_xx + u^3): the time-derivative potential of the kink of a solution.
Field v_density(const Field& u);

/// Co-evolve the real seed y_a with the two transported kink corrections
/// (relative to the starred soliton and starred breather+soliton bases,
/// shifts x1 = x2 = 0). Valid while [0, t_final] crosses no blow-up time
/// of the starred soliton; throws otherwise.
ChainState evolve_chain(const DecompositionRecord& rec, double t_final,
                        const EvolutionConfig& cfg,
                        std::vector<ChainState>* samples = nullptr);

} // namespace mkdv
