#pragma once

#include "mkdvlab/config.hpp"
#include "mkdvlab/grid.hpp"
#include "mkdvlab/pde.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace mkdv {

enum class ExperimentKind {
    identities,
    stability,
    complex_soliton,
    asymptotic,
    permutability,
    inelasticity,
};

enum class PerturbationKind { sech_cosine, gaussian, b1_direction, custom_file };

struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::identities;
    double alpha = 1.0;
    double beta = 1.0;
    double eta = 1e-2;
    std::vector<double> eta_sweep;
    PerturbationKind perturbation = PerturbationKind::sech_cosine;
    std::string perturbation_file;
    double grid_half_length = 0.0;  // 0: use the decay-based default
    std::size_t grid_n = 2048;
    EvolutionConfig evolution;
    double weight_c0 = 0.0;  // 0: 0.05 * min(1, beta*^2)
    double weight_steepness = 0.0;  // 0: sqrt(2/c0) rounded up
    double shift_offset = 0.3;      // x1 - x2 for the complex-soliton run
    int draws = 20;
    std::map<std::string, double> tolerances;
    std::uint64_t seed = 7;
    std::string output_dir = ".";
    bool quiet = false;

    std::map<std::string, std::string> echo;  // raw key/value view for reports
};

ExperimentKind parse_experiment(const std::string& name);
std::string experiment_name(ExperimentKind k);

/// Build the typed config; unknown keys are rejected, tolerances are
/// filled with experiment defaults and must end up positive.
ExperimentConfig load_experiment_config(const KeyValueConfig& kv);

/// Static findings (no computation): parameter signs, singular shifts at
/// t = 0, domain width, time-step heuristic. Returned, never thrown.
std::vector<std::string> validate(const ExperimentConfig& cfg);

struct CheckRecord {
    std::string name;
    double value;
    double threshold;
    bool pass;
};

struct RunReport {
    std::map<std::string, std::string> config_echo;
    std::vector<CheckRecord> checks;
    std::vector<std::string> files;
    double wall_seconds = 0.0;
    bool overall_pass() const;
};

RunReport run(const ExperimentConfig& cfg);

void write_report_json(const RunReport& report, const std::string& path);

/// Deterministic uniform draw in [lo, hi) from a 64-bit engine state;
/// identical across platforms for a fixed seed.
double uniform_draw(std::uint64_t& state, double lo, double hi);

/// All closed-form identity residuals for one parameter draw, evaluated
/// on the decay-based default grid for that beta. Keys are stable; values
/// are max-norms (the reciprocal-factor check is relative).
std::map<std::string, double> identity_battery(double alpha, double beta, double x1,
                                               double x2, std::size_t n = 2048);

Field make_perturbation(PerturbationKind kind, double eta, double alpha, double beta,
                        const Grid& g, const std::string& file);

} // namespace mkdv
