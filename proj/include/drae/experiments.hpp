#pragma once

#include <cstdint>
#include <vector>

#include "drae/environments.hpp"
#include "drae/sfp.hpp"

namespace drae {

// One frontier point; er/variance/lpm are the profile diagnostics recomputed
// at the fixed point, so every concept is scored on both risk measures.
struct FrontierRow {
    SolutionConcept solution_concept = SolutionConcept::Nash;
    double gamma = 0.0;
    double tau = 0.0;
    double degree = 2.0;
    Scheme scheme = Scheme::Transpose;
    double er = 0.0;
    double variance = 0.0;
    double lpm = 0.0;
    int iterations = 0;
    bool converged = false;
    std::uint64_t seed = 0;
};

// One sfp_solve per (concept, gamma); rows sorted by (concept, gamma).
std::vector<FrontierRow> gamma_sweep(const StateGame& game,
                                     const std::vector<SolutionConcept>& concepts,
                                     const std::vector<double>& gammas, const RiskConfig& cfg,
                                     std::uint64_t seed, const SFPOptions& opts = {},
                                     int jobs = 1);

// Normalized area under the lpm-vs-er curve on the common er interval:
// area(DRAE) / area(RAE). Values below 1 mean DRAE dominates.
double downside_auc_ratio(const std::vector<FrontierRow>& drae_rows,
                          const std::vector<FrontierRow>& rae_rows);

struct SkewDistanceRow {
    double kappa = 0.0;
    double mean_distance = 0.0;
    double std_distance = 0.0;
};

// DRAE-vs-RAE strategy distance on random skew-normal payoff matrices at
// matched gamma, aggregated over seeds per kappa. A non-finite cfg.tau means
// per-game default threshold.
std::vector<SkewDistanceRow> skew_distance_curve(const std::vector<double>& kappas,
                                                 int n_actions,
                                                 const std::vector<std::uint64_t>& seeds,
                                                 const RiskConfig& cfg,
                                                 const SFPOptions& opts = {}, int jobs = 1);

struct StateCountRow {
    int n_states = 1;
    SolutionConcept solution_concept = SolutionConcept::DRAE;
    std::uint64_t seed = 0;
    double lpm = 0.0;
};

// Regenerates the asset game per state count and scores DRAE and RAE
// equilibrium LPM at matched gamma.
std::vector<StateCountRow> state_count_sweep(const AssetSpec& base_spec,
                                             const std::vector<int>& state_counts,
                                             const RiskConfig& cfg,
                                             const std::vector<std::uint64_t>& seeds,
                                             const SFPOptions& opts = {}, int jobs = 1);

struct DegreeRow {
    double degree = 2.0;
    double er = 0.0;
    double lpm = 0.0;       // scored at the run's own degree
    double lpm_ref2 = 0.0;  // scored at reference degree 2 for comparability
    int iterations = 0;
    bool converged = false;
};

// One DRAE solve per degree.
std::vector<DegreeRow> degree_sweep(const StateGame& game, const std::vector<double>& degrees,
                                    const RiskConfig& cfg, const SFPOptions& opts = {},
                                    int jobs = 1);

// Deterministic parallel map: task i writes slot i, so the output order
// never depends on the worker count.
void parallel_for(int n_tasks, int jobs, const std::function<void(int)>& fn);

// cfg with per-game default tau filled in when cfg.tau is NaN.
RiskConfig resolve_tau(const RiskConfig& cfg, const StateGame& game);

}  // namespace drae
