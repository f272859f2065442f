#pragma once

#include <functional>
#include <string>

#include "drae/game.hpp"
#include "drae/qp.hpp"
#include "drae/risk.hpp"

namespace drae {

enum class SolutionConcept { Nash, RAE, DRAE };

std::string to_string(SolutionConcept c);
SolutionConcept concept_from_string(const std::string& name);

// One SFP iteration snapshot: z_* are the running means of the best
// responses emitted so far, drift is the l1 movement of the joint average.
struct SFPState {
    int t = 0;
    MixedStrategy z_self;
    MixedStrategy z_opp;
    MixedStrategy last_br;
    MixedStrategy last_br_opp;
    double drift = 0.0;
};

using SFPObserver = std::function<void(const SFPState&)>;

struct SFPOptions {
    double eps = kDefaultEpsFloor;
    int max_iter = 5000;
    double drift_tol = 1e-6;
    double qp_tol = kDefaultQpTol;
    int qp_max_iter = kDefaultQpMaxIter;
};

struct EquilibriumProfile {
    MixedStrategy strategy_p1;
    MixedStrategy strategy_p2;
    SolutionConcept solution_concept = SolutionConcept::Nash;
    double er = 0.0;
    double variance = 0.0;  // sigma' * Cov * sigma at the fixed point
    double lpm = 0.0;       // sigma' * raw LPM matrix * sigma at the fixed point
    int iterations = 0;
    bool converged = false;
    // Configuration echo for dumps.
    double gamma = 0.0;
    double tau = 0.0;
    double degree = 2.0;
    Scheme scheme = Scheme::Transpose;
    double eps = kDefaultEpsFloor;
};

// Fictitious play over best responses to the opponent's running average.
// The risk matrix is rebuilt against the current average every iteration:
// Nash uses a zero matrix, RAE the covariance baseline, DRAE the LPM
// pipeline under cfg.scheme. Both players are scored on expected reward,
// portfolio variance and raw-LPM portfolio risk at the returned profile.
EquilibriumProfile sfp_solve(const StateGame& game, const RiskConfig& cfg,
                             SolutionConcept kind, const SFPOptions& opts = {},
                             const SFPObserver& observer = nullptr);

// Appendix-style permissibility diagnostics for the perturbed utility: the
// risk matrix must be strictly PD (unique best response) and the floor must
// keep every pure strategy at positive probability.
struct PermissibilityReport {
    bool strictly_concave = false;
    bool positive_floor = false;
    double min_eigenvalue = 0.0;
    double delta = 0.0;
    double eps = 0.0;

    bool pass() const { return strictly_concave && positive_floor; }
};

PermissibilityReport permissibility_check(const RiskMatrix& risk, double eps);

// Normalized Euclidean distance between the player-1 strategies of two
// profiles; 1 for two disjoint pure strategies.
double strategy_distance(const EquilibriumProfile& p, const EquilibriumProfile& q);

}  // namespace drae
