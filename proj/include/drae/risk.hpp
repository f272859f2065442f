#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "drae/game.hpp"

namespace drae {

enum class Scheme { Rho, Dual, Transpose };

std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& name);

enum class RiskStage { Raw, Symmetrized, PDProjected };

std::string to_string(RiskStage s);

// Threshold, degree, risk aversion and symmetrization choice for one run.
struct RiskConfig {
    double tau = 0.0;
    double degree = 2.0;
    double gamma = 1.0;
    Scheme scheme = Scheme::Transpose;
    double pd_jitter = 1e-8;

    void validate() const;
};

// |A| x |A| risk matrix with provenance. Raw matrices hold the asymmetric
// LPM/CLPM values; Symmetrized and PDProjected matrices are exactly
// symmetric.
struct RiskMatrix {
    Eigen::MatrixXd values;
    RiskStage stage = RiskStage::Raw;
    RiskConfig config;
    // Incremented when the rho scheme meets a constant reward vector and
    // falls back to rho = 0.
    int degenerate_rho_count = 0;

    int size() const { return static_cast<int>(values.rows()); }
    double min_eigenvalue() const;
};

// Lower partial moment of action i of degree d at threshold tau, against the
// opponent mix varsigma. The leading 1/|A| factor is part of the definition.
double lpm(const StateGame& game, int i, const MixedStrategy& varsigma, double tau, double d);

// Co-LPM between actions i and j. The second factor (tau - r(j, k, s)) enters
// unguarded and linearly, so the value may be negative.
double clpm(const StateGame& game, int i, int j, const MixedStrategy& varsigma, double tau,
            double d);

// Raw risk matrix: diagonal lpm(i), off-diagonal clpm(i, j).
RiskMatrix raw_risk_matrix(const StateGame& game, const MixedStrategy& varsigma,
                           const RiskConfig& cfg);

// Rho symmetrization: entries (LPM_i * LPM_j)^(1/d) * rho_ij where rho_ij is
// the Pearson correlation of the state-expected reward vectors of actions i
// and j. Diagonal preserved. Constant reward vectors get rho = 0 and bump the
// degenerate counter.
RiskMatrix symmetrize_rho(const RiskMatrix& raw, const StateGame& game,
                          const MixedStrategy& varsigma, const RiskConfig& cfg);

// Dual symmetrization: only joint shortfalls count; all entries >= 0,
// diagonal recomputed from the same formula at i = j.
RiskMatrix symmetrize_dual(const StateGame& game, const MixedStrategy& varsigma,
                           const RiskConfig& cfg);

// Transpose symmetrization: (Sigma + Sigma') / 2 followed by the nearest-PD
// projection with the given jitter. Quadratic forms are preserved before the
// projection.
RiskMatrix symmetrize_transpose(const RiskMatrix& raw, double pd_jitter);

// Frobenius-nearest symmetric matrix with eigenvalues >= delta: clip the
// spectrum and reconstruct. Input must be symmetric to 1e-10.
Eigen::MatrixXd nearest_pd(const Eigen::MatrixXd& m, double delta);

// Mean-variance baseline: covariance of action rewards under the opponent
// mix and the state distribution. Symmetric and PSD by construction.
RiskMatrix covariance_matrix(const StateGame& game, const MixedStrategy& varsigma);

// sigma' * Sigma * sigma.
double portfolio_risk(const MixedStrategy& sigma, const RiskMatrix& risk);

// Full pipeline for one optimization-ready matrix: raw -> scheme -> PD
// projection with cfg.pd_jitter.
RiskMatrix build_risk_matrix(const StateGame& game, const MixedStrategy& varsigma,
                             const RiskConfig& cfg);

// Precomputed shortfall tensors for one (game, tau, degree). Lets a solver
// rebuild raw LPM and covariance matrices against a changing opponent mix at
// matrix-product cost instead of re-walking the reward tensor.
class RiskWorkspace {
public:
    RiskWorkspace(const StateGame& game, double tau, double degree);

    Eigen::MatrixXd raw_lpm(const Eigen::VectorXd& varsigma) const;
    Eigen::MatrixXd covariance(const Eigen::VectorXd& varsigma) const;

private:
    const StateGame& game_;
    double tau_;
    double degree_;
    // Per state: shortfall^d, shortfall^(d-1), and (tau - r).
    std::vector<Eigen::MatrixXd> shortfall_d_;
    std::vector<Eigen::MatrixXd> shortfall_dm1_;
    std::vector<Eigen::MatrixXd> deviation_;
};

}  // namespace drae
