#include "drae/sfp.hpp"

#include <cmath>

namespace drae {

namespace {

// Per-solve builder: shortfall tensors and rho correlations are opponent
// independent, so they are computed once and reused every iteration.
class RiskBuilder {
public:
    RiskBuilder(const StateGame& game, const RiskConfig& cfg, SolutionConcept kind)
        : game_(game), cfg_(cfg), concept_(kind), workspace_(game, cfg.tau, cfg.degree) {
        if (concept_ == SolutionConcept::DRAE && cfg_.scheme == Scheme::Rho) {
            const Eigen::MatrixXd mean = mean_reward_matrix(game_);
            Eigen::VectorXd row_mean = mean.rowwise().mean();
            rho_centered_ = mean.colwise() - row_mean;
            rho_sd_ = rho_centered_.rowwise().norm();
        }
        if (concept_ == SolutionConcept::DRAE && cfg_.scheme == Scheme::Dual) {
            // (a^(d-1) b^(d-1))^(1/(d-1)) factorizes as a*b for non-negative
            // bases, so the per-state factors can be precomputed.
            dual_factors_.reserve(game.n_states());
            const double dm1 = cfg.degree - 1.0;
            for (int s = 0; s < game.n_states(); ++s) {
                Eigen::ArrayXXd pow_dm1 =
                    (cfg.tau - game.reward_matrix(s).array()).max(0.0).pow(dm1);
                dual_factors_.push_back(pow_dm1.pow(1.0 / dm1).matrix());
            }
        }
    }

    // Optimization-ready matrix against the opponent average.
    RiskMatrix build(const Eigen::VectorXd& varsigma) const {
        RiskMatrix out;
        out.config = cfg_;
        switch (concept_) {
            case SolutionConcept::Nash:
                out.values = Eigen::MatrixXd::Zero(game_.n_actions(), game_.n_actions());
                out.stage = RiskStage::PDProjected;
                return out;
            case SolutionConcept::RAE:
                out.values = nearest_pd(workspace_.covariance(varsigma), cfg_.pd_jitter);
                out.stage = RiskStage::PDProjected;
                return out;
            case SolutionConcept::DRAE:
                break;
        }
        switch (cfg_.scheme) {
            case Scheme::Transpose: {
                Eigen::MatrixXd raw = workspace_.raw_lpm(varsigma);
                out.values = nearest_pd(0.5 * (raw + raw.transpose()), cfg_.pd_jitter);
                break;
            }
            case Scheme::Rho: {
                Eigen::MatrixXd raw = workspace_.raw_lpm(varsigma);
                const int a = game_.n_actions();
                Eigen::MatrixXd sym(a, a);
                for (int i = 0; i < a; ++i) {
                    sym(i, i) = raw(i, i);
                    for (int j = i + 1; j < a; ++j) {
                        double rho = 0.0;
                        if (rho_sd_(i) > 0.0 && rho_sd_(j) > 0.0) {
                            rho = rho_centered_.row(i).dot(rho_centered_.row(j)) /
                                  (rho_sd_(i) * rho_sd_(j));
                        }
                        const double value =
                            std::pow(raw(i, i) * raw(j, j), 1.0 / cfg_.degree) * rho;
                        sym(i, j) = value;
                        sym(j, i) = value;
                    }
                }
                out.values = nearest_pd(sym, cfg_.pd_jitter);
                break;
            }
            case Scheme::Dual: {
                const int a = game_.n_actions();
                Eigen::MatrixXd sym = Eigen::MatrixXd::Zero(a, a);
                for (int s = 0; s < game_.n_states(); ++s) {
                    sym.noalias() += game_.state_probs()(s) *
                                     (dual_factors_[s] * varsigma.asDiagonal() *
                                      dual_factors_[s].transpose());
                }
                sym /= a;
                out.values = nearest_pd(0.5 * (sym + sym.transpose()), cfg_.pd_jitter);
                break;
            }
        }
        out.stage = RiskStage::PDProjected;
        return out;
    }

    const RiskWorkspace& workspace() const { return workspace_; }

private:
    const StateGame& game_;
    RiskConfig cfg_;
    SolutionConcept concept_;
    RiskWorkspace workspace_;
    Eigen::MatrixXd rho_centered_;
    Eigen::VectorXd rho_sd_;
    std::vector<Eigen::MatrixXd> dual_factors_;
};

}  // namespace

std::string to_string(SolutionConcept c) {
    switch (c) {
        case SolutionConcept::Nash: return "nash";
        case SolutionConcept::RAE: return "rae";
        case SolutionConcept::DRAE: return "drae";
    }
    return "nash";
}

SolutionConcept concept_from_string(const std::string& name) {
    if (name == "nash") return SolutionConcept::Nash;
    if (name == "rae") return SolutionConcept::RAE;
    if (name == "drae") return SolutionConcept::DRAE;
    throw ContractViolation("unknown solution concept '" + name +
                            "' (expected nash, rae or drae)");
}

EquilibriumProfile sfp_solve(const StateGame& game, const RiskConfig& cfg,
                             SolutionConcept kind, const SFPOptions& opts,
                             const SFPObserver& observer) {
    cfg.validate();
    if (opts.eps * game.n_actions() > 1.0 + 1e-12) {
        throw ContractViolation("eps floor is infeasible for this action count");
    }

    const Eigen::MatrixXd meanM = mean_reward_matrix(game);
    RiskBuilder builder(game, cfg, kind);
    const double gamma = kind == SolutionConcept::Nash ? 0.0 : cfg.gamma;

    Eigen::VectorXd z1 = Eigen::VectorXd::Constant(game.n_actions(), 1.0 / game.n_actions());
    Eigen::VectorXd z2 = z1;

    int t = 0;
    bool converged = false;
    double drift = 0.0;
    std::optional<Eigen::VectorXd> warm1;
    std::optional<Eigen::VectorXd> warm2;
    while (t < opts.max_iter) {
        const RiskMatrix risk1 = builder.build(z2);
        const QPSolution br1 =
            solve_best_response(meanM, MixedStrategy{z2, 0.0}, risk1, gamma, opts.eps,
                                opts.qp_tol, opts.qp_max_iter, warm1);
        const RiskMatrix risk2 = builder.build(z1);
        const QPSolution br2 =
            solve_best_response(meanM, MixedStrategy{z1, 0.0}, risk2, gamma, opts.eps,
                                opts.qp_tol, opts.qp_max_iter, warm2);

        const double weight = 1.0 / (t + 1);
        const Eigen::VectorXd z1_next = z1 + weight * (br1.strategy.probs - z1);
        const Eigen::VectorXd z2_next = z2 + weight * (br2.strategy.probs - z2);
        drift = (z1_next - z1).lpNorm<1>() + (z2_next - z2).lpNorm<1>();
        z1 = z1_next;
        z2 = z2_next;
        warm1 = br1.strategy.probs;
        warm2 = br2.strategy.probs;
        ++t;

        if (observer) {
            SFPState state;
            state.t = t;
            state.z_self = MixedStrategy{z1, opts.eps};
            state.z_opp = MixedStrategy{z2, opts.eps};
            state.last_br = br1.strategy;
            state.last_br_opp = br2.strategy;
            state.drift = drift;
            observer(state);
        }
        if (drift <= opts.drift_tol) {
            converged = true;
            break;
        }
    }

    EquilibriumProfile profile;
    profile.strategy_p1 = MixedStrategy{z1, opts.eps};
    profile.strategy_p2 = MixedStrategy{z2, opts.eps};
    profile.solution_concept = kind;
    profile.er = expected_reward(profile.strategy_p1, profile.strategy_p2, game);
    profile.variance = (z1.transpose() * builder.workspace().covariance(z2) * z1).value();
    profile.lpm = (z1.transpose() * builder.workspace().raw_lpm(z2) * z1).value();
    profile.iterations = t;
    profile.converged = converged;
    profile.gamma = cfg.gamma;
    profile.tau = cfg.tau;
    profile.degree = cfg.degree;
    profile.scheme = cfg.scheme;
    profile.eps = opts.eps;
    return profile;
}

PermissibilityReport permissibility_check(const RiskMatrix& risk, double eps) {
    if (risk.stage != RiskStage::PDProjected) {
        throw ContractViolation("permissibility check expects a PDProjected risk matrix");
    }
    PermissibilityReport report;
    report.min_eigenvalue = risk.min_eigenvalue();
    report.delta = risk.config.pd_jitter;
    report.eps = eps;
    report.strictly_concave =
        report.min_eigenvalue >= report.delta - 1e-10 && report.min_eigenvalue > 0.0;
    report.positive_floor = eps > 0.0;
    return report;
}

double strategy_distance(const EquilibriumProfile& p, const EquilibriumProfile& q) {
    if (p.strategy_p1.size() != q.strategy_p1.size()) {
        throw ContractViolation("profiles have different action counts");
    }
    return (p.strategy_p1.probs - q.strategy_p1.probs).norm() / std::sqrt(2.0);
}

}  // namespace drae
