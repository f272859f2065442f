#include "drae/risk.hpp"

#include <cmath>
#include <sstream>

namespace drae {

namespace {

void check_action_index(const StateGame& game, int i, const char* name) {
    if (i < 0 || i >= game.n_actions()) {
        std::ostringstream os;
        os << name << " index " << i << " out of range for " << game.n_actions() << " actions";
        throw ContractViolation(os.str());
    }
}

void check_varsigma(const StateGame& game, const MixedStrategy& varsigma) {
    if (varsigma.size() != game.n_actions()) {
        throw ContractViolation("opponent strategy length does not match the game");
    }
}

}  // namespace

std::string to_string(Scheme s) {
    switch (s) {
        case Scheme::Rho: return "rho";
        case Scheme::Dual: return "dual";
        case Scheme::Transpose: return "transpose";
    }
    return "transpose";
}

Scheme scheme_from_string(const std::string& name) {
    if (name == "rho") return Scheme::Rho;
    if (name == "dual") return Scheme::Dual;
    if (name == "transpose") return Scheme::Transpose;
    throw ContractViolation("unknown symmetrization scheme '" + name +
                            "' (expected rho, dual or transpose)");
}

std::string to_string(RiskStage s) {
    switch (s) {
        case RiskStage::Raw: return "raw";
        case RiskStage::Symmetrized: return "symmetrized";
        case RiskStage::PDProjected: return "pd_projected";
    }
    return "raw";
}

void RiskConfig::validate() const {
    if (!(degree > 1.0)) {
        throw ContractViolation("risk degree must be > 1");
    }
    if (gamma < 0.0) {
        throw ContractViolation("gamma must be >= 0");
    }
    if (pd_jitter < 0.0) {
        throw ContractViolation("pd_jitter must be >= 0");
    }
    if (!std::isfinite(tau)) {
        throw ContractViolation("tau must be finite");
    }
}

double RiskMatrix::min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        0.5 * (values + values.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

double lpm(const StateGame& game, int i, const MixedStrategy& varsigma, double tau, double d) {
    check_action_index(game, i, "action");
    check_varsigma(game, varsigma);
    if (!(d > 0.0)) {
        throw ContractViolation("lpm degree must be > 0");
    }
    const int a = game.n_actions();
    double total = 0.0;
    for (int s = 0; s < game.n_states(); ++s) {
        const double q = game.state_probs()(s);
        for (int j = 0; j < a; ++j) {
            const double shortfall = std::max(0.0, tau - game.reward(i, j, s));
            if (shortfall > 0.0) {
                total += q * varsigma.probs(j) * std::pow(shortfall, d);
            }
        }
    }
    return total / a;
}

double clpm(const StateGame& game, int i, int j, const MixedStrategy& varsigma, double tau,
            double d) {
    check_action_index(game, i, "action i");
    check_action_index(game, j, "action j");
    check_varsigma(game, varsigma);
    if (!(d > 1.0)) {
        throw ContractViolation("clpm degree must be > 1");
    }
    const int a = game.n_actions();
    double total = 0.0;
    for (int s = 0; s < game.n_states(); ++s) {
        const double q = game.state_probs()(s);
        for (int k = 0; k < a; ++k) {
            const double shortfall = std::max(0.0, tau - game.reward(i, k, s));
            if (shortfall > 0.0) {
                total += q * varsigma.probs(k) * std::pow(shortfall, d - 1.0) *
                         (tau - game.reward(j, k, s));
            }
        }
    }
    return total / a;
}

RiskMatrix raw_risk_matrix(const StateGame& game, const MixedStrategy& varsigma,
                           const RiskConfig& cfg) {
    cfg.validate();
    check_varsigma(game, varsigma);
    RiskWorkspace ws(game, cfg.tau, cfg.degree);
    RiskMatrix out;
    out.values = ws.raw_lpm(varsigma.probs);
    out.stage = RiskStage::Raw;
    out.config = cfg;
    return out;
}

RiskMatrix symmetrize_rho(const RiskMatrix& raw, const StateGame& game,
                          const MixedStrategy& varsigma, const RiskConfig& cfg) {
    if (raw.stage != RiskStage::Raw) {
        throw ContractViolation("symmetrize_rho expects a Raw risk matrix");
    }
    check_varsigma(game, varsigma);
    const int a = game.n_actions();
    const Eigen::MatrixXd mean = mean_reward_matrix(game);

    // Pearson correlation between the state-expected reward vectors (rows of
    // the mean reward matrix).
    Eigen::VectorXd row_mean = mean.rowwise().mean();
    Eigen::MatrixXd centered = mean.colwise() - row_mean;
    Eigen::VectorXd row_sd = centered.rowwise().norm();

    RiskMatrix out;
    out.values = Eigen::MatrixXd::Zero(a, a);
    out.stage = RiskStage::Symmetrized;
    out.config = cfg;
    for (int i = 0; i < a; ++i) {
        out.values(i, i) = raw.values(i, i);
    }
    for (int i = 0; i < a; ++i) {
        for (int j = i + 1; j < a; ++j) {
            double rho = 0.0;
            if (row_sd(i) > 0.0 && row_sd(j) > 0.0) {
                rho = centered.row(i).dot(centered.row(j)) / (row_sd(i) * row_sd(j));
            } else {
                ++out.degenerate_rho_count;
            }
            const double value =
                std::pow(raw.values(i, i) * raw.values(j, j), 1.0 / cfg.degree) * rho;
            out.values(i, j) = value;
            out.values(j, i) = value;
        }
    }
    return out;
}

RiskMatrix symmetrize_dual(const StateGame& game, const MixedStrategy& varsigma,
                           const RiskConfig& cfg) {
    cfg.validate();
    check_varsigma(game, varsigma);
    const int a = game.n_actions();
    const double dm1 = cfg.degree - 1.0;
    const double inv_dm1 = 1.0 / dm1;

    // Per state, shortfall powers for every (action, opponent action) pair.
    RiskMatrix out;
    out.values = Eigen::MatrixXd::Zero(a, a);
    out.stage = RiskStage::Symmetrized;
    out.config = cfg;
    for (int s = 0; s < game.n_states(); ++s) {
        const double q = game.state_probs()(s);
        Eigen::MatrixXd pow_dm1 =
            (cfg.tau - game.reward_matrix(s).array()).max(0.0).pow(dm1).matrix();
        for (int i = 0; i < a; ++i) {
            for (int j = i; j < a; ++j) {
                double acc = 0.0;
                for (int k = 0; k < a; ++k) {
                    const double joint = pow_dm1(i, k) * pow_dm1(j, k);
                    if (joint > 0.0) {
                        acc += varsigma.probs(k) * std::pow(joint, inv_dm1);
                    }
                }
                out.values(i, j) += q * acc;
            }
        }
    }
    out.values /= a;
    for (int i = 0; i < a; ++i) {
        for (int j = i + 1; j < a; ++j) {
            out.values(j, i) = out.values(i, j);
        }
    }
    return out;
}

RiskMatrix symmetrize_transpose(const RiskMatrix& raw, double pd_jitter) {
    if (raw.stage != RiskStage::Raw) {
        throw ContractViolation("symmetrize_transpose expects a Raw risk matrix");
    }
    Eigen::MatrixXd symmetric = 0.5 * (raw.values + raw.values.transpose());
    RiskMatrix out;
    out.values = nearest_pd(symmetric, pd_jitter);
    out.stage = RiskStage::PDProjected;
    out.config = raw.config;
    out.config.pd_jitter = pd_jitter;
    return out;
}

Eigen::MatrixXd nearest_pd(const Eigen::MatrixXd& m, double delta) {
    if (m.rows() != m.cols()) {
        throw ContractViolation("nearest_pd expects a square matrix");
    }
    const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-10) {
        std::ostringstream os;
        os << "nearest_pd expects a symmetric matrix (max asymmetry " << asym << ")";
        throw ContractViolation(os.str());
    }
    // Cholesky of (m - delta*I) succeeding means the spectrum already clears
    // the floor, so the projection is the identity.
    {
        Eigen::MatrixXd shifted = m;
        shifted.diagonal().array() -= delta;
        Eigen::LLT<Eigen::MatrixXd> llt(shifted);
        if (llt.info() == Eigen::Success) {
            return m;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    if (es.eigenvalues().minCoeff() >= delta) {
        return m;
    }
    Eigen::VectorXd clipped = es.eigenvalues().cwiseMax(delta);
    Eigen::MatrixXd rebuilt =
        es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose();
    // Reconstruction leaves ~1e-16 asymmetry; make the symmetry exact.
    return 0.5 * (rebuilt + rebuilt.transpose());
}

RiskMatrix covariance_matrix(const StateGame& game, const MixedStrategy& varsigma) {
    check_varsigma(game, varsigma);
    RiskWorkspace ws(game, 0.0, 2.0);
    RiskMatrix out;
    out.values = ws.covariance(varsigma.probs);
    out.stage = RiskStage::Symmetrized;
    out.config.scheme = Scheme::Transpose;
    return out;
}

double portfolio_risk(const MixedStrategy& sigma, const RiskMatrix& risk) {
    if (sigma.size() != risk.size()) {
        throw ContractViolation("strategy length does not match the risk matrix");
    }
    return (sigma.probs.transpose() * risk.values * sigma.probs).value();
}

RiskMatrix build_risk_matrix(const StateGame& game, const MixedStrategy& varsigma,
                             const RiskConfig& cfg) {
    cfg.validate();
    switch (cfg.scheme) {
        case Scheme::Transpose: {
            RiskMatrix raw = raw_risk_matrix(game, varsigma, cfg);
            return symmetrize_transpose(raw, cfg.pd_jitter);
        }
        case Scheme::Rho: {
            RiskMatrix raw = raw_risk_matrix(game, varsigma, cfg);
            RiskMatrix sym = symmetrize_rho(raw, game, varsigma, cfg);
            sym.values = nearest_pd(sym.values, cfg.pd_jitter);
            sym.stage = RiskStage::PDProjected;
            return sym;
        }
        case Scheme::Dual: {
            RiskMatrix sym = symmetrize_dual(game, varsigma, cfg);
            sym.values = nearest_pd(sym.values, cfg.pd_jitter);
            sym.stage = RiskStage::PDProjected;
            return sym;
        }
    }
    throw ContractViolation("unknown symmetrization scheme");
}

RiskWorkspace::RiskWorkspace(const StateGame& game, double tau, double degree)
    : game_(game), tau_(tau), degree_(degree) {
    const int states = game.n_states();
    shortfall_d_.reserve(states);
    shortfall_dm1_.reserve(states);
    deviation_.reserve(states);
    for (int s = 0; s < states; ++s) {
        Eigen::ArrayXXd shortfall = (tau - game.reward_matrix(s).array()).max(0.0);
        shortfall_d_.push_back(shortfall.pow(degree).matrix());
        shortfall_dm1_.push_back(shortfall.pow(degree - 1.0).matrix());
        deviation_.push_back((tau - game.reward_matrix(s).array()).matrix());
    }
}

Eigen::MatrixXd RiskWorkspace::raw_lpm(const Eigen::VectorXd& varsigma) const {
    const int a = game_.n_actions();
    Eigen::MatrixXd raw = Eigen::MatrixXd::Zero(a, a);
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(a);
    for (int s = 0; s < game_.n_states(); ++s) {
        const double q = game_.state_probs()(s);
        // Off-diagonals: sum_k varsigma(k) shortfall_i(k)^(d-1) (tau - r_j(k)).
        raw.noalias() +=
            q * (shortfall_dm1_[s] * varsigma.asDiagonal() * deviation_[s].transpose());
        diag.noalias() += q * (shortfall_d_[s] * varsigma);
    }
    raw.diagonal() = diag;
    raw /= a;
    return raw;
}

Eigen::MatrixXd RiskWorkspace::covariance(const Eigen::VectorXd& varsigma) const {
    const int a = game_.n_actions();
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(a);
    for (int s = 0; s < game_.n_states(); ++s) {
        mu.noalias() += game_.state_probs()(s) * (game_.reward_matrix(s) * varsigma);
    }
    // Gram form keeps the result PSD to rounding error.
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(a, a);
    for (int s = 0; s < game_.n_states(); ++s) {
        Eigen::MatrixXd centered = game_.reward_matrix(s).colwise() - mu;
        cov.noalias() +=
            game_.state_probs()(s) * (centered * varsigma.asDiagonal() * centered.transpose());
    }
    return 0.5 * (cov + cov.transpose());
}

}  // namespace drae
