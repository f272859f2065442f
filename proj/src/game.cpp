#include "drae/game.hpp"

#include <cmath>
#include <sstream>

#include "drae/log.hpp"

namespace drae {

namespace {

void check_finite(const Eigen::MatrixXd& m, const std::string& what) {
    if (!m.allFinite()) {
        throw ContractViolation(what + " contains NaN or Inf");
    }
}

}  // namespace

StateGame::StateGame(std::vector<Eigen::MatrixXd> rewards, Eigen::VectorXd state_probs)
    : rewards_(std::move(rewards)), state_probs_(std::move(state_probs)) {
    if (rewards_.empty()) {
        throw ContractViolation("StateGame needs at least one state");
    }
    n_states_ = static_cast<int>(rewards_.size());
    n_actions_ = static_cast<int>(rewards_[0].rows());
    if (n_actions_ < 1) {
        throw ContractViolation("StateGame needs at least one action");
    }
    for (const auto& m : rewards_) {
        if (m.rows() != n_actions_ || m.cols() != n_actions_) {
            std::ostringstream os;
            os << "reward matrix is " << m.rows() << "x" << m.cols() << ", expected "
               << n_actions_ << "x" << n_actions_;
            throw ContractViolation(os.str());
        }
        check_finite(m, "reward tensor");
    }
    if (state_probs_.size() != n_states_) {
        throw ContractViolation("state_probs length does not match state count");
    }
    if (!state_probs_.allFinite() || state_probs_.minCoeff() < 0.0) {
        throw ContractViolation("state_probs must be finite and non-negative");
    }
    if (std::abs(state_probs_.sum() - 1.0) > 1e-12) {
        throw ContractViolation("state_probs must sum to 1 within 1e-12");
    }
}

StateGame StateGame::single_state(Eigen::MatrixXd rewards) {
    std::vector<Eigen::MatrixXd> tensor;
    tensor.push_back(std::move(rewards));
    Eigen::VectorXd q(1);
    q << 1.0;
    return StateGame(std::move(tensor), std::move(q));
}

MixedStrategy MixedStrategy::uniform(int n_actions, double eps_floor) {
    MixedStrategy s;
    s.probs = Eigen::VectorXd::Constant(n_actions, 1.0 / n_actions);
    s.eps_floor = eps_floor;
    return s;
}

MixedStrategy validate_strategy(const Eigen::VectorXd& v, double eps) {
    const int n = static_cast<int>(v.size());
    if (n == 0) {
        throw ContractViolation("strategy vector is empty");
    }
    if (!v.allFinite()) {
        throw ContractViolation("strategy vector contains NaN or Inf");
    }
    if (eps < 0.0) {
        throw ContractViolation("eps floor must be non-negative");
    }
    if (eps * n > 1.0 + 1e-12) {
        std::ostringstream os;
        os << "eps floor " << eps << " is infeasible for " << n << " actions (eps*|A| > 1)";
        throw ContractViolation(os.str());
    }

    MixedStrategy out;
    out.eps_floor = eps;
    if (v.minCoeff() >= eps && std::abs(v.sum() - 1.0) <= 1e-9) {
        out.probs = v;
        return out;
    }

    // Keep the floor on every entry and scale the mass above the floor so the
    // total is exactly one. If nothing sits above the floor, fall back to
    // uniform (feasible because eps*|A| <= 1).
    Eigen::VectorXd excess = (v.array() - eps).max(0.0).matrix();
    const double excess_sum = excess.sum();
    const double free_mass = 1.0 - eps * n;
    if (excess_sum > 0.0 && free_mass > 0.0) {
        out.probs = Eigen::VectorXd::Constant(n, eps) + excess * (free_mass / excess_sum);
    } else if (free_mass <= 0.0) {
        out.probs = Eigen::VectorXd::Constant(n, eps);
    } else {
        out.probs = Eigen::VectorXd::Constant(n, 1.0 / n);
    }
    log::debug("validate_strategy renormalized a strategy vector");
    return out;
}

Eigen::MatrixXd mean_reward_matrix(const StateGame& game) {
    Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(game.n_actions(), game.n_actions());
    for (int s = 0; s < game.n_states(); ++s) {
        mean.noalias() += game.state_probs()(s) * game.reward_matrix(s);
    }
    return mean;
}

double expected_reward(const MixedStrategy& sigma, const MixedStrategy& varsigma,
                       const StateGame& game) {
    if (sigma.size() != game.n_actions() || varsigma.size() != game.n_actions()) {
        throw ContractViolation("strategy length does not match the game's action count");
    }
    double total = 0.0;
    for (int s = 0; s < game.n_states(); ++s) {
        total += game.state_probs()(s) *
                 (sigma.probs.transpose() * game.reward_matrix(s) * varsigma.probs).value();
    }
    return total;
}

}  // namespace drae
