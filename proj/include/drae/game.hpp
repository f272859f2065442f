#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

namespace drae {

// Raised when an input violates a documented precondition.
class ContractViolation : public std::invalid_argument {
public:
    explicit ContractViolation(const std::string& what) : std::invalid_argument(what) {}
};

// State-based symmetric two-player normal-form game. Both players index the
// same reward tensor: entry (i, j, s) is the reward of action i against
// action j in state s, so player 2's reward for the pair (i, j) is the
// (j, i, s) entry. No second tensor is stored.
class StateGame {
public:
    // `rewards` holds one |A| x |A| matrix per state, row = own action.
    StateGame(std::vector<Eigen::MatrixXd> rewards, Eigen::VectorXd state_probs);

    int n_actions() const { return n_actions_; }
    int n_states() const { return n_states_; }
    double reward(int i, int j, int s) const { return rewards_[s](i, j); }
    const Eigen::MatrixXd& reward_matrix(int s) const { return rewards_[s]; }
    const Eigen::VectorXd& state_probs() const { return state_probs_; }

    // Single-state convenience constructor.
    static StateGame single_state(Eigen::MatrixXd rewards);

private:
    int n_actions_;
    int n_states_;
    std::vector<Eigen::MatrixXd> rewards_;
    Eigen::VectorXd state_probs_;
};

// Probability vector over actions with an epsilon floor.
struct MixedStrategy {
    Eigen::VectorXd probs;
    double eps_floor = 0.0;

    int size() const { return static_cast<int>(probs.size()); }

    static MixedStrategy uniform(int n_actions, double eps_floor = 0.0);
};

constexpr double kDefaultEpsFloor = 1e-4;

// Clips `v` to the eps floor and renormalizes so entries sum to one. If `v`
// already satisfies both constraints (sum within 1e-9) it is passed through
// unchanged. Renormalization is silent apart from a debug log line.
MixedStrategy validate_strategy(const Eigen::VectorXd& v, double eps);

// State-expected reward matrix: entry (i, j) = sum_s q(s) r(i, j, s).
Eigen::MatrixXd mean_reward_matrix(const StateGame& game);

// Expected reward of sigma vs varsigma: sigma' * meanM * varsigma.
double expected_reward(const MixedStrategy& sigma, const MixedStrategy& varsigma,
                       const StateGame& game);

}  // namespace drae
