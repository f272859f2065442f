#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "drae/game.hpp"
#include "drae/rng.hpp"

namespace drae {

// Synthetic skew-normal game: per-action reward distributions with high
// variance, high skew or neither.
struct SyntheticSpec {
    int n_actions = 100;
    int n_high_var = 20;
    int n_high_skew = 20;
    double high_var_lo = 1.5;
    double high_var_hi = 3.0;
    std::vector<double> high_skew_set = {-8.0, -7.0, -6.0, 6.0, 7.0, 8.0};
    double low_var_lo = 0.5;
    double low_var_hi = 1.0;
    double low_skew_lo = -3.0;
    double low_skew_hi = 3.0;
    int n_states = 1;
    std::uint64_t seed = 0;

    void validate() const;
};

// Asset market: portfolios over assets with state-dependent returns, payoffs
// set by price formation from joint investment.
struct AssetSpec {
    int n_portfolios = 100;
    int n_assets = 10;
    int n_states = 5;
    double wealth_p1 = 0.5;
    double wealth_p2 = 0.5;
    std::uint64_t seed = 0;

    void validate() const;
};

// Product portfolio management: actions are non-empty product subsets,
// demand split by a softmax over competing products.
struct PPMSpec {
    int n_products = 3;
    int n_segments = 4;
    std::vector<double> costs;          // per product, > 0
    std::vector<double> segment_sizes;  // per segment, > 0
    Eigen::MatrixXd utilities;          // n_products x n_segments, >= 0
    double mu_scale = 1.0;
    int n_states = 1;  // > 1 draws segment sizes per state
    std::uint64_t seed = 0;

    void validate() const;

    // Spec with utilities/costs/sizes drawn from fixed ranges.
    static PPMSpec random(int n_products, int n_segments, std::uint64_t seed);
};

// One draw from the skew-normal with the given mean, variance and shape
// parameter kappa (delta parametrization; location and scale back-solved
// from the moment formulas).
double sample_skew_normal(double mu, double sigma2, double kappa, Rng& rng);

StateGame gen_synthetic(const SyntheticSpec& spec);

// Payoff of portfolio p_i against p_j: assets are priced by total invested
// wealth, allocated proportionally, and pay the state-expected return on the
// allocation. Assets nobody buys contribute zero.
double asset_payoff(const Eigen::VectorXd& p_i, const Eigen::VectorXd& p_j,
                    const Eigen::MatrixXd& returns,  // n_assets x n_states
                    const Eigen::VectorXd& state_probs, std::pair<double, double> wealth);

StateGame gen_asset_game(const AssetSpec& spec);

// Payoff of offering product subset `mask_i` (bitmask over products) against
// `mask_j`: per segment, demand shares follow a softmax over the multiset of
// offered products, weighted by utility-to-cost and segment size.
double ppm_payoff(std::uint32_t mask_i, std::uint32_t mask_j, const PPMSpec& spec);

// All 2^M - 1 non-empty subsets in ascending bitmask order.
StateGame gen_ppm_game(const PPMSpec& spec);

constexpr int kMaxPpmProducts = 12;

// Unscrambled Sobol sequence (Joe-Kuo direction numbers). The all-zeros
// first point is skipped.
class SobolSequence {
public:
    static constexpr int kMaxDim = 20;

    explicit SobolSequence(int dim);
    Eigen::VectorXd next();

private:
    int dim_;
    std::uint64_t index_ = 0;
    std::vector<std::array<std::uint32_t, 32>> direction_;
    std::vector<std::uint32_t> state_;
};

// Maps a point of [0,1)^(n-1) to the n-simplex via sorted uniform spacings.
Eigen::VectorXd simplex_from_uniform(const Eigen::VectorXd& u);

// Uniform-random-profile threshold default: the mean entry of the
// state-expected reward matrix.
double default_tau(const StateGame& game);

}  // namespace drae
