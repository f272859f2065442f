#include "drae/environments.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <sstream>

namespace drae {

namespace {

// Per-action reward distribution parameters.
struct RewardClass {
    double sigma2 = 1.0;
    double kappa = 0.0;
};

// Assigns high-variance / high-skew / low classes to `n` slots in shuffled
// order, drawing the class parameters in index order afterwards so the
// stream layout is stable.
std::vector<RewardClass> assign_classes(int n, int n_high_var, int n_high_skew,
                                        const SyntheticSpec& ranges, Rng& rng) {
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (int i = n - 1; i > 0; --i) {
        const int j = static_cast<int>(rng.uniform_int(i + 1));
        std::swap(order[i], order[j]);
    }
    enum { kHighVar, kHighSkew, kLow };
    std::vector<int> kind(n, kLow);
    for (int k = 0; k < n_high_var; ++k) kind[order[k]] = kHighVar;
    for (int k = 0; k < n_high_skew; ++k) kind[order[n_high_var + k]] = kHighSkew;

    std::vector<RewardClass> classes(n);
    for (int i = 0; i < n; ++i) {
        switch (kind[i]) {
            case kHighVar:
                classes[i].sigma2 = rng.uniform(ranges.high_var_lo, ranges.high_var_hi);
                classes[i].kappa = rng.uniform(ranges.low_skew_lo, ranges.low_skew_hi);
                break;
            case kHighSkew:
                classes[i].sigma2 = rng.uniform(ranges.low_var_lo, ranges.low_var_hi);
                classes[i].kappa = ranges.high_skew_set[rng.uniform_int(
                    ranges.high_skew_set.size())];
                break;
            default:
                classes[i].sigma2 = rng.uniform(ranges.low_var_lo, ranges.low_var_hi);
                classes[i].kappa = rng.uniform(ranges.low_skew_lo, ranges.low_skew_hi);
        }
    }
    return classes;
}

// Direction-number table (primitive polynomial degree s, coefficients a,
// initial m values) for dimensions 2..20; dimension 1 is van der Corput.
struct SobolRow {
    int s;
    std::uint32_t a;
    std::array<std::uint32_t, 7> m;
};

constexpr SobolRow kSobolTable[] = {
    {1, 0, {1}},
    {2, 1, {1, 3}},
    {3, 1, {1, 3, 1}},
    {3, 2, {1, 1, 1}},
    {4, 1, {1, 1, 3, 3}},
    {4, 4, {1, 3, 5, 13}},
    {5, 2, {1, 1, 5, 5, 17}},
    {5, 4, {1, 1, 5, 5, 5}},
    {5, 7, {1, 1, 7, 11, 19}},
    {5, 11, {1, 1, 5, 1, 1}},
    {5, 13, {1, 1, 1, 3, 11}},
    {5, 14, {1, 3, 5, 5, 31}},
    {6, 1, {1, 3, 3, 9, 7, 49}},
    {6, 13, {1, 1, 1, 15, 21, 21}},
    {6, 16, {1, 3, 1, 13, 27, 49}},
    {6, 19, {1, 1, 1, 15, 7, 5}},
    {6, 22, {1, 3, 1, 15, 13, 25}},
    {6, 25, {1, 1, 5, 5, 19, 61}},
    {7, 1, {1, 3, 7, 11, 23, 15, 103}},
};

}  // namespace

void SyntheticSpec::validate() const {
    if (n_actions < 1 || n_states < 1) {
        throw ContractViolation("synthetic spec needs n_actions >= 1 and n_states >= 1");
    }
    if (n_high_var < 0 || n_high_skew < 0 || n_high_var + n_high_skew > n_actions) {
        throw ContractViolation("synthetic spec class counts must fit into n_actions");
    }
    if (high_var_lo > high_var_hi || low_var_lo > low_var_hi || low_skew_lo > low_skew_hi) {
        throw ContractViolation("synthetic spec ranges must be ordered");
    }
    if (low_var_lo <= 0.0 || high_var_lo <= 0.0) {
        throw ContractViolation("variance ranges must be positive");
    }
    if (high_skew_set.empty()) {
        throw ContractViolation("high_skew_set must not be empty");
    }
}

void AssetSpec::validate() const {
    if (n_portfolios < 1 || n_assets < 1 || n_states < 1) {
        throw ContractViolation("asset spec needs positive portfolio/asset/state counts");
    }
    if (wealth_p1 <= 0.0 || wealth_p2 <= 0.0) {
        throw ContractViolation("asset spec needs positive wealth for both investors");
    }
    if (n_assets - 1 > SobolSequence::kMaxDim) {
        std::ostringstream os;
        os << "asset spec supports at most " << SobolSequence::kMaxDim + 1 << " assets";
        throw ContractViolation(os.str());
    }
}

void PPMSpec::validate() const {
    if (n_products < 1) {
        throw ContractViolation("ppm spec needs at least one product");
    }
    if (n_products > kMaxPpmProducts) {
        std::ostringstream os;
        os << "ppm spec supports at most " << kMaxPpmProducts
           << " products (2^M - 1 actions must stay tractable)";
        throw ContractViolation(os.str());
    }
    if (n_segments < 1 || n_states < 1) {
        throw ContractViolation("ppm spec needs n_segments >= 1 and n_states >= 1");
    }
    if (static_cast<int>(costs.size()) != n_products ||
        static_cast<int>(segment_sizes.size()) != n_segments ||
        utilities.rows() != n_products || utilities.cols() != n_segments) {
        throw ContractViolation("ppm spec arrays do not match n_products/n_segments");
    }
    for (double c : costs) {
        if (!(c > 0.0)) throw ContractViolation("ppm costs must be strictly positive");
    }
    for (double q : segment_sizes) {
        if (!(q > 0.0)) throw ContractViolation("ppm segment sizes must be strictly positive");
    }
    if (utilities.minCoeff() < 0.0) {
        throw ContractViolation("ppm utilities must be non-negative");
    }
}

PPMSpec PPMSpec::random(int n_products, int n_segments, std::uint64_t seed) {
    PPMSpec spec;
    spec.n_products = n_products;
    spec.n_segments = n_segments;
    spec.seed = seed;
    Rng rng(Rng::derive_seed(seed, 0x9970));
    spec.costs.resize(n_products);
    for (double& c : spec.costs) c = rng.uniform(0.5, 2.0);
    spec.segment_sizes.resize(n_segments);
    for (double& q : spec.segment_sizes) q = rng.uniform(50.0, 150.0);
    spec.utilities.resize(n_products, n_segments);
    for (int m = 0; m < n_products; ++m) {
        for (int k = 0; k < n_segments; ++k) {
            spec.utilities(m, k) = rng.uniform(0.0, 2.0);
        }
    }
    spec.validate();
    return spec;
}

double sample_skew_normal(double mu, double sigma2, double kappa, Rng& rng) {
    if (!(sigma2 > 0.0)) {
        throw ContractViolation("skew-normal variance must be positive");
    }
    const double delta = kappa / std::sqrt(1.0 + kappa * kappa);
    const double var_factor = 1.0 - 2.0 * delta * delta / M_PI;
    const double omega = std::sqrt(sigma2 / var_factor);
    const double xi = mu - omega * delta * std::sqrt(2.0 / M_PI);

    const double u0 = rng.normal();
    const double u1 = rng.normal();
    double z = delta * u0 + std::sqrt(1.0 - delta * delta) * u1;
    if (u0 < 0.0) z = -z;
    return xi + omega * z;
}

StateGame gen_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    const std::vector<RewardClass> classes =
        assign_classes(spec.n_actions, spec.n_high_var, spec.n_high_skew, spec, rng);

    std::vector<Eigen::MatrixXd> tensor(spec.n_states,
                                        Eigen::MatrixXd(spec.n_actions, spec.n_actions));
    for (int i = 0; i < spec.n_actions; ++i) {
        for (int j = 0; j < spec.n_actions; ++j) {
            for (int s = 0; s < spec.n_states; ++s) {
                tensor[s](i, j) =
                    sample_skew_normal(0.0, classes[i].sigma2, classes[i].kappa, rng);
            }
        }
    }
    return StateGame(std::move(tensor),
                     Eigen::VectorXd::Constant(spec.n_states, 1.0 / spec.n_states));
}

double asset_payoff(const Eigen::VectorXd& p_i, const Eigen::VectorXd& p_j,
                    const Eigen::MatrixXd& returns, const Eigen::VectorXd& state_probs,
                    std::pair<double, double> wealth) {
    if (p_i.size() != p_j.size() || p_i.size() != returns.rows()) {
        throw ContractViolation("portfolio and return dimensions disagree");
    }
    if (returns.cols() != state_probs.size()) {
        throw ContractViolation("returns and state probabilities disagree on state count");
    }
    if (p_i.minCoeff() < 0.0 || p_j.minCoeff() < 0.0) {
        throw ContractViolation("portfolio weights must be non-negative");
    }
    double payoff = 0.0;
    for (int m = 0; m < p_i.size(); ++m) {
        const double invested = p_i(m) * wealth.first;
        const double price = invested + p_j(m) * wealth.second;
        if (price <= 0.0) continue;  // nobody holds the asset
        const double allocation = invested / price;
        payoff += allocation * returns.row(m).dot(state_probs);
    }
    return payoff;
}

StateGame gen_asset_game(const AssetSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);

    // Portfolio menu from the low-discrepancy sequence.
    Eigen::MatrixXd portfolios(spec.n_portfolios, spec.n_assets);
    if (spec.n_assets == 1) {
        portfolios.setOnes();
    } else {
        SobolSequence sobol(spec.n_assets - 1);
        for (int p = 0; p < spec.n_portfolios; ++p) {
            portfolios.row(p) = simplex_from_uniform(sobol.next()).transpose();
        }
    }

    // Asset return classes mirror the synthetic game proportions (20% high
    // variance, 20% high skew at the defaults).
    SyntheticSpec class_ranges;
    const int n_high_var = static_cast<int>(std::lround(0.2 * spec.n_assets));
    const int n_high_skew = std::min(static_cast<int>(std::lround(0.2 * spec.n_assets)),
                                     spec.n_assets - n_high_var);
    const std::vector<RewardClass> classes =
        assign_classes(spec.n_assets, n_high_var, n_high_skew, class_ranges, rng);

    Eigen::MatrixXd returns(spec.n_assets, spec.n_states);
    for (int m = 0; m < spec.n_assets; ++m) {
        for (int s = 0; s < spec.n_states; ++s) {
            returns(m, s) = sample_skew_normal(0.0, classes[m].sigma2, classes[m].kappa, rng);
        }
    }

    Eigen::VectorXd q(spec.n_states);
    for (int s = 0; s < spec.n_states; ++s) q(s) = rng.uniform01();
    const double q_sum = q.sum();
    if (q_sum > 0.0) {
        q /= q_sum;
    } else {
        q.setConstant(1.0 / spec.n_states);
    }

    const std::pair<double, double> wealth{spec.wealth_p1, spec.wealth_p2};
    std::vector<Eigen::MatrixXd> tensor(spec.n_states,
                                        Eigen::MatrixXd(spec.n_portfolios, spec.n_portfolios));
    Eigen::VectorXd one_state(1);
    one_state << 1.0;
    for (int s = 0; s < spec.n_states; ++s) {
        const Eigen::MatrixXd state_returns = returns.col(s);
        for (int i = 0; i < spec.n_portfolios; ++i) {
            const Eigen::VectorXd pi = portfolios.row(i).transpose();
            for (int j = 0; j < spec.n_portfolios; ++j) {
                tensor[s](i, j) = asset_payoff(pi, portfolios.row(j).transpose(), state_returns,
                                               one_state, wealth);
            }
        }
    }
    return StateGame(std::move(tensor), q);
}

namespace {

// exp(mu * u) hoisted; `sizes` allows per-state segment size overrides.
double ppm_payoff_impl(std::uint32_t mask_i, std::uint32_t mask_j, const PPMSpec& spec,
                       const Eigen::MatrixXd& exp_weights, const std::vector<double>& sizes) {
    double payoff = 0.0;
    for (int k = 0; k < spec.n_segments; ++k) {
        // Softmax denominator over the multiset of offered products: a
        // product offered by both players counts twice.
        double denom = 0.0;
        for (int m = 0; m < spec.n_products; ++m) {
            if (mask_i & (1u << m)) denom += exp_weights(m, k);
            if (mask_j & (1u << m)) denom += exp_weights(m, k);
        }
        for (int m = 0; m < spec.n_products; ++m) {
            if (!(mask_i & (1u << m))) continue;
            const double share = exp_weights(m, k) / denom;
            payoff += spec.utilities(m, k) / spec.costs[m] * share * sizes[k];
        }
    }
    return payoff;
}

}  // namespace

double ppm_payoff(std::uint32_t mask_i, std::uint32_t mask_j, const PPMSpec& spec) {
    spec.validate();
    if (mask_i == 0) {
        throw ContractViolation("player portfolio must contain at least one product");
    }
    const std::uint32_t all = (1u << spec.n_products) - 1;
    if ((mask_i | mask_j) & ~all) {
        throw ContractViolation("product mask references an unknown product");
    }
    const Eigen::MatrixXd exp_weights = (spec.mu_scale * spec.utilities.array()).exp().matrix();
    return ppm_payoff_impl(mask_i, mask_j, spec, exp_weights, spec.segment_sizes);
}

StateGame gen_ppm_game(const PPMSpec& spec) {
    spec.validate();
    const int n_actions = (1 << spec.n_products) - 1;

    // Per-state segment sizes: deterministic for one state, otherwise scaled
    // by a uniform factor drawn per (state, segment).
    std::vector<std::vector<double>> state_sizes;
    if (spec.n_states == 1) {
        state_sizes.push_back(spec.segment_sizes);
    } else {
        Rng rng(Rng::derive_seed(spec.seed, 0x9971));
        for (int s = 0; s < spec.n_states; ++s) {
            std::vector<double> sizes = spec.segment_sizes;
            for (double& qk : sizes) {
                qk *= rng.uniform(0.5, 1.5);
            }
            state_sizes.push_back(std::move(sizes));
        }
    }

    const Eigen::MatrixXd exp_weights = (spec.mu_scale * spec.utilities.array()).exp().matrix();
    std::vector<Eigen::MatrixXd> tensor(spec.n_states, Eigen::MatrixXd(n_actions, n_actions));
    for (int s = 0; s < spec.n_states; ++s) {
        for (int i = 0; i < n_actions; ++i) {
            for (int j = 0; j < n_actions; ++j) {
                tensor[s](i, j) =
                    ppm_payoff_impl(static_cast<std::uint32_t>(i + 1),
                                    static_cast<std::uint32_t>(j + 1), spec, exp_weights,
                                    state_sizes[s]);
            }
        }
    }
    return StateGame(std::move(tensor),
                     Eigen::VectorXd::Constant(spec.n_states, 1.0 / spec.n_states));
}

SobolSequence::SobolSequence(int dim) : dim_(dim) {
    if (dim < 1 || dim > kMaxDim) {
        std::ostringstream os;
        os << "sobol dimension " << dim << " out of range [1, " << kMaxDim << "]";
        throw ContractViolation(os.str());
    }
    direction_.resize(dim);
    state_.assign(dim, 0u);

    // Dimension 1: van der Corput.
    for (int k = 0; k < 32; ++k) {
        direction_[0][k] = 1u << (31 - k);
    }
    for (int d = 1; d < dim; ++d) {
        const SobolRow& row = kSobolTable[d - 1];
        const int s = row.s;
        auto& v = direction_[d];
        for (int k = 0; k < s; ++k) {
            v[k] = row.m[k] << (31 - k);
        }
        for (int k = s; k < 32; ++k) {
            v[k] = v[k - s] ^ (v[k - s] >> s);
            for (int j = 1; j < s; ++j) {
                if ((row.a >> (s - 1 - j)) & 1u) {
                    v[k] ^= v[k - j];
                }
            }
        }
    }
}

Eigen::VectorXd SobolSequence::next() {
    // Gray-code update; the sequence starts after the all-zeros point.
    const int bit = std::countr_zero(~index_);
    ++index_;
    Eigen::VectorXd point(dim_);
    for (int d = 0; d < dim_; ++d) {
        state_[d] ^= direction_[d][bit];
        point(d) = static_cast<double>(state_[d]) * 0x1.0p-32;
    }
    return point;
}

Eigen::VectorXd simplex_from_uniform(const Eigen::VectorXd& u) {
    const int n = static_cast<int>(u.size()) + 1;
    std::vector<double> sorted(u.data(), u.data() + u.size());
    std::sort(sorted.begin(), sorted.end());
    Eigen::VectorXd weights(n);
    double prev = 0.0;
    for (int i = 0; i < n - 1; ++i) {
        weights(i) = sorted[i] - prev;
        prev = sorted[i];
    }
    weights(n - 1) = 1.0 - prev;
    return weights;
}

double default_tau(const StateGame& game) {
    return mean_reward_matrix(game).mean();
}

}  // namespace drae
