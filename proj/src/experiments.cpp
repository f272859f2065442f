#include "drae/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <thread>

namespace drae {

namespace {

// Piecewise-linear lpm(er) curve from frontier rows; duplicate er values are
// averaged.
struct Curve {
    std::vector<double> er;
    std::vector<double> lpm;

    double lo() const { return er.front(); }
    double hi() const { return er.back(); }

    double eval(double x) const {
        if (x <= er.front()) return lpm.front();
        if (x >= er.back()) return lpm.back();
        const auto it = std::upper_bound(er.begin(), er.end(), x);
        const std::size_t k = static_cast<std::size_t>(it - er.begin());
        const double t = (x - er[k - 1]) / (er[k] - er[k - 1]);
        return lpm[k - 1] + t * (lpm[k] - lpm[k - 1]);
    }
};

Curve make_curve(const std::vector<FrontierRow>& rows, const char* name) {
    std::map<double, std::pair<double, int>> grouped;
    for (const auto& row : rows) {
        auto& slot = grouped[row.er];
        slot.first += row.lpm;
        slot.second += 1;
    }
    if (grouped.size() < 2) {
        throw ContractViolation(std::string(name) +
                                " frontier needs at least 2 rows with distinct er values");
    }
    Curve curve;
    for (const auto& [er, acc] : grouped) {
        curve.er.push_back(er);
        curve.lpm.push_back(acc.first / acc.second);
    }
    return curve;
}

double trapezoid_area(const Curve& curve, const std::vector<double>& grid) {
    double area = 0.0;
    for (std::size_t k = 1; k < grid.size(); ++k) {
        const double width = grid[k] - grid[k - 1];
        area += 0.5 * width * (curve.eval(grid[k - 1]) + curve.eval(grid[k]));
    }
    return area;
}

}  // namespace

void parallel_for(int n_tasks, int jobs, const std::function<void(int)>& fn) {
    jobs = std::max(1, jobs);
    if (jobs == 1 || n_tasks <= 1) {
        for (int i = 0; i < n_tasks; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    auto worker = [&] {
        while (true) {
            const int i = next.fetch_add(1);
            if (i >= n_tasks) break;
            fn(i);
        }
    };
    std::vector<std::thread> pool;
    const int n_threads = std::min(jobs, n_tasks);
    pool.reserve(n_threads);
    for (int w = 0; w < n_threads; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

RiskConfig resolve_tau(const RiskConfig& cfg, const StateGame& game) {
    RiskConfig out = cfg;
    if (std::isnan(out.tau)) {
        out.tau = default_tau(game);
    }
    return out;
}

std::vector<FrontierRow> gamma_sweep(const StateGame& game,
                                     const std::vector<SolutionConcept>& concepts,
                                     const std::vector<double>& gammas, const RiskConfig& cfg,
                                     std::uint64_t seed, const SFPOptions& opts, int jobs) {
    const RiskConfig base = resolve_tau(cfg, game);
    const int n = static_cast<int>(concepts.size() * gammas.size());
    std::vector<FrontierRow> rows(n);
    parallel_for(n, jobs, [&](int task) {
        const std::size_t ci = task / gammas.size();
        const std::size_t gi = task % gammas.size();
        RiskConfig run_cfg = base;
        run_cfg.gamma = gammas[gi];
        const EquilibriumProfile profile = sfp_solve(game, run_cfg, concepts[ci], opts);
        FrontierRow row;
        row.solution_concept = concepts[ci];
        row.gamma = gammas[gi];
        row.tau = run_cfg.tau;
        row.degree = run_cfg.degree;
        row.scheme = run_cfg.scheme;
        row.er = profile.er;
        row.variance = profile.variance;
        row.lpm = profile.lpm;
        row.iterations = profile.iterations;
        row.converged = profile.converged;
        row.seed = seed;
        rows[task] = row;
    });
    std::stable_sort(rows.begin(), rows.end(), [](const FrontierRow& a, const FrontierRow& b) {
        if (a.solution_concept != b.solution_concept) {
            return static_cast<int>(a.solution_concept) < static_cast<int>(b.solution_concept);
        }
        return a.gamma < b.gamma;
    });
    return rows;
}

double downside_auc_ratio(const std::vector<FrontierRow>& drae_rows,
                          const std::vector<FrontierRow>& rae_rows) {
    const Curve drae = make_curve(drae_rows, "drae");
    const Curve rae = make_curve(rae_rows, "rae");
    const double lo = std::max(drae.lo(), rae.lo());
    const double hi = std::min(drae.hi(), rae.hi());
    if (!(hi > lo)) {
        throw ContractViolation("frontiers do not overlap in expected return");
    }

    // Merged breakpoints make the trapezoid rule exact for both curves.
    std::vector<double> grid;
    grid.push_back(lo);
    for (double x : drae.er) {
        if (x > lo && x < hi) grid.push_back(x);
    }
    for (double x : rae.er) {
        if (x > lo && x < hi) grid.push_back(x);
    }
    grid.push_back(hi);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    const double area_drae = trapezoid_area(drae, grid);
    const double area_rae = trapezoid_area(rae, grid);
    if (area_rae == 0.0) {
        return area_drae == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
    }
    return area_drae / area_rae;
}

std::vector<SkewDistanceRow> skew_distance_curve(const std::vector<double>& kappas,
                                                 int n_actions,
                                                 const std::vector<std::uint64_t>& seeds,
                                                 const RiskConfig& cfg, const SFPOptions& opts,
                                                 int jobs) {
    const int n_kappas = static_cast<int>(kappas.size());
    const int n_seeds = static_cast<int>(seeds.size());
    std::vector<double> distances(n_kappas * n_seeds, 0.0);
    parallel_for(n_kappas * n_seeds, jobs, [&](int task) {
        const int ki = task / n_seeds;
        const int si = task % n_seeds;
        Rng rng(Rng::derive_seed(seeds[si], static_cast<std::uint64_t>(ki)));
        Eigen::MatrixXd payoff(n_actions, n_actions);
        for (int i = 0; i < n_actions; ++i) {
            for (int j = 0; j < n_actions; ++j) {
                payoff(i, j) = sample_skew_normal(0.0, 1.0, kappas[ki], rng);
            }
        }
        const StateGame game = StateGame::single_state(std::move(payoff));
        const RiskConfig run_cfg = resolve_tau(cfg, game);
        const EquilibriumProfile drae = sfp_solve(game, run_cfg, SolutionConcept::DRAE, opts);
        const EquilibriumProfile rae = sfp_solve(game, run_cfg, SolutionConcept::RAE, opts);
        distances[task] = strategy_distance(drae, rae);
    });

    std::vector<SkewDistanceRow> rows(n_kappas);
    for (int ki = 0; ki < n_kappas; ++ki) {
        double mean = 0.0;
        for (int si = 0; si < n_seeds; ++si) mean += distances[ki * n_seeds + si];
        mean /= n_seeds;
        double var = 0.0;
        for (int si = 0; si < n_seeds; ++si) {
            const double d = distances[ki * n_seeds + si] - mean;
            var += d * d;
        }
        rows[ki].kappa = kappas[ki];
        rows[ki].mean_distance = mean;
        rows[ki].std_distance = n_seeds > 1 ? std::sqrt(var / (n_seeds - 1)) : 0.0;
    }
    return rows;
}

std::vector<StateCountRow> state_count_sweep(const AssetSpec& base_spec,
                                             const std::vector<int>& state_counts,
                                             const RiskConfig& cfg,
                                             const std::vector<std::uint64_t>& seeds,
                                             const SFPOptions& opts, int jobs) {
    const std::vector<SolutionConcept> concepts = {SolutionConcept::DRAE, SolutionConcept::RAE};
    const int n_counts = static_cast<int>(state_counts.size());
    const int n_seeds = static_cast<int>(seeds.size());
    const int n = n_counts * 2 * n_seeds;
    std::vector<StateCountRow> rows(n);
    parallel_for(n, jobs, [&](int task) {
        const int count_idx = task / (2 * n_seeds);
        const int concept_idx = (task / n_seeds) % 2;
        const int seed_idx = task % n_seeds;
        AssetSpec spec = base_spec;
        spec.n_states = state_counts[count_idx];
        spec.seed = seeds[seed_idx];
        const StateGame game = gen_asset_game(spec);
        const RiskConfig run_cfg = resolve_tau(cfg, game);
        const EquilibriumProfile profile = sfp_solve(game, run_cfg, concepts[concept_idx], opts);
        StateCountRow row;
        row.n_states = state_counts[count_idx];
        row.solution_concept = concepts[concept_idx];
        row.seed = seeds[seed_idx];
        row.lpm = profile.lpm;
        rows[task] = row;
    });
    return rows;
}

std::vector<DegreeRow> degree_sweep(const StateGame& game, const std::vector<double>& degrees,
                                    const RiskConfig& cfg, const SFPOptions& opts, int jobs) {
    const RiskConfig base = resolve_tau(cfg, game);
    const int n = static_cast<int>(degrees.size());
    std::vector<DegreeRow> rows(n);
    parallel_for(n, jobs, [&](int task) {
        RiskConfig run_cfg = base;
        run_cfg.degree = degrees[task];
        const EquilibriumProfile profile = sfp_solve(game, run_cfg, SolutionConcept::DRAE, opts);
        RiskWorkspace reference(game, run_cfg.tau, 2.0);
        DegreeRow row;
        row.degree = degrees[task];
        row.er = profile.er;
        row.lpm = profile.lpm;
        row.lpm_ref2 = (profile.strategy_p1.probs.transpose() *
                        reference.raw_lpm(profile.strategy_p2.probs) * profile.strategy_p1.probs)
                           .value();
        row.iterations = profile.iterations;
        row.converged = profile.converged;
        rows[task] = row;
    });
    return rows;
}

}  // namespace drae
