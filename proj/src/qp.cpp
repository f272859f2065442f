#include "drae/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace drae {

namespace {

void check_floor(int n, double eps) {
    if (eps < 0.0) {
        throw ContractViolation("eps floor must be non-negative");
    }
    if (eps * n > 1.0 + 1e-12) {
        std::ostringstream os;
        os << "eps floor " << eps << " is infeasible for " << n << " actions";
        throw ContractViolation(os.str());
    }
}

double objective_value(const Eigen::VectorXd& c, const Eigen::MatrixXd& A,
                       const Eigen::VectorXd& x) {
    return c.dot(x) - x.dot(A * x);
}

// Fixed-point residual of the projection map at unit step; zero exactly at a
// KKT point of the floored-simplex program.
double kkt_residual(const Eigen::VectorXd& c, const Eigen::MatrixXd& A,
                    const Eigen::VectorXd& x, double eps) {
    Eigen::VectorXd grad = c - 2.0 * (A * x);
    return (project_simplex_floor(x + grad, eps) - x).norm();
}

// Exact solution of the linear program max c'x over the floored simplex:
// uniform split among argmax rows, then floored.
Eigen::VectorXd linear_optimum(const Eigen::VectorXd& c, double eps) {
    const int n = static_cast<int>(c.size());
    const double cmax = c.maxCoeff();
    const double tie_tol = 1e-12 * std::max(1.0, std::abs(cmax));
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    int ties = 0;
    for (int i = 0; i < n; ++i) {
        if (c(i) >= cmax - tie_tol) ++ties;
    }
    for (int i = 0; i < n; ++i) {
        if (c(i) >= cmax - tie_tol) v(i) = 1.0 / ties;
    }
    return validate_strategy(v, eps).probs;
}

// Equality-constrained solve on the free set; returns false when the
// resulting point is not a valid KKT point.
bool active_set_polish(const Eigen::VectorXd& c, const Eigen::MatrixXd& A, double eps,
                       Eigen::VectorXd& x) {
    const int n = static_cast<int>(x.size());
    const double act_tol = 1e-9;
    std::vector<int> free_idx;
    for (int i = 0; i < n; ++i) {
        if (x(i) > eps + act_tol) free_idx.push_back(i);
    }
    const int nf = static_cast<int>(free_idx.size());
    if (nf == 0) return false;

    // Bordered KKT system: stationarity on free coordinates plus the mass
    // constraint sum(x_F) = 1 - eps * n_active.
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(nf + 1, nf + 1);
    Eigen::VectorXd rhs(nf + 1);
    for (int a = 0; a < nf; ++a) {
        for (int b = 0; b < nf; ++b) {
            kkt(a, b) = 2.0 * A(free_idx[a], free_idx[b]);
        }
        kkt(a, nf) = 1.0;
        kkt(nf, a) = 1.0;
        double cross = 0.0;
        if (nf < n) {
            for (int j = 0; j < n; ++j) cross += A(free_idx[a], j);
            for (int b = 0; b < nf; ++b) cross -= A(free_idx[a], free_idx[b]);
            cross *= 2.0 * eps;
        }
        rhs(a) = c(free_idx[a]) - cross;
    }
    rhs(nf) = 1.0 - eps * (n - nf);

    Eigen::VectorXd sol = kkt.fullPivLu().solve(rhs);
    if (!sol.allFinite()) return false;

    Eigen::VectorXd candidate = Eigen::VectorXd::Constant(n, eps);
    for (int a = 0; a < nf; ++a) {
        candidate(free_idx[a]) = sol(a);
        if (sol(a) < eps - 1e-12) return false;
    }
    const double nu = sol(nf);

    // Floored coordinates need non-negative multipliers: nu - grad_i >= 0.
    Eigen::VectorXd grad = c - 2.0 * (A * candidate);
    for (int i = 0; i < n; ++i) {
        if (candidate(i) <= eps + act_tol && nu - grad(i) < -1e-9) return false;
    }
    x = candidate;
    return true;
}

}  // namespace

Eigen::VectorXd project_simplex_floor(const Eigen::VectorXd& v, double eps) {
    const int n = static_cast<int>(v.size());
    if (n == 0) {
        throw ContractViolation("cannot project an empty vector");
    }
    check_floor(n, eps);
    if (!v.allFinite()) {
        throw ContractViolation("projection input contains NaN or Inf");
    }
    const double free_mass = 1.0 - eps * n;
    if (free_mass <= 0.0) {
        return Eigen::VectorXd::Constant(n, eps);
    }
    std::vector<double> u(v.data(), v.data() + n);
    for (double& ui : u) ui -= eps;
    std::sort(u.begin(), u.end(), std::greater<double>());
    double cumulative = 0.0;
    double theta = 0.0;
    int support = 0;
    for (int j = 0; j < n; ++j) {
        cumulative += u[j];
        const double candidate = (cumulative - free_mass) / (j + 1);
        if (u[j] - candidate > 0.0) {
            support = j + 1;
            theta = candidate;
        }
    }
    Eigen::VectorXd out(n);
    for (int i = 0; i < n; ++i) {
        out(i) = eps + std::max(v(i) - eps - theta, 0.0);
    }
    (void)support;
    return out;
}

QPSolution maximize_concave_quadratic(const Eigen::VectorXd& c, const Eigen::MatrixXd& A,
                                      double eps, double tol, int max_iter,
                                      const std::optional<Eigen::VectorXd>& x0) {
    const int n = static_cast<int>(c.size());
    check_floor(n, eps);
    if (A.rows() != n || A.cols() != n) {
        throw ContractViolation("quadratic term has the wrong shape");
    }

    QPSolution sol;
    const double quad_scale = A.cwiseAbs().maxCoeff();

    if (quad_scale == 0.0) {
        Eigen::VectorXd x = linear_optimum(c, eps);
        sol.strategy = MixedStrategy{x, eps};
        sol.objective = c.dot(x);
        sol.kkt_residual = kkt_residual(c, A, x, eps);
        sol.iterations = 0;
        sol.converged = true;
        return sol;
    }

    Eigen::VectorXd x = x0 ? project_simplex_floor(*x0, eps)
                           : Eigen::VectorXd::Constant(n, 1.0 / n);
    if (eps * n > 1.0 - 1e-15) {
        x = Eigen::VectorXd::Constant(n, eps);
    }

    // Conservative Lipschitz bound: L = 2 * ||A||_inf >= 2 * lambda_max.
    const double lipschitz = 2.0 * A.cwiseAbs().rowwise().sum().maxCoeff();
    const double base_step = 1.0 / lipschitz;
    double step = base_step;

    Eigen::VectorXd grad = c - 2.0 * (A * x);
    double fx = objective_value(c, A, x);
    Eigen::VectorXd best_x = x;
    double best_f = fx;
    double best_res = (project_simplex_floor(x + grad, eps) - x).norm();

    int it = 0;
    for (; it < max_iter; ++it) {
        const double residual = (project_simplex_floor(x + grad, eps) - x).norm();
        if (residual < best_res || fx > best_f) {
            best_res = residual;
            best_f = fx;
            best_x = x;
        }
        if (residual <= tol) break;

        // Backtrack from the BB step until the objective stops decreasing;
        // steps at or below 1/L always pass.
        Eigen::VectorXd x_new;
        double f_new = fx;
        double trial = std::clamp(step, base_step, 1e6 * base_step);
        for (int bt = 0; bt < 60; ++bt) {
            x_new = project_simplex_floor(x + trial * grad, eps);
            f_new = objective_value(c, A, x_new);
            if (f_new >= fx - 1e-15 * std::max(1.0, std::abs(fx))) break;
            trial *= 0.5;
        }
        if ((x_new - x).lpNorm<Eigen::Infinity>() == 0.0) {
            // Projection returned the same point; gradient step cannot move.
            x = x_new;
            break;
        }

        Eigen::VectorXd grad_new = c - 2.0 * (A * x_new);
        const Eigen::VectorXd dx = x_new - x;
        const double curvature = dx.dot(grad - grad_new);  // = 2 dx'A dx >= 0
        step = curvature > 0.0 ? dx.squaredNorm() / curvature : 2.0 * trial;

        x = std::move(x_new);
        grad = std::move(grad_new);
        fx = f_new;
    }

    if (fx < best_f) {
        x = best_x;
        fx = best_f;
    }

    // One exact equality-constrained solve on the identified face; keep it
    // only when it is a certified KKT point and does not lose objective.
    Eigen::VectorXd polished = x;
    if (active_set_polish(c, A, eps, polished)) {
        const double f_pol = objective_value(c, A, polished);
        if (f_pol >= fx - 1e-12 * std::max(1.0, std::abs(fx))) {
            x = polished;
            fx = f_pol;
        }
    }

    sol.strategy = MixedStrategy{validate_strategy(x, eps).probs, eps};
    sol.objective = objective_value(c, A, sol.strategy.probs);
    sol.kkt_residual = kkt_residual(c, A, sol.strategy.probs, eps);
    sol.iterations = it;
    sol.converged = sol.kkt_residual <= tol;
    return sol;
}

QPSolution solve_best_response(const Eigen::MatrixXd& meanM, const MixedStrategy& varsigma,
                               const RiskMatrix& risk, double gamma, double eps, double tol,
                               int max_iter, const std::optional<Eigen::VectorXd>& x0) {
    const int n = static_cast<int>(meanM.rows());
    if (meanM.cols() != varsigma.size()) {
        throw ContractViolation("mean reward matrix and opponent strategy disagree on size");
    }
    if (risk.size() != n) {
        throw ContractViolation("risk matrix does not match the mean reward matrix");
    }
    if (gamma < 0.0) {
        throw ContractViolation("gamma must be >= 0");
    }
    if (gamma > 0.0 && risk.stage == RiskStage::Raw) {
        throw ContractViolation("best response needs a Symmetrized or PDProjected risk matrix");
    }
    Eigen::VectorXd c = meanM * varsigma.probs;
    Eigen::MatrixXd A = gamma == 0.0 ? Eigen::MatrixXd::Zero(n, n)
                                     : Eigen::MatrixXd(gamma * risk.values);
    return maximize_concave_quadratic(c, A, eps, tol, max_iter, x0);
}

QPSolution solve_min_risk(const RiskMatrix& risk, const Eigen::MatrixXd& meanM,
                          const MixedStrategy& varsigma, double mu_b, double eps, double tol) {
    const int n = risk.size();
    if (risk.stage == RiskStage::Raw) {
        throw ContractViolation("min-risk solve needs a Symmetrized or PDProjected risk matrix");
    }
    check_floor(n, eps);
    const Eigen::VectorXd c = meanM * varsigma.probs;
    const Eigen::MatrixXd& S = risk.values;
    const double inner_tol = std::min(tol, 1e-10);
    const int inner_iter = kDefaultQpMaxIter;

    // Attainable range of expected return under the floor.
    const Eigen::VectorXd er_argmax = linear_optimum(c, eps);
    const double er_max = c.dot(er_argmax);
    const double er_tol = std::max(10.0 * tol, 1e-10 * (1.0 + std::abs(er_max)));
    if (mu_b > er_max + er_tol) {
        std::ostringstream os;
        os << "return bound mu_b=" << mu_b << " is infeasible; max attainable expected return is "
           << er_max;
        throw ContractViolation(os.str());
    }

    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(n);
    QPSolution unconstrained =
        maximize_concave_quadratic(zero, S, eps, inner_tol, inner_iter);
    const double er_unconstrained = c.dot(unconstrained.strategy.probs);

    auto finish = [&](QPSolution q, int extra_iters, bool ok) {
        QPSolution out;
        out.strategy = q.strategy;
        out.objective = q.strategy.probs.dot(S * q.strategy.probs);
        out.kkt_residual = q.kkt_residual;
        out.iterations = q.iterations + extra_iters;
        out.converged = ok && q.converged;
        return out;
    };

    if (er_unconstrained >= mu_b - er_tol) {
        return finish(unconstrained, 0, true);
    }
    if (mu_b >= er_max - er_tol) {
        QPSolution vertex;
        vertex.strategy = MixedStrategy{er_argmax, eps};
        vertex.kkt_residual = 0.0;
        vertex.converged = true;
        return finish(vertex, 0, true);
    }

    // minimize x'Sx - lambda * c'x == maximize (lambda c)'x - x'Sx.
    // Expected return of the solution is non-decreasing in lambda, so
    // bisection on lambda finds the bound where the constraint binds.
    auto solve_at = [&](double lambda, const Eigen::VectorXd& warm) {
        return maximize_concave_quadratic(lambda * c, S, eps, inner_tol, inner_iter, warm);
    };

    double lo = 0.0;
    double hi = 1.0;
    int total_iters = unconstrained.iterations;
    Eigen::VectorXd warm = unconstrained.strategy.probs;
    QPSolution at_hi = solve_at(hi, warm);
    total_iters += at_hi.iterations;
    int guard = 0;
    while (c.dot(at_hi.strategy.probs) < mu_b && guard++ < 120) {
        lo = hi;
        hi *= 2.0;
        warm = at_hi.strategy.probs;
        at_hi = solve_at(hi, warm);
        total_iters += at_hi.iterations;
    }

    QPSolution feasible = at_hi;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        QPSolution at_mid = solve_at(mid, warm);
        total_iters += at_mid.iterations;
        warm = at_mid.strategy.probs;
        const double er_mid = c.dot(at_mid.strategy.probs);
        if (er_mid >= mu_b) {
            hi = mid;
            feasible = at_mid;
            if (er_mid - mu_b <= er_tol) break;
        } else {
            lo = mid;
        }
        if (hi - lo <= 1e-15 * std::max(1.0, hi)) break;
    }
    const double er_final = c.dot(feasible.strategy.probs);
    return finish(feasible, total_iters - feasible.iterations,
                  er_final >= mu_b - er_tol);
}

}  // namespace drae
