#pragma once

#include <Eigen/Dense>
#include <optional>

#include "drae/game.hpp"
#include "drae/risk.hpp"

namespace drae {

struct QPSolution {
    MixedStrategy strategy;
    double objective = 0.0;
    double kkt_residual = 0.0;
    int iterations = 0;
    bool converged = false;
};

constexpr double kDefaultQpTol = 1e-8;
constexpr int kDefaultQpMaxIter = 10000;

// Euclidean projection onto {x : x >= eps, sum(x) = 1}. Sort-based
// water-filling shifted by eps.
Eigen::VectorXd project_simplex_floor(const Eigen::VectorXd& v, double eps);

// Maximizes c'x - x'Ax over the eps-floored simplex. A must be symmetric
// PSD. Projected-gradient ascent with Barzilai-Borwein steps, an Armijo
// backtracking safeguard (accepted steps never decrease the objective) and a
// final active-set polish. When the quadratic term vanishes the exact linear
// optimum is returned directly, ties split uniformly among argmax rows
// before flooring.
QPSolution maximize_concave_quadratic(const Eigen::VectorXd& c, const Eigen::MatrixXd& A,
                                      double eps, double tol, int max_iter,
                                      const std::optional<Eigen::VectorXd>& x0 = {});

// Best response of Eq-style utility: maximize sigma'*meanM*varsigma - gamma *
// sigma'*Sigma*sigma over the floored simplex.
QPSolution solve_best_response(const Eigen::MatrixXd& meanM, const MixedStrategy& varsigma,
                               const RiskMatrix& risk, double gamma, double eps,
                               double tol = kDefaultQpTol, int max_iter = kDefaultQpMaxIter,
                               const std::optional<Eigen::VectorXd>& x0 = {});

// Minimum-risk form: minimize sigma'*Sigma*sigma subject to
// sigma'*meanM*varsigma >= mu_b on the floored simplex. Solved by bisection
// on the Lagrange multiplier of the return constraint. The returned
// objective is the achieved risk.
QPSolution solve_min_risk(const RiskMatrix& risk, const Eigen::MatrixXd& meanM,
                          const MixedStrategy& varsigma, double mu_b, double eps,
                          double tol = kDefaultQpTol);

}  // namespace drae
