#pragma once

// Barrier Newton solver for the weighted loss over the shifted domain: hull
// rows must satisfy x_i beta > eta, all other rows x_i beta > 0.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "poiscore/coreset.hpp"
#include "poiscore/model.hpp"

namespace poiscore {

struct OptimizerConfig {
    double eta = 0.05;
    double barrier_mu = 1.0;
    double barrier_decay = 0.2;
    double newton_tol = 1e-8;   ///< stop when half the squared Newton decrement drops below this
    int max_outer = 40;
    int max_inner = 100;
    double ls_backtrack = 0.5;
    double armijo = 1e-4;
    double strictness = 1e-12;  ///< x beta >= eta + strictness on hull rows

    /// Throws std::invalid_argument on a negative eta, nonpositive
    /// tolerances, or decay/backtrack outside (0, 1).
    void validate() const;
};

struct FitResult {
    Eigen::VectorXd beta;
    double objective = 0.0;  ///< weighted loss without barrier terms
    int outer_iterations = 0;
    int newton_iterations = 0;
    bool converged = false;
    double final_mu = 0.0;
    double decrement = 0.0;  ///< half squared Newton decrement at the last iterate
    std::vector<double> objective_history;  ///< loss after each outer iteration
    bool feasible_full_data = false;        ///< filled by the caller
    double full_data_margin = 0.0;          ///< filled by the caller
    std::string message;
};

struct StartResult {
    bool feasible = false;
    Eigen::VectorXd beta;
    double margin = 0.0;  ///< min_i x_i beta - eta at the returned beta
};

/// Maximizes min_i x_i beta over ||beta||_2 <= radius by softmin ascent with
/// an annealed temperature. Feasible iff the best margin exceeds eta.
StartResult feasible_start(const Eigen::Ref<const Eigen::MatrixXd>& rows, double eta, double radius = 1.0);

/// Minimizes sum w_i g_{y_i}(x_i beta) + mu sum_hull -log(x_i beta - eta)
/// + mu sum_{y_i = 0, non-hull} -log(x_i beta) for decreasing mu. Runs on
/// unit-ball-normalized rows and returns beta on the original scale. An
/// empty weight span means unit weights.
FitResult minimize(const Eigen::Ref<const Eigen::MatrixXd>& rows, std::span<const Count> labels,
                   std::span<const double> weights, int p, const OptimizerConfig& config,
                   std::span<const std::size_t> hull_indices);

/// Coreset overload: the leading hull_count rows are the hull.
FitResult minimize(const Coreset& coreset, int p, const OptimizerConfig& config);

/// {"beta":[...],"objective":...,"iterations":...,"converged":...}
std::string to_json_line(const FitResult& fit);

struct ShiftGapReport {
    bool ok = true;
    std::size_t checks = 0;
    double worst_slack = 0.0;        ///< min over checks of (bound - shifted) / bound
    double tightest_constant = 0.0;  ///< p=1: max (shifted - f)/(eta n); p=2: max (shifted - f - eta^2 n)/(eta f)
};

/// f(X(beta + eta e_1)) <= f(X beta) + eta n for p = 1 and
/// <= f(X beta) + eta^2 n + 6 eta f(X beta) for p = 2, over random feasible beta.
ShiftGapReport shift_gap_check(const Dataset& data, int p, std::span<const double> eta_grid, std::size_t trials,
                               std::uint64_t seed);

/// Random parameter with min_i x_i beta = 10^{U(-3,1)}: Gaussian slopes at a
/// log-uniform scale in [0.1, 10], intercept lifted to the stated margin.
Eigen::VectorXd random_feasible_params(const Eigen::Ref<const Eigen::MatrixXd>& rows, std::uint64_t seed);

}  // namespace poiscore
