#pragma once

// Synthetic instances: the simplex benchmark family with Poisson labels and
// the unit-circle hard instance, plus the circle sensitivity lower bound.

#include <cstdint>

#include <Eigen/Dense>

#include "poiscore/model.hpp"
#include "poiscore/rng.hpp"

namespace poiscore {

struct SimplexInstance {
    Dataset data;
    Eigen::VectorXd true_beta;  ///< (b, beta_tilde)
    std::uint64_t seed = 0;
    int p = 1;
};

/// Rows 0..d-2 are e_1..e_{d-1}, row d-1 the zero vector; the remaining
/// n - d rows are standard Gaussian rows translated to the simplex incenter
/// and scaled by one common factor so the widest lands at 0.9 of the
/// inscribed radius, which keeps all of them strictly inside the simplex.
/// beta_tilde ~ 10^{1/p} N(0, I), b = max{1, 2^{1/p} |min_i (Z beta_tilde)_i|},
/// y_i ~ Poisson((x_i beta)^p).
/// Requires n >= d >= 3 and p >= 1.
SimplexInstance generate_f2(Eigen::Index n, Eigen::Index d, int p, std::uint64_t seed);

/// x_i = (1, cos(2 pi i / n), sin(2 pi i / n), 0, ..., 0) for i = 1..n, all
/// labels 1. Requires n >= 8 and d >= 3. The seed is accepted for interface
/// symmetry; the instance is fully deterministic.
Dataset generate_circle(Eigen::Index n, Eigen::Index d, std::uint64_t seed = 0);

/// Inversion below lambda = 30, transformed rejection (PTRS) above.
Count sample_poisson(double lambda, Engine& rng);

struct CircleDemo {
    Eigen::Index n = 0;
    double log_eta = 0.0;
    double point_cost = 0.0;    ///< g_1(e^{log_eta}), the deepest point's loss
    double bound = 0.0;         ///< point_cost / (point_cost + 8 n log n)
    double exact_ratio = 0.0;   ///< point_cost / sum_i g_1(x_i beta) at beta = (1 + eta, -1, 0)
};

/// Sensitivity lower bound of the last circle point under beta = (1 + eta, -1, 0),
/// which puts it at x beta = eta while the others sit at 2 sin^2(pi i/n) + eta.
/// Evaluated in log space, so log_eta = -n^2 is fine. Requires n >= 8, log_eta < 0.
CircleDemo circle_sensitivity_demo(Eigen::Index n, double log_eta);

}  // namespace poiscore
