#pragma once

// Hull rows at weight 1 plus an i.i.d. sensitivity sample reweighted by
// 1 / (k p_i), the uniform baseline, and the empirical coreset error.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "poiscore/conditioning.hpp"
#include "poiscore/hull.hpp"
#include "poiscore/model.hpp"

namespace poiscore {

struct Coreset {
    Eigen::MatrixXd rows;              ///< k' x d, intercept column included
    std::vector<Count> labels;
    std::vector<double> weights;
    std::size_t hull_count = 0;        ///< leading weight-1 hull rows
    std::uint64_t seed = 0;
    std::size_t k = 0;                 ///< requested sample size
    std::vector<std::size_t> source;   ///< dataset row of every coreset row
};

/// Rows of `data` not listed in `hull`, in ascending order.
std::vector<std::size_t> non_hull_rows(const Dataset& data, const HullResult& hull);

/// Sensitivity scores of the non-hull rows (empty when the hull covers every row).
SensitivityScores remainder_scores(const Dataset& data, int p, const HullResult& hull, std::uint64_t seed,
                                   const ConditioningConfig& config = {});

/// Hull rows at weight 1 followed by k draws with replacement, row i drawn
/// with probability p_i and weighted 1 / (k p_i). An empty remainder gives a
/// hull-only coreset.
Coreset build_coreset(const Dataset& data, int p, std::size_t k, std::uint64_t seed, const HullResult& hull,
                      const SensitivityScores& scores);

/// Uniform baseline. Without the hull: k draws over all n rows at weight n/k.
/// With the hull: hull rows at weight 1 plus k draws over the remaining rows
/// at weight (n - hull_count)/k.
Coreset build_uniform(const Dataset& data, std::size_t k, std::uint64_t seed, const HullResult& hull,
                      bool with_hull = false);

struct CoresetError {
    double max_relative = 0.0;
    std::size_t evaluated = 0;
    std::size_t skipped = 0;  ///< parameters not strictly feasible at margin eta on the full data
};

/// max over beta of |f(X beta) - f_w(C beta)| / f(X beta).
CoresetError coreset_error(const Dataset& data, const Coreset& coreset, int p, std::span<const Eigen::VectorXd> betas,
                           double eta = 0.0);

/// eps^-2 d min{d, eps^-1 log n log y_max} m with the size term m for p = 1 or
/// 2, all hidden constants and polylog factors set to 1. Informational only.
double theoretical_size(double eps, double rho, Count y_max, Eigen::Index d, Eigen::Index n, double eta, int p);

/// CSV `w,f1,...,f{d-1},y` under a `# hull_count=<m> seed=<s> k=<k>` line.
void write_coreset_csv(const Coreset& coreset, const std::string& path);
Coreset read_coreset_csv(const std::string& path);

}  // namespace poiscore
