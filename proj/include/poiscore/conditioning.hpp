#pragma once

// Well-conditioned representations of span(X) and the sensitivity upper
// bounds s_i = ||Q_i||_p^p + 1/n that drive importance sampling.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "poiscore/model.hpp"

namespace poiscore {

class RankDeficientError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ConditioningConfig {
    double sketch_factor = 4.0;  ///< sketch rows m = sketch_factor * d^2
    int max_retries = 3;         ///< fresh sketch seeds tried after a rank-deficient sketch
    bool refine_l1 = false;      ///< Lewis-weight reweighting before the l1 normalization
    int lewis_iterations = 20;
    int gamma_probes = 64;       ///< random probes for the measured l1 distortion
    bool measure_distortion = true;  ///< skip the l1 gamma probes when only scores are needed
};

struct ConditionedBasis {
    Eigen::MatrixXd q;  ///< n x s, spans the columns of X
    double alpha = 0.0; ///< measured ||Q||_p (entrywise)
    double gamma = 0.0; ///< measured distortion: ||z||_q <= gamma ||Q z||_p
    int p = 2;
    int sketch_rows = 0;
    int attempts = 0;   ///< sketches drawn until one had full rank
};

struct SensitivityScores {
    Eigen::VectorXd s;              ///< per-row upper bounds, each >= 1/n
    double total = 0.0;             ///< S = sum s_i
    Eigen::VectorXd probabilities;  ///< s_i / S
    std::vector<std::size_t> rows;  ///< dataset row index of each score
};

/// Sparse embedding Pi (one +-1 per input row, m = sketch_factor d^2 rows),
/// R from QR(Pi X), Q = X R^{-1}. alpha = ||Q||_F and gamma = 1/sigma_min(Q)
/// are measured exactly. Throws RankDeficientError after max_retries.
ConditionedBasis sketch_qr_basis_p2(const Eigen::Ref<const Eigen::MatrixXd>& x, std::uint64_t seed,
                                    const ConditioningConfig& config = {});

/// l1 surrogate: sketch-QR basis (optionally Lewis-reweighted) with unit-l1
/// columns; alpha = ||Q||_1 and gamma is the largest ||z||_inf / ||Qz||_1
/// seen over coordinate, random, and per-coordinate l1-regression probes.
ConditionedBasis l1_basis(const Eigen::Ref<const Eigen::MatrixXd>& x, std::uint64_t seed,
                          const ConditioningConfig& config = {});

/// Dispatches on p (1 -> l1_basis, 2 -> sketch_qr_basis_p2).
ConditionedBasis conditioned_basis(const Eigen::Ref<const Eigen::MatrixXd>& x, int p, std::uint64_t seed,
                                   const ConditioningConfig& config = {});

/// s_i = ||Q_i||_p^p + 1/n. `rows` labels each score with its dataset row
/// (defaults to 0..n-1).
SensitivityScores sensitivity_scores(const ConditionedBasis& basis, std::vector<std::size_t> rows = {});

struct RhoEstimate {
    double value = 0.0;  ///< running maximum, a lower bound on rho
    std::size_t evaluated = 0;
    std::size_t skipped = 0;
};

/// Lower-bound estimate of rho = sup sum |x beta|^p / sum |x beta - y^{1/p}|^p
/// over random feasible parameters plus any caller-supplied candidates.
RhoEstimate rho_estimate(const Dataset& data, int p, std::size_t trials, std::uint64_t seed,
                         std::span<const Eigen::VectorXd> extra = {});

/// row_index,score,probability
void write_scores_csv(const SensitivityScores& scores, const std::string& path);

}  // namespace poiscore
