#pragma once

// p-th-root-link Poisson regression: dataset, per-point loss g_y(z), weighted
// total loss and its derivatives, and the shifted-domain predicates.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace poiscore {

using Count = std::int64_t;

/// Validates a link power for the regression pipeline (p in {1, 2}).
/// Throws std::invalid_argument otherwise.
void require_link_power(int p);

/// Design matrix with a leading all-ones column plus nonnegative counts.
class Dataset {
public:
    Dataset() = default;

    /// Builds X = [1 | features]. Throws std::invalid_argument when the
    /// shapes disagree, n < 1, there are no covariates, or a label is negative.
    static Dataset from_features(const Eigen::MatrixXd& features, std::vector<Count> labels);

    /// Adopts a matrix that already carries the intercept column.
    static Dataset from_design(Eigen::MatrixXd design, std::vector<Count> labels);

    [[nodiscard]] Eigen::Index rows() const { return x_.rows(); }
    [[nodiscard]] Eigen::Index cols() const { return x_.cols(); }
    [[nodiscard]] const Eigen::MatrixXd& design() const { return x_; }
    [[nodiscard]] auto features() const { return x_.rightCols(x_.cols() - 1); }
    [[nodiscard]] const std::vector<Count>& labels() const { return y_; }
    [[nodiscard]] Count y_max() const { return y_max_; }

    /// Rows selected by index, preserving order (duplicates allowed).
    [[nodiscard]] Dataset subset(std::span<const std::size_t> indices) const;

private:
    Dataset(Eigen::MatrixXd x, std::vector<Count> y);

    Eigen::MatrixXd x_;
    std::vector<Count> y_;
    Count y_max_ = 0;
};

/// log(y!): exact cumulative sum for y <= 1024, log-gamma above.
double log_factorial(Count y);

/// Minimum value of g_y, i.e. g_y(y^{1/p}) = y - y log y + log y!, independent of p.
/// Uses the Stirling series above the table range to avoid cancellation.
double loss_minimum(Count y);

/// g_y(z) = z^p - p y log z + log(y!). Throws std::domain_error for z <= 0.
/// Any integer p >= 1 is accepted here.
double point_loss(Count y, double z, int p);

/// g_y(exp(log_z)); the z^p term is flushed to zero when p*log_z < -745.
double point_loss_log(Count y, double log_z, int p);

/// g'_y(z) = p z^{p-1} - p y / z.
double point_loss_derivative(Count y, double z, int p);

/// g''_y(z) = p(p-1) z^{p-2} + p y / z^2.
double point_loss_second_derivative(Count y, double z, int p);

/// Sum_i w_i g_{y_i}(x_i beta); std::nullopt when some x_i beta <= 0.
/// An empty weight span means unit weights. Throws std::invalid_argument on
/// dimension mismatch or nonpositive weights.
std::optional<double> total_loss(const Eigen::Ref<const Eigen::MatrixXd>& x, std::span<const Count> y,
                                 const Eigen::VectorXd& beta, int p, std::span<const double> weights = {});

std::optional<double> total_loss(const Dataset& data, const Eigen::VectorXd& beta, int p,
                                 std::span<const double> weights = {});

struct Derivatives {
    Eigen::VectorXd gradient;
    Eigen::MatrixXd hessian;
};

/// Gradient and Hessian of the weighted loss. Throws std::domain_error when
/// beta is not strictly feasible.
Derivatives loss_gradient_hessian(const Eigen::Ref<const Eigen::MatrixXd>& x, std::span<const Count> y,
                                  const Eigen::VectorXd& beta, int p, std::span<const double> weights = {});

Derivatives loss_gradient_hessian(const Dataset& data, const Eigen::VectorXd& beta, int p,
                                  std::span<const double> weights = {});

struct Membership {
    bool inside = false;
    double margin = 0.0;  ///< min_i x_i beta - eta
};

/// beta in D(eta) iff min_i x_i beta > eta.
Membership membership(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::VectorXd& beta, double eta);
Membership membership(const Dataset& data, const Eigen::VectorXd& beta, double eta);

/// beta + eta e_1; moves every margin by exactly eta.
Eigen::VectorXd shift_params(const Eigen::VectorXd& beta, double eta);

/// CSV with header f1,...,f{d-1},y; the intercept column is prepended on load.
Dataset read_dataset_csv(const std::string& path);
void write_dataset_csv(const Dataset& data, const std::string& path);

}  // namespace poiscore
