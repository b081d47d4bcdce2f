#pragma once

// Unit-ball normalization and the hull rows the coreset keeps at weight 1:
// exact extreme points via LP membership tests, or a direction-net eps-kernel.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace poiscore {

enum class HullMode { exact, eps_kernel };

const char* to_string(HullMode mode);

struct HullResult {
    std::vector<std::size_t> indices;  ///< ascending row indices
    HullMode mode = HullMode::exact;
    double eps = 0.0;                  ///< 0 for exact
    double scale_factor = 1.0;
    std::size_t directions = 0;        ///< kernel net size (0 for exact)
    double angular_spacing = 0.0;      ///< covering angle of the kernel net
};

struct NormalizedDesign {
    Eigen::MatrixXd design;
    double scale_factor = 1.0;
};

/// Divides the feature columns (not the intercept) by
/// c = max(1, max_i ||features_i||_2). A parameter fitted on the result maps
/// back through unscale_params.
NormalizedDesign normalize_unit_ball(const Eigen::Ref<const Eigen::MatrixXd>& design);

/// (b0, b_rest) on normalized data -> (b0, b_rest / c) on the original scale.
Eigen::VectorXd unscale_params(const Eigen::VectorXd& beta, double scale_factor);
/// Inverse of unscale_params.
Eigen::VectorXd scale_params(const Eigen::VectorXd& beta, double scale_factor);

class HullBudgetExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct HullBudget {
    std::size_t max_rows = 1'000'000;
    std::size_t max_extreme = 4096;
};

/// Rows that are not convex combinations of the other rows (one copy kept
/// of duplicated vertices). Membership is decided by a phase-one simplex per
/// row; rows outside the current candidate set yield a separating direction
/// whose maximizer joins the set. Throws HullBudgetExceeded when either
/// budget is hit; use eps_kernel then.
HullResult extreme_points_exact(const Eigen::Ref<const Eigen::MatrixXd>& design, const HullBudget& budget = {});

/// Argmax row for every direction of a deterministic net on the sphere of
/// the feature space, on unit-ball-normalized data. Nets: {+1,-1} in one
/// dimension, equally spaced angles in two, a Fibonacci sphere in three and
/// a cube-face grid above. Requires eps in (0, 1/2).
HullResult eps_kernel(const Eigen::Ref<const Eigen::MatrixXd>& design, double eps, std::size_t max_directions = 8192);

/// Margin the optimizer enforces on hull rows: eps for exact, 2 eps for a kernel.
double constraint_margin(HullMode mode, double eps);

/// True iff `point` lies in the convex hull of the rows of `vertices`, to
/// within `tolerance` on the phase-one objective.
bool in_convex_hull(const Eigen::Ref<const Eigen::MatrixXd>& vertices, const Eigen::Ref<const Eigen::VectorXd>& point,
                    double tolerance = 1e-9);

/// One column `row_index`.
void write_hull_csv(const HullResult& hull, const std::string& path);

}  // namespace poiscore
