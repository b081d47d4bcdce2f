#pragma once

// Closed-form bounds on the per-point loss g_y: the cost floor, the
// translated lower envelopes (z - tau)^p / lambda, the principal Lambert
// branch and the tangency slope lambda*(y), label rounding, and the p >= 3
// counterexample to the domain-shift inequality.

#include <span>
#include <vector>

#include "poiscore/model.hpp"

namespace poiscore {

struct EnvelopeParams {
    double lambda = 1.0;  ///< slope divisor, >= 1
    double tau = 0.0;     ///< translation, y^{1/p}
};

struct TangencyResult {
    double lambda_star = 0.0;
    double z_star = 0.0;
    double residual_value = 0.0;  ///< |g_y(z*) - (z* - y)/lambda*|
    double residual_slope = 0.0;  ///< |g'_y(z*) - 1/lambda*|
};

/// Worst relative slack of a pointwise inequality sweep; ok iff every slack
/// clears the tolerance the check was run with.
struct SlackReport {
    bool ok = true;
    double worst_lower = 0.0;
    double worst_upper = 0.0;
    std::size_t points = 0;
};

/// max{1, (1 + p log z)/3}, a lower bound on g_y(z) for y >= 1.
double cost_lower_bound(Count y, double z, int p);

/// (1/2)(sqrt(4y / LB(y) + 1) + 1) with LB(y) = max{1, (1 + log y)/3}.
double lambda_p1(Count y);

/// Envelope for label y: lambda_p1 for p = 1, lambda = 1 for p = 2, and the
/// degenerate (1, 0) for y = 0 where g_0(z) = z^p.
EnvelopeParams envelope_for(Count y, int p);

/// (z - tau)^p / lambda.
double envelope_value(const EnvelopeParams& env, double z, int p);

/// Checks (z - y^{1/p})^p / lambda <= g_y(z) <= z^p on every grid point.
/// Slacks are relative to g_y(z). Throws std::invalid_argument if a grid
/// point is not strictly above y^{1/p}.
SlackReport envelope_sandwich_check(Count y, int p, std::span<const double> z_grid, double tolerance = 1e-9);

/// Principal branch W0 on [-1/e, inf). Arguments within 1e-15 below -1/e
/// are clamped; anything lower throws std::domain_error.
double lambert_w0(double x);

/// Absolute slacks of sqrt(1 + e x) - 1 <= W0(x) <= sqrt(2(1 + e x)) - 1 on
/// [-1/e, 0), plus the worst relative residual |W e^W - x| / max(1, |x|).
struct LambertReport {
    bool ok = true;
    double worst_lower = 0.0;
    double worst_upper = 0.0;
    double worst_residual = 0.0;
    std::size_t points = 0;
};
LambertReport lambert_bounds_check(std::span<const double> x_grid, double tolerance = 1e-12);

/// Tangency slope for p = 1: lambda* = 1 / (W0(-y e^{-2} / (y!)^{1/y}) + 1),
/// with z* = y lambda* / (lambda* - 1). Throws std::invalid_argument for y < 1.
TangencyResult lambda_star(Count y);

/// Appendix bracket sqrt(y / (2 log 2 pi y)) <= lambda*(y) <= sqrt(26 y / (6 log 2 pi y)).
std::pair<double, double> lambda_star_bracket(Count y);

/// (1 - 3 eps) g_y(z) <= g_{y'}(z) <= (1 + 3 eps) g_y(z) for y >= 8,
/// y < y' <= (1 + eps) y, eps in (0, 1]. Slacks are relative to g_y(z).
SlackReport rounding_check(Count y, Count y_prime, double eps, std::span<const double> z_grid,
                           double tolerance = 0.0);

struct RoundedLabels {
    std::vector<Count> labels;
    std::vector<int> group;  ///< y for y < 8, 8 + k for the k-th geometric boundary
    int group_count = 0;
};

/// Rounds labels >= 8 up to the next boundary ceil(8 (1 + eps)^k); smaller
/// labels are unchanged. Throws std::invalid_argument unless eps in (0, 1].
RoundedLabels round_labels(std::span<const Count> labels, double eps);

struct CounterexampleResult {
    Count y_witness = 0;
    double lhs = 0.0;         ///< C g_y(y^{1/p})
    double rhs = 0.0;         ///< p eta (p - 1)/2 y^{(p-2)/p}
    double shift_excess = 0.0;  ///< g_y(y^{1/p} + eta) - g_y(y^{1/p}) - eta^p
    double shift_allowance = 0.0;  ///< eta C g_y(y^{1/p})
};

/// Smallest y (doubling then bisection) with
/// 2C / (p (p-1) eta) < y^{(p-2)/p} / (log(2 pi y)/2 + 1/(12 y)).
/// Throws std::invalid_argument for p < 3 or nonpositive C, eta.
CounterexampleResult counterexample_p_geq_3(int p, double c, double eta);

/// `count` log-spaced points on (lo, hi]; lo excluded, hi included.
std::vector<double> log_grid(double lo, double hi, std::size_t count);

/// `count` points tau + tau * delta with delta log-spaced on [min_offset, max_offset].
/// Dense near tau, which is where the envelopes come closest to g_y.
std::vector<double> offset_grid(double tau, double min_offset, double max_offset, std::size_t count);

}  // namespace poiscore
