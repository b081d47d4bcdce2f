#include "poiscore/envelopes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace poiscore {

namespace {

constexpr double kE = std::numbers::e;
constexpr double kInvE = 1.0 / std::numbers::e;

double root_of(Count y, int p) {
    const double v = static_cast<double>(y);
    return p == 1 ? v : (p == 2 ? std::sqrt(v) : std::pow(v, 1.0 / p));
}

// v = W0(x) + 1 for x = (q - 1)/e, from the offset q = 1 + e x directly.
// Solves log(1 - v) + v = log(1 - q) inside the bracket
// sqrt(q) <= v <= sqrt(2 q), which keeps the branch point well conditioned.
double w0_plus_one_from_offset(double q) {
    if (q <= 0.0) return 0.0;
    if (q >= 1.0) throw std::domain_error("offset must lie in [0, 1)");
    const double target = std::log1p(-q);
    auto residual = [target](double v) { return std::log1p(-v) + v - target; };
    double lo = std::sqrt(q);
    double hi = std::min(std::sqrt(2.0 * q), std::nextafter(1.0, 0.0));
    double v = 0.5 * (lo + hi);
    for (int iter = 0; iter < 200; ++iter) {
        const double f = residual(v);
        if (f == 0.0) break;
        if (f > 0.0) lo = v; else hi = v;
        const double slope = -v / (1.0 - v);
        double next = v - f / slope;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - v) <= 1e-16 * v) {
            v = next;
            break;
        }
        v = next;
    }
    return v;
}

}  // namespace

double cost_lower_bound(Count y, double z, int p) {
    (void)y;
    if (!(z > 0.0)) throw std::domain_error("cost_lower_bound requires z > 0");
    return std::max(1.0, (1.0 + p * std::log(z)) / 3.0);
}

double lambda_p1(Count y) {
    if (y < 1) throw std::invalid_argument("lambda_p1 requires y >= 1");
    const double v = static_cast<double>(y);
    const double lb = std::max(1.0, (1.0 + std::log(v)) / 3.0);
    return 0.5 * (std::sqrt(4.0 * v / lb + 1.0) + 1.0);
}

EnvelopeParams envelope_for(Count y, int p) {
    require_link_power(p);
    if (y == 0) return {1.0, 0.0};
    if (p == 1) return {lambda_p1(y), static_cast<double>(y)};
    return {1.0, std::sqrt(static_cast<double>(y))};
}

double envelope_value(const EnvelopeParams& env, double z, int p) {
    const double gap = z - env.tau;
    return (p == 1 ? gap : gap * gap) / env.lambda;
}

SlackReport envelope_sandwich_check(Count y, int p, std::span<const double> z_grid, double tolerance) {
    const EnvelopeParams env = envelope_for(y, p);
    SlackReport report;
    report.worst_lower = std::numeric_limits<double>::infinity();
    report.worst_upper = std::numeric_limits<double>::infinity();
    for (double z : z_grid) {
        if (!(z > env.tau)) throw std::invalid_argument("grid point must exceed y^{1/p}");
        const double g = point_loss(y, z, p);
        const double lower = envelope_value(env, z, p);
        const double upper = p == 1 ? z : z * z;
        report.worst_lower = std::min(report.worst_lower, (g - lower) / g);
        report.worst_upper = std::min(report.worst_upper, (upper - g) / g);
        ++report.points;
    }
    report.ok = report.worst_lower >= -tolerance && report.worst_upper >= -tolerance;
    return report;
}

double lambert_w0(double x) {
    if (std::isnan(x)) throw std::domain_error("lambert_w0 of NaN");
    if (x < -kInvE) {
        if (x >= -kInvE - 1e-15) return -1.0;
        throw std::domain_error("lambert_w0 is undefined below -1/e");
    }
    if (x == 0.0) return 0.0;
    if (std::isinf(x)) return x;
    const double q = std::max(0.0, std::fma(kE, x, 1.0));
    if (q == 0.0) return -1.0;

    double w;
    if (x < -0.25) {
        w = std::sqrt(q) - 1.0;  // lower bracket, exact at the branch point
    } else if (x < 3.0) {
        w = std::log1p(x);
    } else {
        const double l1 = std::log(x);
        const double l2 = std::log(l1);
        w = l1 - l2 + l2 / l1;
    }

    const double tol = 1e-14 * std::max(1.0, std::abs(x));
    for (int iter = 0; iter < 100; ++iter) {
        const double ew = std::exp(w);
        const double f = w * ew - x;
        const double wp1 = w + 1.0;
        if (f == 0.0 || wp1 <= 0.0) break;
        const double step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        double next = w - step;
        if (next <= -1.0) next = 0.5 * (w - 1.0);
        const bool small_step = std::abs(next - w) <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(w));
        w = next;
        if (small_step && std::abs(w * std::exp(w) - x) <= tol) break;
    }
    return w;
}

LambertReport lambert_bounds_check(std::span<const double> x_grid, double tolerance) {
    LambertReport report;
    report.worst_lower = std::numeric_limits<double>::infinity();
    report.worst_upper = std::numeric_limits<double>::infinity();
    for (double x : x_grid) {
        if (!(x >= -kInvE - 1e-15 && x < 0.0)) throw std::invalid_argument("grid must lie in [-1/e, 0)");
        const double w = lambert_w0(x);
        const double q = std::max(0.0, std::fma(kE, x, 1.0));
        const double lower = std::sqrt(q) - 1.0;
        const double upper = std::sqrt(2.0 * q) - 1.0;
        report.worst_lower = std::min(report.worst_lower, w - lower);
        report.worst_upper = std::min(report.worst_upper, upper - w);
        report.worst_residual = std::max(report.worst_residual, std::abs(w * std::exp(w) - x) / std::max(1.0, std::abs(x)));
        ++report.points;
    }
    report.ok = report.worst_lower >= -tolerance && report.worst_upper >= -tolerance && report.worst_residual <= 1e-13;
    return report;
}

TangencyResult lambda_star(Count y) {
    if (y < 1) throw std::invalid_argument("lambda_star requires y >= 1");
    const double v = static_cast<double>(y);
    // Argument -y e^{-2} / (y!)^{1/y} = -exp(-1 - m(y)/y) with m the loss minimum,
    // so 1 + e x = -expm1(-m(y)/y) without cancellation.
    const double q = -std::expm1(-loss_minimum(y) / v);
    const double w_plus_one = w0_plus_one_from_offset(q);
    TangencyResult out;
    out.lambda_star = 1.0 / w_plus_one;
    out.z_star = v / (1.0 - w_plus_one);
    out.residual_value = std::abs(point_loss(y, out.z_star, 1) - (out.z_star - v) * w_plus_one);
    out.residual_slope = std::abs(point_loss_derivative(y, out.z_star, 1) - w_plus_one);
    return out;
}

std::pair<double, double> lambda_star_bracket(Count y) {
    if (y < 2) throw std::invalid_argument("bracket holds for y >= 2");
    const double v = static_cast<double>(y);
    const double l = std::log(2.0 * std::numbers::pi * v);
    return {std::sqrt(v / (2.0 * l)), std::sqrt(26.0 * v / (6.0 * l))};
}

SlackReport rounding_check(Count y, Count y_prime, double eps, std::span<const double> z_grid, double tolerance) {
    if (y < 8) throw std::invalid_argument("rounding_check requires y >= 8");
    if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("eps must lie in (0, 1]");
    if (!(y_prime > y) || static_cast<double>(y_prime) > (1.0 + eps) * static_cast<double>(y) * (1.0 + 1e-15))
        throw std::invalid_argument("y' must satisfy y < y' <= (1 + eps) y");
    SlackReport report;
    report.worst_lower = std::numeric_limits<double>::infinity();
    report.worst_upper = std::numeric_limits<double>::infinity();
    for (double z : z_grid) {
        const double g = point_loss(y, z, 1);
        const double gp = point_loss(y_prime, z, 1);
        report.worst_lower = std::min(report.worst_lower, (gp - (1.0 - 3.0 * eps) * g) / g);
        report.worst_upper = std::min(report.worst_upper, ((1.0 + 3.0 * eps) * g - gp) / g);
        ++report.points;
    }
    report.ok = report.worst_lower >= -tolerance && report.worst_upper >= -tolerance;
    return report;
}

RoundedLabels round_labels(std::span<const Count> labels, double eps) {
    if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("eps must lie in (0, 1]");
    const Count y_max = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end());
    std::vector<Count> bounds{8};
    for (int k = 1; bounds.back() < y_max; ++k) {
        const double raw = 8.0 * std::pow(1.0 + eps, k);
        const auto b = static_cast<Count>(std::ceil(raw * (1.0 - 1e-12)));
        if (b > bounds.back()) bounds.push_back(b);
    }
    RoundedLabels out;
    out.labels.reserve(labels.size());
    out.group.reserve(labels.size());
    std::vector<bool> used(bounds.size() + 8, false);
    for (Count y : labels) {
        if (y < 0) throw std::invalid_argument("labels must be nonnegative");
        if (y < 8) {
            out.labels.push_back(y);
            out.group.push_back(static_cast<int>(y));
        } else {
            const auto it = std::lower_bound(bounds.begin(), bounds.end(), y);
            const auto k = static_cast<int>(it - bounds.begin());
            out.labels.push_back(*it);
            out.group.push_back(8 + k);
        }
        used[static_cast<std::size_t>(out.group.back())] = true;
    }
    out.group_count = static_cast<int>(std::count(used.begin(), used.end(), true));
    return out;
}

CounterexampleResult counterexample_p_geq_3(int p, double c, double eta) {
    if (p < 3) throw std::invalid_argument("the counterexample needs p >= 3");
    if (!(c > 0.0) || !(eta > 0.0)) throw std::invalid_argument("C and eta must be positive");
    const double threshold = 2.0 * c / (p * (p - 1) * eta);
    const double exponent = static_cast<double>(p - 2) / p;
    auto satisfies = [&](Count y) {
        const double v = static_cast<double>(y);
        const double ratio = std::pow(v, exponent) / (0.5 * std::log(2.0 * std::numbers::pi * v) + 1.0 / (12.0 * v));
        return threshold < ratio;
    };
    Count hi = 1;
    while (!satisfies(hi)) {
        if (hi > (Count{1} << 61)) throw std::runtime_error("no witness below 2^62");
        hi *= 2;
    }
    Count lo = hi / 2;
    if (hi > 1) {
        while (hi - lo > 1) {
            const Count mid = lo + (hi - lo) / 2;
            if (satisfies(mid)) hi = mid; else lo = mid;
        }
    }
    CounterexampleResult out;
    out.y_witness = hi;
    const double v = static_cast<double>(hi);
    const double z = root_of(hi, p);
    const double g_min = loss_minimum(hi);
    out.lhs = c * g_min;
    out.rhs = p * eta * 0.5 * (p - 1) * std::pow(v, exponent);
    // (z + eta)^p - z^p - eta^p - p y log(1 + eta/z), with the binomial middle terms.
    double middle = 0.0;
    double binom = 1.0;
    for (int l = 1; l < p; ++l) {
        binom = binom * (p - l + 1) / l;
        middle += binom * std::pow(z, l) * std::pow(eta, p - l);
    }
    out.shift_excess = middle - p * v * std::log1p(eta / z);
    out.shift_allowance = eta * c * g_min;
    return out;
}

std::vector<double> log_grid(double lo, double hi, std::size_t count) {
    if (!(lo > 0.0 && hi > lo) || count == 0) throw std::invalid_argument("log_grid needs 0 < lo < hi and count > 0");
    std::vector<double> out(count);
    const double span = std::log(hi / lo);
    for (std::size_t i = 0; i < count; ++i)
        out[i] = lo * std::exp(span * static_cast<double>(i + 1) / static_cast<double>(count));
    out.back() = hi;
    return out;
}

std::vector<double> offset_grid(double tau, double min_offset, double max_offset, std::size_t count) {
    if (!(min_offset > 0.0 && max_offset > min_offset) || count < 2)
        throw std::invalid_argument("offset_grid needs 0 < min < max and count >= 2");
    const double base = tau > 0.0 ? tau : 1.0;
    std::vector<double> out(count);
    const double span = std::log(max_offset / min_offset);
    for (std::size_t i = 0; i < count; ++i) {
        const double delta = min_offset * std::exp(span * static_cast<double>(i) / static_cast<double>(count - 1));
        out[i] = tau + base * delta;
    }
    return out;
}

}  // namespace poiscore
