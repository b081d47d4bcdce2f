#include "poiscore/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace poiscore {

namespace {

constexpr std::uint64_t kBetaStream = 0xbe7a;
constexpr std::uint64_t kFeatureStream = 0xfea7;
constexpr std::uint64_t kLabelStream = 0x1abe1;
constexpr double kInteriorFill = 0.9;

Count poisson_inversion(double lambda, Engine& rng) {
    const double u = uniform01(rng);
    double prob = std::exp(-lambda);
    double cumulative = prob;
    Count k = 0;
    while (u >= cumulative && k < 1000) {
        ++k;
        prob *= lambda / static_cast<double>(k);
        cumulative += prob;
    }
    return k;
}

// Hormann's PTRS, constants as in numpy's legacy generator.
Count poisson_ptrs(double lambda, Engine& rng) {
    const double slam = std::sqrt(lambda);
    const double loglam = std::log(lambda);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    while (true) {
        const double u = uniform01(rng) - 0.5;
        const double v = uniform01(rng);
        const double us = 0.5 - std::abs(u);
        const double kd = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
        if (us >= 0.07 && v <= vr) return static_cast<Count>(kd);
        if (kd < 0.0 || (us < 0.013 && v > us)) continue;
        if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <= -lambda + kd * loglam - std::lgamma(kd + 1.0))
            return static_cast<Count>(kd);
    }
}

}  // namespace

Count sample_poisson(double lambda, Engine& rng) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("Poisson rate must be finite and nonnegative");
    if (lambda == 0.0) return 0;
    return lambda < 30.0 ? poisson_inversion(lambda, rng) : poisson_ptrs(lambda, rng);
}

SimplexInstance generate_f2(Eigen::Index n, Eigen::Index d, int p, std::uint64_t seed) {
    if (d < 3) throw std::invalid_argument("the simplex family needs at least two covariates (d >= 3)");
    if (n < d) throw std::invalid_argument("the simplex family needs n >= d rows");
    if (p < 1) throw std::invalid_argument("link power must be at least 1");
    const Eigen::Index k = d - 1;

    Eigen::MatrixXd z = Eigen::MatrixXd::Zero(n, k);
    for (Eigen::Index c = 0; c < k; ++c) z(c, c) = 1.0;
    double widest = 0.0;
    for (Eigen::Index i = d; i < n; ++i) {
        Engine rng(derive_seed(seed, kFeatureStream, static_cast<std::uint64_t>(i)));
        for (Eigen::Index c = 0; c < k; ++c) z(i, c) = standard_normal(rng);
        widest = std::max(widest, z.row(i).norm());
    }
    // Translate to the incenter (r, ..., r), r = 1/(k + sqrt k), and shrink
    // every Gaussian row into 0.9 of the inscribed ball.
    const double kd = static_cast<double>(k);
    const double inradius = 1.0 / (kd + std::sqrt(kd));
    const double shrink = widest > 0.0 ? kInteriorFill * inradius / widest : 0.0;
    for (Eigen::Index i = d; i < n; ++i) z.row(i) = (z.row(i) * shrink).array() + inradius;

    Engine beta_rng(derive_seed(seed, kBetaStream));
    Eigen::VectorXd beta_tilde(k);
    const double scale = std::pow(10.0, 1.0 / p);
    for (Eigen::Index c = 0; c < k; ++c) beta_tilde[c] = scale * standard_normal(beta_rng);
    const double lowest = (z * beta_tilde).minCoeff();
    const double b = std::max(1.0, std::pow(2.0, 1.0 / p) * std::abs(lowest));

    SimplexInstance out;
    out.true_beta.resize(d);
    out.true_beta[0] = b;
    out.true_beta.tail(k) = beta_tilde;
    out.seed = seed;
    out.p = p;

    Eigen::MatrixXd x(n, d);
    x.col(0).setOnes();
    x.rightCols(k) = z;
    const Eigen::VectorXd rate = (x * out.true_beta).array().pow(p).matrix();
    std::vector<Count> y(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        Engine rng(derive_seed(seed, kLabelStream, static_cast<std::uint64_t>(i)));
        y[static_cast<std::size_t>(i)] = sample_poisson(rate[i], rng);
    }
    out.data = Dataset::from_design(std::move(x), std::move(y));
    return out;
}

Dataset generate_circle(Eigen::Index n, Eigen::Index d, std::uint64_t /*seed*/) {
    if (n < 8) throw std::invalid_argument("the circle instance needs n >= 8");
    if (d < 3) throw std::invalid_argument("the circle instance needs d >= 3");
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, d);
    x.col(0).setOnes();
    for (Eigen::Index i = 1; i <= n; ++i) {
        const double angle = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
        x(i - 1, 1) = std::cos(angle);
        x(i - 1, 2) = std::sin(angle);
    }
    return Dataset::from_design(std::move(x), std::vector<Count>(static_cast<std::size_t>(n), 1));
}

CircleDemo circle_sensitivity_demo(Eigen::Index n, double log_eta) {
    if (n < 8) throw std::invalid_argument("the circle demo needs n >= 8");
    if (!(log_eta < 0.0)) throw std::invalid_argument("log_eta must be negative");
    CircleDemo demo;
    demo.n = n;
    demo.log_eta = log_eta;
    demo.point_cost = point_loss_log(1, log_eta, 1);
    const double nd = static_cast<double>(n);
    demo.bound = demo.point_cost / (demo.point_cost + 8.0 * nd * std::log(nd));

    const double eta = std::exp(log_eta);
    long double others = 0.0L;
    for (Eigen::Index i = 1; i < n; ++i) {
        const double s = std::sin(std::numbers::pi * static_cast<double>(i) / nd);
        others += point_loss(1, 2.0 * s * s + eta, 1);
    }
    demo.exact_ratio = demo.point_cost / static_cast<double>(others + demo.point_cost);
    return demo;
}

}  // namespace poiscore
