#include <doctest.h>

#include <cmath>
#include <numbers>

#include "poiscore/envelopes.hpp"
#include "poiscore/rng.hpp"

using namespace poiscore;
using doctest::Approx;

namespace {

// Independent W0 by bisection on w e^w = x over the principal branch.
double w0_bisection(double x) {
    double lo = -1.0, hi = std::max(1.0, std::log1p(x) + 1.0);
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (mid * std::exp(mid) < x ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("cost lower bound") {
    CHECK(cost_lower_bound(1, 1.0, 1) == 1.0);
    CHECK(point_loss(1, 1.0, 1) == Approx(1.0));
    CHECK(cost_lower_bound(5, std::exp(2.0), 1) == Approx(1.0));
    CHECK(cost_lower_bound(5, std::exp(8.0), 1) == Approx(3.0));
    Engine rng(3);
    for (int i = 0; i < 5000; ++i) {
        const Count y = 1 + static_cast<Count>(uniform01(rng) * 1e4);
        const double z = std::exp(-5.0 + 20.0 * uniform01(rng));
        for (int p : {1, 2}) CHECK(cost_lower_bound(y, z, p) <= point_loss(y, z, p) * (1 + 1e-12));
    }
}

TEST_CASE("envelope slope for p = 1") {
    CHECK(lambda_p1(1) == Approx((std::sqrt(5.0) + 1.0) / 2.0).epsilon(1e-14));
    const double ratio = lambda_p1(4'000'000) / lambda_p1(1'000'000);
    CHECK(ratio > 1.8);
    CHECK(ratio < 2.0);
}

TEST_CASE("envelope sandwich on small reference points") {
    const std::vector<double> z{2.0};
    const SlackReport r = envelope_sandwich_check(1, 2, z);
    CHECK(r.ok);
    CHECK(envelope_value(envelope_for(1, 2), 2.0, 2) == Approx(1.0));
    CHECK(envelope_for(0, 1).lambda == 1.0);
    CHECK(envelope_for(0, 1).tau == 0.0);
    CHECK_THROWS(envelope_sandwich_check(4, 1, std::vector<double>{4.0}));
}

TEST_CASE("envelope sandwich holds across labels") {
    for (double yv : log_grid(1.0, 1e6, 40)) {
        const auto y = static_cast<Count>(std::llround(yv));
        for (int p : {1, 2}) {
            const double tau = std::pow(static_cast<double>(y), 1.0 / p);
            const auto z = log_grid(tau, 100.0 * tau, 256);
            const SlackReport r = envelope_sandwich_check(y, p, z);
            CHECK_MESSAGE(r.ok, "y=" << y << " p=" << p);
        }
    }
}

TEST_CASE("Lambert W0 reference values") {
    CHECK(lambert_w0(0.0) == 0.0);
    CHECK(lambert_w0(-1.0 / std::numbers::e) == Approx(-1.0).epsilon(1e-7));
    CHECK(lambert_w0(1.0) == Approx(0.56714329040978387).epsilon(1e-15));
    CHECK(lambert_w0(10.0) == Approx(1.7455280027406994).epsilon(1e-15));
    CHECK(lambert_w0(-0.3) == Approx(-0.48940222718021497).epsilon(1e-14));
    CHECK(lambert_w0(-std::exp(-2.0)) == Approx(-0.15859433956303936).epsilon(1e-14));
    CHECK_THROWS(lambert_w0(-0.5));
}

TEST_CASE("Lambert W0 agrees with a bisection oracle") {
    Engine rng(5);
    for (int i = 0; i < 2000; ++i) {
        const double x = -1.0 / std::numbers::e + (1.0 / std::numbers::e + 20.0) * uniform01(rng);
        CHECK(lambert_w0(x) == Approx(w0_bisection(x)).epsilon(1e-9).scale(1.0));
    }
}

TEST_CASE("Lambert bounds hold on a dense grid") {
    std::vector<double> x;
    for (int i = 0; i < 20000; ++i) x.push_back(-1.0 / std::numbers::e * (1.0 - i / 20000.0));
    const LambertReport r = lambert_bounds_check(x);
    CHECK(r.ok);
    CHECK(r.worst_residual <= 1e-13);
}

TEST_CASE("tangent slope for y = 1") {
    const TangencyResult t = lambda_star(1);
    CHECK(t.lambda_star == Approx(1.1884873694344744).epsilon(1e-12));
}

TEST_CASE("tangent slope against a root-finding oracle") {
    // Tangency points solved with mpmath findroot on g_y(z) = (z - y) g'_y(z).
    CHECK(lambda_star(10).lambda_star == Approx(1.9444188739193367).epsilon(1e-10));
    CHECK(lambda_star(100).lambda_star == Approx(4.2945713766944601).epsilon(1e-10));
    CHECK(lambda_star(10000).lambda_star == Approx(30.421365580032856).epsilon(1e-10));
    CHECK(lambda_star(10).z_star == Approx(20.588521974894484).epsilon(1e-10));
}

TEST_CASE("tangency residuals and growth bracket") {
    for (Count y : {1, 2, 10, 100, 1000, 10000, 1000000}) {
        const TangencyResult t = lambda_star(y);
        const double scale = std::max(1.0, point_loss(y, t.z_star, 1));
        CHECK(t.residual_value <= 1e-8 * scale);
        CHECK(t.residual_slope <= 1e-8 * scale);
        if (y >= 2) {
            const auto [lo, hi] = lambda_star_bracket(y);
            CHECK(t.lambda_star >= lo);
            CHECK(t.lambda_star <= hi);
        }
    }
}

TEST_CASE("slightly smaller slope divisors cross the loss") {
    for (Count y : {1, 10, 100, 10000}) {
        const TangencyResult t = lambda_star(y);
        const double lambda = 0.999 * t.lambda_star;
        CHECK((t.z_star - static_cast<double>(y)) / lambda > point_loss(y, t.z_star, 1));
    }
}

TEST_CASE("rounding ratios at the reference point") {
    const std::vector<double> z{8.0};
    CHECK(rounding_check(8, 9, 0.125, z).ok);
    CHECK_THROWS(rounding_check(8, 8, 0.125, z));
    CHECK_THROWS(rounding_check(7, 8, 0.5, z));
    CHECK_THROWS(rounding_check(10, 12, 0.1, z));
}

TEST_CASE("rounding ratios hold near the label for small y") {
    // Around z = y the two losses stay close; the known trouble spot is far below the minimum.
    const auto z = log_grid(6.0, 200.0, 100);
    CHECK(rounding_check(8, 9, 0.125, z).ok);
    CHECK(rounding_check(10, 11, 0.1, z).ok);
}

TEST_CASE("rounding ratio can exceed 1 + 3 eps below the minimum") {
    // y = 40, y' = 42, eps = 0.05: g_42 / g_40 at z = 27.45 is about 1.157.
    const std::vector<double> z{27.45};
    const SlackReport r = rounding_check(40, 42, 0.05, z);
    CHECK_FALSE(r.ok);
    CHECK(point_loss(42, 27.45, 1) / point_loss(40, 27.45, 1) == Approx(1.157).epsilon(1e-3));
}

TEST_CASE("label rounding") {
    const std::vector<Count> labels{0, 7, 8, 100, 9, 1000};
    const RoundedLabels r = round_labels(labels, 0.1);
    CHECK(r.labels[0] == 0);
    CHECK(r.labels[1] == 7);
    CHECK(r.labels[2] == 8);
    CHECK(r.labels[3] >= 100);
    CHECK(r.labels[3] <= 110);
    // Enumerate the boundaries independently.
    Count expected = 8;
    for (int k = 0; expected < 100; ++k) expected = static_cast<Count>(std::ceil(8.0 * std::pow(1.1, k) - 1e-9));
    CHECK(r.labels[3] == expected);
    for (std::size_t i = 0; i < labels.size(); ++i) CHECK(r.labels[i] >= labels[i]);
    CHECK(r.group_count == 6);
}

TEST_CASE("p = 3 shift counterexample") {
    const CounterexampleResult c = counterexample_p_geq_3(3, 1.0, 0.01);
    CHECK(c.y_witness > 0);
    CHECK(c.lhs < c.rhs);
    CHECK_THROWS(counterexample_p_geq_3(2, 1.0, 0.01));
}

TEST_CASE("grids") {
    const auto g = log_grid(1.0, 100.0, 4);
    REQUIRE(g.size() == 4);
    CHECK(g.front() > 1.0);
    CHECK(g.back() == Approx(100.0));
    for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] > g[i - 1]);
    const auto o = offset_grid(5.0, 1e-3, 10.0, 8);
    for (double v : o) CHECK(v > 5.0);
}
