#include <doctest.h>

#include <cmath>
#include <numbers>

#include "poiscore/datagen.hpp"
#include "poiscore/hull.hpp"

using namespace poiscore;
using doctest::Approx;

TEST_CASE("F.2 leading rows are the simplex vertices") {
    const SimplexInstance inst = generate_f2(400, 7, 1, 3);
    const Eigen::MatrixXd& x = inst.data.design();
    CHECK(x.col(0).isOnes());
    for (Eigen::Index i = 0; i < 6; ++i)
        for (Eigen::Index j = 0; j < 6; ++j) CHECK(x(i, j + 1) == (i == j ? 1.0 : 0.0));
    CHECK(x.row(6).tail(6).isZero(0.0));
}

TEST_CASE("F.2 interior rows lie strictly inside the simplex") {
    const SimplexInstance inst = generate_f2(5000, 7, 2, 4);
    const Eigen::MatrixXd z = inst.data.features();
    for (Eigen::Index i = 7; i < z.rows(); ++i) {
        CHECK(z.row(i).minCoeff() > 0.0);
        CHECK(z.row(i).sum() < 1.0);
    }
}

TEST_CASE("F.2 parameters follow the construction") {
    for (int p : {1, 2}) {
        const SimplexInstance inst = generate_f2(1000, 5, p, 7);
        const Eigen::VectorXd beta_tilde = inst.true_beta.tail(4);
        const double lowest = (inst.data.features() * beta_tilde).minCoeff();
        CHECK(inst.true_beta[0] == Approx(std::max(1.0, std::pow(2.0, 1.0 / p) * std::abs(lowest))));
        CHECK((inst.data.design() * inst.true_beta).minCoeff() >= 1.0 - 1e-12);
    }
}

TEST_CASE("F.2 is deterministic per seed") {
    const SimplexInstance a = generate_f2(300, 4, 1, 11);
    const SimplexInstance b = generate_f2(300, 4, 1, 11);
    const SimplexInstance c = generate_f2(300, 4, 1, 12);
    CHECK(a.data.labels() == b.data.labels());
    CHECK((a.data.design() - b.data.design()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.data.design() - c.data.design()).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("Poisson labels have the right mean") {
    for (int p : {1, 2}) {
        const SimplexInstance inst = generate_f2(50000, 4, p, 5);
        const Eigen::VectorXd rate = (inst.data.design() * inst.true_beta).array().pow(p).matrix();
        double total = 0.0;
        for (Count y : inst.data.labels()) total += static_cast<double>(y);
        const double n = static_cast<double>(inst.data.rows());
        CHECK(std::abs(total / n - rate.mean()) <= 3.0 * std::sqrt(rate.sum()) / n);
    }
}

TEST_CASE("Poisson sampler moments on both branches") {
    for (double lambda : {0.5, 4.0, 29.0, 31.0, 250.0, 1e5}) {
        Engine rng(static_cast<std::uint64_t>(lambda * 10));
        const int draws = 40000;
        double s = 0.0, s2 = 0.0;
        for (int i = 0; i < draws; ++i) {
            const double v = static_cast<double>(sample_poisson(lambda, rng));
            s += v;
            s2 += v * v;
        }
        const double mean = s / draws;
        const double var = s2 / draws - mean * mean;
        CHECK(std::abs(mean - lambda) <= 4.0 * std::sqrt(lambda / draws));
        CHECK(var == Approx(lambda).epsilon(0.05));
    }
    Engine rng(1);
    CHECK(sample_poisson(0.0, rng) == 0);
    CHECK_THROWS(sample_poisson(-1.0, rng));
}

TEST_CASE("circle instance") {
    const Dataset c = generate_circle(8, 3);
    CHECK(c.rows() == 8);
    for (Count y : c.labels()) CHECK(y == 1);
    for (Eigen::Index i = 0; i < 8; ++i) {
        const Eigen::Vector2d a = c.design().row(i).segment(1, 2);
        const Eigen::Vector2d b = c.design().row((i + 1) % 8).segment(1, 2);
        CHECK(std::acos(std::clamp(a.dot(b), -1.0, 1.0)) == Approx(std::numbers::pi / 4));
    }
    CHECK(extreme_points_exact(generate_circle(24, 4).design()).indices.size() == 24);
    CHECK_THROWS(generate_circle(7, 3));
}

TEST_CASE("depth direction touches one circle point at eta") {
    const Eigen::Index n = 16;
    const double eta = 0.003;
    const Dataset c = generate_circle(n, 3);
    for (Eigen::Index j = 0; j < n; ++j) {
        const double theta = 2.0 * std::numbers::pi * static_cast<double>(j + 1) / static_cast<double>(n);
        const Eigen::Vector3d beta(1.0 + eta, -std::cos(theta), -std::sin(theta));
        const Eigen::VectorXd z = c.design() * beta;
        CHECK(z[j] == Approx(eta).epsilon(1e-9));
        CHECK(z.minCoeff() == Approx(eta).epsilon(1e-9));
    }
}

TEST_CASE("circle sensitivity bound") {
    const CircleDemo d8 = circle_sensitivity_demo(8, -64.0);
    CHECK(d8.bound == Approx(64.0 / (64.0 + 64.0 * std::log(8.0))).epsilon(1e-6));
    CHECK(d8.bound == Approx(0.325).epsilon(0.01));
    double previous = 0.0;
    for (Eigen::Index n : {8, 16, 32, 64, 256, 1024}) {
        const double nd = static_cast<double>(n);
        const CircleDemo d = circle_sensitivity_demo(n, -nd * nd);
        CHECK(d.bound > previous);
        CHECK(d.exact_ratio >= d.bound);
        previous = d.bound;
    }
    CHECK(previous > 0.94);
    // Above n^2 > 72 n log n the bound clears 0.9.
    const CircleDemo big = circle_sensitivity_demo(600, -360000.0);
    CHECK(big.bound > 0.9);
}
