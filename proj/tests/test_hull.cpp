#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "poiscore/datagen.hpp"
#include "poiscore/hull.hpp"
#include "poiscore/rng.hpp"

using namespace poiscore;
using doctest::Approx;

namespace {

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& features) {
    Eigen::MatrixXd x(features.rows(), features.cols() + 1);
    x.col(0).setOnes();
    x.rightCols(features.cols()) = features;
    return x;
}

Eigen::MatrixXd select_rows(const Eigen::MatrixXd& x, const std::vector<std::size_t>& idx) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), x.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(idx[i]));
    return out;
}

}  // namespace

TEST_CASE("F.2 hull is exactly the simplex vertices") {
    const SimplexInstance inst = generate_f2(3000, 7, 1, 4);
    const HullResult h = extreme_points_exact(inst.data.design());
    CHECK(h.mode == HullMode::exact);
    REQUIRE(h.indices.size() == 7);
    for (std::size_t i = 0; i < 7; ++i) CHECK(h.indices[i] == i);
}

TEST_CASE("every circle point is extreme") {
    const Dataset c = generate_circle(16, 3);
    CHECK(extreme_points_exact(c.design()).indices.size() == 16);
}

TEST_CASE("collinear points keep their endpoints") {
    Eigen::MatrixXd f(6, 2);
    for (int i = 0; i < 6; ++i) f.row(i) << 0.3 * i - 0.4, 0.6 * i + 1.0;
    const HullResult h = extreme_points_exact(with_intercept(f));
    CHECK(h.indices == std::vector<std::size_t>{0, 5});
}

TEST_CASE("duplicated extreme point keeps the first copy") {
    Eigen::MatrixXd f(5, 2);
    f << 0, 0, 1, 0, 0, 1, 1, 0, 0.2, 0.2;
    const HullResult h = extreme_points_exact(with_intercept(f));
    CHECK(h.indices == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("exact hull matches a brute-force membership oracle") {
    Engine rng(7);
    Eigen::MatrixXd f(60, 3);
    for (Eigen::Index i = 0; i < f.rows(); ++i)
        for (Eigen::Index j = 0; j < 3; ++j) f(i, j) = standard_normal(rng);
    const Eigen::MatrixXd x = with_intercept(f);
    const HullResult h = extreme_points_exact(x);
    std::vector<std::size_t> brute;
    for (Eigen::Index i = 0; i < f.rows(); ++i) {
        std::vector<std::size_t> others;
        for (Eigen::Index j = 0; j < f.rows(); ++j)
            if (j != i) others.push_back(static_cast<std::size_t>(j));
        if (!in_convex_hull(select_rows(f, others), f.row(i).transpose())) brute.push_back(static_cast<std::size_t>(i));
    }
    CHECK(h.indices == brute);
}

TEST_CASE("exact hull is idempotent") {
    Engine rng(8);
    Eigen::MatrixXd f(200, 2);
    for (Eigen::Index i = 0; i < f.rows(); ++i) f.row(i) << standard_normal(rng), standard_normal(rng);
    const Eigen::MatrixXd x = with_intercept(f);
    const HullResult h = extreme_points_exact(x);
    const HullResult again = extreme_points_exact(select_rows(x, h.indices));
    CHECK(again.indices.size() == h.indices.size());
}

TEST_CASE("budget overflow is reported") {
    const Dataset c = generate_circle(64, 3);
    HullBudget budget;
    budget.max_extreme = 10;
    CHECK_THROWS_AS(extreme_points_exact(c.design(), budget), HullBudgetExceeded);
    budget = HullBudget{};
    budget.max_rows = 10;
    CHECK_THROWS_AS(extreme_points_exact(c.design(), budget), HullBudgetExceeded);
}

TEST_CASE("normalization keeps margins and the intercept") {
    const SimplexInstance inst = generate_f2(100, 4, 1, 1);
    Eigen::MatrixXd x = inst.data.design();
    x.rightCols(3) *= 7.5;
    const NormalizedDesign nd = normalize_unit_ball(x);
    CHECK(nd.scale_factor == Approx(7.5));
    CHECK(nd.design.col(0).isOnes());
    CHECK(nd.design.rightCols(3).rowwise().norm().maxCoeff() <= 1.0 + 1e-12);
    const Eigen::VectorXd beta_scaled = inst.true_beta;
    const Eigen::VectorXd beta = unscale_params(beta_scaled, nd.scale_factor);
    CHECK(((x * beta) - (nd.design * beta_scaled)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((scale_params(beta, nd.scale_factor) - beta_scaled).cwiseAbs().maxCoeff() < 1e-12);
    const NormalizedDesign small = normalize_unit_ball(inst.data.design());
    CHECK(small.scale_factor == 1.0);
}

TEST_CASE("kernel is a subset of the exact hull and preserves extent") {
    Engine rng(12);
    for (int dim : {1, 2, 3}) {
        Eigen::MatrixXd f(300, dim);
        for (Eigen::Index i = 0; i < f.rows(); ++i)
            for (int j = 0; j < dim; ++j) f(i, j) = standard_normal(rng);
        const Eigen::MatrixXd x = with_intercept(f);
        const double eps = 0.1;
        const HullResult exact = extreme_points_exact(x);
        const HullResult kern = eps_kernel(x, eps);
        CHECK(kern.mode == HullMode::eps_kernel);
        for (std::size_t i : kern.indices) CHECK(std::binary_search(exact.indices.begin(), exact.indices.end(), i));
        const Eigen::MatrixXd unit = normalize_unit_ball(x).design.rightCols(dim);
        const Eigen::MatrixXd kept = select_rows(unit, kern.indices);
        for (int t = 0; t < 500; ++t) {
            Eigen::VectorXd u(dim);
            for (int j = 0; j < dim; ++j) u[j] = standard_normal(rng);
            u.normalize();
            const double full = (unit * u).maxCoeff();
            const double approx = (kept * u).maxCoeff();
            CHECK(full - approx <= 2.0 * eps);
        }
    }
}

TEST_CASE("kernel on the circle returns true extremes and grows as eps shrinks") {
    const Dataset c = generate_circle(64, 3);
    const HullResult coarse = eps_kernel(c.design(), 0.4);
    const HullResult fine = eps_kernel(c.design(), 0.05);
    CHECK(fine.indices.size() >= coarse.indices.size());
    CHECK(fine.indices.size() > 8);
}

TEST_CASE("kernel recovers simplex vertices") {
    const SimplexInstance inst = generate_f2(500, 4, 1, 2);
    const HullResult kern = eps_kernel(inst.data.design(), 0.05);
    CHECK(kern.indices == std::vector<std::size_t>{0, 1, 2, 3});
}

TEST_CASE("constraint margins") {
    CHECK(constraint_margin(HullMode::exact, 0.1) == Approx(0.1));
    CHECK(constraint_margin(HullMode::eps_kernel, 0.1) == Approx(0.2));
}

TEST_CASE("point in hull oracle") {
    Eigen::MatrixXd square(4, 2);
    square << 0, 0, 1, 0, 0, 1, 1, 1;
    CHECK(in_convex_hull(square, Eigen::Vector2d(0.5, 0.5)));
    CHECK(in_convex_hull(square, Eigen::Vector2d(1.0, 0.3)));
    CHECK_FALSE(in_convex_hull(square, Eigen::Vector2d(1.01, 0.5)));
}
