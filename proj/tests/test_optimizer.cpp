#include <doctest.h>

#include <cmath>
#include <limits>

#include "poiscore/coreset.hpp"
#include "poiscore/datagen.hpp"
#include "poiscore/envelopes.hpp"
#include "poiscore/hull.hpp"
#include "poiscore/optimizer.hpp"

using namespace poiscore;
using doctest::Approx;

namespace {

std::vector<std::size_t> all_rows(Eigen::Index n) {
    std::vector<std::size_t> out(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = i;
    return out;
}

}  // namespace

TEST_CASE("two-point closed form") {
    // Both rows carry label 4; the unconstrained optimum puts z = 4^{1/p} on each.
    Eigen::MatrixXd x(2, 2);
    x << 1, 0, 1, 1;
    const std::vector<Count> y{4, 4};
    OptimizerConfig cfg;
    cfg.eta = 0.01;
    const auto hull = all_rows(2);
    const FitResult p1 = minimize(x, y, {}, 1, cfg, hull);
    CHECK(p1.converged);
    CHECK(p1.objective == Approx(2.0 * (4.0 - 4.0 * std::log(4.0) + std::log(24.0))).epsilon(1e-8));
    CHECK(p1.beta[0] == Approx(4.0).epsilon(1e-3));
    CHECK(std::abs(p1.beta[1]) < 1e-2);
    const FitResult p2 = minimize(x, y, {}, 2, cfg, hull);
    CHECK(p2.objective == Approx(2.0 * (4.0 - 8.0 * std::log(2.0) + std::log(24.0))).epsilon(1e-8));
    CHECK(p2.beta[0] == Approx(2.0).epsilon(1e-3));
}

TEST_CASE("active margin constraint") {
    // Label 0 rows pull z down; hull rows must stay at eta.
    Eigen::MatrixXd x(3, 2);
    x << 1, 0, 1, 1, 1, 0.5;
    const std::vector<Count> y{0, 0, 0};
    OptimizerConfig cfg;
    cfg.eta = 0.1;
    const FitResult fit = minimize(x, y, {}, 1, cfg, std::vector<std::size_t>{0, 1});
    CHECK(fit.converged);
    CHECK((x * fit.beta).minCoeff() >= 0.1);
    CHECK(fit.objective == Approx(3 * 0.1).epsilon(1e-5));
}

TEST_CASE("objective history is nonincreasing") {
    const SimplexInstance inst = generate_f2(2000, 5, 1, 8);
    const HullResult hull = extreme_points_exact(inst.data.design());
    OptimizerConfig cfg;
    for (int p : {1, 2}) {
        const FitResult fit = minimize(inst.data.design(), inst.data.labels(), {}, p, cfg, hull.indices);
        CHECK(fit.converged);
        REQUIRE(fit.objective_history.size() >= 2);
        for (std::size_t i = 1; i < fit.objective_history.size(); ++i)
            CHECK(fit.objective_history[i] <= fit.objective_history[i - 1] * (1 + 1e-9));
        CHECK(membership(inst.data, fit.beta, cfg.eta).inside);
    }
}

TEST_CASE("fit is a stationary point of the barrier-free problem away from the margin") {
    const SimplexInstance inst = generate_f2(1500, 4, 2, 3);
    const HullResult hull = extreme_points_exact(inst.data.design());
    OptimizerConfig cfg;
    cfg.eta = 1e-6;
    const FitResult fit = minimize(inst.data.design(), inst.data.labels(), {}, 2, cfg, hull.indices);
    REQUIRE(fit.converged);
    if (membership(inst.data, fit.beta, 1e-3).inside) {
        const Derivatives d = loss_gradient_hessian(inst.data, fit.beta, 2);
        CHECK(d.gradient.norm() <= 1e-4 * std::max(1.0, fit.objective));
    }
    CHECK(*total_loss(inst.data, fit.beta, 2) <= *total_loss(inst.data, inst.true_beta, 2));
}

TEST_CASE("shifted optimum within 1 + 7 eps of the unshifted one") {
    for (int p : {1, 2}) {
        const SimplexInstance inst = generate_f2(3000, 5, p, 17);
        const HullResult hull = extreme_points_exact(inst.data.design());
        OptimizerConfig free_cfg;
        free_cfg.eta = 1e-9;
        OptimizerConfig shift_cfg;
        shift_cfg.eta = 0.05;
        const FitResult base = minimize(inst.data.design(), inst.data.labels(), {}, p, free_cfg, hull.indices);
        const FitResult shifted = minimize(inst.data.design(), inst.data.labels(), {}, p, shift_cfg, hull.indices);
        CHECK(shifted.objective <= (1.0 + 7 * 0.05) * base.objective);
        CHECK(shifted.objective >= base.objective * (1 - 1e-9));
    }
}

TEST_CASE("rescaled features give the same loss") {
    const SimplexInstance inst = generate_f2(800, 4, 1, 6);
    Eigen::MatrixXd wide = inst.data.design();
    wide.rightCols(3) *= 12.0;
    const Dataset scaled = Dataset::from_design(wide, inst.data.labels());
    const HullResult h1 = extreme_points_exact(inst.data.design());
    const HullResult h2 = extreme_points_exact(wide);
    OptimizerConfig cfg;
    cfg.eta = 1e-6;
    const FitResult a = minimize(inst.data.design(), inst.data.labels(), {}, 1, cfg, h1.indices);
    const FitResult b = minimize(wide, scaled.labels(), {}, 1, cfg, h2.indices);
    CHECK(b.objective == Approx(a.objective).epsilon(1e-7));
    CHECK(*total_loss(scaled, b.beta, 1) == Approx(b.objective).epsilon(1e-10));
}

TEST_CASE("feasible start") {
    const SimplexInstance inst = generate_f2(300, 4, 1, 2);
    const StartResult s = feasible_start(inst.data.design(), 0.05);
    CHECK(s.feasible);
    CHECK(s.margin > 0.0);
    CHECK((inst.data.design() * s.beta).minCoeff() > 0.05);
    CHECK(membership(inst.data, inst.true_beta, 0.05).inside);
}

TEST_CASE("antipodal points cannot both clear margin 2 at unit scale") {
    Eigen::MatrixXd x(2, 2);
    x << 1, 1, 1, -1;
    CHECK_FALSE(feasible_start(x, 2.0).feasible);
    CHECK(feasible_start(x, 0.5).feasible);
}

TEST_CASE("single point start") {
    Eigen::MatrixXd x(1, 2);
    x << 1, 0;
    const StartResult s = feasible_start(x, 0.3);
    CHECK(s.feasible);
    CHECK(s.beta[0] > 0.3);
}

TEST_CASE("a large margin is reachable through the intercept") {
    // beta = (3, 0) clears eta = 2 on both points; the fit searches beyond the unit ball.
    Eigen::MatrixXd x(2, 2);
    x << 1, 1, 1, -1;
    OptimizerConfig cfg;
    cfg.eta = 2.0;
    const FitResult fit = minimize(x, std::vector<Count>{1, 1}, {}, 1, cfg, all_rows(2));
    CHECK(fit.converged);
    CHECK((x * fit.beta).minCoeff() > 2.0);
}

TEST_CASE("coreset fit keeps the hull rows at the margin") {
    const SimplexInstance inst = generate_f2(3000, 5, 1, 4);
    const HullResult hull = extreme_points_exact(inst.data.design());
    const SensitivityScores scores = remainder_scores(inst.data, 1, hull, 2);
    const Coreset c = build_coreset(inst.data, 1, 300, 5, hull, scores);
    OptimizerConfig cfg;
    const FitResult fit = minimize(c, 1, cfg);
    CHECK(fit.converged);
    CHECK(membership(inst.data, fit.beta, cfg.eta).inside);
}

TEST_CASE("config validation") {
    OptimizerConfig cfg;
    cfg.eta = -1.0;
    CHECK_THROWS(cfg.validate());
    cfg = OptimizerConfig{};
    cfg.barrier_decay = 1.5;
    CHECK_THROWS(cfg.validate());
}

TEST_CASE("domain shift bounds") {
    const SimplexInstance inst = generate_f2(200, 4, 1, 5);
    const std::vector<double> etas{1e-4, 1e-3, 1e-2, 1e-1};
    for (int p : {1, 2}) {
        const Dataset data = generate_f2(200, 4, p, 5).data;
        const ShiftGapReport r = shift_gap_check(data, p, etas, 25, 7);
        CHECK(r.ok);
        CHECK(r.worst_slack >= 0.0);
        CHECK(r.checks == 100);
    }
}

TEST_CASE("random feasible parameters are strictly feasible") {
    const SimplexInstance inst = generate_f2(300, 5, 2, 1);
    for (std::uint64_t s = 0; s < 50; ++s)
        CHECK(membership(inst.data, random_feasible_params(inst.data.design(), s), 0.0).inside);
}

TEST_CASE("fit result serializes to one JSON line") {
    FitResult f;
    f.beta = Eigen::Vector2d(1.0, 2.0);
    f.objective = std::numeric_limits<double>::infinity();
    const std::string line = to_json_line(f);
    CHECK(line.find('\n') == std::string::npos);
    CHECK(line.find("\"beta\"") != std::string::npos);
}
