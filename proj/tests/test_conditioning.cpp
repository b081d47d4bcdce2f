#include <doctest.h>

#include <cmath>

#include "poiscore/conditioning.hpp"
#include "poiscore/datagen.hpp"
#include "poiscore/rng.hpp"

using namespace poiscore;
using doctest::Approx;

namespace {

Eigen::MatrixXd gaussian_matrix(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
    Engine rng(seed);
    Eigen::MatrixXd x(n, d);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < d; ++j) x(i, j) = standard_normal(rng);
    return x;
}

// Projection onto the column space via a thin QR of X itself.
Eigen::MatrixXd projector(const Eigen::MatrixXd& a) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(a.rows(), a.cols());
    return q * q.transpose();
}

}  // namespace

TEST_CASE("identity design gives a near-orthonormal basis") {
    const Eigen::Index d = 5;
    const ConditionedBasis b = sketch_qr_basis_p2(Eigen::MatrixXd::Identity(d, d), 1);
    CHECK(b.sketch_rows == 4 * d * d);
    CHECK(b.alpha >= std::sqrt(d / 2.0));
    CHECK(b.alpha <= std::sqrt(2.0 * d));
}

TEST_CASE("sketched basis spans X and has bounded distortion") {
    const Eigen::MatrixXd x = gaussian_matrix(2000, 6, 2);
    const ConditionedBasis b = sketch_qr_basis_p2(x, 7);
    CHECK((projector(x) - projector(b.q)).cwiseAbs().maxCoeff() < 1e-8);
    Engine rng(9);
    for (int i = 0; i < 1000; ++i) {
        Eigen::VectorXd z(b.q.cols());
        for (Eigen::Index j = 0; j < z.size(); ++j) z[j] = standard_normal(rng);
        const double r = (b.q * z).norm() / z.norm();
        CHECK(r >= 1.0 / std::sqrt(2.0));
        CHECK(r <= std::sqrt(2.0));
    }
    CHECK(b.gamma <= std::sqrt(2.0));
}

TEST_CASE("same seed gives the same basis") {
    const Eigen::MatrixXd x = gaussian_matrix(500, 4, 3);
    const ConditionedBasis a = sketch_qr_basis_p2(x, 42);
    const ConditionedBasis b = sketch_qr_basis_p2(x, 42);
    CHECK((a.q - b.q).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("rank deficient design raises after retries") {
    Eigen::MatrixXd x = gaussian_matrix(300, 4, 4);
    x.col(3) = 2.0 * x.col(1) - x.col(0);
    CHECK_THROWS_AS(sketch_qr_basis_p2(x, 1), RankDeficientError);
    CHECK_THROWS_AS(l1_basis(x, 1), RankDeficientError);
}

TEST_CASE("l1 basis has unit l1 columns and spans X") {
    const Eigen::MatrixXd x = gaussian_matrix(800, 5, 5);
    for (bool refine : {false, true}) {
        ConditioningConfig cfg;
        cfg.refine_l1 = refine;
        const ConditionedBasis b = l1_basis(x, 3, cfg);
        for (Eigen::Index j = 0; j < b.q.cols(); ++j) CHECK(b.q.col(j).lpNorm<1>() == Approx(1.0));
        CHECK(b.alpha == Approx(static_cast<double>(b.q.cols())));
        CHECK((projector(x) - projector(b.q)).cwiseAbs().maxCoeff() < 1e-8);
        CHECK(b.gamma >= 1.0);
        CHECK(std::isfinite(b.gamma));
    }
}

TEST_CASE("measured l1 distortion bounds random probes") {
    const Eigen::MatrixXd x = gaussian_matrix(400, 4, 6);
    const ConditionedBasis b = l1_basis(x, 8);
    Engine rng(10);
    for (int i = 0; i < 200; ++i) {
        Eigen::VectorXd z(b.q.cols());
        for (Eigen::Index j = 0; j < z.size(); ++j) z[j] = standard_normal(rng);
        // Probes are a lower estimate of the true supremum, so allow a modest factor.
        CHECK(z.cwiseAbs().maxCoeff() <= 2.0 * b.gamma * (b.q * z).lpNorm<1>());
    }
}

TEST_CASE("scores are at least 1/n and sum correctly") {
    const Eigen::MatrixXd x = gaussian_matrix(300, 4, 7);
    for (int p : {1, 2}) {
        const ConditionedBasis b = conditioned_basis(x, p, 11);
        const SensitivityScores s = sensitivity_scores(b);
        CHECK(s.s.minCoeff() >= 1.0 / 300.0);
        CHECK(s.total == Approx(s.s.sum()));
        CHECK(s.probabilities.sum() == Approx(1.0));
        Eigen::VectorXd expected =
            p == 2 ? Eigen::VectorXd(b.q.rowwise().squaredNorm()) : Eigen::VectorXd(b.q.cwiseAbs().rowwise().sum());
        expected.array() += 1.0 / 300.0;
        CHECK((s.s - expected).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("p = 2 scores are leverage scores plus 1/n") {
    const Eigen::MatrixXd x = gaussian_matrix(400, 3, 8);
    const SensitivityScores s = sensitivity_scores(sketch_qr_basis_p2(x, 2));
    const Eigen::MatrixXd h = projector(x);
    // Sketched bases distort leverage by at most a factor of 2 in either direction.
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double lev = s.s[i] - 1.0 / 400.0;
        CHECK(lev <= 2.0 * h(i, i) + 1e-12);
        CHECK(lev >= 0.5 * h(i, i) - 1e-12);
    }
}

TEST_CASE("rho estimate is finite and at least one on F.2 data") {
    const SimplexInstance inst = generate_f2(400, 4, 1, 2);
    const RhoEstimate r = rho_estimate(inst.data, 1, 50, 3);
    CHECK(std::isfinite(r.value));
    CHECK(r.value > 0.0);
    CHECK(r.evaluated > 0);
}
