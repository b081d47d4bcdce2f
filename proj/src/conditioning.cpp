#include "poiscore/conditioning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "poiscore/rng.hpp"
#include "text_io.hpp"

namespace poiscore {

namespace {

struct SketchFactor {
    Eigen::MatrixXd r;  // d x d upper triangular
    int rows = 0;
    int attempts = 0;
};

bool full_rank(const Eigen::MatrixXd& r) {
    const Eigen::VectorXd diag = r.diagonal().cwiseAbs();
    const double top = diag.maxCoeff();
    return top > 0.0 && diag.minCoeff() > 1e-12 * top;
}

SketchFactor sketch_factor(const Eigen::Ref<const Eigen::MatrixXd>& x, std::uint64_t seed,
                           const ConditioningConfig& config) {
    const Eigen::Index n = x.rows();
    const Eigen::Index d = x.cols();
    if (n < d) throw RankDeficientError("fewer rows than columns: X cannot have full column rank");
    const auto m = std::max<Eigen::Index>(d, static_cast<Eigen::Index>(std::ceil(config.sketch_factor * d * d)));
    for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
        Engine rng(derive_seed(seed, 0x5ce7c4, static_cast<std::uint64_t>(attempt)));
        Eigen::MatrixXd sketched = Eigen::MatrixXd::Zero(m, d);
        for (Eigen::Index i = 0; i < n; ++i) {
            const std::uint64_t bits = rng();
            const auto bucket = static_cast<Eigen::Index>((bits >> 1) % static_cast<std::uint64_t>(m));
            if (bits & 1U) sketched.row(bucket) += x.row(i);
            else sketched.row(bucket) -= x.row(i);
        }
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(sketched);
        Eigen::MatrixXd r = qr.matrixQR().topRows(d).triangularView<Eigen::Upper>();
        if (full_rank(r)) return {std::move(r), static_cast<int>(m), attempt + 1};
    }
    throw RankDeficientError("sketch of X stayed rank deficient after " + std::to_string(config.max_retries + 1) +
                             " attempts");
}

Eigen::MatrixXd apply_inverse(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::MatrixXd& r) {
    Eigen::MatrixXd q = x;
    r.triangularView<Eigen::Upper>().solveInPlace<Eigen::OnTheRight>(q);
    return q;
}

// min over v of || Q_{-j} v + q_j ||_1 by iteratively reweighted least squares;
// returns the full probe z with z_j = 1.
Eigen::VectorXd l1_coordinate_probe(const Eigen::MatrixXd& q, Eigen::Index j, int iterations) {
    const Eigen::Index s = q.cols();
    Eigen::VectorXd z = Eigen::VectorXd::Unit(s, j);
    if (s == 1) return z;
    Eigen::MatrixXd rest(q.rows(), s - 1);
    for (Eigen::Index c = 0, k = 0; c < s; ++c)
        if (c != j) rest.col(k++) = q.col(c);
    const Eigen::VectorXd target = -q.col(j);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(s - 1);
    Eigen::VectorXd best_z = z;
    double best = (q * z).lpNorm<1>();
    for (int it = 0; it < iterations; ++it) {
        const Eigen::VectorXd resid = rest * v - target;
        const double floor = std::max(1e-12, 1e-8 * resid.cwiseAbs().maxCoeff());
        const Eigen::VectorXd w = resid.cwiseAbs().cwiseMax(floor).cwiseInverse();
        const Eigen::MatrixXd normal = rest.transpose() * w.asDiagonal() * rest;
        v = normal.ldlt().solve(rest.transpose() * w.asDiagonal() * target);
        Eigen::VectorXd cand = Eigen::VectorXd::Unit(s, j);
        for (Eigen::Index c = 0, k = 0; c < s; ++c)
            if (c != j) cand[c] = v[k++];
        const double value = (q * cand).lpNorm<1>();
        if (value < best) {
            best = value;
            best_z = cand;
        }
    }
    return best_z;
}

}  // namespace

ConditionedBasis sketch_qr_basis_p2(const Eigen::Ref<const Eigen::MatrixXd>& x, std::uint64_t seed,
                                    const ConditioningConfig& config) {
    const SketchFactor factor = sketch_factor(x, seed, config);
    ConditionedBasis basis;
    basis.p = 2;
    basis.q = apply_inverse(x, factor.r);
    basis.sketch_rows = factor.rows;
    basis.attempts = factor.attempts;
    basis.alpha = basis.q.norm();
    const Eigen::MatrixXd gram = basis.q.transpose() * basis.q;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
    const double smallest = eig.eigenvalues().minCoeff();
    if (!(smallest > 0.0)) throw RankDeficientError("conditioned basis lost rank");
    basis.gamma = 1.0 / std::sqrt(smallest);
    return basis;
}

ConditionedBasis l1_basis(const Eigen::Ref<const Eigen::MatrixXd>& x, std::uint64_t seed,
                          const ConditioningConfig& config) {
    const SketchFactor factor = sketch_factor(x, seed, config);
    Eigen::MatrixXd q = apply_inverse(x, factor.r);

    if (config.refine_l1) {
        // l1 Lewis weights: w_i <- sqrt(q_i^T (Q^T W^{-1} Q)^{-1} q_i), then
        // re-orthonormalize against W^{-1}.
        Eigen::VectorXd w = Eigen::VectorXd::Ones(q.rows());
        for (int it = 0; it < config.lewis_iterations; ++it) {
            const Eigen::MatrixXd gram = q.transpose() * w.cwiseInverse().asDiagonal() * q;
            const Eigen::LDLT<Eigen::MatrixXd> solver(gram);
            const Eigen::MatrixXd solved = solver.solve(q.transpose());
            for (Eigen::Index i = 0; i < q.rows(); ++i)
                w[i] = std::sqrt(std::max(q.row(i).dot(solved.col(i)), 1e-300));
        }
        const Eigen::MatrixXd gram = q.transpose() * w.cwiseInverse().asDiagonal() * q;
        const Eigen::LLT<Eigen::MatrixXd> chol(gram);
        if (chol.info() != Eigen::Success) throw RankDeficientError("Lewis-weight Gram matrix is singular");
        Eigen::MatrixXd upper = chol.matrixU();
        q = apply_inverse(q, upper);
    }

    const Eigen::VectorXd col_norms = q.cwiseAbs().colwise().sum().transpose();
    if (!(col_norms.minCoeff() > 0.0)) throw RankDeficientError("zero column in the l1 basis");
    q = q * col_norms.cwiseInverse().asDiagonal();

    ConditionedBasis basis;
    basis.p = 1;
    basis.sketch_rows = factor.rows;
    basis.attempts = factor.attempts;
    basis.alpha = q.cwiseAbs().sum();

    const Eigen::Index s = q.cols();
    if (!config.measure_distortion) {
        basis.q = std::move(q);
        return basis;
    }
    double gamma = 0.0;
    auto probe = [&](const Eigen::VectorXd& z) {
        const double denom = (q * z).lpNorm<1>();
        if (denom > 0.0) gamma = std::max(gamma, z.lpNorm<Eigen::Infinity>() / denom);
    };
    for (Eigen::Index j = 0; j < s; ++j) probe(Eigen::VectorXd::Unit(s, j));
    Engine rng(derive_seed(seed, 0x9a77a));
    for (int t = 0; t < config.gamma_probes; ++t) {
        Eigen::VectorXd z(s);
        for (Eigen::Index j = 0; j < s; ++j) z[j] = standard_normal(rng);
        probe(z);
    }
    for (Eigen::Index j = 0; j < s; ++j) probe(l1_coordinate_probe(q, j, 30));
    basis.gamma = gamma;
    basis.q = std::move(q);
    return basis;
}

ConditionedBasis conditioned_basis(const Eigen::Ref<const Eigen::MatrixXd>& x, int p, std::uint64_t seed,
                                   const ConditioningConfig& config) {
    require_link_power(p);
    return p == 1 ? l1_basis(x, seed, config) : sketch_qr_basis_p2(x, seed, config);
}

SensitivityScores sensitivity_scores(const ConditionedBasis& basis, std::vector<std::size_t> rows) {
    const Eigen::Index n = basis.q.rows();
    if (n == 0) return {};
    if (rows.empty()) {
        rows.resize(static_cast<std::size_t>(n));
        for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    }
    if (static_cast<Eigen::Index>(rows.size()) != n) throw std::invalid_argument("row labels do not match the basis");
    SensitivityScores out;
    out.s.resize(n);
    const double floor = 1.0 / static_cast<double>(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double norm = basis.p == 1 ? basis.q.row(i).lpNorm<1>() : basis.q.row(i).squaredNorm();
        out.s[i] = norm + floor;
    }
    out.total = out.s.sum();
    out.probabilities = out.s / out.total;
    out.rows = std::move(rows);
    return out;
}

RhoEstimate rho_estimate(const Dataset& data, int p, std::size_t trials, std::uint64_t seed,
                         std::span<const Eigen::VectorXd> extra) {
    require_link_power(p);
    const Eigen::MatrixXd& x = data.design();
    const Eigen::Index d = x.cols();
    Eigen::VectorXd roots(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double y = static_cast<double>(data.labels()[static_cast<std::size_t>(i)]);
        roots[i] = p == 1 ? y : std::sqrt(y);
    }
    RhoEstimate est;
    auto consider = [&](const Eigen::VectorXd& beta) {
        const Eigen::VectorXd z = x * beta;
        const double num = p == 1 ? z.cwiseAbs().sum() : z.squaredNorm();
        const Eigen::VectorXd gap = z - roots;
        const double den = p == 1 ? gap.cwiseAbs().sum() : gap.squaredNorm();
        if (!(den > 0.0)) {
            ++est.skipped;
            return;
        }
        ++est.evaluated;
        est.value = std::max(est.value, num / den);
    };
    Engine rng(derive_seed(seed, 0x7210));
    for (std::size_t t = 0; t < trials; ++t) {
        Eigen::VectorXd beta(d);
        const double scale = std::pow(10.0, 2.0 * uniform01(rng) - 1.0);
        for (Eigen::Index j = 1; j < d; ++j) beta[j] = scale * standard_normal(rng);
        beta[0] = 0.0;
        const double lowest = (x * beta).minCoeff();
        beta[0] = -lowest + std::pow(10.0, 4.0 * uniform01(rng) - 3.0);
        consider(beta);
    }
    for (const auto& beta : extra) consider(beta);
    return est;
}

void write_scores_csv(const SensitivityScores& scores, const std::string& path) {
    auto out = detail::open_output(path);
    out << "row_index,score,probability\n";
    for (Eigen::Index i = 0; i < scores.s.size(); ++i)
        out << scores.rows[static_cast<std::size_t>(i)] << ',' << detail::format_double(scores.s[i]) << ','
            << detail::format_double(scores.probabilities[i]) << '\n';
}

}  // namespace poiscore
