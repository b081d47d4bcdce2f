#include "poiscore/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "poiscore/hull.hpp"
#include "poiscore/rng.hpp"
#include "text_io.hpp"

namespace poiscore {

namespace {

// Softmin ascent of min_i (x_i beta - offset_i) over ||beta|| <= radius.
StartResult max_margin(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::VectorXd& offset, double radius) {
    const Eigen::Index d = x.cols();
    auto project = [radius](Eigen::VectorXd b) {
        const double norm = b.norm();
        if (norm > radius) b *= radius / norm;
        return b;
    };
    auto true_margin = [&](const Eigen::VectorXd& b) { return (x * b - offset).minCoeff(); };
    auto smooth = [&](const Eigen::VectorXd& b, double temp, Eigen::VectorXd* grad) {
        const Eigen::VectorXd m = x * b - offset;
        const double lo = m.minCoeff();
        const Eigen::ArrayXd e = (-(m.array() - lo) / temp).exp();
        const double total = e.sum();
        if (grad) *grad = x.transpose() * (e / total).matrix();
        return lo - temp * std::log(total);
    };

    Eigen::VectorXd beta = project(radius * Eigen::VectorXd::Unit(d, 0));
    Eigen::VectorXd best = beta;
    double best_margin = true_margin(beta);
    double temp = std::max(1e-3, 0.1 * radius);
    for (int stage = 0; stage < 25; ++stage, temp *= 0.6) {
        double step = radius;
        for (int it = 0; it < 40; ++it) {
            Eigen::VectorXd grad;
            const double current = smooth(beta, temp, &grad);
            bool moved = false;
            while (step > 1e-14 * radius) {
                const Eigen::VectorXd trial = project(beta + step * grad);
                if (smooth(trial, temp, nullptr) > current + 1e-15 * std::abs(current)) {
                    beta = trial;
                    moved = true;
                    step *= 1.5;
                    break;
                }
                step *= 0.5;
            }
            const double margin = true_margin(beta);
            if (margin > best_margin) {
                best_margin = margin;
                best = beta;
            }
            if (!moved) break;
        }
    }
    return {best_margin > 0.0, best, best_margin};
}

struct Problem {
    const Eigen::MatrixXd& x;
    std::span<const Count> y;
    const Eigen::VectorXd& w;
    int p;
    Eigen::VectorXd offset;            // barrier location per row, -inf when unbarred
    std::vector<char> barred;
};

bool admissible(const Problem& prob, const Eigen::VectorXd& z) {
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        if (!(z[i] > 0.0)) return false;
        if (prob.barred[static_cast<std::size_t>(i)] && !(z[i] > prob.offset[i])) return false;
    }
    return true;
}

double loss_only(const Problem& prob, const Eigen::VectorXd& z) {
    long double sum = 0.0L;
    for (Eigen::Index i = 0; i < z.size(); ++i)
        sum += static_cast<long double>(prob.w[i]) * point_loss(prob.y[static_cast<std::size_t>(i)], z[i], prob.p);
    return static_cast<double>(sum);
}

double barrier_objective(const Problem& prob, const Eigen::VectorXd& z, double mu) {
    long double sum = 0.0L;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        sum += static_cast<long double>(prob.w[i]) * point_loss(prob.y[static_cast<std::size_t>(i)], z[i], prob.p);
        if (prob.barred[static_cast<std::size_t>(i)]) sum -= static_cast<long double>(mu) * std::log(z[i] - prob.offset[i]);
    }
    return static_cast<double>(sum);
}

}  // namespace

void OptimizerConfig::validate() const {
    if (!(eta >= 0.0)) throw std::invalid_argument("eta must be nonnegative");
    if (!(barrier_mu > 0.0) || !(newton_tol > 0.0) || !(armijo > 0.0) || !(strictness >= 0.0))
        throw std::invalid_argument("barrier weight and tolerances must be positive");
    if (!(barrier_decay > 0.0 && barrier_decay < 1.0)) throw std::invalid_argument("barrier decay must lie in (0, 1)");
    if (!(ls_backtrack > 0.0 && ls_backtrack < 1.0)) throw std::invalid_argument("backtracking factor must lie in (0, 1)");
    if (max_outer < 1 || max_inner < 1) throw std::invalid_argument("iteration caps must be positive");
}

StartResult feasible_start(const Eigen::Ref<const Eigen::MatrixXd>& rows, double eta, double radius) {
    if (rows.rows() == 0) throw std::invalid_argument("no rows");
    if (!(radius > 0.0)) throw std::invalid_argument("radius must be positive");
    StartResult res = max_margin(rows, Eigen::VectorXd::Constant(rows.rows(), eta), radius);
    return res;
}

FitResult minimize(const Eigen::Ref<const Eigen::MatrixXd>& rows, std::span<const Count> labels,
                   std::span<const double> weights, int p, const OptimizerConfig& config,
                   std::span<const std::size_t> hull_indices) {
    require_link_power(p);
    config.validate();
    const Eigen::Index n = rows.rows();
    if (n == 0) throw std::invalid_argument("no rows to fit");
    if (static_cast<Eigen::Index>(labels.size()) != n) throw std::invalid_argument("label count does not match the row count");
    if (!weights.empty() && static_cast<Eigen::Index>(weights.size()) != n)
        throw std::invalid_argument("weight count does not match the row count");

    const NormalizedDesign normalized = normalize_unit_ball(rows);
    const Eigen::MatrixXd& x = normalized.design;
    const Eigen::VectorXd w =
        weights.empty() ? Eigen::VectorXd::Ones(n) : Eigen::Map<const Eigen::VectorXd>(weights.data(), n).eval();
    if ((w.array() <= 0.0).any()) throw std::invalid_argument("weights must be strictly positive");

    Problem prob{x, labels, w, p, Eigen::VectorXd::Constant(n, -std::numeric_limits<double>::infinity()),
                 std::vector<char>(static_cast<std::size_t>(n), 0)};
    const double hull_margin = config.eta + config.strictness;
    for (std::size_t h : hull_indices) {
        if (h >= static_cast<std::size_t>(n)) throw std::out_of_range("hull index outside the rows");
        prob.barred[h] = 1;
        prob.offset[static_cast<Eigen::Index>(h)] = hull_margin;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!prob.barred[static_cast<std::size_t>(i)] && labels[static_cast<std::size_t>(i)] == 0) {
            prob.barred[static_cast<std::size_t>(i)] = 1;
            prob.offset[i] = 0.0;
        }
    }
    const auto barrier_terms = static_cast<double>(std::count(prob.barred.begin(), prob.barred.end(), 1));

    FitResult fit;
    const Eigen::VectorXd start_offset = prob.offset.cwiseMax(0.0);
    const StartResult start = max_margin(x, start_offset, 1.0 + 2.0 * config.eta);
    if (!start.feasible) {
        fit.beta = unscale_params(start.beta, normalized.scale_factor);
        fit.objective = std::numeric_limits<double>::infinity();
        fit.message = "no strictly feasible start at this margin";
        return fit;
    }
    Eigen::VectorXd beta = start.beta;
    Eigen::VectorXd z = x * beta;

    double mu = config.barrier_mu;
    bool inner_ok = false;
    for (int outer = 0; outer < config.max_outer; ++outer) {
        inner_ok = false;
        double phi = barrier_objective(prob, z, mu);
        for (int inner = 0; inner < config.max_inner; ++inner) {
            Eigen::VectorXd first(n), second(n);
            for (Eigen::Index i = 0; i < n; ++i) {
                const Count yi = labels[static_cast<std::size_t>(i)];
                first[i] = w[i] * point_loss_derivative(yi, z[i], p);
                second[i] = w[i] * point_loss_second_derivative(yi, z[i], p);
                if (prob.barred[static_cast<std::size_t>(i)]) {
                    const double gap = z[i] - prob.offset[i];
                    first[i] -= mu / gap;
                    second[i] += mu / (gap * gap);
                }
            }
            const Eigen::VectorXd grad = x.transpose() * first;
            Eigen::MatrixXd hess = x.transpose() * second.asDiagonal() * x;
            Eigen::VectorXd step = hess.ldlt().solve(-grad);
            double slope = grad.dot(step);
            if (!step.allFinite() || !(slope < 0.0)) {
                const double ridge = 1e-10 * std::max(1.0, hess.trace());
                hess.diagonal().array() += ridge;
                step = hess.ldlt().solve(-grad);
                slope = grad.dot(step);
            }
            ++fit.newton_iterations;
            fit.decrement = step.allFinite() ? -0.5 * slope : std::numeric_limits<double>::infinity();
            const double floor = 1e-14 * std::max(1.0, std::abs(phi));
            if (fit.decrement <= std::max(config.newton_tol, floor)) {
                inner_ok = true;
                break;
            }
            if (!(slope < 0.0) || !step.allFinite()) break;

            const Eigen::VectorXd dz = x * step;
            double t = 1.0;
            Eigen::VectorXd z_new = z + t * dz;
            while (!admissible(prob, z_new) && t > 1e-16) {
                t *= config.ls_backtrack;
                z_new = z + t * dz;
            }
            double phi_new = admissible(prob, z_new) ? barrier_objective(prob, z_new, mu)
                                                      : std::numeric_limits<double>::infinity();
            while (!(phi_new <= phi + config.armijo * t * slope) && t > 1e-16) {
                t *= config.ls_backtrack;
                z_new = z + t * dz;
                phi_new = admissible(prob, z_new) ? barrier_objective(prob, z_new, mu)
                                                  : std::numeric_limits<double>::infinity();
            }
            if (!(phi_new <= phi)) {
                // no decrease representable in double precision
                inner_ok = fit.decrement <= 1e-9 * std::max(1.0, std::abs(phi));
                break;
            }
            beta += t * step;
            z = x * beta;
            phi = phi_new;
        }
        ++fit.outer_iterations;
        fit.final_mu = mu;
        const double loss = loss_only(prob, z);
        fit.objective_history.push_back(loss);
        if (barrier_terms * mu < 1e-10 * std::max(1.0, loss)) break;
        mu *= config.barrier_decay;
    }

    fit.objective = loss_only(prob, z);
    fit.converged = inner_ok;
    fit.beta = unscale_params(beta, normalized.scale_factor);
    fit.message = fit.converged ? "converged" : "iteration cap reached before the Newton decrement fell below tolerance";
    return fit;
}

FitResult minimize(const Coreset& coreset, int p, const OptimizerConfig& config) {
    std::vector<std::size_t> hull(coreset.hull_count);
    for (std::size_t i = 0; i < hull.size(); ++i) hull[i] = i;
    return minimize(coreset.rows, coreset.labels, coreset.weights, p, config, hull);
}

std::string to_json_line(const FitResult& fit) {
    std::ostringstream out;
    out << "{\"beta\":[";
    for (Eigen::Index j = 0; j < fit.beta.size(); ++j) out << (j ? "," : "") << detail::format_double(fit.beta[j]);
    out << "],\"objective\":";
    if (std::isfinite(fit.objective)) out << detail::format_double(fit.objective);
    else out << "null";
    out << ",\"iterations\":{\"outer\":" << fit.outer_iterations << ",\"newton\":" << fit.newton_iterations
        << "},\"converged\":" << (fit.converged ? "true" : "false") << '}';
    return out.str();
}

Eigen::VectorXd random_feasible_params(const Eigen::Ref<const Eigen::MatrixXd>& rows, std::uint64_t seed) {
    Engine rng(seed);
    const Eigen::Index d = rows.cols();
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(d);
    const double scale = std::pow(10.0, 2.0 * uniform01(rng) - 1.0);
    for (Eigen::Index j = 1; j < d; ++j) beta[j] = scale * standard_normal(rng);
    const double lowest = (rows * beta).minCoeff();
    beta[0] = -lowest + std::pow(10.0, 4.0 * uniform01(rng) - 3.0);
    return beta;
}

ShiftGapReport shift_gap_check(const Dataset& data, int p, std::span<const double> eta_grid, std::size_t trials,
                               std::uint64_t seed) {
    require_link_power(p);
    ShiftGapReport report;
    report.worst_slack = std::numeric_limits<double>::infinity();
    const auto n = static_cast<double>(data.rows());
    for (std::size_t t = 0; t < trials; ++t) {
        const Eigen::VectorXd beta = random_feasible_params(data.design(), derive_seed(seed, 0x5b1f7, t));
        const auto base = total_loss(data, beta, p);
        if (!base) continue;
        for (double eta : eta_grid) {
            const auto shifted = total_loss(data, shift_params(beta, eta), p);
            if (!shifted) continue;
            const double bound = p == 1 ? *base + eta * n : *base + eta * eta * n + 6.0 * eta * *base;
            const double slack = (bound - *shifted) / bound;
            ++report.checks;
            report.worst_slack = std::min(report.worst_slack, slack);
            if (slack < 0.0) report.ok = false;
            if (eta > 0.0) {
                const double c = p == 1 ? (*shifted - *base) / (eta * n) : (*shifted - *base - eta * eta * n) / (eta * *base);
                report.tightest_constant = std::max(report.tightest_constant, c);
            }
        }
    }
    if (report.checks == 0) report.worst_slack = 0.0;
    return report;
}

}  // namespace poiscore
