#include "poiscore/hull.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "text_io.hpp"

namespace poiscore {

namespace {

// Phase-one simplex on {A lambda = b, lambda >= 0} with A = [V^T; 1^T] and
// b = (x, 1). Bland's rule keeps it cycle free; the problems are tiny
// (D + 1 rows, one column per candidate vertex).
struct PhaseOne {
    bool feasible = false;
    Eigen::VectorXd dual;  // Farkas certificate when infeasible: y^T A <= 0, y^T b > 0
};

PhaseOne phase_one(const Eigen::Ref<const Eigen::MatrixXd>& vertices, const Eigen::Ref<const Eigen::VectorXd>& point,
                   double tolerance) {
    const Eigen::Index m = vertices.rows();
    const Eigen::Index dim = vertices.cols();
    const Eigen::Index rows = dim + 1;
    const Eigen::Index cols = m + rows;
    constexpr double kPivot = 1e-11;
    constexpr double kReduced = 1e-12;

    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(rows, cols + 1);
    Eigen::VectorXd sign = Eigen::VectorXd::Ones(rows);
    t.block(0, 0, dim, m) = vertices.transpose();
    t.block(dim, 0, 1, m).setOnes();
    t.block(0, cols, dim, 1) = point;
    t(dim, cols) = 1.0;
    for (Eigen::Index i = 0; i < rows; ++i) {
        if (t(i, cols) < 0.0) {
            t.row(i) *= -1.0;
            sign[i] = -1.0;
        }
        t(i, m + i) = 1.0;
    }
    std::vector<Eigen::Index> basis(static_cast<std::size_t>(rows));
    for (Eigen::Index i = 0; i < rows; ++i) basis[static_cast<std::size_t>(i)] = m + i;

    // reduced costs: c_j - sum_i t_ij with c = 1 on artificials
    Eigen::RowVectorXd reduced = -t.colwise().sum();
    reduced.segment(m, rows).array() += 1.0;

    for (int iter = 0; iter < 10'000; ++iter) {
        Eigen::Index enter = -1;
        for (Eigen::Index j = 0; j < cols; ++j) {
            if (reduced[j] < -kReduced) {
                enter = j;
                break;
            }
        }
        if (enter < 0) break;
        Eigen::Index leave = -1;
        double best = 0.0;
        for (Eigen::Index i = 0; i < rows; ++i) {
            if (t(i, enter) <= kPivot) continue;
            const double ratio = t(i, cols) / t(i, enter);
            if (leave < 0 || ratio < best ||
                (ratio == best && basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
                leave = i;
                best = ratio;
            }
        }
        if (leave < 0) break;  // unbounded cannot happen for a phase-one problem
        t.row(leave) /= t(leave, enter);
        for (Eigen::Index i = 0; i < rows; ++i)
            if (i != leave && t(i, enter) != 0.0) t.row(i) -= t(i, enter) * t.row(leave);
        reduced -= reduced[enter] * t.row(leave);
        basis[static_cast<std::size_t>(leave)] = enter;
    }

    PhaseOne out;
    out.feasible = -reduced[cols] <= tolerance;
    if (!out.feasible) {
        out.dual.resize(rows);
        for (Eigen::Index i = 0; i < rows; ++i) out.dual[i] = sign[i] * (1.0 - reduced[m + i]);
    }
    return out;
}

// Largest <u, x_i>, ties broken toward the lexicographically largest row,
// so the winner is a vertex of the hull.
std::size_t lexicographic_argmax(const Eigen::MatrixXd& points, const Eigen::VectorXd& u) {
    const Eigen::VectorXd scores = points * u;
    std::size_t best = 0;
    for (Eigen::Index i = 1; i < points.rows(); ++i) {
        const auto b = static_cast<Eigen::Index>(best);
        if (scores[i] > scores[b]) {
            best = static_cast<std::size_t>(i);
        } else if (scores[i] == scores[b]) {
            for (Eigen::Index c = 0; c < points.cols(); ++c) {
                if (points(i, c) == points(b, c)) continue;
                if (points(i, c) > points(b, c)) best = static_cast<std::size_t>(i);
                break;
            }
        }
    }
    return best;
}

Eigen::MatrixXd gather(const Eigen::MatrixXd& points, const std::vector<std::size_t>& idx) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), points.cols());
    for (std::size_t r = 0; r < idx.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = points.row(static_cast<Eigen::Index>(idx[r]));
    return out;
}

std::vector<Eigen::VectorXd> sphere_net(Eigen::Index dim, double spacing, std::size_t cap, double& achieved) {
    std::vector<Eigen::VectorXd> dirs;
    if (dim == 1) {
        dirs.push_back(Eigen::VectorXd::Constant(1, 1.0));
        dirs.push_back(Eigen::VectorXd::Constant(1, -1.0));
        achieved = 0.0;
        return dirs;
    }
    if (dim == 2) {
        auto m = static_cast<std::size_t>(std::ceil(2.0 * std::numbers::pi / spacing));
        m = std::clamp<std::size_t>(m, 4, std::max<std::size_t>(cap, 4));
        for (std::size_t k = 0; k < m; ++k) {
            const double a = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(m);
            Eigen::VectorXd v(2);
            v << std::cos(a), std::sin(a);
            dirs.push_back(v);
        }
        achieved = 2.0 * std::numbers::pi / static_cast<double>(m);
        return dirs;
    }
    if (dim == 3) {
        auto m = static_cast<std::size_t>(std::ceil(8.0 * std::numbers::pi / (spacing * spacing)));
        m = std::clamp<std::size_t>(m, 6, std::max<std::size_t>(cap, 6));
        const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
        for (std::size_t k = 0; k < m; ++k) {
            const double zc = 1.0 - (2.0 * static_cast<double>(k) + 1.0) / static_cast<double>(m);
            const double r = std::sqrt(std::max(0.0, 1.0 - zc * zc));
            const double a = golden * static_cast<double>(k);
            Eigen::VectorXd v(3);
            v << r * std::cos(a), r * std::sin(a), zc;
            dirs.push_back(v);
        }
        for (Eigen::Index c = 0; c < 3; ++c) {
            dirs.push_back(Eigen::VectorXd::Unit(3, c));
            dirs.push_back(-Eigen::VectorXd::Unit(3, c));
        }
        achieved = std::sqrt(8.0 * std::numbers::pi / static_cast<double>(m));
        return dirs;
    }
    // Cube-face grid: on face x_c = +-1 the other dim-1 coordinates run over
    // g evenly spaced values in [-1, 1]; normalized, neighbours are at most
    // (2 / (g - 1)) sqrt(dim - 1) / 2 apart in angle.
    const auto faces = static_cast<std::size_t>(2 * dim);
    std::size_t g = 2;
    auto count = [&](std::size_t levels) {
        double total = static_cast<double>(faces);
        for (Eigen::Index k = 0; k + 1 < dim; ++k) total *= static_cast<double>(levels);
        return total;
    };
    while (count(g + 1) <= static_cast<double>(cap)) {
        const double step = 2.0 / static_cast<double>(g - 1);
        if (step * std::sqrt(static_cast<double>(dim - 1)) / 2.0 <= spacing) break;
        ++g;
    }
    const double step = 2.0 / static_cast<double>(g - 1);
    achieved = std::min(std::numbers::pi / 2.0, step * std::sqrt(static_cast<double>(dim - 1)) / 2.0);
    std::vector<std::size_t> digits(static_cast<std::size_t>(dim - 1), 0);
    for (Eigen::Index face = 0; face < dim; ++face) {
        for (double s : {1.0, -1.0}) {
            std::fill(digits.begin(), digits.end(), 0);
            while (true) {
                Eigen::VectorXd v(dim);
                for (Eigen::Index c = 0, k = 0; c < dim; ++c)
                    v[c] = c == face ? s : -1.0 + step * static_cast<double>(digits[static_cast<std::size_t>(k++)]);
                dirs.push_back(v.normalized());
                std::size_t pos = 0;
                while (pos < digits.size() && ++digits[pos] == g) digits[pos++] = 0;
                if (pos == digits.size()) break;
            }
        }
    }
    return dirs;
}

}  // namespace

const char* to_string(HullMode mode) { return mode == HullMode::exact ? "exact" : "eps_kernel"; }

NormalizedDesign normalize_unit_ball(const Eigen::Ref<const Eigen::MatrixXd>& design) {
    NormalizedDesign out{design, 1.0};
    if (design.cols() < 2 || design.rows() == 0) return out;
    const double largest = design.rightCols(design.cols() - 1).rowwise().norm().maxCoeff();
    out.scale_factor = std::max(1.0, largest);
    out.design.rightCols(design.cols() - 1) /= out.scale_factor;
    return out;
}

Eigen::VectorXd unscale_params(const Eigen::VectorXd& beta, double scale_factor) {
    Eigen::VectorXd out = beta;
    out.tail(out.size() - 1) /= scale_factor;
    return out;
}

Eigen::VectorXd scale_params(const Eigen::VectorXd& beta, double scale_factor) {
    Eigen::VectorXd out = beta;
    out.tail(out.size() - 1) *= scale_factor;
    return out;
}

bool in_convex_hull(const Eigen::Ref<const Eigen::MatrixXd>& vertices, const Eigen::Ref<const Eigen::VectorXd>& point,
                    double tolerance) {
    if (vertices.rows() == 0) return false;
    return phase_one(vertices, point, tolerance).feasible;
}

HullResult extreme_points_exact(const Eigen::Ref<const Eigen::MatrixXd>& design, const HullBudget& budget) {
    if (design.rows() == 0) throw std::invalid_argument("empty design");
    if (static_cast<std::size_t>(design.rows()) > budget.max_rows)
        throw HullBudgetExceeded("exact hull over " + std::to_string(design.rows()) + " rows exceeds the row budget of " +
                                 std::to_string(budget.max_rows) + "; use eps_kernel instead");
    const NormalizedDesign normalized = normalize_unit_ball(design);
    const Eigen::MatrixXd points = normalized.design.rightCols(design.cols() - 1);
    const Eigen::Index dim = points.cols();
    constexpr double kTolerance = 1e-9;

    std::vector<std::size_t> candidates;
    std::vector<char> is_candidate(static_cast<std::size_t>(points.rows()), 0);
    auto add = [&](std::size_t i) {
        if (is_candidate[i]) return false;
        is_candidate[i] = 1;
        candidates.push_back(i);
        if (candidates.size() > budget.max_extreme)
            throw HullBudgetExceeded("more than " + std::to_string(budget.max_extreme) +
                                     " extreme points; use eps_kernel instead");
        return true;
    };
    for (Eigen::Index c = 0; c < dim; ++c) {
        add(lexicographic_argmax(points, Eigen::VectorXd::Unit(dim, c)));
        add(lexicographic_argmax(points, -Eigen::VectorXd::Unit(dim, c)));
    }

    Eigen::MatrixXd verts = gather(points, candidates);
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        const auto row = static_cast<std::size_t>(i);
        while (!is_candidate[row]) {
            const PhaseOne lp = phase_one(verts, points.row(i).transpose(), kTolerance);
            if (lp.feasible) break;
            const Eigen::VectorXd u = lp.dual.head(dim);
            const std::size_t winner = lexicographic_argmax(points, u);
            if (!add(winner)) add(row);
            verts = gather(points, candidates);
        }
    }

    // Drop candidates that numerical ties let in, and all but the first copy
    // of duplicated vertices.
    std::sort(candidates.begin(), candidates.end());
    for (std::size_t k = candidates.size(); k-- > 0;) {
        if (candidates.size() == 1) break;
        std::vector<std::size_t> others = candidates;
        others.erase(others.begin() + static_cast<std::ptrdiff_t>(k));
        if (in_convex_hull(gather(points, others), points.row(static_cast<Eigen::Index>(candidates[k])).transpose(),
                           kTolerance))
            candidates = std::move(others);
    }

    HullResult out;
    out.indices = std::move(candidates);
    out.mode = HullMode::exact;
    out.scale_factor = normalized.scale_factor;
    return out;
}

HullResult eps_kernel(const Eigen::Ref<const Eigen::MatrixXd>& design, double eps, std::size_t max_directions) {
    if (!(eps > 0.0 && eps < 0.5)) throw std::invalid_argument("kernel eps must lie in (0, 1/2)");
    if (design.rows() == 0) throw std::invalid_argument("empty design");
    const NormalizedDesign normalized = normalize_unit_ball(design);
    const Eigen::MatrixXd points = normalized.design.rightCols(design.cols() - 1);
    HullResult out;
    out.mode = HullMode::eps_kernel;
    out.eps = eps;
    out.scale_factor = normalized.scale_factor;
    const auto dirs = sphere_net(points.cols(), eps, max_directions, out.angular_spacing);
    out.directions = dirs.size();
    std::set<std::size_t> chosen;
    for (const auto& u : dirs) chosen.insert(lexicographic_argmax(points, u));
    out.indices.assign(chosen.begin(), chosen.end());
    return out;
}

double constraint_margin(HullMode mode, double eps) { return mode == HullMode::exact ? eps : 2.0 * eps; }

void write_hull_csv(const HullResult& hull, const std::string& path) {
    auto out = detail::open_output(path);
    out << "row_index\n";
    for (std::size_t i : hull.indices) out << i << '\n';
}

}  // namespace poiscore
