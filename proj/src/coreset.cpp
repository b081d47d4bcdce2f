#include "poiscore/coreset.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "poiscore/rng.hpp"
#include "text_io.hpp"

namespace poiscore {

namespace {

void append_row(Coreset& c, const Dataset& data, std::size_t row, double weight, Eigen::Index at) {
    c.rows.row(at) = data.design().row(static_cast<Eigen::Index>(row));
    c.labels.push_back(data.labels()[row]);
    c.weights.push_back(weight);
    c.source.push_back(row);
}

Coreset start(const Dataset& data, std::size_t hull_rows, std::size_t k, std::uint64_t seed) {
    Coreset c;
    c.rows.resize(static_cast<Eigen::Index>(hull_rows + k), data.cols());
    c.labels.reserve(hull_rows + k);
    c.weights.reserve(hull_rows + k);
    c.source.reserve(hull_rows + k);
    c.hull_count = hull_rows;
    c.seed = seed;
    c.k = k;
    return c;
}

void append_hull(Coreset& c, const Dataset& data, const HullResult& hull) {
    for (std::size_t r = 0; r < hull.indices.size(); ++r) {
        if (hull.indices[r] >= static_cast<std::size_t>(data.rows()))
            throw std::out_of_range("hull index outside the dataset");
        append_row(c, data, hull.indices[r], 1.0, static_cast<Eigen::Index>(r));
    }
}

}  // namespace

std::vector<std::size_t> non_hull_rows(const Dataset& data, const HullResult& hull) {
    std::vector<char> in_hull(static_cast<std::size_t>(data.rows()), 0);
    for (std::size_t i : hull.indices) in_hull.at(i) = 1;
    std::vector<std::size_t> rest;
    rest.reserve(in_hull.size());
    for (std::size_t i = 0; i < in_hull.size(); ++i)
        if (!in_hull[i]) rest.push_back(i);
    return rest;
}

SensitivityScores remainder_scores(const Dataset& data, int p, const HullResult& hull, std::uint64_t seed,
                                   const ConditioningConfig& config) {
    std::vector<std::size_t> rest = non_hull_rows(data, hull);
    if (rest.empty()) return {};
    Eigen::MatrixXd x(static_cast<Eigen::Index>(rest.size()), data.cols());
    for (std::size_t r = 0; r < rest.size(); ++r)
        x.row(static_cast<Eigen::Index>(r)) = data.design().row(static_cast<Eigen::Index>(rest[r]));
    const ConditionedBasis basis = conditioned_basis(x, p, seed, config);
    return sensitivity_scores(basis, std::move(rest));
}

Coreset build_coreset(const Dataset& data, int p, std::size_t k, std::uint64_t seed, const HullResult& hull,
                      const SensitivityScores& scores) {
    require_link_power(p);
    if (k == 0) throw std::invalid_argument("sample size k must be at least 1");
    const std::size_t m = static_cast<std::size_t>(scores.probabilities.size());
    if (scores.rows.size() != m) throw std::invalid_argument("scores carry no row labels");
    if (m == 0) {
        Coreset c = start(data, hull.indices.size(), 0, seed);
        c.k = k;
        append_hull(c, data, hull);
        return c;
    }
    Coreset c = start(data, hull.indices.size(), k, seed);
    append_hull(c, data, hull);

    std::vector<double> cumulative(m);
    double running = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        running += scores.probabilities[static_cast<Eigen::Index>(i)];
        cumulative[i] = running;
    }
    Engine rng(seed);
    for (std::size_t j = 0; j < k; ++j) {
        const double u = uniform01(rng) * running;
        auto pos = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
        pos = std::min(pos, m - 1);
        const double prob = scores.probabilities[static_cast<Eigen::Index>(pos)];
        append_row(c, data, scores.rows[pos], 1.0 / (static_cast<double>(k) * prob),
                   static_cast<Eigen::Index>(c.hull_count + j));
    }
    return c;
}

Coreset build_uniform(const Dataset& data, std::size_t k, std::uint64_t seed, const HullResult& hull, bool with_hull) {
    if (k == 0) throw std::invalid_argument("sample size k must be at least 1");
    std::vector<std::size_t> pool;
    if (with_hull) {
        pool = non_hull_rows(data, hull);
    } else {
        pool.resize(static_cast<std::size_t>(data.rows()));
        for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
    }
    const std::size_t hull_rows = with_hull ? hull.indices.size() : 0;
    const std::size_t draws = pool.empty() ? 0 : k;
    Coreset c = start(data, hull_rows, draws, seed);
    c.k = k;
    if (with_hull) append_hull(c, data, hull);
    if (pool.empty()) return c;
    const double weight = static_cast<double>(pool.size()) / static_cast<double>(k);
    Engine rng(seed);
    for (std::size_t j = 0; j < draws; ++j) {
        auto pos = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(pool.size()));
        pos = std::min(pos, pool.size() - 1);
        append_row(c, data, pool[pos], weight, static_cast<Eigen::Index>(hull_rows + j));
    }
    return c;
}

CoresetError coreset_error(const Dataset& data, const Coreset& coreset, int p, std::span<const Eigen::VectorXd> betas,
                           double eta) {
    CoresetError out;
    for (const auto& beta : betas) {
        if (!membership(data, beta, eta).inside) {
            ++out.skipped;
            continue;
        }
        const auto full = total_loss(data, beta, p);
        const auto reduced = total_loss(coreset.rows, coreset.labels, beta, p, coreset.weights);
        if (!full || !reduced || !(*full > 0.0)) {
            ++out.skipped;
            continue;
        }
        ++out.evaluated;
        out.max_relative = std::max(out.max_relative, std::abs(*full - *reduced) / *full);
    }
    return out;
}

double theoretical_size(double eps, double rho, Count y_max, Eigen::Index d, Eigen::Index n, double eta, int p) {
    require_link_power(p);
    if (!(eps > 0.0) || !(eta > 0.0 && eta < 1.0)) throw std::invalid_argument("need eps > 0 and eta in (0, 1)");
    const double dd = static_cast<double>(d);
    const double ly = std::log(std::max<double>(static_cast<double>(y_max), 3.0));
    const double loglog_eta = std::log(std::max(std::log(1.0 / eta), 1.0 + 1e-12));
    double m = 0.0;
    if (p == 1) {
        const double lld = std::log(std::max(std::log(std::max(dd, 3.0)), 1.0));
        m = rho * dd * lld * std::sqrt(std::max<double>(static_cast<double>(y_max), 3.0) / ly) + loglog_eta;
    } else {
        m = rho * dd + ly + loglog_eta;
    }
    const double branch = std::min(dd, std::log(static_cast<double>(std::max<Eigen::Index>(n, 2))) * ly / eps);
    return dd * branch * m / (eps * eps);
}

void write_coreset_csv(const Coreset& coreset, const std::string& path) {
    auto out = detail::open_output(path);
    out << "# hull_count=" << coreset.hull_count << " seed=" << coreset.seed << " k=" << coreset.k << '\n';
    out << 'w';
    for (Eigen::Index c = 1; c < coreset.rows.cols(); ++c) out << ",f" << c;
    out << ",y\n";
    for (Eigen::Index i = 0; i < coreset.rows.rows(); ++i) {
        out << detail::format_double(coreset.weights[static_cast<std::size_t>(i)]);
        for (Eigen::Index c = 1; c < coreset.rows.cols(); ++c) out << ',' << detail::format_double(coreset.rows(i, c));
        out << ',' << coreset.labels[static_cast<std::size_t>(i)] << '\n';
    }
}

Coreset read_coreset_csv(const std::string& path) {
    auto in = detail::open_input(path);
    Coreset c;
    std::string line;
    std::size_t columns = 0;
    std::vector<double> values;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream meta(line.substr(1));
            std::string token;
            while (meta >> token) {
                const auto eq = token.find('=');
                if (eq == std::string::npos) continue;
                const std::string key = token.substr(0, eq);
                const auto value = static_cast<std::uint64_t>(std::stoull(token.substr(eq + 1)));
                if (key == "hull_count") c.hull_count = value;
                else if (key == "seed") c.seed = value;
                else if (key == "k") c.k = value;
            }
            continue;
        }
        const auto fields = detail::split(line);
        if (columns == 0) {
            if (fields.size() < 3 || fields.front() != "w" || fields.back() != "y")
                throw std::runtime_error(path + ": header must be w,f1,...,f{d-1},y");
            columns = fields.size();
            continue;
        }
        if (fields.size() != columns) throw std::runtime_error(path + ": ragged coreset row");
        c.weights.push_back(detail::parse_double(fields.front()));
        for (std::size_t f = 1; f + 1 < columns; ++f) values.push_back(detail::parse_double(fields[f]));
        c.labels.push_back(detail::parse_integer(fields.back()));
    }
    if (c.labels.empty()) throw std::runtime_error(path + ": no coreset rows");
    const auto n = static_cast<Eigen::Index>(c.labels.size());
    const auto k = static_cast<Eigen::Index>(columns - 2);
    c.rows.resize(n, k + 1);
    c.rows.col(0).setOnes();
    c.rows.rightCols(k) =
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(values.data(), n, k);
    if (c.hull_count > c.labels.size()) throw std::runtime_error(path + ": hull_count exceeds the row count");
    return c;
}

}  // namespace poiscore
