#include "poiscore/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "text_io.hpp"

namespace poiscore {

namespace {

constexpr Count kTableMax = 1024;

const std::array<long double, kTableMax + 1>& log_factorial_table() {
    static const auto table = [] {
        std::array<long double, kTableMax + 1> t{};
        t[0] = 0.0L;
        for (Count k = 1; k <= kTableMax; ++k) t[k] = t[k - 1] + std::log(static_cast<long double>(k));
        return t;
    }();
    return table;
}

double int_power(double z, int p) {
    switch (p) {
        case 1: return z;
        case 2: return z * z;
        default: return std::pow(z, p);
    }
}

void check_weights(std::span<const double> weights, Eigen::Index n) {
    if (weights.empty()) return;
    if (static_cast<Eigen::Index>(weights.size()) != n)
        throw std::invalid_argument("weight vector length does not match the row count");
    for (double w : weights)
        if (!(w > 0.0)) throw std::invalid_argument("weights must be strictly positive");
}

void check_shapes(const Eigen::Ref<const Eigen::MatrixXd>& x, std::span<const Count> y, const Eigen::VectorXd& beta) {
    if (static_cast<Eigen::Index>(y.size()) != x.rows())
        throw std::invalid_argument("label count does not match the row count");
    if (beta.size() != x.cols()) throw std::invalid_argument("parameter length does not match the column count");
}

}  // namespace

void require_link_power(int p) {
    if (p != 1 && p != 2) throw std::invalid_argument("link power must be 1 or 2, got " + std::to_string(p));
}

Dataset::Dataset(Eigen::MatrixXd x, std::vector<Count> y) : x_(std::move(x)), y_(std::move(y)) {
    if (x_.rows() < 1) throw std::invalid_argument("dataset needs at least one row");
    if (x_.cols() < 2) throw std::invalid_argument("dataset needs an intercept and at least one covariate");
    if (static_cast<Eigen::Index>(y_.size()) != x_.rows())
        throw std::invalid_argument("label count does not match the row count");
    for (Count v : y_)
        if (v < 0) throw std::invalid_argument("labels must be nonnegative counts");
    y_max_ = *std::max_element(y_.begin(), y_.end());
}

Dataset Dataset::from_features(const Eigen::MatrixXd& features, std::vector<Count> labels) {
    Eigen::MatrixXd x(features.rows(), features.cols() + 1);
    x.col(0).setOnes();
    x.rightCols(features.cols()) = features;
    return Dataset(std::move(x), std::move(labels));
}

Dataset Dataset::from_design(Eigen::MatrixXd design, std::vector<Count> labels) {
    if (design.cols() >= 1 && !(design.col(0).array() == 1.0).all())
        throw std::invalid_argument("design matrix must start with an all-ones intercept column");
    return Dataset(std::move(design), std::move(labels));
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
    Eigen::MatrixXd x(static_cast<Eigen::Index>(indices.size()), x_.cols());
    std::vector<Count> y;
    y.reserve(indices.size());
    for (std::size_t r = 0; r < indices.size(); ++r) {
        x.row(static_cast<Eigen::Index>(r)) = x_.row(static_cast<Eigen::Index>(indices[r]));
        y.push_back(y_[indices[r]]);
    }
    return Dataset(std::move(x), std::move(y));
}

double log_factorial(Count y) {
    if (y < 0) throw std::domain_error("log_factorial of a negative count");
    if (y <= kTableMax) return static_cast<double>(log_factorial_table()[static_cast<std::size_t>(y)]);
    return std::lgamma(static_cast<double>(y) + 1.0);
}

double loss_minimum(Count y) {
    if (y < 0) throw std::domain_error("loss_minimum of a negative count");
    if (y == 0) return 0.0;
    if (y <= kTableMax) {
        const auto yl = static_cast<long double>(y);
        return static_cast<double>(yl - yl * std::log(yl) + log_factorial_table()[static_cast<std::size_t>(y)]);
    }
    // y - y log y + log y! = log(2 pi y)/2 + 1/(12y) - 1/(360y^3) + 1/(1260y^5) - ...
    const double v = static_cast<double>(y);
    const double inv = 1.0 / v;
    const double inv2 = inv * inv;
    return 0.5 * std::log(2.0 * std::numbers::pi * v) +
           inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)));
}

double point_loss(Count y, double z, int p) {
    if (!(z > 0.0)) throw std::domain_error("point_loss requires z > 0");
    if (p < 1) throw std::invalid_argument("link power must be at least 1");
    if (y < 0) throw std::domain_error("negative count");
    const double zp = int_power(z, p);
    if (y == 0) return zp;
    // g = y (t - 1 - log t) + min g with t = z^p / y; algebraically identical
    // to z^p - p y log z + log y! but free of the y log y cancellation.
    const double yd = static_cast<double>(y);
    const double t = zp / yd;
    const double u = t - 1.0;
    double excess;
    if (std::abs(u) < 0.5 && std::isfinite(t)) {
        excess = u - std::log1p(u);
    } else {
        excess = u - (p * std::log(z) - std::log(yd));
    }
    return yd * excess + loss_minimum(y);
}

double point_loss_log(Count y, double log_z, int p) {
    if (p < 1) throw std::invalid_argument("link power must be at least 1");
    if (p * log_z < -745.0) return -p * static_cast<double>(y) * log_z + log_factorial(y);
    return point_loss(y, std::exp(log_z), p);
}

double point_loss_derivative(Count y, double z, int p) {
    if (!(z > 0.0)) throw std::domain_error("derivative requires z > 0");
    return p * int_power(z, p - 1) - p * static_cast<double>(y) / z;
}

double point_loss_second_derivative(Count y, double z, int p) {
    if (!(z > 0.0)) throw std::domain_error("derivative requires z > 0");
    const double curvature = p >= 2 ? p * (p - 1) * int_power(z, p - 2) : 0.0;
    return curvature + p * static_cast<double>(y) / (z * z);
}

std::optional<double> total_loss(const Eigen::Ref<const Eigen::MatrixXd>& x, std::span<const Count> y,
                                 const Eigen::VectorXd& beta, int p, std::span<const double> weights) {
    require_link_power(p);
    check_shapes(x, y, beta);
    check_weights(weights, x.rows());
    const Eigen::VectorXd z = x * beta;
    long double sum = 0.0L;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        if (!(z[i] > 0.0)) return std::nullopt;
        const double w = weights.empty() ? 1.0 : weights[static_cast<std::size_t>(i)];
        sum += static_cast<long double>(w) * point_loss(y[static_cast<std::size_t>(i)], z[i], p);
    }
    return static_cast<double>(sum);
}

std::optional<double> total_loss(const Dataset& data, const Eigen::VectorXd& beta, int p,
                                 std::span<const double> weights) {
    return total_loss(data.design(), data.labels(), beta, p, weights);
}

Derivatives loss_gradient_hessian(const Eigen::Ref<const Eigen::MatrixXd>& x, std::span<const Count> y,
                                  const Eigen::VectorXd& beta, int p, std::span<const double> weights) {
    require_link_power(p);
    check_shapes(x, y, beta);
    check_weights(weights, x.rows());
    const Eigen::VectorXd z = x * beta;
    Eigen::VectorXd first(z.size());
    Eigen::VectorXd second(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        if (!(z[i] > 0.0)) throw std::domain_error("parameters are not strictly feasible");
        const double w = weights.empty() ? 1.0 : weights[static_cast<std::size_t>(i)];
        const Count yi = y[static_cast<std::size_t>(i)];
        first[i] = w * point_loss_derivative(yi, z[i], p);
        second[i] = w * point_loss_second_derivative(yi, z[i], p);
    }
    Derivatives out;
    out.gradient = x.transpose() * first;
    out.hessian = x.transpose() * second.asDiagonal() * x;
    return out;
}

Derivatives loss_gradient_hessian(const Dataset& data, const Eigen::VectorXd& beta, int p,
                                  std::span<const double> weights) {
    return loss_gradient_hessian(data.design(), data.labels(), beta, p, weights);
}

Membership membership(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::VectorXd& beta, double eta) {
    if (beta.size() != x.cols()) throw std::invalid_argument("parameter length does not match the column count");
    const double margin = (x * beta).minCoeff() - eta;
    return {margin > 0.0, margin};
}

Membership membership(const Dataset& data, const Eigen::VectorXd& beta, double eta) {
    return membership(data.design(), beta, eta);
}

Eigen::VectorXd shift_params(const Eigen::VectorXd& beta, double eta) {
    Eigen::VectorXd out = beta;
    out[0] += eta;
    return out;
}

Dataset read_dataset_csv(const std::string& path) {
    auto in = detail::open_input(path);
    std::string line;
    std::size_t columns = 0;
    std::vector<double> values;
    std::vector<Count> labels;
    bool header_seen = false;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#' || line == "\r") continue;
        const auto fields = detail::split(line);
        if (!header_seen) {
            header_seen = true;
            if (fields.size() < 2 || fields.back() != "y")
                throw std::runtime_error(path + ": header must be f1,...,f{d-1},y");
            columns = fields.size();
            continue;
        }
        if (fields.size() != columns)
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected " + std::to_string(columns) +
                                     " fields");
        for (std::size_t c = 0; c + 1 < columns; ++c) values.push_back(detail::parse_double(fields[c]));
        labels.push_back(detail::parse_integer(fields.back()));
    }
    if (!header_seen || labels.empty()) throw std::runtime_error(path + ": no data rows");
    const auto n = static_cast<Eigen::Index>(labels.size());
    const auto k = static_cast<Eigen::Index>(columns - 1);
    Eigen::MatrixXd features =
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(values.data(), n, k);
    return Dataset::from_features(features, std::move(labels));
}

void write_dataset_csv(const Dataset& data, const std::string& path) {
    auto out = detail::open_output(path);
    const Eigen::Index k = data.cols() - 1;
    for (Eigen::Index c = 0; c < k; ++c) out << 'f' << (c + 1) << ',';
    out << "y\n";
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        for (Eigen::Index c = 0; c < k; ++c) out << detail::format_double(data.design()(i, c + 1)) << ',';
        out << data.labels()[static_cast<std::size_t>(i)] << '\n';
    }
}

}  // namespace poiscore
