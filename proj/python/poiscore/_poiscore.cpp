#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "poiscore/coreset.hpp"
#include "poiscore/datagen.hpp"
#include "poiscore/envelopes.hpp"
#include "poiscore/harness.hpp"
#include "poiscore/hull.hpp"
#include "poiscore/model.hpp"
#include "poiscore/optimizer.hpp"

namespace py = pybind11;
using namespace poiscore;

namespace {

Dataset make_dataset(const Eigen::MatrixXd& design, const std::vector<Count>& labels) {
    return Dataset::from_design(design, labels);
}

HullResult hull_for(const Eigen::MatrixXd& design, const std::string& mode, double eps) {
    if (mode == "exact") return extreme_points_exact(design);
    if (mode == "eps_kernel") return eps_kernel(design, eps);
    throw std::invalid_argument("hull mode must be 'exact' or 'eps_kernel'");
}

}  // namespace

PYBIND11_MODULE(_poiscore, m) {
    m.doc() = "Coresets and shifted-domain fitting for p-th-root-link Poisson regression";

    m.def("point_loss", &point_loss, py::arg("y"), py::arg("z"), py::arg("p"));
    m.def("point_loss_log", &point_loss_log, py::arg("y"), py::arg("log_z"), py::arg("p"));
    m.def(
        "total_loss",
        [](const Eigen::MatrixXd& design, const std::vector<Count>& labels, const Eigen::VectorXd& beta, int p,
           const std::vector<double>& weights) -> std::optional<double> {
            return total_loss(design, labels, beta, p, weights);
        },
        py::arg("design"), py::arg("labels"), py::arg("beta"), py::arg("p"), py::arg("weights") = std::vector<double>{},
        "Weighted loss, or None when some x_i beta <= 0.");

    m.def("lambda_p1", &lambda_p1, py::arg("y"));
    m.def("lambert_w0", &lambert_w0, py::arg("x"));
    m.def(
        "lambda_star",
        [](Count y) {
            const TangencyResult t = lambda_star(y);
            return py::dict(py::arg("lambda_star") = t.lambda_star, py::arg("z_star") = t.z_star,
                            py::arg("residual_value") = t.residual_value, py::arg("residual_slope") = t.residual_slope);
        },
        py::arg("y"));

    py::class_<SimplexInstance>(m, "SimplexInstance")
        .def_property_readonly("design", [](const SimplexInstance& s) { return s.data.design(); })
        .def_property_readonly("labels", [](const SimplexInstance& s) { return s.data.labels(); })
        .def_readonly("true_beta", &SimplexInstance::true_beta)
        .def_readonly("seed", &SimplexInstance::seed)
        .def_readonly("p", &SimplexInstance::p);
    m.def("generate_f2", &generate_f2, py::arg("n"), py::arg("d"), py::arg("p"), py::arg("seed"));
    m.def(
        "generate_circle",
        [](Eigen::Index n, Eigen::Index d) {
            const Dataset c = generate_circle(n, d);
            return py::make_tuple(c.design(), c.labels());
        },
        py::arg("n"), py::arg("d") = 3, "Returns (design, labels).");
    m.def(
        "circle_sensitivity_demo",
        [](Eigen::Index n, double log_eta) {
            const CircleDemo d = circle_sensitivity_demo(n, log_eta);
            return py::dict(py::arg("n") = d.n, py::arg("log_eta") = d.log_eta, py::arg("point_cost") = d.point_cost,
                            py::arg("bound") = d.bound, py::arg("exact_ratio") = d.exact_ratio);
        },
        py::arg("n"), py::arg("log_eta"));

    py::class_<HullResult>(m, "HullResult")
        .def_readonly("indices", &HullResult::indices)
        .def_property_readonly("mode", [](const HullResult& h) { return std::string(to_string(h.mode)); })
        .def_readonly("eps", &HullResult::eps)
        .def_readonly("scale_factor", &HullResult::scale_factor);
    m.def(
        "hull", [](const Eigen::MatrixXd& design, const std::string& mode, double eps) { return hull_for(design, mode, eps); },
        py::arg("design"), py::arg("mode") = "exact", py::arg("eps") = 0.05);
    m.def("constraint_margin",
          [](const std::string& mode, double eps) {
              return constraint_margin(mode == "exact" ? HullMode::exact : HullMode::eps_kernel, eps);
          },
          py::arg("mode"), py::arg("eps"));

    py::class_<Coreset>(m, "Coreset")
        .def_readonly("rows", &Coreset::rows)
        .def_readonly("labels", &Coreset::labels)
        .def_readonly("weights", &Coreset::weights)
        .def_readonly("hull_count", &Coreset::hull_count)
        .def_readonly("seed", &Coreset::seed)
        .def_readonly("k", &Coreset::k)
        .def_readonly("source", &Coreset::source);
    m.def(
        "build_coreset",
        [](const Eigen::MatrixXd& design, const std::vector<Count>& labels, int p, std::size_t k, std::uint64_t seed,
           const std::string& hull_mode, double eps) {
            const Dataset data = make_dataset(design, labels);
            const HullResult hull = hull_for(design, hull_mode, eps);
            const SensitivityScores scores = remainder_scores(data, p, hull, seed);
            return build_coreset(data, p, k, seed, hull, scores);
        },
        py::arg("design"), py::arg("labels"), py::arg("p"), py::arg("k"), py::arg("seed"),
        py::arg("hull_mode") = "exact", py::arg("eps") = 0.05);
    m.def(
        "build_uniform",
        [](const Eigen::MatrixXd& design, const std::vector<Count>& labels, std::size_t k, std::uint64_t seed,
           bool with_hull) {
            const Dataset data = make_dataset(design, labels);
            const HullResult hull = with_hull ? extreme_points_exact(design) : HullResult{};
            return build_uniform(data, k, seed, hull, with_hull);
        },
        py::arg("design"), py::arg("labels"), py::arg("k"), py::arg("seed"), py::arg("with_hull") = false);

    py::class_<FitResult>(m, "FitResult")
        .def_readonly("beta", &FitResult::beta)
        .def_readonly("objective", &FitResult::objective)
        .def_readonly("converged", &FitResult::converged)
        .def_readonly("outer_iterations", &FitResult::outer_iterations)
        .def_readonly("newton_iterations", &FitResult::newton_iterations)
        .def_readonly("objective_history", &FitResult::objective_history)
        .def_readonly("message", &FitResult::message);
    m.def(
        "minimize",
        [](const Eigen::MatrixXd& rows, const std::vector<Count>& labels, const std::vector<double>& weights, int p,
           double eta, const std::vector<std::size_t>& hull_indices) {
            OptimizerConfig cfg;
            cfg.eta = eta;
            return minimize(rows, labels, weights, p, cfg, hull_indices);
        },
        py::arg("rows"), py::arg("labels"), py::arg("weights"), py::arg("p"), py::arg("eta"), py::arg("hull_indices"));
    m.def(
        "minimize_coreset",
        [](const Coreset& c, int p, double eta) {
            OptimizerConfig cfg;
            cfg.eta = eta;
            return minimize(c, p, cfg);
        },
        py::arg("coreset"), py::arg("p"), py::arg("eta"));

    m.def(
        "summarize_ratios",
        [](const std::vector<double>& ratios) {
            std::vector<ExperimentRecord> records;
            for (std::size_t i = 0; i < ratios.size(); ++i) {
                ExperimentRecord r;
                r.method = "sample";
                r.rep = i;
                r.feasible = std::isfinite(ratios[i]);
                r.ratio = ratios[i];
                records.push_back(r);
            }
            const SummaryRow row = summarize(records).at(0);
            return py::dict(py::arg("median") = row.median, py::arg("lo") = row.lo, py::arg("hi") = row.hi,
                            py::arg("feasible_frac") = row.feasible_frac);
        },
        py::arg("ratios"), "Median and order-statistic band of approximation ratios (inf = infeasible).");
}
