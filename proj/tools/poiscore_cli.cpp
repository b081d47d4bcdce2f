// poiscore: generate instances, build coresets, fit, run the sampling
// experiment and the inequality checks from the command line.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "poiscore/coreset.hpp"
#include "poiscore/datagen.hpp"
#include "poiscore/harness.hpp"
#include "poiscore/hull.hpp"
#include "poiscore/optimizer.hpp"

using namespace poiscore;

namespace {

bool is_coreset_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        return line.rfind("w,", 0) == 0;
    }
    return false;
}

HullResult compute_hull(const Dataset& data, const std::string& mode, double eps) {
    if (mode == "eps_kernel") return eps_kernel(data.design(), eps);
    return extreme_points_exact(data.design());
}

void check_eps(double eps, bool unsafe) {
    if (!(eps > 0.0)) throw std::invalid_argument("--eps must be positive");
    if (eps > 1.0 / 14.0 && !unsafe)
        throw std::invalid_argument("--eps above 1/14 is outside the approximation guarantee; add --unsafe-eps to run anyway");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Coresets and shifted-domain fitting for p-th-root-link Poisson regression"};
    app.require_subcommand(1);

    auto* gen = app.add_subcommand("generate", "write a synthetic dataset CSV and a JSON sidecar");
    std::string family = "f2", gen_out;
    long long gen_n = 20000, gen_d = 7;
    int gen_p = 1;
    std::uint64_t gen_seed = 1;
    gen->add_option("--family", family, "f2 or circle")->check(CLI::IsMember({"f2", "circle"}));
    gen->add_option("--n", gen_n, "rows");
    gen->add_option("--d", gen_d, "columns including the intercept");
    gen->add_option("--p", gen_p, "link power (f2 only)");
    gen->add_option("--seed", gen_seed);
    gen->add_option("--out", gen_out)->required();

    auto* cor = app.add_subcommand("coreset", "build a coreset or a uniform sample from a dataset CSV");
    std::string cor_in, cor_out, cor_method = "coreset", cor_hull = "exact", cor_scores, cor_hull_out;
    int cor_p = 1;
    std::size_t cor_k = 100;
    std::uint64_t cor_seed = 1;
    double cor_eps = 0.05;
    bool cor_with_hull = false;
    cor->add_option("--in", cor_in)->required();
    cor->add_option("--p", cor_p)->check(CLI::IsMember({1, 2}));
    cor->add_option("--k", cor_k);
    cor->add_option("--seed", cor_seed);
    cor->add_option("--out", cor_out)->required();
    cor->add_option("--method", cor_method)->check(CLI::IsMember({"coreset", "uniform"}));
    cor->add_option("--hull", cor_hull)->check(CLI::IsMember({"exact", "eps_kernel"}));
    cor->add_option("--eps", cor_eps, "kernel eps");
    cor->add_flag("--with-hull", cor_with_hull, "uniform baseline also carries the hull rows");
    cor->add_option("--scores-out", cor_scores, "write row_index,score,probability");
    cor->add_option("--hull-out", cor_hull_out, "write the hull row indices");

    auto* opt = app.add_subcommand("optimize", "fit over the shifted domain; input is a dataset or a coreset CSV");
    std::string opt_in, opt_out, opt_hull = "exact";
    int opt_p = 1;
    double opt_eps = 0.05;
    bool opt_unsafe = false;
    opt->add_option("--in", opt_in)->required();
    opt->add_option("--p", opt_p)->check(CLI::IsMember({1, 2}));
    opt->add_option("--eps", opt_eps);
    opt->add_option("--out", opt_out, "JSON-lines output (stdout when omitted)");
    opt->add_option("--hull", opt_hull)->check(CLI::IsMember({"exact", "eps_kernel"}));
    opt->add_flag("--unsafe-eps", opt_unsafe);

    auto* exp = app.add_subcommand("experiment", "coreset versus uniform sampling sweep");
    std::string exp_config, exp_out;
    bool exp_unsafe = false;
    exp->add_option("--config", exp_config, "JSON configuration")->required();
    exp->add_option("--out-dir", exp_out)->required();
    exp->add_flag("--unsafe-eps", exp_unsafe);

    auto* ver = app.add_subcommand("verify", "sweep the closed-form inequalities");
    std::string suite = "all", ver_out;
    ver->add_option("--suite", suite)->check(CLI::IsMember({"envelopes", "lambert", "rounding", "shift", "all"}));
    ver->add_option("--out", ver_out, "CSV check,y,p,param,worst_slack");

    auto* demo = app.add_subcommand("lowerbound-demo", "sensitivity lower bound on the circle instance");
    long long demo_n = 16;
    double demo_log_eta = 0.0;
    demo->add_option("--n", demo_n);
    demo->add_option("--log-eta", demo_log_eta, "natural log of eta (default -n^2)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            Eigen::VectorXd beta;
            Dataset data;
            if (family == "circle") {
                data = generate_circle(gen_n, gen_d, gen_seed);
            } else {
                SimplexInstance inst = generate_f2(gen_n, gen_d, gen_p, gen_seed);
                beta = inst.true_beta;
                data = std::move(inst.data);
            }
            write_dataset_csv(data, gen_out);
            write_generator_sidecar(gen_out + ".json", family, gen_seed, family == "circle" ? 1 : gen_p, beta);
            std::cout << "wrote " << data.rows() << " rows to " << gen_out << '\n';
        } else if (*cor) {
            const Dataset data = read_dataset_csv(cor_in);
            const HullResult hull = compute_hull(data, cor_hull, cor_eps);
            Coreset c;
            if (cor_method == "coreset") {
                const SensitivityScores scores = remainder_scores(data, cor_p, hull, cor_seed);
                if (!cor_scores.empty()) write_scores_csv(scores, cor_scores);
                c = build_coreset(data, cor_p, cor_k, cor_seed, hull, scores);
            } else {
                c = build_uniform(data, cor_k, cor_seed, hull, cor_with_hull);
            }
            if (!cor_hull_out.empty()) write_hull_csv(hull, cor_hull_out);
            write_coreset_csv(c, cor_out);
            std::cout << "hull rows " << c.hull_count << ", sampled " << c.rows.rows() - static_cast<long>(c.hull_count)
                      << ", wrote " << cor_out << '\n';
        } else if (*opt) {
            check_eps(opt_eps, opt_unsafe);
            OptimizerConfig cfg;
            FitResult fit;
            if (is_coreset_file(opt_in)) {
                const Coreset c = read_coreset_csv(opt_in);
                cfg.eta = constraint_margin(opt_hull == "exact" ? HullMode::exact : HullMode::eps_kernel, opt_eps);
                fit = minimize(c, opt_p, cfg);
            } else {
                const Dataset data = read_dataset_csv(opt_in);
                const HullResult hull = compute_hull(data, opt_hull, opt_eps);
                cfg.eta = constraint_margin(hull.mode, opt_eps);
                fit = minimize(data.design(), data.labels(), {}, opt_p, cfg, hull.indices);
                const Membership m = membership(data, fit.beta, 0.0);
                fit.feasible_full_data = m.inside;
                fit.full_data_margin = m.margin;
            }
            const std::string line = to_json_line(fit);
            if (opt_out.empty()) {
                std::cout << line << '\n';
            } else {
                std::ofstream out(opt_out);
                if (!out) throw std::runtime_error("cannot write " + opt_out);
                out << line << '\n';
                std::cout << (fit.converged ? "converged" : "not converged") << ", objective " << fit.objective << '\n';
            }
            return fit.converged ? 0 : 3;
        } else if (*exp) {
            ExperimentConfig config = load_experiment_config(exp_config);
            if (exp_unsafe) config.unsafe_eps = true;
            const Dataset data = load_experiment_data(config);
            const ExperimentResult result = run_experiment(config, data);
            write_experiment_outputs(config, result, exp_out);
            for (const auto& row : summarize(result.records))
                std::printf("%-8s k=%-5zu median=%-12.6g feasible=%.3f\n", row.method.c_str(), row.k, row.median,
                            row.feasible_frac);
        } else if (*ver) {
            const auto rows = run_verification(suite);
            bool ok = true;
            for (const auto& r : rows) {
                ok = ok && r.ok;
                if (!r.ok || r.check != "envelope")
                    std::printf("%-15s y=%-9lld p=%d param=%-12.6g worst_slack=%-12.6g %s\n", r.check.c_str(),
                                static_cast<long long>(r.y), r.p, r.param, r.worst_slack, r.ok ? "ok" : "FAIL");
            }
            std::printf("%zu checks, %s\n", rows.size(), ok ? "all hold" : "VIOLATIONS FOUND");
            if (!ver_out.empty()) write_verify_csv(rows, ver_out);
            return ok ? 0 : 1;
        } else if (*demo) {
            const double log_eta = demo_log_eta < 0.0 ? demo_log_eta : -static_cast<double>(demo_n * demo_n);
            const CircleDemo d = circle_sensitivity_demo(demo_n, log_eta);
            std::printf("n=%lld log_eta=%.6g point_cost=%.15g bound=%.15g exact_ratio=%.15g\n",
                        static_cast<long long>(d.n), d.log_eta, d.point_cost, d.bound, d.exact_ratio);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
