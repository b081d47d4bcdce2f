#include "poiscore/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "poiscore/coreset.hpp"
#include "poiscore/datagen.hpp"
#include "poiscore/envelopes.hpp"
#include "poiscore/rng.hpp"
#include "text_io.hpp"

namespace poiscore {

namespace {

using json = nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t method_id(const std::string& method) { return method == "coreset" ? 1 : 2; }

std::string fixed(double v, int digits = 2) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string short_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

}  // namespace

void ExperimentConfig::validate() const {
    require_link_power(p);
    if (sizes.empty()) throw std::invalid_argument("sizes must not be empty");
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        if (sizes[i] == 0) throw std::invalid_argument("sizes must be positive");
        if (i > 0 && sizes[i] <= sizes[i - 1]) throw std::invalid_argument("sizes must be strictly ascending");
    }
    if (repetitions < 1) throw std::invalid_argument("repetitions must be at least 1");
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
    if (!unsafe_eps && eps > 1.0 / 14.0)
        throw std::invalid_argument("eps above 1/14 is outside the approximation guarantee; pass unsafe_eps to explore");
    if (hull_mode == HullMode::eps_kernel && !(eps < 0.5)) throw std::invalid_argument("kernel eps must be below 1/2");
    if (!(reference_eta > 0.0)) throw std::invalid_argument("reference_eta must be positive");
    if (methods.empty()) throw std::invalid_argument("at least one method is required");
    std::set<std::string> seen;
    for (const auto& m : methods) {
        if (m != "coreset" && m != "uniform") throw std::invalid_argument("unknown method '" + m + "'");
        if (!seen.insert(m).second) throw std::invalid_argument("duplicate method '" + m + "'");
    }
    if (dataset_path.empty() && generator.family != "f2" && generator.family != "circle")
        throw std::invalid_argument("unknown generator family '" + generator.family + "'");
}

ExperimentConfig load_experiment_config(const std::string& path) {
    auto in = detail::open_input(path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
    static const std::set<std::string> known{"dataset", "generator", "p", "sizes", "repetitions", "eps",
                                             "seed0", "methods", "uniform_with_hull", "unsafe_eps", "timing",
                                             "hull", "reference_eta", "threads"};
    for (const auto& [key, value] : j.items())
        if (!known.contains(key)) throw std::invalid_argument(path + ": unknown key '" + key + "'");
    ExperimentConfig c;
    try {
        if (j.contains("dataset")) c.dataset_path = j["dataset"].get<std::string>();
        if (j.contains("generator")) {
            const auto& g = j["generator"];
            c.generator.family = g.value("family", c.generator.family);
            c.generator.n = g.value("n", c.generator.n);
            c.generator.d = g.value("d", c.generator.d);
            c.generator.seed = g.value("seed", c.generator.seed);
        }
        c.p = j.value("p", c.p);
        if (j.contains("sizes")) c.sizes = j["sizes"].get<std::vector<std::size_t>>();
        c.repetitions = j.value("repetitions", c.repetitions);
        c.eps = j.value("eps", c.eps);
        c.seed0 = j.value("seed0", c.seed0);
        if (j.contains("methods")) c.methods = j["methods"].get<std::vector<std::string>>();
        c.uniform_with_hull = j.value("uniform_with_hull", c.uniform_with_hull);
        c.unsafe_eps = j.value("unsafe_eps", c.unsafe_eps);
        c.timing = j.value("timing", c.timing);
        if (j.contains("hull")) {
            const auto mode = j["hull"].get<std::string>();
            if (mode == "exact") c.hull_mode = HullMode::exact;
            else if (mode == "eps_kernel") c.hull_mode = HullMode::eps_kernel;
            else throw std::invalid_argument("hull must be exact or eps_kernel");
        }
        c.reference_eta = j.value("reference_eta", c.reference_eta);
        c.threads = j.value("threads", c.threads);
    } catch (const json::exception& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
    c.validate();
    return c;
}

Dataset load_experiment_data(const ExperimentConfig& config) {
    if (!config.dataset_path.empty()) return read_dataset_csv(config.dataset_path);
    const auto& g = config.generator;
    if (g.family == "circle") return generate_circle(g.n, g.d, g.seed);
    return generate_f2(g.n, g.d, config.p, g.seed).data;
}

std::uint64_t repetition_seed(std::uint64_t seed0, std::size_t rep) {
    return seed0 + 1000003ULL * static_cast<std::uint64_t>(rep);
}

ExperimentResult run_experiment(const ExperimentConfig& config, const Dataset& data) {
    config.validate();
    ExperimentResult result;
    result.hull = config.hull_mode == HullMode::exact ? extreme_points_exact(data.design())
                                                      : eps_kernel(data.design(), config.eps);
    const double margin = constraint_margin(config.hull_mode, config.eps);

    OptimizerConfig ref_cfg;
    ref_cfg.eta = config.reference_eta;
    result.reference = minimize(data.design(), data.labels(), {}, config.p, ref_cfg, result.hull.indices);
    if (!std::isfinite(result.reference.objective))
        throw std::runtime_error("reference optimization failed: " + result.reference.message);
    const auto ref_loss = total_loss(data, result.reference.beta, config.p);
    if (!ref_loss) throw std::runtime_error("reference optimum is not strictly feasible on the full data");
    result.reference.objective = *ref_loss;
    const Membership ref_m = membership(data, result.reference.beta, 0.0);
    result.reference.feasible_full_data = ref_m.inside;
    result.reference.full_data_margin = ref_m.margin;

    OptimizerConfig fit_cfg;
    fit_cfg.eta = margin;
    result.shifted_reference = minimize(data.design(), data.labels(), {}, config.p, fit_cfg, result.hull.indices);
    const Membership shifted_m = membership(data, result.shifted_reference.beta, 0.0);
    result.shifted_reference.feasible_full_data = shifted_m.inside;
    result.shifted_reference.full_data_margin = shifted_m.margin;

    const bool want_scores = std::find(config.methods.begin(), config.methods.end(), "coreset") != config.methods.end();
    const std::size_t per_rep = config.methods.size() * config.sizes.size();
    std::vector<ExperimentRecord> slots(per_rep * config.repetitions);

    auto run_rep = [&](std::size_t rep) {
        const std::uint64_t seed = repetition_seed(config.seed0, rep);
        SensitivityScores scores;
        if (want_scores) {
            ConditioningConfig cc;
            cc.measure_distortion = false;
            scores = remainder_scores(data, config.p, result.hull, derive_seed(seed, 0x5c0e), cc);
        }
        for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
            const std::string& method = config.methods[mi];
            for (std::size_t ki = 0; ki < config.sizes.size(); ++ki) {
                const std::size_t k = config.sizes[ki];
                const auto start = std::chrono::steady_clock::now();
                const std::uint64_t sampler = derive_seed(seed, k, method_id(method));
                const Coreset reduced = method == "coreset"
                                            ? build_coreset(data, config.p, k, sampler, result.hull, scores)
                                            : build_uniform(data, k, sampler, result.hull, config.uniform_with_hull);
                const FitResult fit = minimize(reduced, config.p, fit_cfg);
                ExperimentRecord rec;
                rec.method = method;
                rec.k = k;
                rec.rep = rep;
                rec.seed = seed;
                rec.k_actual = static_cast<std::size_t>(reduced.rows.rows());
                rec.ratio = kInf;
                if (std::isfinite(fit.objective) && fit.beta.allFinite()) {
                    const auto loss = total_loss(data, fit.beta, config.p);
                    if (loss) {
                        rec.feasible = true;
                        rec.ratio = *loss / *ref_loss;
                    }
                }
                if (config.timing)
                    rec.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
                slots[(mi * config.sizes.size() + ki) * config.repetitions + rep] = std::move(rec);
            }
        }
    };

    unsigned workers = config.threads ? config.threads : std::max(1U, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, config.repetitions));
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    auto worker = [&](unsigned id) {
        try {
            for (std::size_t rep = next++; rep < config.repetitions; rep = next++) run_rep(rep);
        } catch (...) {
            errors[id] = std::current_exception();
            next = config.repetitions;
        }
    };
    if (workers <= 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned id = 0; id < workers; ++id) pool.emplace_back(worker, id);
        for (auto& t : pool) t.join();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    result.records = std::move(slots);
    return result;
}

std::vector<SummaryRow> summarize(const std::vector<ExperimentRecord>& records, bool feasible_only) {
    std::vector<std::pair<std::string, std::size_t>> order;
    std::map<std::pair<std::string, std::size_t>, std::vector<const ExperimentRecord*>> groups;
    for (const auto& r : records) {
        const auto key = std::make_pair(r.method, r.k);
        auto [it, inserted] = groups.try_emplace(key);
        if (inserted) order.push_back(key);
        it->second.push_back(&r);
    }
    std::sort(order.begin(), order.end(), [&](const auto& a, const auto& b) {
        const auto first = [&](const std::string& m) {
            return std::find_if(records.begin(), records.end(), [&](const auto& r) { return r.method == m; }) -
                   records.begin();
        };
        if (a.first != b.first) return first(a.first) < first(b.first);
        return a.second < b.second;
    });
    std::vector<SummaryRow> out;
    for (const auto& key : order) {
        const auto& group = groups[key];
        std::vector<double> values;
        std::size_t feasible = 0;
        for (const auto* r : group) {
            if (r->feasible) ++feasible;
            if (feasible_only && !r->feasible) continue;
            values.push_back(r->feasible ? r->ratio : kInf);
        }
        if (values.empty()) continue;
        std::sort(values.begin(), values.end());
        const std::size_t m = values.size();
        SummaryRow row;
        row.method = key.first;
        row.k = key.second;
        row.count = group.size();
        row.feasible_frac = static_cast<double>(feasible) / static_cast<double>(group.size());
        const double mid = (static_cast<double>(m) - 1.0) / 2.0;
        if (m % 2 == 1) {
            row.median = values[m / 2];
        } else {
            const double a = values[m / 2 - 1];
            const double b = values[m / 2];
            row.median = std::isinf(a) || std::isinf(b) ? kInf : 0.5 * (a + b);
        }
        const double half = std::sqrt(static_cast<double>(m));
        const auto lo_idx = static_cast<std::size_t>(std::max(0.0, std::floor(mid - half)));
        const auto hi_idx = static_cast<std::size_t>(std::min(static_cast<double>(m - 1), std::ceil(mid + half)));
        row.lo = values[lo_idx];
        row.hi = values[hi_idx];
        out.push_back(row);
    }
    return out;
}

std::string emit_plot(const std::vector<SummaryRow>& summary, bool log_y) {
    if (summary.empty()) throw std::invalid_argument("nothing to plot");
    constexpr double width = 760, height = 460;
    constexpr double x0 = 70, x1 = 580, y0 = 40, y1 = 400;

    auto transform = [log_y](double v) { return log_y ? std::log10(std::max(v, 1e-300)) : v; };
    double kmin = kInf, kmax = -kInf, vmin = kInf, vmax = -kInf;
    std::vector<std::string> methods;
    for (const auto& r : summary) {
        if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) methods.push_back(r.method);
        kmin = std::min(kmin, static_cast<double>(r.k));
        kmax = std::max(kmax, static_cast<double>(r.k));
        for (double v : {r.median, r.lo, r.hi}) {
            if (!std::isfinite(v)) continue;
            vmin = std::min(vmin, transform(v));
            vmax = std::max(vmax, transform(v));
        }
    }
    if (kmax == kmin) {
        kmin -= 1.0;
        kmax += 1.0;
    }
    if (!std::isfinite(vmin)) {
        vmin = 0.0;
        vmax = 1.0;
    }
    if (vmax - vmin < 1e-12 * std::max(1.0, std::abs(vmax))) {
        const double pad = std::max(1e-3, 1e-3 * std::abs(vmax));
        vmin -= pad;
        vmax += pad;
    } else {
        const double pad = 0.05 * (vmax - vmin);
        vmin -= pad;
        vmax += pad;
    }
    auto px = [&](double k) { return x0 + (k - kmin) / (kmax - kmin) * (x1 - x0); };
    auto py = [&](double v) {
        if (!std::isfinite(v)) return v > 0 ? y0 : y1;
        return y1 - (transform(v) - vmin) / (vmax - vmin) * (y1 - y0);
    };

    static const std::map<std::string, std::string> palette{{"coreset", "#d62728"}, {"uniform", "#1f77b4"}};
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    svg << "<text x=\"" << fixed((x0 + x1) / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">median approximation ratio</text>\n";
    svg << "<rect x=\"" << fixed(x0) << "\" y=\"" << fixed(y0) << "\" width=\"" << fixed(x1 - x0) << "\" height=\""
        << fixed(y1 - y0) << "\" fill=\"none\" stroke=\"#333\"/>\n";

    std::set<std::size_t> ks;
    for (const auto& r : summary) ks.insert(r.k);
    std::vector<double> xticks;
    if (ks.size() <= 15) {
        for (auto k : ks) xticks.push_back(static_cast<double>(k));
    } else {
        for (int t = 0; t <= 5; ++t) xticks.push_back(kmin + (kmax - kmin) * t / 5.0);
    }
    for (double k : xticks) {
        svg << "<line x1=\"" << fixed(px(k)) << "\" y1=\"" << fixed(y1) << "\" x2=\"" << fixed(px(k)) << "\" y2=\""
            << fixed(y1 + 5) << "\" stroke=\"#333\"/>";
        svg << "<text x=\"" << fixed(px(k)) << "\" y=\"" << fixed(y1 + 18) << "\" text-anchor=\"middle\">"
            << short_number(k) << "</text>\n";
    }
    for (int t = 0; t <= 4; ++t) {
        const double tv = vmin + (vmax - vmin) * t / 4.0;
        const double yy = y1 - (tv - vmin) / (vmax - vmin) * (y1 - y0);
        svg << "<line x1=\"" << fixed(x0 - 5) << "\" y1=\"" << fixed(yy) << "\" x2=\"" << fixed(x0) << "\" y2=\""
            << fixed(yy) << "\" stroke=\"#333\"/>";
        svg << "<text x=\"" << fixed(x0 - 8) << "\" y=\"" << fixed(yy + 4) << "\" text-anchor=\"end\">"
            << short_number(log_y ? std::pow(10.0, tv) : tv) << "</text>\n";
    }
    svg << "<text x=\"" << fixed((x0 + x1) / 2) << "\" y=\"" << fixed(y1 + 38)
        << "\" text-anchor=\"middle\">reduced size k</text>\n";
    svg << "<text x=\"18\" y=\"" << fixed((y0 + y1) / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
        << fixed((y0 + y1) / 2) << ")\">ratio" << (log_y ? " (log scale)" : "") << "</text>\n";

    const std::vector<std::string> fallback{"#2ca02c", "#9467bd", "#8c564b"};
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
        const std::string& method = methods[mi];
        const auto found = palette.find(method);
        const std::string color = found != palette.end() ? found->second : fallback[mi % fallback.size()];
        std::vector<const SummaryRow*> rows;
        for (const auto& r : summary)
            if (r.method == method) rows.push_back(&r);

        // bands: runs of consecutive sizes with a finite lower edge
        for (std::size_t s = 0; s < rows.size();) {
            if (!std::isfinite(rows[s]->lo)) {
                ++s;
                continue;
            }
            std::size_t e = s;
            while (e + 1 < rows.size() && std::isfinite(rows[e + 1]->lo)) ++e;
            svg << "<polygon fill=\"" << color << "\" fill-opacity=\"0.18\" stroke=\"none\" points=\"";
            for (std::size_t i = s; i <= e; ++i)
                svg << fixed(px(static_cast<double>(rows[i]->k))) << ',' << fixed(py(rows[i]->hi)) << ' ';
            for (std::size_t i = e + 1; i-- > s;)
                svg << fixed(px(static_cast<double>(rows[i]->k))) << ',' << fixed(py(rows[i]->lo))
                    << (i > s ? " " : "");
            svg << "\"/>\n";
            s = e + 1;
        }
        // median line, broken where the median is infinite
        for (std::size_t s = 0; s < rows.size();) {
            if (!std::isfinite(rows[s]->median)) {
                ++s;
                continue;
            }
            std::size_t e = s;
            while (e + 1 < rows.size() && std::isfinite(rows[e + 1]->median)) ++e;
            if (e > s) {
                svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
                for (std::size_t i = s; i <= e; ++i)
                    svg << fixed(px(static_cast<double>(rows[i]->k))) << ',' << fixed(py(rows[i]->median))
                        << (i < e ? " " : "");
                svg << "\"/>\n";
            }
            s = e + 1;
        }
        for (const auto* r : rows) {
            if (!std::isfinite(r->median)) continue;
            svg << "<circle cx=\"" << fixed(px(static_cast<double>(r->k))) << "\" cy=\"" << fixed(py(r->median))
                << "\" r=\"3\" fill=\"" << color << "\"/>\n";
        }
        std::size_t total = 0;
        for (const auto* r : rows) total += r->count;
        const double ly = y0 + 10 + 22.0 * static_cast<double>(mi);
        svg << "<line x1=\"600\" y1=\"" << fixed(ly) << "\" x2=\"625\" y2=\"" << fixed(ly) << "\" stroke=\"" << color
            << "\" stroke-width=\"2\"/>";
        svg << "<text x=\"632\" y=\"" << fixed(ly + 4) << "\">" << method << " (" << total << " records)</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

void write_records_csv(const std::vector<ExperimentRecord>& records, const std::string& path) {
    auto out = detail::open_output(path);
    out << "method,k,rep,seed,feasible,ratio,runtime_ms,k_actual\n";
    for (const auto& r : records)
        out << r.method << ',' << r.k << ',' << r.rep << ',' << r.seed << ',' << (r.feasible ? 1 : 0) << ','
            << detail::format_double(r.ratio) << ',' << fixed(r.runtime_ms, 3) << ',' << r.k_actual << '\n';
}

void write_summary_csv(const std::vector<SummaryRow>& summary, const std::string& path) {
    auto out = detail::open_output(path);
    out << "method,k,median,lo,hi,feasible_frac\n";
    for (const auto& r : summary)
        out << r.method << ',' << r.k << ',' << detail::format_double(r.median) << ',' << detail::format_double(r.lo)
            << ',' << detail::format_double(r.hi) << ',' << detail::format_double(r.feasible_frac) << '\n';
}

void write_experiment_outputs(const ExperimentConfig& config, const ExperimentResult& result, const std::string& dir) {
    std::filesystem::create_directories(dir);
    const std::filesystem::path base(dir);
    write_records_csv(result.records, (base / "records.csv").string());
    const auto summary = summarize(result.records);
    write_summary_csv(summary, (base / "summary.csv").string());
    write_summary_csv(summarize(result.records, true), (base / "summary_feasible.csv").string());
    bool spread = false;
    for (const auto& r : summary)
        if (std::isfinite(r.hi) && r.hi > 10.0) spread = true;
    auto svg = detail::open_output((base / "plot.svg").string());
    svg << emit_plot(summary, spread);
    write_hull_csv(result.hull, (base / "hull.csv").string());

    auto fit_json = [](const FitResult& f) {
        json j;
        j["beta"] = std::vector<double>(f.beta.data(), f.beta.data() + f.beta.size());
        j["objective"] = f.objective;
        j["converged"] = f.converged;
        j["outer_iterations"] = f.outer_iterations;
        j["newton_iterations"] = f.newton_iterations;
        j["full_data_margin"] = f.full_data_margin;
        return j;
    };
    json ref;
    ref["p"] = config.p;
    ref["eps"] = config.eps;
    ref["hull_mode"] = to_string(result.hull.mode);
    ref["hull_size"] = result.hull.indices.size();
    ref["scale_factor"] = result.hull.scale_factor;
    ref["reference"] = fit_json(result.reference);
    ref["reference"]["eta"] = config.reference_eta;
    ref["shifted_reference"] = fit_json(result.shifted_reference);
    ref["shifted_reference"]["eta"] = constraint_margin(config.hull_mode, config.eps);
    ref["unsafe_eps"] = config.unsafe_eps;
    auto out = detail::open_output((base / "reference.json").string());
    out << ref.dump(2) << '\n';
}

std::vector<VerifyRow> run_verification(const std::string& suite) {
    static const std::set<std::string> suites{"envelopes", "lambert", "rounding", "shift", "all"};
    if (!suites.contains(suite)) throw std::invalid_argument("unknown suite '" + suite + "'");
    const bool all = suite == "all";
    std::vector<VerifyRow> rows;

    if (all || suite == "envelopes") {
        std::set<Count> ys;
        for (int j = 0; j < 60; ++j) ys.insert(static_cast<Count>(std::llround(std::pow(10.0, 6.0 * j / 59.0))));
        for (int p : {1, 2}) {
            for (Count y : ys) {
                const double tau = p == 1 ? static_cast<double>(y) : std::sqrt(static_cast<double>(y));
                const auto grid = log_grid(tau, 100.0 * tau, 512);
                const SlackReport r = envelope_sandwich_check(y, p, grid);
                rows.push_back({"envelope", y, p, envelope_for(y, p).lambda, std::min(r.worst_lower, r.worst_upper), r.ok});
            }
        }
    }
    if (all || suite == "lambert") {
        std::vector<double> grid(100000);
        const double inv_e = 1.0 / std::numbers::e;
        for (std::size_t i = 0; i < grid.size(); ++i)
            grid[i] = -inv_e + inv_e * static_cast<double>(i) / static_cast<double>(grid.size());
        const LambertReport r = lambert_bounds_check(grid);
        rows.push_back({"lambert_bounds", 0, 0, r.worst_residual, std::min(r.worst_lower, r.worst_upper), r.ok});
        for (Count y : {1, 10, 100, 1000, 10000, 1000000}) {
            const TangencyResult t = lambda_star(y);
            const double scale = std::max(1.0, point_loss(y, t.z_star, 1));
            const double resid = std::max(t.residual_value / scale, t.residual_slope * t.lambda_star);
            bool ok = resid <= 1e-8;
            double slack = 1e-8 - resid;
            if (y >= 2) {
                const auto [lo, hi] = lambda_star_bracket(y);
                ok = ok && t.lambda_star >= lo && t.lambda_star <= hi;
                slack = std::min(slack, std::min(t.lambda_star - lo, hi - t.lambda_star) / t.lambda_star);
            }
            rows.push_back({"tangency", y, 1, t.lambda_star, slack, ok});
        }
    }
    if (all || suite == "rounding") {
        const auto grid = log_grid(1e-3, 1e4, 400);
        for (double eps : {0.05, 0.1, 0.25}) {
            for (Count y = 8; y <= 64; ++y) {
                double worst = kInf;
                bool ok = true;
                const auto top = static_cast<Count>(std::floor((1.0 + eps) * static_cast<double>(y) + 1e-9));
                for (Count yp = y + 1; yp <= top; ++yp) {
                    const SlackReport r = rounding_check(y, yp, eps, grid, 1e-12);
                    worst = std::min({worst, r.worst_lower, r.worst_upper});
                    ok = ok && r.ok;
                }
                if (top > y) rows.push_back({"rounding", y, 1, eps, worst, ok});
            }
        }
    }
    if (all || suite == "shift") {
        const std::vector<double> etas{0.0, 1e-4, 1e-3, 1e-2, 1e-1};
        for (int p : {1, 2}) {
            ShiftGapReport total;
            total.worst_slack = kInf;
            for (std::uint64_t inst = 0; inst < 10; ++inst) {
                const SimplexInstance f2 = generate_f2(200, 4, p, 1000 + inst);
                const ShiftGapReport r = shift_gap_check(f2.data, p, etas, 10, derive_seed(inst, 0x5f));
                total.ok = total.ok && r.ok;
                total.checks += r.checks;
                total.worst_slack = std::min(total.worst_slack, r.worst_slack);
                total.tightest_constant = std::max(total.tightest_constant, r.tightest_constant);
            }
            rows.push_back({"shift", 0, p, total.tightest_constant, total.worst_slack, total.ok});
        }
        const CounterexampleResult cx = counterexample_p_geq_3(3, 1.0, 0.01);
        rows.push_back({"counterexample", cx.y_witness, 3, 0.01, (cx.rhs - cx.lhs) / cx.rhs,
                        cx.lhs < cx.rhs && cx.shift_excess > cx.shift_allowance});
    }
    return rows;
}

void write_verify_csv(const std::vector<VerifyRow>& rows, const std::string& path) {
    auto out = detail::open_output(path);
    out << "check,y,p,param,worst_slack\n";
    for (const auto& r : rows)
        out << r.check << ',' << r.y << ',' << r.p << ',' << detail::format_double(r.param) << ','
            << detail::format_double(r.worst_slack) << '\n';
}

void write_generator_sidecar(const std::string& path, const std::string& family, std::uint64_t seed, int p,
                             const Eigen::VectorXd& true_beta) {
    json j;
    j["family"] = family;
    j["seed"] = seed;
    j["p"] = p;
    j["true_beta"] = std::vector<double>(true_beta.data(), true_beta.data() + true_beta.size());
    auto out = detail::open_output(path);
    out << j.dump(2) << '\n';
}

}  // namespace poiscore
