#pragma once

// Coreset-versus-uniform experiment, its order-statistic summaries and SVG
// chart, the inequality verification suite, and file emission.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "poiscore/hull.hpp"
#include "poiscore/model.hpp"
#include "poiscore/optimizer.hpp"

namespace poiscore {

struct GeneratorSpec {
    std::string family = "f2";  ///< f2 | circle
    Eigen::Index n = 20000;
    Eigen::Index d = 7;
    std::uint64_t seed = 1;
};

struct ExperimentConfig {
    std::string dataset_path;      ///< CSV; when empty the generator spec is used
    GeneratorSpec generator;
    int p = 1;
    std::vector<std::size_t> sizes;
    std::size_t repetitions = 51;
    double eps = 0.05;
    std::uint64_t seed0 = 1;
    std::vector<std::string> methods{"coreset", "uniform"};
    bool uniform_with_hull = false;
    bool unsafe_eps = false;       ///< permit eps above 1/14
    bool timing = false;           ///< record wall-clock runtimes (records are then not byte-reproducible)
    HullMode hull_mode = HullMode::exact;
    double reference_eta = 1e-9;
    unsigned threads = 0;          ///< 0 = hardware concurrency

    /// Throws std::invalid_argument on an unusable configuration.
    void validate() const;
};

/// Reads a JSON configuration; unknown keys are rejected.
ExperimentConfig load_experiment_config(const std::string& path);

/// Loads the configured CSV or runs the configured generator.
Dataset load_experiment_data(const ExperimentConfig& config);

struct ExperimentRecord {
    std::string method;
    std::size_t k = 0;
    std::size_t rep = 0;
    std::uint64_t seed = 0;
    bool feasible = false;
    double ratio = 0.0;  ///< +inf iff infeasible on the full data
    double runtime_ms = 0.0;
    std::size_t k_actual = 0;
};

struct ExperimentResult {
    std::vector<ExperimentRecord> records;  ///< ordered by method, k, rep
    HullResult hull;
    FitResult reference;                    ///< full data at reference_eta
    FitResult shifted_reference;            ///< full data at eps
};

/// Per (method, k, repetition): build the reduced set, fit it over the shifted
/// domain, and score the fit on the full data against the reference optimum.
/// Throws std::runtime_error if the reference fit fails.
ExperimentResult run_experiment(const ExperimentConfig& config, const Dataset& data);

/// seed0 + 1000003 rep.
std::uint64_t repetition_seed(std::uint64_t seed0, std::size_t rep);

struct SummaryRow {
    std::string method;
    std::size_t k = 0;
    double median = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    double feasible_frac = 0.0;
    std::size_t count = 0;
};

/// Median per (method, k) with infeasible runs at +inf, and a band at the
/// order statistics (m-1)/2 -+ sqrt(m). With feasible_only set, infeasible
/// runs are dropped first and groups without a feasible run are omitted.
std::vector<SummaryRow> summarize(const std::vector<ExperimentRecord>& records, bool feasible_only = false);

/// SVG line chart of median ratio against k, one series per method, shaded
/// bands, and gaps where the median is infinite.
std::string emit_plot(const std::vector<SummaryRow>& summary, bool log_y = false);

void write_records_csv(const std::vector<ExperimentRecord>& records, const std::string& path);
void write_summary_csv(const std::vector<SummaryRow>& summary, const std::string& path);

/// records.csv, summary.csv, summary_feasible.csv, plot.svg, reference.json
/// and hull.csv under `dir` (created if missing).
void write_experiment_outputs(const ExperimentConfig& config, const ExperimentResult& result, const std::string& dir);

struct VerifyRow {
    std::string check;
    Count y = 0;
    int p = 0;
    double param = 0.0;
    double worst_slack = 0.0;
    bool ok = true;
};

/// Runs the inequality sweeps for `suite` in {envelopes, lambert, rounding,
/// shift, all}. Throws std::invalid_argument for an unknown suite.
std::vector<VerifyRow> run_verification(const std::string& suite);
void write_verify_csv(const std::vector<VerifyRow>& rows, const std::string& path);

/// Sidecar written next to a generated dataset.
void write_generator_sidecar(const std::string& path, const std::string& family, std::uint64_t seed, int p,
                             const Eigen::VectorXd& true_beta);

}  // namespace poiscore
