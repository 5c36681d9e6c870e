#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fraceig/audit_report.hpp"
#include "fraceig/io.hpp"

namespace fraceig {

/// Parameters of a named experiment; serialized verbatim into every output.
struct ExperimentConfig {
    std::string experiment = "suite";
    std::string domain = "0,1";
    double s = 0.5;
    double q = 1.5;
    std::vector<double> q_list;
    double h = 0.005;
    std::vector<double> h_list;
    double tol = 1e-10;
    std::size_t max_iter = 5000;
    std::size_t restarts = 50;
    double cluster_tol = 1e-6;
    std::uint64_t seed = 1;
    std::size_t samples = 100;
    std::vector<double> radii{0.25, 0.5, 1.0};
    double center = 0.0;
    std::vector<double> scales;
    double q_max = 2.5;
    std::size_t steps = 5;

    /// Throws InvalidParameter when a field is outside its valid range.
    void validate() const;
};

nlohmann::json to_json(const ExperimentConfig& config);

/// Fields absent from j keep the values already present in config.
void merge_json(ExperimentConfig& config, const nlohmann::json& j);

/// Machine-readable result of an experiment plus its flat CSV table.
struct ExperimentOutput {
    nlohmann::json json;
    std::string csv;
    bool hard_failure = false;
    bool soft_anomaly = false;
};

struct IsolationLevel {
    double h;
    double lambda1;
    std::optional<double> gap;
    std::optional<double> delta_l1;
    bool sign_witness;  ///< every value above λ1(1 + 1e-5) changes sign
    CriticalPointSet search;
};

struct IsolationReport {
    IsolationLevel coarse;
    IsolationLevel fine;
    std::optional<double> gap_relative_change;
    bool witness_found = false;
    bool pass = false;
    std::vector<std::string> flags;
};

IsolationReport run_isolation(const ExperimentConfig& config);
ExperimentOutput isolation_output(const ExperimentConfig& config, const IsolationReport& report);

struct QContinuityRow {
    double q;
    double lambda;
    double error;  ///< |λ1(q) - λ1(2)|
};

struct QContinuityTable {
    double lambda_q2;  ///< Jacobi oracle
    double lambda_q2_descent;
    std::vector<QContinuityRow> rows;
    bool decreasing = false;
    bool final_small = false;
    bool pass = false;
};

QContinuityTable run_q_continuity(const ExperimentConfig& config);
ExperimentOutput q_continuity_output(const ExperimentConfig& config, const QContinuityTable& table);

struct QScanRow {
    double q;
    std::size_t converged;
    std::size_t minimal;  ///< runs in the minimal-λ cluster
    double lambda_min;
    double max_distance;  ///< largest sign-aligned L² distance within the cluster
    bool simple;
};

struct QScanTable {
    std::vector<QScanRow> rows;
    double q_lower_bound;  ///< last q of the passing prefix
};

QScanTable run_qscan_super(const ExperimentConfig& config, double q_max, std::size_t steps);
ExperimentOutput qscan_output(const ExperimentConfig& config, const QScanTable& table);

struct ConvergenceRow {
    double h;
    std::size_t nodes;
    double lambda;
    std::optional<double> difference;  ///< |λ(h_prev) - λ(h)|
    std::optional<double> order;
    std::vector<double> scaled_deviation;  ///< per config.scales entry
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;
    std::optional<double> extrapolated;
    bool decreasing = false;
    double max_scaling_deviation = 0.0;
};

ConvergenceTable run_convergence(const ExperimentConfig& config);
ExperimentOutput convergence_output(const ExperimentConfig& config, const ConvergenceTable& table);

/// Sign lemma, minimum principle, Hardy, Picone, Hölder, converse L^∞,
/// comparison, exhaustion, Faber-Krahn and normalization identity, in that
/// order. Individual failures are collected, not short-circuited.
std::vector<AuditReport> run_audit_suite(const ExperimentConfig& config);

/// Same, on an explicitly supplied form (fault-injection entry point).
std::vector<AuditReport> run_audit_suite(const ExperimentConfig& config, const DiscreteGagliardoForm& form);

ExperimentOutput suite_output(const ExperimentConfig& config, const std::vector<AuditReport>& reports);

/// Dispatches on config.experiment.
ExperimentOutput run_experiment(const ExperimentConfig& config);

/// Process exit codes of the command-line driver.
enum ExitCode : int { kExitOk = 0, kExitHardFailure = 2, kExitReportAnomaly = 3, kExitConfigError = 64 };

}  // namespace fraceig
