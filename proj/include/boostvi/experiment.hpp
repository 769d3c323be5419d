#pragma once

#include <map>
#include <string>

#include "boostvi/solvers.hpp"
#include "boostvi/targets.hpp"

namespace bvi {

/// A parsed, validated and default-resolved experiment description.
///
/// The on-disk format is a flat `section.key = value` text file; `#` starts
/// a comment. Unknown keys are rejected, as are keys that do not apply to
/// the selected target kind. The resolved form (all defaults materialized,
/// keys sorted) is what gets snapshotted next to each run, and re-running
/// from the snapshot reproduces the run.
class ExperimentConfig {
public:
    static ExperimentConfig load(const std::string& path);
    static ExperimentConfig from_text(const std::string& text);

    void override_seed(std::uint64_t seed);
    void override_output_dir(const std::string& dir);

    std::string algorithm() const;
    std::string target_kind() const;
    std::string output_dir() const;
    std::uint64_t seed() const;
    std::size_t dim() const;

    /// All keys equal except solver.algorithm (the cmd_compare contract).
    bool same_except_algorithm(const ExperimentConfig& other) const;

    /// Sorted `key = value` dump of the resolved configuration.
    std::string canonical_text() const;

    AtomFamilyConfig family() const;
    /// The density the solver runs against (truncated analytic or Bayesian
    /// joint). For logreg targets this loads the dataset.
    TargetPosterior build_target() const;
    /// Untruncated analytic density, when the target kind has one.
    std::optional<TargetPosterior> untruncated_target() const;

    SolverConfig solver_config() const;
    bool metric_kl_quadrature() const;
    bool metric_kl_mc() const;
    std::size_t metric_kl_mc_samples() const;
    bool metric_auc() const;
    std::size_t metric_auc_samples() const;
    std::string init_kind() const; // "center" | "meanfield"

    const std::map<std::string, std::string>& entries() const noexcept { return kv_; }
    const std::string& raw(const std::string& key) const;

    /// The dataset backing a logreg target.
    Dataset dataset() const;
    LogisticRegressionModel logreg_model() const;

private:
    ExperimentConfig() = default;
    void validate_and_resolve();

    std::map<std::string, std::string> kv_;
};

struct RunArtifacts {
    std::string trace_path;
    std::string summary_path;
    std::string config_snapshot_path;
};

struct RunOutput {
    ConvergenceTrace trace;
    std::string summary_json;
    RunArtifacts artifacts;
};

/// Runs the configured experiment and writes trace.csv, summary.json and
/// resolved.cfg (atomic temp+rename) under the output directory. On a solver
/// failure the partial trace is still written before the error propagates.
RunOutput run_experiment(const ExperimentConfig& cfg);

/// Serializes a trace in the fixed CSV layout
///   t,objective,objective_stderr,gamma,gap,gap_stderr,lmo_value,active_atoms,wallclock_ms
std::string trace_to_csv(const ConvergenceTrace& trace);

struct VerifyOutput {
    std::string report; // text or JSON
    bool all_passed;
};

/// Constants report plus quadrature spot checks (skipped above d = 2).
VerifyOutput verify_report(const ExperimentConfig& cfg, bool as_json);

} // namespace bvi
