#pragma once

#include <map>
#include <optional>
#include <string>

#include "boostvi/lmo.hpp"
#include "boostvi/simplex_qp.hpp"

namespace bvi {

enum class Algorithm { FwFixed, FwLinesearch, NormCorrective, FullyCorrective };

std::string algorithm_name(Algorithm a);
std::optional<Algorithm> algorithm_from_name(const std::string& name);

struct LmoChoice {
    bool use_grid = false;
    LmoConfig stochastic;
    GridSpec grid;
};

struct SolverConfig {
    Algorithm algorithm = Algorithm::FwFixed;
    std::size_t iterations = 30; // T
    double l_surrogate = 15.0;   // smoothness plugged into the quadratic surrogate
    double curvature = 0.0;      // 0 = use the theoretical bound
    LmoChoice lmo;
    std::optional<MixtureDensity> init; // default: one atom at the box center, sigma_max
    std::uint64_t seed = 0;
    bool early_stop = true;
    bool atom_correction = false; // re-optimize atom parameters after each step
    bool use_quadrature = true;   // honored only when the target has d <= 2
    QuadratureSpec quadrature;
    std::size_t mc_samples = 2048;       // objective / gap estimates
    std::size_t inner_max_iter = 400;    // weight-optimization budget
    double inner_tol = 1e-10;
    std::size_t inner_mc_samples = 2048; // CRN draws per atom (d > 2)
};

struct TraceRow {
    std::size_t t = 0;
    double objective = 0.0;
    double objective_stderr = 0.0;
    double gamma = 0.0;
    double gap = 0.0;
    double gap_stderr = 0.0;
    double lmo_value = 0.0;
    std::size_t active_atoms = 0;
    Vec weights;
    double wallclock_ms = 0.0;
};

struct ConvergenceTrace {
    std::vector<TraceRow> rows; // rows[0] describes the initial mixture
    bool converged = false;
    std::size_t stall_events = 0;
    std::size_t qp_fallbacks = 0;
    bool inner_budget_hit = false;
    std::string objective_metric; // "kl" or "neg_elbo"
    std::optional<MixtureDensity> final_mixture;
};

MixtureDensity default_init(const AtomFamilyConfig& family);

/// Variant 0 update: gamma = 2/(t+2).
MixtureDensity fw_step_fixed(const MixtureDensity& q, std::size_t t,
                             const TruncatedGaussianAtom& s);

/// Variant 1 update: gamma = clip_[0,1](gap / curvature); a non-positive gap
/// stalls the iterate.
struct LinesearchStep {
    MixtureDensity next;
    double gamma = 0.0;
    bool stalled = false;
};
LinesearchStep fw_step_linesearch(const MixtureDensity& q, const TruncatedGaussianAtom& s,
                                  double gap, double curvature);

/// Weight re-optimization over the active set, shared by the corrective
/// variants. Caches Gram entries and per-atom sample draws across calls.
class CorrectiveEngine {
public:
    CorrectiveEngine(const SolverConfig& cfg, const AtomFamilyConfig& family,
                     const TargetPosterior& target);

    /// Quadratic-surrogate weights against b = q - (1/L) grad f(q).
    /// On QP non-convergence falls back to one line-search step (recorded
    /// through `fell_back`; `fallback_curvature` supplies its step rule).
    MixtureDensity norm_corrective_step(const MixtureDensity& q,
                                        const TruncatedGaussianAtom& s, double l_surrogate,
                                        const std::vector<TruncatedGaussianAtom>& active_set,
                                        bool& fell_back, double fallback_curvature);

    /// Weights minimizing the objective itself over conv(active_set).
    MixtureDensity fully_corrective_step(const std::vector<TruncatedGaussianAtom>& active_set,
                                         const MixtureDensity& warm_start, bool& budget_hit);

    /// E_{s_i}[log q - log p] for one atom of the registry.
    double atom_expectation_g(const TruncatedGaussianAtom& atom, const MixtureDensity& q);

private:
    std::size_t find_or_add(const TruncatedGaussianAtom& atom);
    double gram_entry(std::size_t i, std::size_t j);
    const std::vector<Vec>& draws(std::size_t idx);
    double expectation_g_idx(std::size_t idx, const MixtureDensity& q);

    const SolverConfig& cfg_;
    const AtomFamilyConfig& family_;
    const TargetPosterior& target_;
    bool quadrature_mode_;
    std::vector<TruncatedGaussianAtom> registry_;
    std::map<std::pair<std::size_t, std::size_t>, double> gram_;
    std::vector<std::vector<Vec>> atom_draws_;
    std::vector<Vec> atom_log_p_;
};

/// A failure inside the outer loop (oracle divergence, integration budget)
/// carries the iterations completed so far.
class SolverFailure : public std::runtime_error {
public:
    SolverFailure(const std::string& what, ConvergenceTrace partial)
        : std::runtime_error(what), partial_(std::move(partial)) {}
    const ConvergenceTrace& partial_trace() const noexcept { return partial_; }

private:
    ConvergenceTrace partial_;
};

ConvergenceTrace run(const SolverConfig& cfg, const AtomFamilyConfig& family,
                     const TargetPosterior& target);

} // namespace bvi
