#pragma once

#include <optional>

#include "boostvi/objective.hpp"

namespace bvi {

/// Free parameters of one atom during the inner optimization.
struct AtomParams {
    Vec mean;
    double sigma;
};

enum class VarianceReduction { None, LeaveOneOutBaseline };

struct LmoConfig {
    std::size_t inner_steps = 60;       // projected-gradient steps per restart
    double step_size = 0.1;             // initial eta; decays geometrically
    double step_decay = 0.99;
    std::size_t samples_per_step = 32;  // S of the score estimator
    std::size_t n_restarts = 2;
    bool learn_sigma = false;
    std::uint64_t seed = 0;
    VarianceReduction variance_reduction = VarianceReduction::LeaveOneOutBaseline;
    std::size_t probe_samples = 256;    // box draws scored for the first init
    std::size_t eval_samples = 512;     // common-random-number candidate scoring
};

struct LmoResult {
    TruncatedGaussianAtom atom;
    McEstimate linear_value;            // estimate of E_s[g] = <grad f, s>
    std::optional<double> delta_measured;
};

/// Pointwise functional gradient g(z); for the boosting objective this is
/// log(q(z)/p(z)).
using PointFn = std::function<double(std::span<const double>)>;

/// Feasibility projection: clamp the mean into the box, snap it to the
/// quantization grid, clamp sigma into [sigma_min, sigma_max]. Idempotent.
AtomParams project_params(AtomParams theta, const AtomFamilyConfig& cfg);

struct ScoreGradient {
    Vec d_mean;
    double d_sigma;
};

/// Score-function estimate of the parameter gradient of E_{z~s(theta)}[g(z)]:
///   (1/S) sum_s g(z_s) grad_theta log s(z_s; theta),
/// where the score of a truncated Gaussian includes the truncation-mass
/// correction -grad_theta log P(N(mean, sigma^2 I) in box). The leave-one-out
/// baseline subtracts each sample's mean-of-others before weighting.
ScoreGradient score_gradient(const AtomParams& theta, const PointFn& g,
                             const AtomFamilyConfig& cfg, std::size_t n_samples,
                             VarianceReduction vr, Rng& rng);

/// Multi-restart stochastic projected-gradient search for argmin_s E_s[g].
LmoResult stochastic_lmo_fn(const PointFn& g, const LmoConfig& cfg,
                            const AtomFamilyConfig& family);
LmoResult stochastic_lmo(const MixtureDensity& q, const TargetPosterior& target,
                         const LmoConfig& cfg, const AtomFamilyConfig& family);

/// Exhaustive oracle over a mean lattice times a sigma ladder; every atom
/// scored by quadrature (d <= 2 only).
struct GridSpec {
    std::vector<std::size_t> mean_counts;
    std::size_t sigma_count = 1;
};

LmoResult grid_lmo_fn(const PointFn& g, const AtomFamilyConfig& family, const GridSpec& grid,
                      const QuadratureSpec& spec = {});
LmoResult grid_lmo(const MixtureDensity& q, const TargetPosterior& target,
                   const AtomFamilyConfig& family, const GridSpec& grid,
                   const QuadratureSpec& spec = {});

/// Accuracy ratio <g, s_cand - q> / <g, s_exact - q>, clipped into [0, 1].
/// Empty when the exact gap is non-negative (already converged; the ratio is
/// undefined there).
std::optional<double> measure_delta(const LmoResult& candidate, const LmoResult& exact,
                                    const MixtureDensity& q, const TargetPosterior& target,
                                    const QuadratureSpec& spec = {});

/// Enumerates the atoms of a grid (same lattice the grid oracle scans).
std::vector<TruncatedGaussianAtom> grid_atoms(const AtomFamilyConfig& family,
                                              const GridSpec& grid);

/// One projected-gradient chain started from an existing atom (the optional
/// per-atom correction of the corrective solvers). No probe, no restarts.
TruncatedGaussianAtom refine_atom(const TruncatedGaussianAtom& init, const PointFn& g,
                                  const LmoConfig& cfg, const AtomFamilyConfig& family);

} // namespace bvi
