#include "boostvi/lmo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "boostvi/errors.hpp"
#include "boostvi/normal.hpp"
#include "boostvi/parallel.hpp"

namespace bvi {

namespace {

bool params_finite(const AtomParams& theta) {
    if (!std::isfinite(theta.sigma)) return false;
    for (double m : theta.mean)
        if (!std::isfinite(m)) return false;
    return true;
}

/// Lexicographic order on (mean, sigma) used by every tie rule here.
bool params_less(const TruncatedGaussianAtom& a, const TruncatedGaussianAtom& b) {
    if (a.mean() != b.mean()) return a.mean() < b.mean();
    return a.sigma() < b.sigma();
}

McEstimate eval_linear_value(const TruncatedGaussianAtom& atom, const PointFn& g,
                             std::size_t n_samples, std::uint64_t seed) {
    const SampleFn draw = [&](Rng& rng) { return atom.sample(rng); };
    return expectation_mc(g, draw, {n_samples, seed});
}

} // namespace

AtomParams project_params(AtomParams theta, const AtomFamilyConfig& cfg) {
    theta.mean = quantize_mean(cfg.box.clamp(theta.mean), cfg);
    theta.sigma = std::clamp(theta.sigma, cfg.sigma_min, cfg.sigma_max);
    return theta;
}

ScoreGradient score_gradient(const AtomParams& theta, const PointFn& g,
                             const AtomFamilyConfig& cfg, std::size_t n_samples,
                             VarianceReduction vr, Rng& rng) {
    if (n_samples < 1) throw ArgumentError("score_gradient: needs at least one sample");
    if (vr == VarianceReduction::LeaveOneOutBaseline && n_samples < 2)
        throw ArgumentError("score_gradient: leave-one-out baseline needs S >= 2");

    const std::size_t d = cfg.dim();
    const TruncatedGaussianAtom atom(theta.mean, theta.sigma, cfg.box);
    const double sigma = theta.sigma;

    // per-dimension truncation terms are sample-independent
    Vec alpha(d), beta(d), mass(d), mean_corr(d);
    double sigma_corr = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        alpha[i] = (cfg.box.lower()[i] - theta.mean[i]) / sigma;
        beta[i] = (cfg.box.upper()[i] - theta.mean[i]) / sigma;
        mass[i] = norm_interval_mass(alpha[i], beta[i]);
        mean_corr[i] = (norm_pdf(alpha[i]) - norm_pdf(beta[i])) / (sigma * mass[i]);
        sigma_corr += (alpha[i] * norm_pdf(alpha[i]) - beta[i] * norm_pdf(beta[i])) /
                      (sigma * mass[i]);
    }

    std::vector<Vec> samples(n_samples);
    Vec gvals(n_samples);
    for (std::size_t s = 0; s < n_samples; ++s) {
        samples[s] = atom.sample(rng);
        gvals[s] = g(samples[s]);
        if (!std::isfinite(gvals[s]))
            throw NumericError("score_gradient: non-finite gradient value at a sample");
    }

    double gsum = 0.0;
    for (double v : gvals) gsum += v;

    ScoreGradient out{Vec(d, 0.0), 0.0};
    for (std::size_t s = 0; s < n_samples; ++s) {
        double w = gvals[s];
        if (vr == VarianceReduction::LeaveOneOutBaseline)
            w -= (gsum - gvals[s]) / static_cast<double>(n_samples - 1);
        double r2 = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            const double t = samples[s][i] - theta.mean[i];
            r2 += t * t;
            out.d_mean[i] += w * (t / (sigma * sigma) - mean_corr[i]);
        }
        const double score_sigma =
            -static_cast<double>(d) / sigma + r2 / (sigma * sigma * sigma) - sigma_corr;
        out.d_sigma += w * score_sigma;
    }
    const double inv_n = 1.0 / static_cast<double>(n_samples);
    for (double& v : out.d_mean) v *= inv_n;
    out.d_sigma *= inv_n;
    return out;
}

LmoResult stochastic_lmo_fn(const PointFn& g, const LmoConfig& cfg,
                            const AtomFamilyConfig& family) {
    if (cfg.n_restarts < 1) throw ArgumentError("lmo: needs at least one restart");
    const std::size_t d = family.dim();
    const double sigma0 =
        cfg.learn_sigma ? 0.5 * (family.sigma_min + family.sigma_max) : family.sigma_min;

    // probe the box for the best-scoring point; seeds the first restart
    Vec probe_best = family.box.center();
    {
        Rng rng = Rng::seeded(cfg.seed, 17);
        double best = std::numeric_limits<double>::infinity();
        Vec z(d);
        for (std::size_t k = 0; k < cfg.probe_samples; ++k) {
            for (std::size_t i = 0; i < d; ++i)
                z[i] = rng.uniform(family.box.lower()[i], family.box.upper()[i]);
            const double v = g(z);
            if (!std::isfinite(v))
                throw NumericError("lmo: non-finite gradient value at a probe point");
            if (v < best) {
                best = v;
                probe_best = z;
            }
        }
    }

    const std::uint64_t eval_seed = derive_seed(cfg.seed, 23);
    std::vector<std::optional<LmoResult>> candidates(cfg.n_restarts);

    parallel_for(cfg.n_restarts, [&](std::size_t r) {
        Rng rng = Rng::seeded(cfg.seed, 1000 + r);
        AtomParams theta{probe_best, sigma0};
        if (r > 0) {
            theta.mean.resize(d);
            for (std::size_t i = 0; i < d; ++i)
                theta.mean[i] = rng.uniform(family.box.lower()[i], family.box.upper()[i]);
        }
        theta = project_params(std::move(theta), family);

        double eta = cfg.step_size;
        bool diverged = false;
        for (std::size_t l = 0; l < cfg.inner_steps; ++l) {
            const ScoreGradient grad = score_gradient(theta, g, family, cfg.samples_per_step,
                                                      cfg.variance_reduction, rng);
            for (std::size_t i = 0; i < d; ++i) theta.mean[i] -= eta * grad.d_mean[i];
            if (cfg.learn_sigma) theta.sigma -= eta * grad.d_sigma;
            if (!params_finite(theta)) {
                diverged = true;
                break;
            }
            theta = project_params(std::move(theta), family);
            eta *= cfg.step_decay;
        }
        if (diverged) return;
        TruncatedGaussianAtom atom = make_atom(theta.mean, theta.sigma, family);
        const McEstimate value = eval_linear_value(atom, g, cfg.eval_samples, eval_seed);
        candidates[r] = LmoResult{std::move(atom), value, std::nullopt};
    });

    std::optional<LmoResult> best;
    for (const auto& cand : candidates) {
        if (!cand) continue;
        if (!best || cand->linear_value.value < best->linear_value.value ||
            (cand->linear_value.value == best->linear_value.value &&
             params_less(cand->atom, best->atom)))
            best = cand;
    }
    if (!best) throw OracleError("lmo: every restart diverged to non-finite parameters");
    return *best;
}

LmoResult stochastic_lmo(const MixtureDensity& q, const TargetPosterior& target,
                         const LmoConfig& cfg, const AtomFamilyConfig& family) {
    const PointFn g = [&](std::span<const double> z) {
        return q.log_pdf(z) - target.log_target(z);
    };
    return stochastic_lmo_fn(g, cfg, family);
}

std::vector<TruncatedGaussianAtom> grid_atoms(const AtomFamilyConfig& family,
                                              const GridSpec& grid) {
    const std::size_t d = family.dim();
    if (grid.mean_counts.size() != d)
        throw ArgumentError("grid: mean_counts must give one count per dimension");
    if (grid.sigma_count < 1) throw ArgumentError("grid: sigma_count must be >= 1");
    for (std::size_t c : grid.mean_counts)
        if (c < 1) throw ArgumentError("grid: mean counts must be >= 1");

    std::vector<Vec> axes(d);
    for (std::size_t i = 0; i < d; ++i) {
        const std::size_t n = grid.mean_counts[i];
        Vec pts(n);
        if (n == 1) {
            pts[0] = 0.5 * (family.box.lower()[i] + family.box.upper()[i]);
        } else {
            const double h = family.box.width(i) / static_cast<double>(n - 1);
            for (std::size_t j = 0; j < n; ++j) pts[j] = family.box.lower()[i] + h * j;
        }
        axes[i] = std::move(pts);
    }
    Vec sigmas(grid.sigma_count);
    if (grid.sigma_count == 1) {
        sigmas[0] = family.sigma_min;
    } else {
        const double h =
            (family.sigma_max - family.sigma_min) / static_cast<double>(grid.sigma_count - 1);
        for (std::size_t j = 0; j < grid.sigma_count; ++j)
            sigmas[j] = family.sigma_min + h * j;
    }

    // mean-major, sigma-minor: enumeration order is the tie-break order
    std::vector<TruncatedGaussianAtom> atoms;
    std::vector<std::size_t> idx(d, 0);
    bool done = false;
    while (!done) {
        Vec mean(d);
        for (std::size_t i = 0; i < d; ++i) mean[i] = axes[i][idx[i]];
        for (double s : sigmas) atoms.push_back(make_atom(mean, s, family));
        done = true;
        for (std::size_t k = d; k-- > 0;) {
            if (++idx[k] < axes[k].size()) {
                done = false;
                break;
            }
            idx[k] = 0;
        }
    }
    return atoms;
}

LmoResult grid_lmo_fn(const PointFn& g, const AtomFamilyConfig& family, const GridSpec& grid,
                      const QuadratureSpec& spec) {
    if (family.dim() > 2)
        throw ArgumentError("grid_lmo: exhaustive oracle is limited to d <= 2");
    const std::vector<TruncatedGaussianAtom> atoms = grid_atoms(family, grid);
    if (atoms.empty()) throw ArgumentError("grid_lmo: empty grid");

    Vec values(atoms.size());
    parallel_for(atoms.size(), [&](std::size_t k) {
        const Integrand f = [&](std::span<const double> z) {
            const double s = atoms[k].pdf(z);
            return s == 0.0 ? 0.0 : s * g(z);
        };
        values[k] = integrate_box(f, family.box, spec);
    });

    std::size_t best = 0;
    for (std::size_t k = 1; k < atoms.size(); ++k) {
        const double tie = 1e-12 * std::max(1.0, std::fabs(values[best]));
        if (values[k] < values[best] - tie) {
            best = k;
        } else if (std::fabs(values[k] - values[best]) <= tie &&
                   params_less(atoms[k], atoms[best])) {
            best = k;
        }
    }
    return LmoResult{atoms[best], McEstimate{values[best], 0.0, 0}, 1.0};
}

LmoResult grid_lmo(const MixtureDensity& q, const TargetPosterior& target,
                   const AtomFamilyConfig& family, const GridSpec& grid,
                   const QuadratureSpec& spec) {
    const PointFn g = [&](std::span<const double> z) {
        return q.log_pdf(z) - target.log_target(z);
    };
    return grid_lmo_fn(g, family, grid, spec);
}

TruncatedGaussianAtom refine_atom(const TruncatedGaussianAtom& init, const PointFn& g,
                                  const LmoConfig& cfg, const AtomFamilyConfig& family) {
    Rng rng = Rng::seeded(cfg.seed, 31);
    AtomParams theta = project_params({init.mean(), init.sigma()}, family);
    double eta = cfg.step_size;
    for (std::size_t l = 0; l < cfg.inner_steps; ++l) {
        const ScoreGradient grad =
            score_gradient(theta, g, family, cfg.samples_per_step, cfg.variance_reduction, rng);
        for (std::size_t i = 0; i < theta.mean.size(); ++i)
            theta.mean[i] -= eta * grad.d_mean[i];
        if (cfg.learn_sigma) theta.sigma -= eta * grad.d_sigma;
        if (!params_finite(theta)) return init;
        theta = project_params(std::move(theta), family);
        eta *= cfg.step_decay;
    }
    return make_atom(theta.mean, theta.sigma, family);
}

std::optional<double> measure_delta(const LmoResult& candidate, const LmoResult& exact,
                                    const MixtureDensity& q, const TargetPosterior& target,
                                    const QuadratureSpec& spec) {
    const auto gap_of = [&](const TruncatedGaussianAtom& s) {
        const Integrand f = [&](std::span<const double> z) {
            const double g = q.log_pdf(z) - target.log_target(z);
            return (s.pdf(z) - q.pdf(z)) * g;
        };
        return integrate_box(f, q.box(), spec);
    };
    const double exact_gap = gap_of(exact.atom);
    if (exact_gap >= -1e-12) return std::nullopt; // no descent direction left
    const double cand_gap = gap_of(candidate.atom);
    return std::clamp(cand_gap / exact_gap, 0.0, 1.0);
}

} // namespace bvi
