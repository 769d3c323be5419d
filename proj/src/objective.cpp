#include "boostvi/objective.hpp"

#include <cmath>

#include "boostvi/errors.hpp"
#include "boostvi/normal.hpp"

namespace bvi {

TargetPosterior::TargetPosterior(Kind kind, std::size_t dim,
                                 std::function<double(std::span<const double>)> fn,
                                 bool normalized)
    : kind_(kind), dim_(dim), fn_(std::move(fn)), normalized_(normalized) {
    if (dim_ == 0) throw ArgumentError("target: dimension must be positive");
    if (!fn_) throw ArgumentError("target: log density callable required");
}

double TargetPosterior::log_target(std::span<const double> z) const {
    if (z.size() != dim_) throw ArgumentError("target: point dimension mismatch");
    return fn_(z);
}

ObjectiveConstants compute_constants(const AtomFamilyConfig& cfg) {
    const FamilyBounds fb = family_bounds(cfg);
    const FamilyDiameter fd = family_diameter_bounds(cfg);
    ObjectiveConstants c{};
    c.epsilon = fb.epsilon;
    c.m_upper = fb.m_upper;
    c.log_epsilon = fb.log_epsilon;
    c.log_m_upper = fb.log_m_upper;
    c.l_smooth = std::exp(-fb.log_epsilon);
    c.lebesgue = cfg.box.lebesgue_measure();
    c.diameter_sq_measure = fd.measure_bound;
    c.diameter_sq_gaussian = fd.gaussian_bound;
    c.diameter_sq = fd.value();
    c.log_curvature_bound = -fb.log_epsilon + fd.log_value();
    c.curvature_bound = std::exp(c.log_curvature_bound);
    return c;
}

double kl_quadrature(const MixtureDensity& q, const TargetPosterior& target,
                     const QuadratureSpec& spec) {
    if (target.dim() != q.dim()) throw ArgumentError("kl: dimension mismatch");
    const Integrand f = [&](std::span<const double> z) {
        const double lq = q.log_pdf(z);
        if (!std::isfinite(lq)) return 0.0; // boundary guard; q vanishes there
        return std::exp(lq) * (lq - target.log_target(z));
    };
    return integrate_box(f, q.box(), spec);
}

McEstimate kl_mc(const MixtureDensity& q, const TargetPosterior& target, const McSpec& spec) {
    if (target.dim() != q.dim()) throw ArgumentError("kl: dimension mismatch");
    const Integrand f = [&](std::span<const double> z) {
        return q.log_pdf(z) - target.log_target(z);
    };
    const SampleFn draw = [&](Rng& rng) { return q.sample(rng); };
    return expectation_mc(f, draw, spec);
}

double grad_log_ratio(const MixtureDensity& q, const TargetPosterior& target,
                      std::span<const double> z) {
    if (!q.box().contains(z))
        throw std::domain_error("grad_log_ratio: point outside the support box");
    return q.log_pdf(z) - target.log_target(z);
}

double truncation_loss(const TargetPosterior& target, const SupportBox& box,
                       const QuadratureSpec& spec) {
    if (target.dim() != box.dim()) throw ArgumentError("truncation_loss: dimension mismatch");
    const Integrand f = [&](std::span<const double> z) {
        return std::exp(target.log_target(z));
    };
    const double mass = integrate_box(f, box, spec);
    if (!(mass > 0.0)) throw NumericError("truncation_loss: non-positive mass estimate");
    return -std::log(mass);
}

McEstimate truncation_loss_mc(const TargetPosterior& target, const SupportBox& box,
                              const McSpec& spec) {
    if (target.dim() != box.dim()) throw ArgumentError("truncation_loss: dimension mismatch");
    // uniform importance sampling of the box mass
    const double leb = box.lebesgue_measure();
    const Integrand f = [&](std::span<const double> z) {
        return leb * std::exp(target.log_target(z));
    };
    const SampleFn draw = [&](Rng& rng) {
        Vec z(box.dim());
        for (std::size_t i = 0; i < box.dim(); ++i)
            z[i] = rng.uniform(box.lower()[i], box.upper()[i]);
        return z;
    };
    const McEstimate mass = expectation_mc(f, draw, spec);
    if (!(mass.value > 0.0)) throw NumericError("truncation_loss: non-positive mass estimate");
    return McEstimate{-std::log(mass.value), mass.stderr_ / mass.value, mass.n};
}

Theorem7Report theorem7_constant(const AtomFamilyConfig& cfg) {
    const double d = static_cast<double>(cfg.dim());
    const double log_p_a = std::log(family_min_trunc_mass(cfg, cfg.sigma_min));
    const double log_k = std::log(family_min_trunc_mass(cfg, cfg.sigma_max));
    const double diam_sq = cfg.box.diameter_sq();
    const double exp_term = 0.5 * diam_sq / (cfg.sigma_min * cfg.sigma_min);

    Theorem7Report r{};
    r.log_statement = std::log(4.0) + log_p_a -
                      0.5 * d * (std::log(cfg.sigma_min) + std::log(2.0)) - 2.0 * log_k +
                      exp_term;
    // chain from the proof: (1/epsilon) * gaussian diameter bound
    const FamilyBounds fb = family_bounds(cfg);
    r.log_appendix_chain = -fb.log_epsilon + family_diameter_bounds(cfg).log_gaussian_bound;
    r.statement = std::exp(r.log_statement);
    r.appendix_chain = std::exp(r.log_appendix_chain);
    return r;
}

GapEstimate duality_gap_mc(const MixtureDensity& q, const TruncatedGaussianAtom& s,
                           const TargetPosterior& target, const McSpec& spec) {
    const Integrand g = [&](std::span<const double> z) {
        return q.log_pdf(z) - target.log_target(z);
    };
    const SampleFn draw_q = [&](Rng& rng) { return q.sample(rng); };
    const SampleFn draw_s = [&](Rng& rng) { return s.sample(rng); };
    const McEstimate eq = expectation_mc(g, draw_q, {spec.n_samples, derive_seed(spec.seed, 1)});
    const McEstimate es = expectation_mc(g, draw_s, {spec.n_samples, derive_seed(spec.seed, 2)});
    return GapEstimate{eq.value - es.value, std::hypot(eq.stderr_, es.stderr_)};
}

GapEstimate duality_gap_quadrature(const MixtureDensity& q, const TruncatedGaussianAtom& s,
                                   const TargetPosterior& target, const QuadratureSpec& spec) {
    const Integrand f = [&](std::span<const double> z) {
        const double g = q.log_pdf(z) - target.log_target(z);
        return (q.pdf(z) - s.pdf(z)) * g;
    };
    return GapEstimate{integrate_box(f, q.box(), spec), 0.0};
}

} // namespace bvi
