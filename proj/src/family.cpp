#include "boostvi/family.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "boostvi/errors.hpp"
#include "boostvi/normal.hpp"

namespace bvi {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Truncation mass of an atom sitting exactly on a box corner (the smallest
/// over all means in the box): product of one-sided masses P(0 < Z < w_i/s).
double log_corner_mass(const SupportBox& box, double sigma) {
    double lm = 0.0;
    for (std::size_t i = 0; i < box.dim(); ++i)
        lm += std::log(norm_interval_mass(0.0, box.width(i) / sigma));
    return lm;
}

} // namespace

double truncation_mass(std::span<const double> mean, double sigma, const SupportBox& box) {
    if (sigma <= 0.0) throw ArgumentError("truncation_mass: sigma must be positive");
    if (mean.size() != box.dim()) throw ArgumentError("truncation_mass: dimension mismatch");
    double m = 1.0;
    for (std::size_t i = 0; i < box.dim(); ++i) {
        const double a = (box.lower()[i] - mean[i]) / sigma;
        const double b = (box.upper()[i] - mean[i]) / sigma;
        m *= norm_interval_mass(a, b);
    }
    return m;
}

double log_truncation_mass(std::span<const double> mean, double sigma, const SupportBox& box) {
    if (sigma <= 0.0) throw ArgumentError("truncation_mass: sigma must be positive");
    if (mean.size() != box.dim()) throw ArgumentError("truncation_mass: dimension mismatch");
    double lm = 0.0;
    for (std::size_t i = 0; i < box.dim(); ++i) {
        const double a = (box.lower()[i] - mean[i]) / sigma;
        const double b = (box.upper()[i] - mean[i]) / sigma;
        lm += std::log(norm_interval_mass(a, b));
    }
    return lm;
}

AtomFamilyConfig::AtomFamilyConfig(SupportBox b, double smin, double smax, double stride)
    : box(std::move(b)), sigma_min(smin), sigma_max(smax), mean_stride(stride) {
    if (!(sigma_min > 0.0)) throw ArgumentError("family: sigma_min must be > 0");
    if (!(sigma_max >= sigma_min)) throw ArgumentError("family: sigma_max must be >= sigma_min");
    if (!(mean_stride >= 0.0)) throw ArgumentError("family: mean_stride must be >= 0");
}

Vec quantize_mean(std::span<const double> mean, const AtomFamilyConfig& cfg) {
    if (mean.size() != cfg.dim()) throw ArgumentError("quantize_mean: dimension mismatch");
    Vec out(mean.begin(), mean.end());
    if (cfg.mean_stride > 0.0) {
        for (std::size_t i = 0; i < out.size(); ++i) {
            const double steps = (out[i] - cfg.box.lower()[i]) / cfg.mean_stride;
            // nearest multiple, ties toward the lower grid point
            const double k = std::ceil(steps - 0.5);
            out[i] = cfg.box.lower()[i] + k * cfg.mean_stride;
        }
    }
    return cfg.box.clamp(out);
}

TruncatedGaussianAtom::TruncatedGaussianAtom(Vec mean, double sigma, SupportBox box)
    : mean_(std::move(mean)), sigma_(sigma), box_(std::move(box)) {
    if (mean_.size() != box_.dim())
        throw ArgumentError("atom: mean dimension mismatch");
    if (!(sigma_ > 0.0)) throw ArgumentError("atom: sigma must be positive");
    if (!box_.contains(mean_)) throw ArgumentError("atom: mean must lie in the support box");
    log_trunc_mass_ = log_truncation_mass(mean_, sigma_, box_);
    trunc_mass_ = std::exp(log_trunc_mass_);
}

double TruncatedGaussianAtom::log_pdf(std::span<const double> z) const {
    if (z.size() != dim()) throw ArgumentError("atom: point dimension mismatch");
    if (!box_.contains(z)) return kNegInf;
    double r2 = 0.0;
    for (std::size_t i = 0; i < dim(); ++i) {
        const double t = z[i] - mean_[i];
        r2 += t * t;
    }
    const double d = static_cast<double>(dim());
    return -d * std::log(sigma_) - 0.5 * d * kLog2Pi - 0.5 * r2 / (sigma_ * sigma_) -
           log_trunc_mass_;
}

double TruncatedGaussianAtom::pdf(std::span<const double> z) const {
    const double lp = log_pdf(z);
    return lp == kNegInf ? 0.0 : std::exp(lp);
}

Vec TruncatedGaussianAtom::sample(Rng& rng) const {
    Vec z(dim());
    for (std::size_t i = 0; i < dim(); ++i) {
        const double a = (box_.lower()[i] - mean_[i]) / sigma_;
        const double b = (box_.upper()[i] - mean_[i]) / sigma_;
        const double pa = norm_cdf(a);
        const double mass = norm_interval_mass(a, b);
        const double p = pa + rng.uniform() * mass;
        const double x = mean_[i] + sigma_ * norm_quantile(p);
        z[i] = std::clamp(x, box_.lower()[i], box_.upper()[i]);
    }
    return z;
}

bool TruncatedGaussianAtom::same_atom(const TruncatedGaussianAtom& other) const {
    return sigma_ == other.sigma_ && mean_ == other.mean_ && box_ == other.box_;
}

TruncatedGaussianAtom make_atom(std::span<const double> mean, double sigma,
                                const AtomFamilyConfig& cfg) {
    const double tol = 1e-12 * std::max(1.0, std::fabs(sigma));
    if (sigma < cfg.sigma_min - tol || sigma > cfg.sigma_max + tol)
        throw ArgumentError("make_atom: sigma outside [sigma_min, sigma_max]");
    const double s = std::clamp(sigma, cfg.sigma_min, cfg.sigma_max);
    return TruncatedGaussianAtom(quantize_mean(mean, cfg), s, cfg.box);
}

FamilyBounds family_bounds(const AtomFamilyConfig& cfg) {
    const double d = static_cast<double>(cfg.dim());
    const double s = cfg.sigma_min;
    const double log_peak = -d * std::log(s) - 0.5 * d * kLog2Pi;
    const double log_cm = log_corner_mass(cfg.box, s);
    // minimum: corner atom evaluated across the full diagonal
    const double log_eps =
        log_peak - 0.5 * cfg.box.diameter_sq() / (s * s) - log_cm;
    // maximum: peak of the corner atom (smallest truncation mass)
    const double log_m = log_peak - log_cm;
    return FamilyBounds{std::exp(log_eps), std::exp(log_m), log_eps, log_m};
}

double family_min_trunc_mass(const AtomFamilyConfig& cfg, double sigma) {
    return std::exp(log_corner_mass(cfg.box, sigma));
}

FamilyDiameter family_diameter_bounds(const AtomFamilyConfig& cfg) {
    const FamilyBounds fb = family_bounds(cfg);
    const double d = static_cast<double>(cfg.dim());
    const double log_measure =
        std::log(4.0) + 2.0 * fb.log_m_upper + std::log(cfg.box.lebesgue_measure());
    const double log_k = log_corner_mass(cfg.box, cfg.sigma_max);
    const double log_gauss = std::log(4.0) - d * std::log(cfg.sigma_min) -
                             d * std::log(2.0 * std::sqrt(M_PI)) - 2.0 * log_k;
    return FamilyDiameter{std::exp(log_measure), std::exp(log_gauss), log_measure, log_gauss};
}

double family_diameter_sq(const AtomFamilyConfig& cfg) {
    return family_diameter_bounds(cfg).value();
}

} // namespace bvi
