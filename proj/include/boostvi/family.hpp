#pragma once

#include <span>

#include "boostvi/rng.hpp"
#include "boostvi/support_box.hpp"

namespace bvi {

/// P(N(mean, sigma^2 I) lands in box). Factorizes over dimensions.
double truncation_mass(std::span<const double> mean, double sigma, const SupportBox& box);
double log_truncation_mass(std::span<const double> mean, double sigma, const SupportBox& box);

/// The atom family: isotropic Gaussians truncated to `box`, scale in
/// [sigma_min, sigma_max], means on a grid of spacing `mean_stride`
/// anchored at the lower corner (0 disables quantization).
struct AtomFamilyConfig {
    SupportBox box;
    double sigma_min = 0.0;
    double sigma_max = 0.0;
    double mean_stride = 0.0;

    AtomFamilyConfig(SupportBox b, double smin, double smax, double stride = 0.0);

    std::size_t dim() const noexcept { return box.dim(); }
};

/// Nearest grid point, ties toward the lower neighbour, clamped into the box.
Vec quantize_mean(std::span<const double> mean, const AtomFamilyConfig& cfg);

/// One mixture component. Normalized over its box:
///   pdf(z) = N(z; mean, sigma^2 I) / trunc_mass   for z in box, else 0.
class TruncatedGaussianAtom {
public:
    TruncatedGaussianAtom(Vec mean, double sigma, SupportBox box);

    std::size_t dim() const noexcept { return mean_.size(); }
    const Vec& mean() const noexcept { return mean_; }
    double sigma() const noexcept { return sigma_; }
    const SupportBox& box() const noexcept { return box_; }
    double trunc_mass() const noexcept { return trunc_mass_; }
    double log_trunc_mass() const noexcept { return log_trunc_mass_; }

    double pdf(std::span<const double> z) const;
    /// -inf outside the box.
    double log_pdf(std::span<const double> z) const;

    /// Exact inverse-CDF draw, one quantile per dimension.
    Vec sample(Rng& rng) const;

    /// Same support point in the family: equal box, sigma and mean bits.
    bool same_atom(const TruncatedGaussianAtom& other) const;

private:
    Vec mean_;
    double sigma_;
    SupportBox box_;
    double trunc_mass_;
    double log_trunc_mass_;
};

/// Builds the atom after validating membership in the family (mean inside
/// box, snapped to the grid; sigma clamped is NOT applied here - out-of-range
/// parameters are an error).
TruncatedGaussianAtom make_atom(std::span<const double> mean, double sigma,
                                const AtomFamilyConfig& cfg);

/// Uniform pdf bounds over the family, eq. the A2 constants.
///   epsilon: minimum of any family pdf over the box, attained by the
///            sigma_min atom centered at one diameter vertex and evaluated
///            at the opposite vertex.
///   m_upper: maximum, the sigma_min peak over the smallest corner mass.
/// Log-space values stay finite when the linear ones underflow.
struct FamilyBounds {
    double epsilon;
    double m_upper;
    double log_epsilon;
    double log_m_upper;
};

FamilyBounds family_bounds(const AtomFamilyConfig& cfg);

/// Both diameter bounds; `value()` is the tighter one. Log forms stay
/// representable when the linear ones overflow.
struct FamilyDiameter {
    double measure_bound;  // 4 M^2 L(A)
    double gaussian_bound; // 4 / (sigma_min^d (2 sqrt(pi))^d K^2)
    double log_measure_bound;
    double log_gaussian_bound;
    double value() const noexcept {
        return measure_bound < gaussian_bound ? measure_bound : gaussian_bound;
    }
    double log_value() const noexcept {
        return log_measure_bound < log_gaussian_bound ? log_measure_bound : log_gaussian_bound;
    }
};

FamilyDiameter family_diameter_bounds(const AtomFamilyConfig& cfg);
double family_diameter_sq(const AtomFamilyConfig& cfg);

/// K of the diameter bound: the smallest truncation mass over means in the
/// box at sigma_max (attained at a corner).
double family_min_trunc_mass(const AtomFamilyConfig& cfg, double sigma);

} // namespace bvi
