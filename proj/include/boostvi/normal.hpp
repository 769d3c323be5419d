#pragma once

// Scalar normal distribution utilities. Everything here is deterministic
// and branch-stable so that seeded sample streams are reproducible.
//
// Accuracy: norm_cdf is computed through erfc and is accurate to better
// than 1e-12 absolute over the full double range; norm_quantile uses the
// Wichura AS241 rational approximations (~1e-15 relative).

#include <cmath>

namespace bvi {

inline constexpr double kSqrt2 = 1.4142135623730951;
inline constexpr double kLog2Pi = 1.8378770664093453;
inline constexpr double kInvSqrt2Pi = 0.3989422804014327;

/// Standard normal density.
inline double norm_pdf(double x) {
    return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

inline double norm_log_pdf(double x) {
    return -0.5 * (kLog2Pi + x * x);
}

/// Standard normal CDF via the complementary error function.
inline double norm_cdf(double x) {
    return 0.5 * std::erfc(-x / kSqrt2);
}

/// Upper tail P(Z > x), accurate for large positive x.
inline double norm_sf(double x) {
    return 0.5 * std::erfc(x / kSqrt2);
}

/// P(a < Z <= b) without cancellation when both endpoints share a tail.
inline double norm_interval_mass(double a, double b) {
    if (a > b) return 0.0;
    if (a > 0.0) return norm_sf(a) - norm_sf(b);
    if (b < 0.0) return norm_cdf(b) - norm_cdf(a);
    return 1.0 - norm_sf(b) - norm_cdf(a);
}

double norm_quantile(double p);

} // namespace bvi
