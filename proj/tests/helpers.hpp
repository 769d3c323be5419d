#pragma once

// Shared fixtures and independent oracles for the test suites. Oracles here
// deliberately re-derive values from raw formulas instead of calling the
// code paths they check.

#include <cmath>
#include <functional>
#include <vector>

#include "boostvi/family.hpp"
#include "boostvi/mixture.hpp"
#include "boostvi/rng.hpp"

namespace bvi::testing {

inline double raw_normal_pdf(double z, double mu, double sigma) {
    const double t = (z - mu) / sigma;
    return std::exp(-0.5 * t * t) / (sigma * std::sqrt(2.0 * M_PI));
}

inline double raw_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Fixed-grid Simpson rule; an integration route independent of the
/// adaptive quadrature under test.
inline double simpson(const std::function<double(double)>& f, double a, double b,
                      int n = 4000) {
    if (n % 2) ++n;
    const double h = (b - a) / n;
    double acc = f(a) + f(b);
    for (int i = 1; i < n; i += 2) acc += 4.0 * f(a + i * h);
    for (int i = 2; i < n; i += 2) acc += 2.0 * f(a + i * h);
    return acc * h / 3.0;
}

inline TruncatedGaussianAtom random_atom(const AtomFamilyConfig& fam, Rng& rng) {
    Vec mean(fam.dim());
    for (std::size_t i = 0; i < fam.dim(); ++i)
        mean[i] = rng.uniform(fam.box.lower()[i], fam.box.upper()[i]);
    const double sigma = rng.uniform(fam.sigma_min, fam.sigma_max);
    return TruncatedGaussianAtom(quantize_mean(mean, fam), sigma, fam.box);
}

inline MixtureDensity random_mixture(const AtomFamilyConfig& fam, std::size_t n_atoms,
                                     Rng& rng) {
    std::vector<TruncatedGaussianAtom> atoms;
    Vec weights;
    double sum = 0.0;
    for (std::size_t i = 0; i < n_atoms; ++i) {
        atoms.push_back(random_atom(fam, rng));
        const double w = 0.05 + rng.uniform();
        weights.push_back(w);
        sum += w;
    }
    for (double& w : weights) w /= sum;
    return MixtureDensity::from_weighted_atoms(std::move(atoms), std::move(weights));
}

struct LineFit {
    double slope;
    double intercept;
    double r2;
};

/// Ordinary least squares of y on x.
inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
        syy += y[i] * y[i];
    }
    const double dn = static_cast<double>(n);
    const double cov = sxy - sx * sy / dn;
    const double varx = sxx - sx * sx / dn;
    const double vary = syy - sy * sy / dn;
    const double slope = cov / varx;
    const double intercept = (sy - slope * sx) / dn;
    const double r2 = vary > 0 ? cov * cov / (varx * vary) : 1.0;
    return LineFit{slope, intercept, r2};
}

} // namespace bvi::testing
