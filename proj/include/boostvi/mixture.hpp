#pragma once

#include <span>
#include <vector>

#include "boostvi/family.hpp"

namespace bvi {

/// Convex combination of truncated Gaussian atoms over a shared box.
/// Weights live on the probability simplex; the constructor tolerates
/// 1e-12 of drift and renormalizes exactly.
class MixtureDensity {
public:
    MixtureDensity(std::vector<TruncatedGaussianAtom> atoms, Vec weights);

    explicit MixtureDensity(TruncatedGaussianAtom atom);

    std::size_t dim() const noexcept { return atoms_.front().dim(); }
    std::size_t size() const noexcept { return atoms_.size(); }
    const std::vector<TruncatedGaussianAtom>& atoms() const noexcept { return atoms_; }
    const Vec& weights() const noexcept { return weights_; }
    const SupportBox& box() const noexcept { return atoms_.front().box(); }

    double pdf(std::span<const double> z) const;
    /// Max-shifted log-sum-exp; exactly -inf iff z is outside the box.
    double log_pdf(std::span<const double> z) const;

    Vec sample(Rng& rng) const;
    std::vector<Vec> sample(std::size_t n, std::uint64_t seed) const;

    std::size_t active_count(double threshold = 1e-12) const;

    /// (1-gamma) q + gamma s. Merges `s` into an identical active atom and
    /// drops components whose weight vanishes.
    MixtureDensity blend(const TruncatedGaussianAtom& s, double gamma) const;

    /// Mixture over `atoms` with given weights, duplicates merged and
    /// near-zero components dropped.
    static MixtureDensity from_weighted_atoms(std::vector<TruncatedGaussianAtom> atoms,
                                              Vec weights, double drop_threshold = 0.0);

private:
    std::vector<TruncatedGaussianAtom> atoms_;
    Vec weights_;
};

} // namespace bvi
