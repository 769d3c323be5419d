#include "boostvi/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "boostvi/errors.hpp"

namespace bvi {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kSimplexTol = 1e-12;
} // namespace

MixtureDensity::MixtureDensity(std::vector<TruncatedGaussianAtom> atoms, Vec weights)
    : atoms_(std::move(atoms)), weights_(std::move(weights)) {
    if (atoms_.empty() || atoms_.size() != weights_.size())
        throw ArgumentError("mixture: needs matching, non-empty atoms and weights");
    for (const auto& a : atoms_) {
        if (!(a.box() == atoms_.front().box()))
            throw ArgumentError("mixture: all atoms must share one support box");
    }
    double sum = 0.0;
    for (double& w : weights_) {
        if (w < -kSimplexTol) throw ArgumentError("mixture: negative weight");
        if (w < 0.0) w = 0.0;
        sum += w;
    }
    if (std::fabs(sum - 1.0) > kSimplexTol)
        throw ArgumentError("mixture: weights must sum to 1 within 1e-12");
    for (double& w : weights_) w /= sum;
}

MixtureDensity::MixtureDensity(TruncatedGaussianAtom atom)
    : atoms_{std::move(atom)}, weights_{1.0} {}

double MixtureDensity::pdf(std::span<const double> z) const {
    double v = 0.0;
    for (std::size_t i = 0; i < atoms_.size(); ++i) v += weights_[i] * atoms_[i].pdf(z);
    return v;
}

double MixtureDensity::log_pdf(std::span<const double> z) const {
    if (!box().contains(z)) return kNegInf;
    double max_term = kNegInf;
    Vec terms(atoms_.size(), kNegInf);
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
        if (weights_[i] <= 0.0) continue;
        terms[i] = std::log(weights_[i]) + atoms_[i].log_pdf(z);
        max_term = std::max(max_term, terms[i]);
    }
    double acc = 0.0;
    for (double t : terms) {
        if (t != kNegInf) acc += std::exp(t - max_term);
    }
    return max_term + std::log(acc);
}

Vec MixtureDensity::sample(Rng& rng) const {
    const double u = rng.uniform();
    double cum = 0.0;
    std::size_t pick = atoms_.size() - 1;
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
        cum += weights_[i];
        if (u < cum) {
            pick = i;
            break;
        }
    }
    return atoms_[pick].sample(rng);
}

std::vector<Vec> MixtureDensity::sample(std::size_t n, std::uint64_t seed) const {
    Rng rng(seed);
    std::vector<Vec> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(sample(rng));
    return out;
}

std::size_t MixtureDensity::active_count(double threshold) const {
    std::size_t n = 0;
    for (double w : weights_)
        if (w > threshold) ++n;
    return n;
}

MixtureDensity MixtureDensity::blend(const TruncatedGaussianAtom& s, double gamma) const {
    std::vector<TruncatedGaussianAtom> atoms = atoms_;
    Vec weights = weights_;
    for (double& w : weights) w *= (1.0 - gamma);
    bool merged = false;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        if (atoms[i].same_atom(s)) {
            weights[i] += gamma;
            merged = true;
            break;
        }
    }
    if (!merged) {
        atoms.push_back(s);
        weights.push_back(gamma);
    }
    return from_weighted_atoms(std::move(atoms), std::move(weights), 1e-15);
}

MixtureDensity MixtureDensity::from_weighted_atoms(std::vector<TruncatedGaussianAtom> atoms,
                                                   Vec weights, double drop_threshold) {
    if (atoms.size() != weights.size() || atoms.empty())
        throw ArgumentError("mixture: needs matching, non-empty atoms and weights");
    std::vector<TruncatedGaussianAtom> out_atoms;
    Vec out_weights;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        bool merged = false;
        for (std::size_t j = 0; j < out_atoms.size(); ++j) {
            if (out_atoms[j].same_atom(atoms[i])) {
                out_weights[j] += weights[i];
                merged = true;
                break;
            }
        }
        if (!merged) {
            out_atoms.push_back(std::move(atoms[i]));
            out_weights.push_back(weights[i]);
        }
    }
    // keep at least the heaviest atom even if all weights are tiny
    std::size_t best = 0;
    for (std::size_t j = 1; j < out_weights.size(); ++j)
        if (out_weights[j] > out_weights[best]) best = j;
    std::vector<TruncatedGaussianAtom> kept_atoms;
    Vec kept_weights;
    for (std::size_t j = 0; j < out_atoms.size(); ++j) {
        if (out_weights[j] > drop_threshold || j == best) {
            kept_atoms.push_back(std::move(out_atoms[j]));
            kept_weights.push_back(std::max(out_weights[j], 0.0));
        }
    }
    double sum = 0.0;
    for (double w : kept_weights) sum += w;
    if (!(sum > 0.0)) throw NumericError("mixture: total weight vanished");
    for (double& w : kept_weights) w /= sum;
    return MixtureDensity(std::move(kept_atoms), std::move(kept_weights));
}

} // namespace bvi
