#pragma once

#include <cstdint>
#include <functional>
#include <span>

#include "boostvi/rng.hpp"
#include "boostvi/support_box.hpp"

namespace bvi {

using Integrand = std::function<double(std::span<const double>)>;
using SampleFn = std::function<Vec(Rng&)>;

struct QuadratureSpec {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    std::size_t max_subdivisions = 4000;
};

struct McSpec {
    std::size_t n_samples = 0;
    std::uint64_t seed = 0;
};

struct McEstimate {
    double value = 0.0;
    double stderr_ = 0.0;
    std::size_t n = 0;
};

/// Adaptive Gauss-Kronrod (G7/K15, tensorized in 2-D) over the box.
/// Non-finite integrand values are replaced by zero (boundary guard).
/// Throws ArgumentError above two dimensions, ConvergenceError (carrying the
/// best estimate) when the subdivision budget runs out.
double integrate_box(const Integrand& f, const SupportBox& box,
                     const QuadratureSpec& spec = {});

/// Seeded Monte Carlo mean of f under the sampler. Fails fast on a
/// non-finite integrand value.
McEstimate expectation_mc(const Integrand& f, const SampleFn& draw, const McSpec& spec);

} // namespace bvi
