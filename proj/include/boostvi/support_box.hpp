#pragma once

#include <span>
#include <vector>

namespace bvi {

using Vec = std::vector<double>;

/// Compact axis-aligned support. Must be full-dimensional: lower[i] < upper[i].
class SupportBox {
public:
    SupportBox(Vec lower, Vec upper);

    std::size_t dim() const noexcept { return lower_.size(); }
    const Vec& lower() const noexcept { return lower_; }
    const Vec& upper() const noexcept { return upper_; }
    double width(std::size_t i) const { return upper_[i] - lower_[i]; }

    bool contains(std::span<const double> z) const;

    /// Product of the side lengths.
    double lebesgue_measure() const;

    /// Squared length of the main diagonal.
    double diameter_sq() const;

    Vec center() const;
    Vec clamp(std::span<const double> z) const;

    bool operator==(const SupportBox&) const = default;

private:
    Vec lower_;
    Vec upper_;
};

} // namespace bvi
