#include "boostvi/support_box.hpp"

#include <algorithm>
#include <cmath>

#include "boostvi/errors.hpp"

namespace bvi {

SupportBox::SupportBox(Vec lower, Vec upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
    if (lower_.empty() || lower_.size() != upper_.size())
        throw ArgumentError("support box: bounds must be non-empty and of equal length");
    for (std::size_t i = 0; i < lower_.size(); ++i) {
        if (!(lower_[i] < upper_[i]) || !std::isfinite(lower_[i]) || !std::isfinite(upper_[i]))
            throw ArgumentError("support box: requires finite lower[i] < upper[i]");
    }
}

bool SupportBox::contains(std::span<const double> z) const {
    if (z.size() != dim())
        throw ArgumentError("support box: point dimension mismatch");
    for (std::size_t i = 0; i < dim(); ++i) {
        if (z[i] < lower_[i] || z[i] > upper_[i]) return false;
    }
    return true;
}

double SupportBox::lebesgue_measure() const {
    double m = 1.0;
    for (std::size_t i = 0; i < dim(); ++i) m *= width(i);
    return m;
}

double SupportBox::diameter_sq() const {
    double d2 = 0.0;
    for (std::size_t i = 0; i < dim(); ++i) d2 += width(i) * width(i);
    return d2;
}

Vec SupportBox::center() const {
    Vec c(dim());
    for (std::size_t i = 0; i < dim(); ++i) c[i] = 0.5 * (lower_[i] + upper_[i]);
    return c;
}

Vec SupportBox::clamp(std::span<const double> z) const {
    if (z.size() != dim())
        throw ArgumentError("support box: point dimension mismatch");
    Vec out(z.begin(), z.end());
    for (std::size_t i = 0; i < dim(); ++i)
        out[i] = std::clamp(out[i], lower_[i], upper_[i]);
    return out;
}

} // namespace bvi
