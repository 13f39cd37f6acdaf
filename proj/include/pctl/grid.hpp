#pragma once

#include <cmath>
#include <cstddef>
#include <optional>

#include "pctl/errors.hpp"

namespace pctl {

/// Uniform partition of [lo, hi) into half-open cells [lo + j h, lo + (j+1) h).
/// Each cell is represented by its center point.
class Grid {
public:
    Grid(double lo, double hi, std::size_t cells) : lo_(lo), hi_(hi), cells_(cells) {
        if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi))
            throw InvalidArgument("grid requires finite lo < hi");
        if (cells == 0) throw InvalidArgument("grid requires at least one cell");
    }

    double lo() const noexcept { return lo_; }
    double hi() const noexcept { return hi_; }
    std::size_t cells() const noexcept { return cells_; }
    double width() const noexcept { return (hi_ - lo_) / static_cast<double>(cells_); }

    double edge(std::size_t j) const noexcept {
        return j == cells_ ? hi_ : lo_ + static_cast<double>(j) * width();
    }
    double center(std::size_t i) const noexcept { return lo_ + (static_cast<double>(i) + 0.5) * width(); }

    /// Index of the cell containing x, or nullopt when x lies in a tail.
    std::optional<std::size_t> locate(double x) const noexcept {
        if (!(x >= lo_) || !(x < hi_)) return std::nullopt;
        auto j = static_cast<std::size_t>(std::floor((x - lo_) / width()));
        return j < cells_ ? j : cells_ - 1;
    }

    /// True when x coincides with a cell edge (lo and hi included), up to
    /// floating-point noise relative to the cell width.
    bool on_edge(double x) const noexcept {
        double t = (x - lo_) / width();
        return std::abs(t - std::round(t)) <= 1e-9 && t > -0.5 && t < static_cast<double>(cells_) + 0.5;
    }

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    double lo_;
    double hi_;
    std::size_t cells_;
};

}  // namespace pctl
