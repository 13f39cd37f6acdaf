#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "pctl/errors.hpp"

namespace pctl {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Closed real interval with possibly infinite endpoints.
struct Interval {
    double lo;
    double hi;

    bool contains(double x) const noexcept { return lo <= x && x <= hi; }
    friend bool operator==(const Interval&, const Interval&) = default;
};

/// Finite union of real intervals: the set encoding of an atomic proposition.
///
/// Intervals are stored sorted and pairwise disjoint; overlapping or touching
/// inputs are merged on construction. Open/closed endpoint distinctions are
/// not represented since single points carry no mass under a continuous kernel.
class Region {
public:
    Region() = default;

    explicit Region(std::vector<Interval> intervals) : intervals_(std::move(intervals)) {
        for (const auto& iv : intervals_) {
            if (std::isnan(iv.lo) || std::isnan(iv.hi)) throw InvalidArgument("region endpoint is NaN");
            if (iv.lo > iv.hi) throw InvalidArgument("region interval has lo > hi");
        }
        normalize();
    }

    static Region whole() { return Region({{-kInf, kInf}}); }
    static Region empty() { return Region(); }

    const std::vector<Interval>& intervals() const noexcept { return intervals_; }
    bool is_empty() const noexcept { return intervals_.empty(); }

    bool contains(double x) const noexcept {
        return std::any_of(intervals_.begin(), intervals_.end(),
                           [x](const Interval& iv) { return iv.contains(x); });
    }

    friend bool operator==(const Region&, const Region&) = default;

private:
    void normalize() {
        std::sort(intervals_.begin(), intervals_.end(),
                  [](const Interval& a, const Interval& b) { return a.lo < b.lo || (a.lo == b.lo && a.hi < b.hi); });
        std::vector<Interval> merged;
        for (const auto& iv : intervals_) {
            if (!merged.empty() && iv.lo <= merged.back().hi) {
                merged.back().hi = std::max(merged.back().hi, iv.hi);
            } else {
                merged.push_back(iv);
            }
        }
        intervals_ = std::move(merged);
    }

    std::vector<Interval> intervals_;
};

}  // namespace pctl
