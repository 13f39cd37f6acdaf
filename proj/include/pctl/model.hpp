#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "pctl/errors.hpp"
#include "pctl/grid.hpp"
#include "pctl/kernel.hpp"
#include "pctl/region.hpp"

namespace pctl {

/// Set of grid states satisfying a state formula.
///
/// Cells are classified by their center. The two grid tails (below lo, above hi)
/// are tracked as whole pseudo-states; nullopt means membership of that tail
/// cannot be decided on the grid (e.g. the tail of a "next" formula).
struct SatSet {
    std::vector<bool> mask;
    std::optional<bool> lower_tail;
    std::optional<bool> upper_tail;

    static SatSet all(std::size_t cells) { return {std::vector<bool>(cells, true), true, true}; }
    static SatSet none(std::size_t cells) { return {std::vector<bool>(cells, false), false, false}; }

    std::size_t size() const noexcept { return mask.size(); }
    std::size_t count() const noexcept {
        std::size_t n = 0;
        for (bool b : mask) n += b;
        return n;
    }

    /// Membership of an arbitrary state. Throws if x lies in an undecided tail.
    bool contains(const Grid& grid, double x) const {
        if (auto cell = grid.locate(x)) return mask[*cell];
        const auto& tail = x < grid.lo() ? lower_tail : upper_tail;
        if (!tail) throw InvalidArgument("membership of grid tail is undetermined at x = " + std::to_string(x));
        return *tail;
    }

    /// Maximal runs of satisfying cells, reported as [first center, last center].
    std::vector<Interval> intervals(const Grid& grid) const {
        std::vector<Interval> out;
        for (std::size_t i = 0; i < mask.size(); ++i) {
            if (!mask[i]) continue;
            std::size_t j = i;
            while (j + 1 < mask.size() && mask[j + 1]) ++j;
            out.push_back({grid.center(i), grid.center(j)});
            i = j;
        }
        return out;
    }

    friend bool operator==(const SatSet&, const SatSet&) = default;
};

inline SatSet complement(const SatSet& a) {
    SatSet out{std::vector<bool>(a.size()), std::nullopt, std::nullopt};
    for (std::size_t i = 0; i < a.size(); ++i) out.mask[i] = !a.mask[i];
    if (a.lower_tail) out.lower_tail = !*a.lower_tail;
    if (a.upper_tail) out.upper_tail = !*a.upper_tail;
    return out;
}

namespace detail {
// Three-valued connectives for tail membership.
inline std::optional<bool> tail_and(std::optional<bool> a, std::optional<bool> b) {
    if (a == false || b == false) return false;
    if (a && b) return true;
    return std::nullopt;
}
inline std::optional<bool> tail_or(std::optional<bool> a, std::optional<bool> b) {
    if (a == true || b == true) return true;
    if (a && b) return false;
    return std::nullopt;
}
inline void require_same_size(const SatSet& a, const SatSet& b) {
    if (a.size() != b.size()) throw InvalidArgument("satisfaction sets have different sizes");
}
}  // namespace detail

inline SatSet intersection(const SatSet& a, const SatSet& b) {
    detail::require_same_size(a, b);
    SatSet out{std::vector<bool>(a.size()), detail::tail_and(a.lower_tail, b.lower_tail),
               detail::tail_and(a.upper_tail, b.upper_tail)};
    for (std::size_t i = 0; i < a.size(); ++i) out.mask[i] = a.mask[i] && b.mask[i];
    return out;
}

inline SatSet union_of(const SatSet& a, const SatSet& b) {
    detail::require_same_size(a, b);
    SatSet out{std::vector<bool>(a.size()), detail::tail_or(a.lower_tail, b.lower_tail),
               detail::tail_or(a.upper_tail, b.upper_tail)};
    for (std::size_t i = 0; i < a.size(); ++i) out.mask[i] = a.mask[i] || b.mask[i];
    return out;
}

/// A stochastic kernel on a grid together with the regions that give atomic
/// propositions their meaning. Immutable after construction.
class Model {
public:
    Model(Kernel kernel, Grid grid, std::map<std::string, Region> regions)
        : kernel_(std::move(kernel)), grid_(grid), dk_(discretize(kernel_, grid_)), regions_(std::move(regions)) {
        for (const auto& [name, region] : regions_) region_sets_.emplace(name, classify(name, region));
    }

    const Kernel& kernel() const noexcept { return kernel_; }
    const Grid& grid() const noexcept { return grid_; }
    const DiscretizedKernel& dk() const noexcept { return dk_; }
    const std::map<std::string, Region>& regions() const noexcept { return regions_; }
    bool is_finite() const noexcept { return std::holds_alternative<FiniteKernel>(kernel_); }

    /// Satisfaction set of an atomic proposition. Throws UnboundAtom.
    const SatSet& region_set(const std::string& name) const {
        auto it = region_sets_.find(name);
        if (it == region_sets_.end()) throw UnboundAtom(name);
        return it->second;
    }

    SatSet to_sat_set(const Region& region) const { return classify("<anonymous>", region); }

private:
    SatSet classify(const std::string& name, const Region& region) const {
        // Finite chains put one state per cell, so a region can never split a cell there.
        if (!is_finite()) {
            for (const auto& iv : region.intervals()) {
                for (double e : {iv.lo, iv.hi}) {
                    if (std::isfinite(e) && e > grid_.lo() && e < grid_.hi() && !grid_.on_edge(e))
                        throw InvalidArgument("region '" + name + "' endpoint " + std::to_string(e) +
                                              " is not on a cell boundary");
                }
            }
        }
        SatSet s{std::vector<bool>(grid_.cells()), std::nullopt, std::nullopt};
        for (std::size_t i = 0; i < grid_.cells(); ++i) s.mask[i] = region.contains(grid_.center(i));

        bool lower_all = false, lower_none = true, upper_all = false, upper_none = true;
        for (const auto& iv : region.intervals()) {
            if (iv.lo == -kInf && iv.hi >= grid_.lo()) lower_all = true;
            if (iv.lo < grid_.lo()) lower_none = false;
            if (iv.hi == kInf && iv.lo <= grid_.hi()) upper_all = true;
            if (iv.hi > grid_.hi()) upper_none = false;
        }
        if (!lower_all && !lower_none)
            throw InvalidArgument("region '" + name + "' partially covers the grid's lower tail");
        if (!upper_all && !upper_none)
            throw InvalidArgument("region '" + name + "' partially covers the grid's upper tail");
        s.lower_tail = lower_all;
        s.upper_tail = upper_all;
        return s;
    }

    Kernel kernel_;
    Grid grid_;
    DiscretizedKernel dk_;
    std::map<std::string, Region> regions_;
    std::map<std::string, SatSet> region_sets_;
};

}  // namespace pctl
