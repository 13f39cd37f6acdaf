#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "pctl/errors.hpp"
#include "pctl/grid.hpp"
#include "pctl/region.hpp"

namespace pctl {

/// Standard normal distribution function.
inline double normal_cdf(double z) noexcept { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

/// Finite Markov chain embedded on the real line: state s sits at state_values[s].
struct FiniteKernel {
    std::size_t size() const noexcept { return state_values.size(); }
    double probability(std::size_t from, std::size_t to) const noexcept { return matrix[from * size() + to]; }

    /// Index of the state located at x, or size() when no state sits there.
    std::size_t state_at(double x) const noexcept {
        for (std::size_t s = 0; s < size(); ++s) {
            if (std::abs(state_values[s] - x) <= 1e-9 * std::max(1.0, std::abs(x))) return s;
        }
        return size();
    }

    std::vector<double> matrix;  // row-major, size() x size()
    std::vector<double> state_values;
};

/// One-step law x -> N(mean(x), stddev(x)^2); stddev(x) == 0 is a Dirac mass at mean(x).
struct AffineGaussianKernel {
    double mean_at(double x) const { return mean(x); }
    double stddev_at(double x) const {
        double s = stddev(x);
        if (!(s >= 0.0) || !std::isfinite(s))
            throw InvalidArgument("kernel standard deviation must be finite and nonnegative at x = " +
                                  std::to_string(x));
        return s;
    }

    std::function<double(double)> mean;
    std::function<double(double)> stddev;
};

/// Stochastic kernel Q(x, .): a probability measure on the real line for every state x.
using Kernel = std::variant<FiniteKernel, AffineGaussianKernel>;

inline Kernel finite_kernel(const std::vector<std::vector<double>>& matrix, std::vector<double> state_values) {
    const std::size_t n = matrix.size();
    if (n == 0) throw InvalidArgument("transition matrix is empty");
    if (state_values.size() != n)
        throw InvalidArgument("expected " + std::to_string(n) + " state values, got " +
                              std::to_string(state_values.size()));
    FiniteKernel k;
    k.matrix.reserve(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        if (matrix[i].size() != n) throw InvalidArgument("transition matrix is not square");
        double sum = 0.0;
        for (double p : matrix[i]) {
            if (!(p >= 0.0 && p <= 1.0))
                throw InvalidArgument("transition probability outside [0,1] in row " + std::to_string(i));
            sum += p;
            k.matrix.push_back(p);
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw InvalidArgument("row " + std::to_string(i) + " sums to " + std::to_string(sum) + ", not 1");
    }
    for (double v : state_values) {
        if (!std::isfinite(v)) throw InvalidArgument("state values must be finite");
    }
    k.state_values = std::move(state_values);
    for (std::size_t s = 0; s < n; ++s) {
        if (k.state_at(k.state_values[s]) != s) throw InvalidArgument("duplicate state value");
    }
    return k;
}

inline Kernel affine_gaussian_kernel(std::function<double(double)> mean, std::function<double(double)> stddev) {
    if (!mean || !stddev) throw InvalidArgument("kernel mean and standard deviation maps are required");
    return AffineGaussianKernel{std::move(mean), std::move(stddev)};
}

namespace detail {

// P(X < e) for X ~ N(m, s^2); s == 0 is a point mass at m.
inline double gaussian_below(double m, double s, double e) noexcept {
    if (s == 0.0) return m < e ? 1.0 : 0.0;
    return normal_cdf((e - m) / s);
}

// P(X >= e), evaluated without cancellation in the upper tail.
inline double gaussian_above(double m, double s, double e) noexcept {
    if (s == 0.0) return m >= e ? 1.0 : 0.0;
    return 0.5 * std::erfc((e - m) / (s * std::sqrt(2.0)));
}

// P(a <= X < b).
inline double gaussian_between(double m, double s, double a, double b) noexcept {
    double p = a > m ? gaussian_above(m, s, a) - gaussian_above(m, s, b)
                     : gaussian_below(m, s, b) - gaussian_below(m, s, a);
    return p > 0.0 ? p : 0.0;
}

}  // namespace detail

/// Exact Q(x, r).
inline double mass(const Kernel& kernel, double x, const Region& r) {
    return std::visit(
        [&](const auto& k) -> double {
            using K = std::decay_t<decltype(k)>;
            double total = 0.0;
            if constexpr (std::is_same_v<K, FiniteKernel>) {
                std::size_t from = k.state_at(x);
                if (from == k.size()) throw InvalidArgument("no finite state at x = " + std::to_string(x));
                for (std::size_t to = 0; to < k.size(); ++to) {
                    if (r.contains(k.state_values[to])) total += k.probability(from, to);
                }
            } else {
                double m = k.mean_at(x), s = k.stddev_at(x);
                for (const auto& iv : r.intervals()) {
                    total += iv.hi == kInf ? detail::gaussian_above(m, s, iv.lo)
                                           : detail::gaussian_between(m, s, iv.lo, iv.hi);
                }
            }
            return std::min(total, 1.0);
        },
        kernel);
}

/// Draws x' ~ Q(x, .).
template <class Rng>
double sample(const Kernel& kernel, double x, Rng& rng) {
    return std::visit(
        [&](const auto& k) -> double {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, FiniteKernel>) {
                std::size_t from = k.state_at(x);
                if (from == k.size()) throw InvalidArgument("no finite state at x = " + std::to_string(x));
                double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
                double acc = 0.0;
                std::size_t last = from;
                for (std::size_t to = 0; to < k.size(); ++to) {
                    double p = k.probability(from, to);
                    if (p == 0.0) continue;
                    acc += p;
                    last = to;
                    if (u < acc) return k.state_values[to];
                }
                return k.state_values[last];
            } else {
                double m = k.mean_at(x), s = k.stddev_at(x);
                if (s == 0.0) return m;
                return m + s * std::normal_distribution<double>(0.0, 1.0)(rng);
            }
        },
        kernel);
}

/// Cell-to-cell transition masses of a kernel evaluated at cell centers, plus
/// the mass each row sends below grid.lo and above grid.hi.
struct DiscretizedKernel {
    std::size_t cells() const noexcept { return grid.cells(); }
    double at(std::size_t i, std::size_t j) const noexcept { return matrix[i * cells() + j]; }
    const double* row(std::size_t i) const noexcept { return matrix.data() + i * cells(); }

    Grid grid;
    std::vector<double> matrix;  // row-major, cells x cells
    std::vector<double> lower_tail;
    std::vector<double> upper_tail;
};

inline DiscretizedKernel discretize(const Kernel& kernel, const Grid& grid) {
    const std::size_t n = grid.cells();
    DiscretizedKernel dk{grid, std::vector<double>(n * n, 0.0), std::vector<double>(n, 0.0),
                         std::vector<double>(n, 0.0)};

    if (const auto* fk = std::get_if<FiniteKernel>(&kernel)) {
        // Each finite state must own exactly one cell; that cell's center stands in for the state.
        std::vector<std::size_t> state_of_cell(n, fk->size());
        std::vector<std::size_t> cell_of_state(fk->size());
        for (std::size_t s = 0; s < fk->size(); ++s) {
            auto cell = grid.locate(fk->state_values[s]);
            if (!cell) throw InvalidArgument("finite state value " + std::to_string(fk->state_values[s]) +
                                             " lies outside the grid");
            if (state_of_cell[*cell] != fk->size())
                throw InvalidArgument("grid too coarse: two finite states share cell " + std::to_string(*cell));
            state_of_cell[*cell] = s;
            cell_of_state[s] = *cell;
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (state_of_cell[i] == fk->size())
                throw InvalidArgument("grid cell " + std::to_string(i) + " holds no finite state");
            for (std::size_t t = 0; t < fk->size(); ++t) {
                dk.matrix[i * n + cell_of_state[t]] = fk->probability(state_of_cell[i], t);
            }
        }
        return dk;
    }

    const auto& gk = std::get<AffineGaussianKernel>(kernel);
    for (std::size_t i = 0; i < n; ++i) {
        double c = grid.center(i);
        double m = gk.mean_at(c), s = gk.stddev_at(c);
        double* row = dk.matrix.data() + i * n;
        for (std::size_t j = 0; j < n; ++j) {
            row[j] = detail::gaussian_between(m, s, grid.edge(j), grid.edge(j + 1));
        }
        dk.lower_tail[i] = detail::gaussian_below(m, s, grid.lo());
        dk.upper_tail[i] = detail::gaussian_above(m, s, grid.hi());
    }
    return dk;
}

}  // namespace pctl
